#include "doctest.h"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ncr/cavity.hpp"
#include "ncr/lattice.hpp"

using ncr::HoleShift;

namespace {

// The five measured (lattice constant, resonance) pairs the regression is
// built from, restated here as an independent oracle.
constexpr std::array<std::array<double, 2>, 5> kAnchors = {{{350.0, 1274.0},
                                                            {360.0, 1300.0},
                                                            {370.0, 1324.0},
                                                            {380.0, 1351.0},
                                                            {390.0, 1374.0}}};

struct Line {
    double slope;
    double intercept;
};

Line oracle_regression() {
    double mean_a = 0.0, mean_l = 0.0;
    for (const auto& p : kAnchors) {
        mean_a += p[0];
        mean_l += p[1];
    }
    mean_a /= kAnchors.size();
    mean_l /= kAnchors.size();
    double num = 0.0, den = 0.0;
    for (const auto& p : kAnchors) {
        num += (p[0] - mean_a) * (p[1] - mean_l);
        den += (p[0] - mean_a) * (p[0] - mean_a);
    }
    const double slope = num / den;
    return {slope, mean_l - slope * mean_a};
}

} // namespace

TEST_CASE("resonance regression reproduces the least-squares line") {
    const Line line = oracle_regression();
    CHECK(line.slope == doctest::Approx(2.51).epsilon(1e-12));
    CHECK(line.intercept == doctest::Approx(395.9).epsilon(1e-12));
    for (double a : {340.0, 350.0, 370.0, 412.3, 500.0})
        CHECK(ncr::resonant_wavelength(a) ==
              doctest::Approx(line.slope * a + line.intercept).epsilon(1e-12));
}

TEST_CASE("regression stays within 2 nm of every anchor") {
    for (const auto& p : kAnchors)
        CHECK(std::abs(ncr::resonant_wavelength(p[0]) - p[1]) < 2.0);
    // Spot values: the 350 and 390 predictions land within 1 nm.
    CHECK(std::abs(ncr::resonant_wavelength(350.0) - 1274.0) < 1.0);
    CHECK(ncr::resonant_wavelength(390.0) == doctest::Approx(1374.8).epsilon(1e-12));
}

TEST_CASE("wavelength map rejects lattice constants outside its range") {
    CHECK_NOTHROW(ncr::resonant_wavelength(340.0));
    CHECK_NOTHROW(ncr::resonant_wavelength(500.0));
    CHECK_THROWS_AS(ncr::resonant_wavelength(339.9), std::out_of_range);
    CHECK_THROWS_AS(ncr::resonant_wavelength(500.1), std::out_of_range);
}

TEST_CASE("theoretical q is exact at the published endpoints") {
    CHECK(ncr::q_theo(350.0, HoleShift::none) == 5000.0);
    CHECK(ncr::q_theo(490.0, HoleShift::none) == 3400.0);
    CHECK(ncr::q_theo(350.0, HoleShift::s01a) == 15400.0);
    CHECK(ncr::q_theo(490.0, HoleShift::s01a) == 9400.0);
    CHECK(ncr::q_theo(350.0, HoleShift::s02a) == 78000.0);
    CHECK(ncr::q_theo(490.0, HoleShift::s02a) == 43000.0);
}

TEST_CASE("interpolated q at a=390 with 0.2a shift") {
    // Linear interpolation gives exactly 68000; the FDTD value is 64000,
    // so the interpolation error here is 6.25%.
    const double q = ncr::q_theo(390.0, HoleShift::s02a);
    CHECK(q == doctest::Approx(68000.0).epsilon(1e-12));
    CHECK(std::abs(q - 64000.0) / 64000.0 < 0.10);
}

TEST_CASE("q interpolation is monotone in both arguments") {
    for (HoleShift shift : {HoleShift::none, HoleShift::s01a, HoleShift::s02a}) {
        double previous = ncr::q_theo(350.0, shift);
        for (double a = 360.0; a <= 490.0; a += 10.0) {
            const double q = ncr::q_theo(a, shift);
            CHECK(q < previous);
            previous = q;
        }
    }
    for (double a : {350.0, 420.0, 490.0}) {
        CHECK(ncr::q_theo(a, HoleShift::none) < ncr::q_theo(a, HoleShift::s01a));
        CHECK(ncr::q_theo(a, HoleShift::s01a) < ncr::q_theo(a, HoleShift::s02a));
    }
}

TEST_CASE("q map rejects lattice constants outside its range") {
    CHECK_THROWS_AS(ncr::q_theo(349.9, HoleShift::none), std::out_of_range);
    CHECK_THROWS_AS(ncr::q_theo(490.1, HoleShift::s02a), std::out_of_range);
}

TEST_CASE("relative thickness is 200/a") {
    CHECK(ncr::relative_thickness(350.0) == doctest::Approx(0.5714285714285714).epsilon(1e-15));
    CHECK(ncr::relative_thickness(400.0) == 0.5);
    CHECK(ncr::relative_thickness(490.0) == doctest::Approx(0.40816326530612246).epsilon(1e-15));
    for (double a : {350.0, 375.0, 467.0})
        CHECK(a * ncr::relative_thickness(a) == doctest::Approx(200.0).epsilon(1e-15));
}

TEST_CASE("hole shift parsing and formatting") {
    CHECK(ncr::hole_shift_from_string("none") == HoleShift::none);
    CHECK(ncr::hole_shift_from_string("0") == HoleShift::none);
    CHECK(ncr::hole_shift_from_string("0.1a") == HoleShift::s01a);
    CHECK(ncr::hole_shift_from_string("0.2a") == HoleShift::s02a);
    CHECK_THROWS_AS(ncr::hole_shift_from_string("0.3a"), std::invalid_argument);
    CHECK_THROWS_AS(ncr::hole_shift_from_string(""), std::invalid_argument);
    CHECK(ncr::to_string(HoleShift::none) == "none");
    CHECK(ncr::to_string(HoleShift::s01a) == "0.1a");
    CHECK(ncr::to_string(HoleShift::s02a) == "0.2a");
    for (HoleShift shift : {HoleShift::none, HoleShift::s01a, HoleShift::s02a})
        CHECK(ncr::hole_shift_from_string(ncr::to_string(shift)) == shift);
}

TEST_CASE("design accessors") {
    ncr::LatticeDesign design;
    design.a_nm = 350.0;
    CHECK(design.hole_radius_nm() == doctest::Approx(105.0).epsilon(1e-15));
    CHECK(ncr::LatticeDesign::slab_thickness_nm == 200.0);
}

TEST_CASE("sweep dataset columns are consistent and ordered") {
    std::vector<double> grid;
    for (double a = 350.0; a <= 490.0; a += 10.0) grid.push_back(a);
    const auto rows = ncr::build_sweep_dataset(HoleShift::s02a, grid, ncr::SlabGeometry{});
    REQUIRE(rows.size() == 15);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].a_nm == grid[i]);
        CHECK(rows[i].t_star == doctest::Approx(200.0 / grid[i]).epsilon(1e-15));
        CHECK(rows[i].lambda_res_nm ==
              doctest::Approx(ncr::resonant_wavelength(grid[i])).epsilon(1e-15));
        CHECK(rows[i].q_theo ==
              doctest::Approx(ncr::q_theo(grid[i], HoleShift::s02a)).epsilon(1e-15));
        CHECK(rows[i].r_peak > 0.0);
        // The balanced split caps the uniform-medium peak at 1/4, but the
        // multilayer feedback can push it well above that; it stays below
        // unity across this band.
        CHECK(rows[i].r_peak < 1.0);
        if (i > 0) {
            CHECK(rows[i].lambda_res_nm > rows[i - 1].lambda_res_nm);
            CHECK(rows[i].q_theo < rows[i - 1].q_theo);
        }
    }
}

TEST_CASE("sweep peak reflectivity dips inside the detuned-stack band") {
    std::vector<double> grid;
    for (double a = 350.0; a <= 490.0; a += 10.0) grid.push_back(a);
    const auto rows = ncr::build_sweep_dataset(HoleShift::s02a, grid, ncr::SlabGeometry{});
    std::size_t lowest = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].r_peak < rows[lowest].r_peak) lowest = i;
    CHECK(rows[lowest].lambda_res_nm > 1340.0);
    CHECK(rows[lowest].lambda_res_nm < 1480.0);
    // The dip must be a real contrast feature, not numerical flatness.
    double highest = 0.0;
    for (const auto& row : rows) highest = std::max(highest, row.r_peak);
    CHECK(rows[lowest].r_peak < 0.7 * highest);
}

TEST_CASE("sweep rows reproduce the direct cavity computation") {
    const ncr::SlabGeometry geometry;
    const auto rows = ncr::build_sweep_dataset(HoleShift::s02a, {390.0}, geometry);
    REQUIRE(rows.size() == 1);
    ncr::CavityCoupling coupling;
    coupling.q_cav_x = 2.0 * rows[0].q_theo;
    coupling.q_cav_y = 2.0 * rows[0].q_theo;
    coupling.q_loss = 1e8;
    CHECK(rows[0].r_peak ==
          doctest::Approx(ncr::peak_reflectivity(geometry, coupling, rows[0].lambda_res_nm))
              .epsilon(1e-12));
}

TEST_CASE("sweep validation propagates and rejects bad policies") {
    CHECK(ncr::build_sweep_dataset(HoleShift::none, {}, ncr::SlabGeometry{}).empty());
    CHECK_THROWS_AS(ncr::build_sweep_dataset(HoleShift::none, {300.0}, ncr::SlabGeometry{}),
                    std::out_of_range);
    ncr::CouplingPolicy bad;
    bad.split_x = 0.0;
    CHECK_THROWS_AS(
        ncr::build_sweep_dataset(HoleShift::none, {390.0}, ncr::SlabGeometry{}, bad),
        std::invalid_argument);
    bad = ncr::CouplingPolicy{};
    bad.q_loss = -1.0;
    CHECK_THROWS_AS(
        ncr::build_sweep_dataset(HoleShift::none, {390.0}, ncr::SlabGeometry{}, bad),
        std::invalid_argument);
}
