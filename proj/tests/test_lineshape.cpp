#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ncr/lineshape.hpp"
#include "ncr/units.hpp"

using ncr::AbsorptionDip;
using ncr::CompositeModel;
using ncr::complexd;
using ncr::FanoPeak;
using ncr::LorentzianPeak;

namespace {

std::vector<double> linear_grid(double lo, double hi, int n) {
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = lo + (hi - lo) * i / (n - 1);
    return grid;
}

CompositeModel floor_only(double floor) {
    CompositeModel model;
    model.floor = floor;
    return model;
}

} // namespace

TEST_CASE("lorentzian maximum and half maximum") {
    const LorentzianPeak peak = LorentzianPeak::from_wavelength(0.8, 1274.0, 4000.0);
    CHECK(ncr::lorentzian_reflectance(peak, peak.omega_c) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(ncr::lorentzian_reflectance(peak, peak.omega_c + peak.gamma_c) ==
          doctest::Approx(0.4).epsilon(1e-12));
    CHECK(ncr::lorentzian_reflectance(peak, peak.omega_c - peak.gamma_c) ==
          doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("q = lambda/fwhm identity holds to second order") {
    // The omega->lambda Jacobian correction enters at (1/Q)^2, so for
    // Q >= 1000 the wavelength FWHM matches lambda_c/Q to 0.01%.
    for (double q : {1000.0, 4000.0, 58000.0}) {
        const LorentzianPeak peak = LorentzianPeak::from_wavelength(0.5, 1274.0, q);
        CHECK(std::abs(peak.fwhm_nm() - 1274.0 / q) / (1274.0 / q) < 1e-4);
        CHECK(peak.q() == doctest::Approx(q).epsilon(1e-12));
    }
}

TEST_CASE("wavelength fwhm formula matches a bisection oracle") {
    const LorentzianPeak peak = LorentzianPeak::from_wavelength(0.6, 1390.0, 200.0);
    const double half = 0.3;
    // Bisect R(lambda) = kappa/2 on both flanks in the wavelength domain.
    const auto reflectance = [&](double lambda_nm) {
        return ncr::lorentzian_reflectance(peak, ncr::omega_from_wavelength(lambda_nm));
    };
    const auto crossing = [&](double inside, double outside) {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (inside + outside);
            (reflectance(mid) >= half ? inside : outside) = mid;
        }
        return 0.5 * (inside + outside);
    };
    const double center = peak.lambda_c_nm();
    const double left = crossing(center, center * 0.9);
    const double right = crossing(center, center * 1.1);
    CHECK(peak.fwhm_nm() == doctest::Approx(right - left).epsilon(1e-9));
}

TEST_CASE("degenerate fano offsets reproduce the lorentzian pointwise") {
    FanoPeak fano;
    fano.base = LorentzianPeak::from_wavelength(0.7, 1310.0, 5000.0);
    for (double widths : {-20.0, -2.0, 0.0, 0.5, 7.0}) {
        const double omega = fano.base.omega_c + widths * fano.base.gamma_c;
        CHECK(ncr::fano_reflectance(fano, omega) ==
              doctest::Approx(ncr::lorentzian_reflectance(fano.base, omega)).epsilon(1e-14));
    }
}

TEST_CASE("fano asymmetry comes from the imaginary offset") {
    // |L|^2 = Re L for L = Gamma/(Gamma - i delta), so a real offset b
    // collapses to kappa*(b^2 + (1 - 2b) Re L): still symmetric. Only the
    // imaginary part couples to the odd component Im L.
    FanoPeak fano;
    fano.base = LorentzianPeak::from_wavelength(0.7, 1310.0, 5000.0);
    fano.background_re = 0.2;
    const double delta = fano.base.gamma_c;
    const double above_re = ncr::fano_reflectance(fano, fano.base.omega_c + delta);
    const double below_re = ncr::fano_reflectance(fano, fano.base.omega_c - delta);
    CHECK(above_re == doctest::Approx(below_re).epsilon(1e-12));

    fano.background_re = 0.0;
    fano.background_im = 0.2;
    const double above_im = ncr::fano_reflectance(fano, fano.base.omega_c + delta);
    const double below_im = ncr::fano_reflectance(fano, fano.base.omega_c - delta);
    CHECK(std::abs(above_im - below_im) / std::max(above_im, below_im) > 0.01);
}

TEST_CASE("far-detuned fano tends to the background level") {
    FanoPeak fano;
    fano.base = LorentzianPeak::from_wavelength(0.7, 1310.0, 5000.0);
    fano.background_re = 0.25;
    fano.background_im = -0.15;
    const double background =
        fano.base.kappa * (0.25 * 0.25 + 0.15 * 0.15);
    const double far = ncr::fano_reflectance(fano, fano.base.omega_c + 1e6 * fano.base.gamma_c);
    CHECK(far == doctest::Approx(background).epsilon(1e-4));
}

TEST_CASE("fano converges to lorentzian as the offsets vanish") {
    FanoPeak fano;
    fano.base = LorentzianPeak::from_wavelength(0.7, 1310.0, 5000.0);
    const auto max_difference = [&](double offset) {
        FanoPeak shifted = fano;
        shifted.background_re = offset;
        shifted.background_im = -offset;
        double worst = 0.0;
        for (int i = -50; i <= 50; ++i) {
            const double omega = fano.base.omega_c + 0.4 * i * fano.base.gamma_c;
            worst = std::max(worst,
                             std::abs(ncr::fano_reflectance(shifted, omega) -
                                      ncr::lorentzian_reflectance(fano.base, omega)));
        }
        return worst;
    };
    const double coarse = max_difference(1e-3);
    const double fine = max_difference(1e-6);
    CHECK(fine < coarse / 100.0);
    CHECK(fine < 1e-5);
}

TEST_CASE("composite with only a floor is constant") {
    const CompositeModel model = floor_only(0.01);
    for (double lambda : {1280.0, 1400.0, 1620.0})
        CHECK(ncr::composite_eval(model, lambda) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("composite with one bare peak reduces to the lorentzian") {
    CompositeModel model;
    FanoPeak peak;
    peak.base = LorentzianPeak::from_wavelength(0.5, 1390.0, 58000.0);
    model.peaks.push_back(peak);
    for (double widths : {-4.0, 0.0, 1.5}) {
        const double omega = peak.base.omega_c + widths * peak.base.gamma_c;
        const double lambda = ncr::wavelength_from_omega(omega);
        // The omega -> lambda -> omega roundtrip costs an ulp that the
        // narrow line amplifies by ~Q, hence the 1e-10 comparison.
        CHECK(ncr::composite_eval(model, lambda) ==
              doctest::Approx(ncr::lorentzian_reflectance(peak.base, omega)).epsilon(1e-10));
    }
}

TEST_CASE("composite dominates each of its components and its floor") {
    CompositeModel model;
    FanoPeak peak;
    peak.base = LorentzianPeak::from_wavelength(0.5, 1390.0, 20000.0);
    model.peaks.push_back(peak);
    model.fp_background.stack.layers = {{complexd(2.62), 200.0}, {complexd(1.0), 1200.0}};
    model.fp_background.stack.bottom_cladding_index = 3.4;
    model.fp_background.scale = 0.05;
    model.floor = 0.003;
    for (double lambda : linear_grid(1385.0, 1395.0, 101)) {
        const double total = ncr::composite_eval(model, lambda);
        CHECK(total >= model.floor);
        CHECK(total >=
              ncr::fano_reflectance(model.peaks[0], ncr::omega_from_wavelength(lambda)));
    }
}

TEST_CASE("noiseless synthesis samples the composite exactly") {
    CompositeModel model;
    FanoPeak peak;
    peak.base = LorentzianPeak::from_wavelength(0.5, 1390.0, 58000.0);
    model.peaks.push_back(peak);
    model.floor = 0.002;
    const auto grid = linear_grid(1389.5, 1390.5, 64);
    const ncr::Spectrum s = ncr::synthesize_spectrum(model, grid, 0.0, {}, 7);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(s.reflectance[i] == ncr::composite_eval(model, grid[i]));
}

TEST_CASE("synthesis is bit-identical for a fixed seed") {
    CompositeModel model = floor_only(0.05);
    const auto grid = linear_grid(1380.0, 1400.0, 256);
    const ncr::Spectrum a = ncr::synthesize_spectrum(model, grid, 0.01, {}, 1234);
    const ncr::Spectrum b = ncr::synthesize_spectrum(model, grid, 0.01, {}, 1234);
    const ncr::Spectrum c = ncr::synthesize_spectrum(model, grid, 0.01, {}, 1235);
    CHECK(a.reflectance == b.reflectance);
    CHECK(a.reflectance != c.reflectance);
}

TEST_CASE("noise stream is the pinned box-muller over mt19937_64") {
    const CompositeModel model = floor_only(0.5);
    const auto grid = linear_grid(1380.0, 1381.5, 16);
    const ncr::Spectrum s = ncr::synthesize_spectrum(model, grid, 0.01, {}, 42);

    std::mt19937_64 engine(42);
    const auto uniform = [&] { return (static_cast<double>(engine() >> 11) + 0.5) * 0x1p-53; };
    for (int i = 0; i < 16; ++i) {
        const double u1 = uniform();
        const double u2 = uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * std::acos(-1.0) * u2);
        const double expected = std::max(0.5 + 0.01 * z, 0.0);
        CHECK(s.reflectance[i] == expected);
    }
}

TEST_CASE("noise statistics match the requested sigma") {
    const CompositeModel model = floor_only(10.0); // keep far from the clamp
    const auto grid = linear_grid(1000.0, 1100.0, 4096);
    const ncr::Spectrum s = ncr::synthesize_spectrum(model, grid, 0.25, {}, 99);
    double mean = 0.0;
    for (double r : s.reflectance) mean += r;
    mean /= s.reflectance.size();
    double var = 0.0;
    for (double r : s.reflectance) var += (r - mean) * (r - mean);
    var /= (s.reflectance.size() - 1);
    CHECK(std::abs(mean - 10.0) < 5.0 * 0.25 / std::sqrt(4096.0));
    CHECK(std::abs(std::sqrt(var) - 0.25) / 0.25 < 0.1);
}

TEST_CASE("absorption dip carves the expected minimum") {
    const CompositeModel model = floor_only(0.1);
    const auto grid = linear_grid(1392.0, 1394.0, 201); // includes 1393 exactly
    const AbsorptionDip dip{1393.0, 0.5, 0.05};
    const ncr::Spectrum s = ncr::synthesize_spectrum(model, grid, 0.0, {dip}, 1);
    const auto min_it = std::min_element(s.reflectance.begin(), s.reflectance.end());
    const std::size_t at = static_cast<std::size_t>(min_it - s.reflectance.begin());
    CHECK(s.wavelength_nm[at] == doctest::Approx(1393.0).epsilon(1e-12));
    CHECK(*min_it == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("huge noise clamps at zero and never goes negative") {
    const CompositeModel model = floor_only(0.001);
    const auto grid = linear_grid(1300.0, 1340.0, 512);
    const ncr::Spectrum s = ncr::synthesize_spectrum(model, grid, 1.0, {}, 5);
    CHECK(std::any_of(s.reflectance.begin(), s.reflectance.end(),
                      [](double r) { return r == 0.0; }));
    CHECK(std::all_of(s.reflectance.begin(), s.reflectance.end(),
                      [](double r) { return r >= 0.0; }));
}

TEST_CASE("synthesis validates dip parameters") {
    const CompositeModel model = floor_only(0.1);
    const auto grid = linear_grid(1380.0, 1400.0, 32);
    CHECK_THROWS_AS(ncr::synthesize_spectrum(model, grid, 0.0, {{1390.0, 1.5, 0.05}}, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(ncr::synthesize_spectrum(model, grid, 0.0, {{1390.0, 0.5, 0.0}}, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(ncr::synthesize_spectrum(model, grid, -0.1, {}, 1), std::invalid_argument);
}

TEST_CASE("model validation rejects broken parameters") {
    LorentzianPeak peak;
    peak.kappa = 0.5;
    peak.gamma_c = 1e10;
    peak.omega_c = 1e10; // implied q = 1/2: not a resonance
    CHECK_THROWS_AS(ncr::validate(peak), std::invalid_argument);
    CHECK_THROWS_AS(LorentzianPeak::from_wavelength(0.5, 1310.0, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(LorentzianPeak::from_wavelength(0.5, -1310.0, 4000.0),
                    std::invalid_argument);

    CompositeModel model = floor_only(-0.01);
    CHECK_THROWS_AS(ncr::validate(model), std::invalid_argument);
    model = floor_only(0.0);
    model.fp_background.scale = -1.0;
    CHECK_THROWS_AS(ncr::validate(model), std::invalid_argument);
}
