#include "ncr/lattice.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace ncr {

namespace {

// Measured reflectance-peak positions per lattice constant. The PL data
// misses the largest lattice constant, so the regression uses these.
struct Anchor {
    double a_nm;
    double lambda_nm;
};
constexpr std::array<Anchor, 5> lambda_anchors{{
    {350.0, 1274.0},
    {360.0, 1300.0},
    {370.0, 1324.0},
    {380.0, 1351.0},
    {390.0, 1374.0},
}};

struct Line {
    double slope;
    double intercept;
};

Line regression_line() {
    double mean_a = 0.0, mean_lambda = 0.0;
    for (const Anchor& p : lambda_anchors) {
        mean_a += p.a_nm;
        mean_lambda += p.lambda_nm;
    }
    mean_a /= lambda_anchors.size();
    mean_lambda /= lambda_anchors.size();
    double sxx = 0.0, sxy = 0.0;
    for (const Anchor& p : lambda_anchors) {
        sxx += (p.a_nm - mean_a) * (p.a_nm - mean_a);
        sxy += (p.a_nm - mean_a) * (p.lambda_nm - mean_lambda);
    }
    const double slope = sxy / sxx;
    return {slope, mean_lambda - slope * mean_a};
}

// FDTD quality-factor endpoints: Q at a = 350 nm down to Q at a = 490 nm.
struct QEndpoints {
    double q_at_350;
    double q_at_490;
};

QEndpoints q_endpoints(HoleShift shift) {
    switch (shift) {
    case HoleShift::none: return {5000.0, 3400.0};
    case HoleShift::s01a: return {15400.0, 9400.0};
    case HoleShift::s02a: return {78000.0, 43000.0};
    }
    throw std::invalid_argument("q_theo: unknown shift");
}

} // namespace

HoleShift hole_shift_from_string(const std::string& text) {
    if (text == "none" || text == "0") return HoleShift::none;
    if (text == "0.1a") return HoleShift::s01a;
    if (text == "0.2a") return HoleShift::s02a;
    throw std::invalid_argument("unknown hole shift \"" + text +
                                "\" (expected none, 0.1a or 0.2a)");
}

std::string to_string(HoleShift shift) {
    switch (shift) {
    case HoleShift::none: return "none";
    case HoleShift::s01a: return "0.1a";
    case HoleShift::s02a: return "0.2a";
    }
    throw std::invalid_argument("to_string: unknown shift");
}

double resonant_wavelength(double a_nm) {
    if (!(a_nm >= 340.0 && a_nm <= 500.0))
        throw std::out_of_range("resonant_wavelength: a must be in [340, 500] nm");
    static const Line line = regression_line();
    return line.slope * a_nm + line.intercept;
}

double q_theo(double a_nm, HoleShift shift) {
    if (!(a_nm >= 350.0 && a_nm <= 490.0))
        throw std::out_of_range("q_theo: a must be in [350, 490] nm");
    const QEndpoints q = q_endpoints(shift);
    const double t = (a_nm - 350.0) / (490.0 - 350.0);
    return q.q_at_350 + t * (q.q_at_490 - q.q_at_350);
}

double relative_thickness(double a_nm) {
    if (!(a_nm > 0.0) || !std::isfinite(a_nm))
        throw std::invalid_argument("relative_thickness: a must be > 0");
    return LatticeDesign::slab_thickness_nm / a_nm;
}

std::vector<SweepRow> build_sweep_dataset(HoleShift shift, const std::vector<double>& a_grid_nm,
                                          const SlabGeometry& geometry,
                                          const CouplingPolicy& policy) {
    validate(geometry);
    if (!(policy.split_x > 0.0 && policy.split_y > 0.0 && policy.q_loss > 0.0))
        throw std::invalid_argument("sweep dataset: coupling policy entries must be > 0");

    std::vector<SweepRow> rows;
    rows.reserve(a_grid_nm.size());
    for (double a : a_grid_nm) {
        SweepRow row;
        row.a_nm = a;
        row.lambda_res_nm = resonant_wavelength(a);
        row.t_star = relative_thickness(a);
        row.q_theo = q_theo(a, shift);
        CavityCoupling coupling;
        coupling.lambda0_nm = row.lambda_res_nm;
        coupling.q_cav_x = policy.split_x * row.q_theo;
        coupling.q_cav_y = policy.split_y * row.q_theo;
        coupling.q_loss = policy.q_loss;
        row.r_peak = peak_reflectivity(geometry, coupling, row.lambda_res_nm);
        rows.push_back(row);
    }
    return rows;
}

} // namespace ncr
