#pragma once

#include <functional>
#include <span>
#include <vector>

// Damped (Levenberg-Marquardt style) least squares with box bounds.
//
// Contract pinned for reproducibility:
//   - forward-difference Jacobian, step max(1e-6 |p_i|, 1e-12); the step
//     flips to backward when it would leave the upper bound
//   - bounds enforced by projection of every trial point
//   - a step is accepted when it does not increase the cost; the accepted
//     cost sequence is therefore non-increasing
//   - converged when the relative cost decrease across an accepted step
//     falls below cost_tolerance, or the step underflows (every component
//     below 1e-14 of its bound span), or the damping saturates
//   - at most max_iterations iterations
namespace ncr {

struct LeastSquaresOptions {
    int max_iterations = 200;
    double cost_tolerance = 1e-10;
    double initial_damping = 1e-3;
    double jacobian_rel_step = 1e-6;
    double jacobian_abs_floor = 1e-12;
};

struct LeastSquaresResult {
    std::vector<double> params;
    std::vector<double> stderrs;       // sqrt of covariance diagonal; +inf
                                       // for unidentifiable parameters
    double cost = 0.0;                 // sum of squared residuals
    int iterations = 0;
    bool converged = false;
    std::vector<int> singular_columns; // Jacobian columns with ~zero norm
                                       // at the solution
    int params_at_bounds = 0;
};

// residual_fn fills its output span (size residual_count) from the
// parameter span. It must be a pure function of the parameters.
using ResidualFn = std::function<void(std::span<const double>, std::span<double>)>;

LeastSquaresResult levenberg_marquardt(const ResidualFn& residual_fn, int residual_count,
                                       std::vector<double> initial,
                                       std::span<const double> lower,
                                       std::span<const double> upper,
                                       const LeastSquaresOptions& options = {});

} // namespace ncr
