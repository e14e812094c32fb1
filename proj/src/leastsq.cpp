#include "ncr/leastsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ncr {

namespace {

constexpr double max_damping = 1e14;
constexpr double min_damping = 1e-15;
constexpr double singular_column_rel = 1e-10; // vs the largest column norm
constexpr double step_underflow_rel = 1e-14;  // vs the bound span

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Solves a * x = b in place by Gaussian elimination with partial pivoting.
// Returns false when a pivot vanishes.
bool solve_dense(std::vector<double> a, std::vector<double> b, int n, std::vector<double>& x) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col])) pivot = row;
        if (a[pivot * n + col] == 0.0 || !std::isfinite(a[pivot * n + col])) return false;
        if (pivot != col) {
            for (int j = col; j < n; ++j) std::swap(a[pivot * n + j], a[col * n + j]);
            std::swap(b[pivot], b[col]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (int row = col + 1; row < n; ++row) {
            const double f = a[row * n + col] * inv;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a[row * n + j] -= f * a[col * n + j];
            b[row] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (int row = n - 1; row >= 0; --row) {
        double s = b[row];
        for (int j = row + 1; j < n; ++j) s -= a[row * n + j] * x[j];
        x[row] = s / a[row * n + row];
    }
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

// Inverts a symmetric positive (semi)definite matrix by Gauss-Jordan.
// Returns false when singular.
bool invert_dense(std::vector<double> a, int n, std::vector<double>& inv) {
    inv.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col])) pivot = row;
        const double p = a[pivot * n + col];
        if (p == 0.0 || !std::isfinite(p)) return false;
        if (pivot != col)
            for (int j = 0; j < n; ++j) {
                std::swap(a[pivot * n + j], a[col * n + j]);
                std::swap(inv[pivot * n + j], inv[col * n + j]);
            }
        const double f = 1.0 / a[col * n + col];
        for (int j = 0; j < n; ++j) {
            a[col * n + j] *= f;
            inv[col * n + j] *= f;
        }
        for (int row = 0; row < n; ++row) {
            if (row == col) continue;
            const double g = a[row * n + col];
            if (g == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a[row * n + j] -= g * a[col * n + j];
                inv[row * n + j] -= g * inv[col * n + j];
            }
        }
    }
    return true;
}

struct Workspace {
    std::vector<double> jacobian;   // residual_count x n, row major
    std::vector<double> jtj;        // n x n
    std::vector<double> jtr;        // n
    std::vector<double> column_norm;
    std::vector<int> active;        // parameter indices with usable columns
};

void fill_jacobian(const ResidualFn& fn, int residual_count, const std::vector<double>& params,
                   std::span<const double> upper, const std::vector<double>& residual,
                   const LeastSquaresOptions& options, Workspace& w) {
    const int n = static_cast<int>(params.size());
    w.jacobian.assign(static_cast<std::size_t>(residual_count) * n, 0.0);
    std::vector<double> probe = params;
    std::vector<double> shifted(residual_count);
    for (int j = 0; j < n; ++j) {
        const double h = std::max(options.jacobian_rel_step * std::abs(params[j]),
                                  options.jacobian_abs_floor);
        // Backward difference when a forward probe would cross the upper
        // bound; the probe must stay inside the feasible box.
        const bool forward = params[j] + h <= upper[j];
        probe[j] = forward ? params[j] + h : params[j] - h;
        fn(probe, shifted);
        probe[j] = params[j];
        const double sign = forward ? 1.0 : -1.0;
        for (int i = 0; i < residual_count; ++i)
            w.jacobian[static_cast<std::size_t>(i) * n + j] =
                sign * (shifted[i] - residual[i]) / h;
    }

    w.jtj.assign(static_cast<std::size_t>(n) * n, 0.0);
    w.jtr.assign(n, 0.0);
    for (int i = 0; i < residual_count; ++i) {
        const double* row = &w.jacobian[static_cast<std::size_t>(i) * n];
        for (int j = 0; j < n; ++j) {
            if (row[j] == 0.0) continue;
            w.jtr[j] += row[j] * residual[i];
            for (int k = j; k < n; ++k) w.jtj[j * n + k] += row[j] * row[k];
        }
    }
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < j; ++k) w.jtj[j * n + k] = w.jtj[k * n + j];

    w.column_norm.assign(n, 0.0);
    double max_norm = 0.0;
    for (int j = 0; j < n; ++j) {
        w.column_norm[j] = std::sqrt(w.jtj[j * n + j]);
        max_norm = std::max(max_norm, w.column_norm[j]);
    }
    w.active.clear();
    for (int j = 0; j < n; ++j)
        if (w.column_norm[j] > singular_column_rel * max_norm && w.column_norm[j] > 0.0)
            w.active.push_back(j);
}

} // namespace

LeastSquaresResult levenberg_marquardt(const ResidualFn& residual_fn, int residual_count,
                                       std::vector<double> initial,
                                       std::span<const double> lower,
                                       std::span<const double> upper,
                                       const LeastSquaresOptions& options) {
    const int n = static_cast<int>(initial.size());
    if (n == 0) throw std::invalid_argument("least squares: no parameters");
    if (residual_count < 1) throw std::invalid_argument("least squares: no residuals");
    if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n)
        throw std::invalid_argument("least squares: bounds size mismatch");
    for (int j = 0; j < n; ++j) {
        if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j])
            throw std::invalid_argument("least squares: invalid bound interval");
        if (!std::isfinite(initial[j]))
            throw std::invalid_argument("least squares: non-finite initial parameter");
        initial[j] = std::clamp(initial[j], lower[j], upper[j]);
    }

    std::vector<double> span_ref(n);
    for (int j = 0; j < n; ++j) {
        const double span = upper[j] - lower[j];
        span_ref[j] = std::isfinite(span) ? span : std::max(1.0, std::abs(initial[j]));
    }

    LeastSquaresResult result;
    result.params = std::move(initial);
    std::vector<double> residual(residual_count), trial_residual(residual_count);
    residual_fn(result.params, residual);
    result.cost = dot(residual, residual);
    if (!std::isfinite(result.cost))
        throw std::invalid_argument("least squares: initial parameters evaluate non-finitely");

    Workspace w;
    double damping = options.initial_damping;
    std::vector<double> delta, trial(n);
    bool done = false;

    for (int iter = 0; iter < options.max_iterations && !done; ++iter) {
        result.iterations = iter + 1;
        fill_jacobian(residual_fn, residual_count, result.params, upper, residual, options, w);
        const int na = static_cast<int>(w.active.size());
        if (na == 0) { // zero gradient everywhere: nothing to move
            result.converged = true;
            break;
        }

        // Masked normal equations with Marquardt diagonal scaling. The
        // diag(JtJ) damping makes the step exactly equivariant under
        // per-parameter rescaling, which the amplitude-scaling contract
        // relies on.
        std::vector<double> a_base(static_cast<std::size_t>(na) * na), b(na);
        for (int p = 0; p < na; ++p) {
            b[p] = -w.jtr[w.active[p]];
            for (int q = 0; q < na; ++q)
                a_base[p * na + q] = w.jtj[w.active[p] * n + w.active[q]];
        }

        while (true) {
            std::vector<double> a = a_base;
            for (int p = 0; p < na; ++p) a[p * na + p] += damping * a_base[p * na + p];
            std::vector<double> delta_active;
            const bool solved = solve_dense(std::move(a), b, na, delta_active);
            bool accepted = false;
            if (solved) {
                delta.assign(n, 0.0);
                for (int p = 0; p < na; ++p) delta[w.active[p]] = delta_active[p];
                for (int j = 0; j < n; ++j)
                    trial[j] = std::clamp(result.params[j] + delta[j], lower[j], upper[j]);

                bool underflow = true;
                for (int j = 0; j < n; ++j)
                    if (std::abs(trial[j] - result.params[j]) > step_underflow_rel * span_ref[j]) {
                        underflow = false;
                        break;
                    }
                if (underflow) {
                    result.converged = true;
                    done = true;
                    break;
                }

                residual_fn(trial, trial_residual);
                const double trial_cost = dot(trial_residual, trial_residual);
                if (std::isfinite(trial_cost) && trial_cost <= result.cost) {
                    const double decrease =
                        (result.cost - trial_cost) /
                        std::max(result.cost, std::numeric_limits<double>::min());
                    result.params = trial;
                    residual.swap(trial_residual);
                    result.cost = trial_cost;
                    damping = std::max(damping * 0.1, min_damping);
                    accepted = true;
                    if (decrease < options.cost_tolerance) {
                        result.converged = true;
                        done = true;
                    }
                }
            }
            if (accepted || done) break;
            damping *= 10.0;
            if (damping > max_damping) { // no descent direction left
                result.converged = true;
                done = true;
                break;
            }
        }
    }

    // Diagnostics at the solution: column health and covariance-based
    // standard errors.
    fill_jacobian(residual_fn, residual_count, result.params, upper, residual, options, w);
    result.singular_columns.clear();
    std::vector<bool> is_active(n, false);
    for (int j : w.active) is_active[j] = true;
    for (int j = 0; j < n; ++j)
        if (!is_active[j]) result.singular_columns.push_back(j);

    result.stderrs.assign(n, std::numeric_limits<double>::infinity());
    const int na = static_cast<int>(w.active.size());
    const int dof = residual_count - na;
    if (na > 0 && dof > 0) {
        std::vector<double> a(static_cast<std::size_t>(na) * na), inv;
        for (int p = 0; p < na; ++p)
            for (int q = 0; q < na; ++q) a[p * na + q] = w.jtj[w.active[p] * n + w.active[q]];
        if (invert_dense(std::move(a), na, inv)) {
            const double variance_scale = result.cost / dof;
            for (int p = 0; p < na; ++p) {
                const double v = inv[p * na + p] * variance_scale;
                if (std::isfinite(v) && v >= 0.0) result.stderrs[w.active[p]] = std::sqrt(v);
            }
        }
    }

    result.params_at_bounds = 0;
    for (int j = 0; j < n; ++j)
        if (result.params[j] == lower[j] || result.params[j] == upper[j])
            ++result.params_at_bounds;
    return result;
}

} // namespace ncr
