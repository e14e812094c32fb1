#include "ncr/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace ncr {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

void check_real_index(double n, const char* what) {
    if (!std::isfinite(n) || n <= 0.0)
        throw std::invalid_argument(std::string(what) + " must be finite and > 0");
}

} // namespace

TransferMatrix4 TransferMatrix4::identity() {
    TransferMatrix4 t;
    for (int i = 0; i < 4; ++i) t(i, i) = 1.0;
    return t;
}

TransferMatrix4 operator*(const TransferMatrix4& a, const TransferMatrix4& b) {
    TransferMatrix4 out;
    for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) {
            const complexd aik = a(i, k);
            if (aik == complexd(0.0, 0.0)) continue;
            for (int j = 0; j < 4; ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

FourPortField apply(const TransferMatrix4& m, const FourPortField& v) {
    const complexd in[4] = {v.s_x_plus, v.s_x_minus, v.s_y_plus, v.s_y_minus};
    complexd out[4] = {};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[i] += m(i, j) * in[j];
    return {out[0], out[1], out[2], out[3]};
}

void validate(const CavityCoupling& coupling) {
    require(std::isfinite(coupling.lambda0_nm) && coupling.lambda0_nm > 0.0,
            "coupling: lambda0 must be > 0");
    // +inf is allowed for the q factors: it decouples the channel exactly.
    require(coupling.q_cav_x > 0.0 && !std::isnan(coupling.q_cav_x),
            "coupling: q_cav_x must be > 0");
    require(coupling.q_cav_y > 0.0 && !std::isnan(coupling.q_cav_y),
            "coupling: q_cav_y must be > 0");
    require(coupling.q_loss > 0.0 && !std::isnan(coupling.q_loss),
            "coupling: q_loss must be > 0");
}

void validate(const SlabGeometry& geometry) {
    check_real_index(geometry.n0, "geometry: n0");
    check_real_index(geometry.n1_eff, "geometry: n1_eff");
    check_real_index(geometry.n3, "geometry: n3");
    require(std::isfinite(geometry.t1_nm) && geometry.t1_nm > 0.0, "geometry: t1 must be > 0");
    require(std::isfinite(geometry.t2_nm) && geometry.t2_nm > 0.0, "geometry: t2 must be > 0");
}

TransferMatrix4 propagation_matrix(complexd n, double d_nm, double wavelength_nm) {
    require(std::isfinite(d_nm) && d_nm >= 0.0, "propagation: d must be >= 0");
    require(std::isfinite(wavelength_nm) && wavelength_nm > 0.0, "propagation: wavelength must be > 0");
    if (n.real() <= 0.0 || n.imag() < 0.0)
        throw std::invalid_argument("propagation: index must have Re > 0, Im >= 0");
    const complexd phase = 2.0 * std::numbers::pi * n * d_nm / wavelength_nm; // beta*d
    const complexd down = std::exp(complexd(0.0, -1.0) * phase);
    const complexd up = std::exp(complexd(0.0, +1.0) * phase);
    TransferMatrix4 t;
    t(0, 0) = down;
    t(1, 1) = up;
    t(2, 2) = down;
    t(3, 3) = up;
    return t;
}

TransferMatrix4 interface_matrix(complexd n_j, complexd n_j1) {
    if (n_j.real() <= 0.0 || n_j1.real() <= 0.0)
        throw std::invalid_argument("interface: Re(n) must be > 0 on both sides");
    const complexd s = 1.0 / (2.0 * n_j1);
    const complexd p = s * (n_j1 + n_j);
    const complexd m = s * (n_j1 - n_j);
    TransferMatrix4 t;
    t(0, 0) = p;
    t(0, 1) = m;
    t(1, 0) = m;
    t(1, 1) = p;
    t(2, 2) = p;
    t(2, 3) = m;
    t(3, 2) = m;
    t(3, 3) = p;
    return t;
}

double coupling_constant(double q_cav, double omega0_rad_s) {
    require(q_cav > 0.0 && !std::isnan(q_cav), "coupling_constant: q_cav must be > 0");
    require(std::isfinite(omega0_rad_s) && omega0_rad_s > 0.0,
            "coupling_constant: omega0 must be > 0");
    if (std::isinf(q_cav)) return 0.0;
    return std::sqrt(omega0_rad_s / (2.0 * q_cav));
}

TransferMatrix4 cavity_matrix(const CavityCoupling& coupling, double omega_rad_s,
                              bool literal_prefactor) {
    validate(coupling);
    require(std::isfinite(omega_rad_s) && omega_rad_s > 0.0, "cavity_matrix: omega must be > 0");

    const double omega0 = coupling.omega0();
    const double kx = coupling_constant(coupling.q_cav_x, omega0);
    const double ky = coupling_constant(coupling.q_cav_y, omega0);
    // i(w - w0) + w0/(2 Q_loss): never zero for finite Q_loss.
    const complexd denom(omega0 / (2.0 * coupling.q_loss), omega_rad_s - omega0);

    // K: rank-one mixing term. Rows alternate sign because a downward and
    // an upward wave pick up the re-emitted cavity field with opposite
    // propagation direction; columns carry the mode overlap kx, ky of the
    // 45-degree cavity mode with each polarization's (down + up) sum.
    const double kxx = kx * kx;
    const double kyy = ky * ky;
    const double kxy = kx * ky;
    TransferMatrix4 t = TransferMatrix4::identity();
    const complexd pre = 1.0 / denom;
    TransferMatrix4 k;
    k(0, 0) = -kxx; k(0, 1) = -kxx; k(0, 2) = -kxy; k(0, 3) = -kxy;
    k(1, 0) = +kxx; k(1, 1) = +kxx; k(1, 2) = +kxy; k(1, 3) = +kxy;
    k(2, 0) = -kxy; k(2, 1) = -kxy; k(2, 2) = -kyy; k(2, 3) = -kyy;
    k(3, 0) = +kxy; k(3, 1) = +kxy; k(3, 2) = +kyy; k(3, 3) = +kyy;

    if (literal_prefactor) {
        // As printed: the prefactor multiplies the unit diagonal too.
        TransferMatrix4 out;
        for (int i = 0; i < 16; ++i) out.m[i] = (t.m[i] + k.m[i]) * pre;
        return out;
    }
    for (int i = 0; i < 16; ++i) t.m[i] += k.m[i] * pre;
    return t;
}

TransferMatrix4 system_matrix(const SlabGeometry& geometry, const CavityCoupling& coupling,
                              double wavelength_nm) {
    const SystemFactors f = system_factors(geometry, coupling, wavelength_nm);
    const double omega = omega_from_wavelength(wavelength_nm);
    return f.after * (cavity_matrix(coupling, omega) * f.before);
}

SystemFactors system_factors(const SlabGeometry& geometry, const CavityCoupling& coupling,
                             double wavelength_nm) {
    validate(geometry);
    validate(coupling);
    require(std::isfinite(wavelength_nm) && wavelength_nm > 0.0,
            "system_factors: wavelength must be > 0");
    const double omega = omega_from_wavelength(wavelength_nm);
    const double omega0 = coupling.omega0();
    const double kx = coupling_constant(coupling.q_cav_x, omega0);
    const double ky = coupling_constant(coupling.q_cav_y, omega0);
    const double half_slab = 0.5 * geometry.t1_nm;

    SystemFactors f;
    // Traversal order top to bottom; each factor left-multiplies the
    // accumulated product so the top interface acts first.
    f.before = propagation_matrix(geometry.n1_eff, half_slab, wavelength_nm) *
               interface_matrix(geometry.n0, geometry.n1_eff);
    TransferMatrix4 t = propagation_matrix(geometry.n1_eff, half_slab, wavelength_nm);
    t = interface_matrix(geometry.n1_eff, geometry.n0) * t;
    t = propagation_matrix(geometry.n0, geometry.t2_nm, wavelength_nm) * t;
    t = interface_matrix(geometry.n0, geometry.n3) * t;
    f.after = t;
    f.u = {-kx, +kx, -ky, +ky};
    f.v = {kx, kx, ky, ky};
    // omega0/(2 inf) = 0: a lossless cavity is a legal (regular) input here.
    f.denom = complexd(omega0 / (2.0 * coupling.q_loss), omega - omega0);
    return f;
}

ScatterSolution solve_scattering(const TransferMatrix4& t_s) {
    // Bottom = T_s * top with top = (1, r_xx, 0, r_yx) and no upward
    // amplitudes below: rows 2 and 4 give a 2x2 system for the two
    // reflected amplitudes.
    const complexd a = t_s(1, 1), b = t_s(1, 3);
    const complexd c = t_s(3, 1), d = t_s(3, 3);
    const complexd det = a * d - b * c;
    const double scale = std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d);
    const double det_mag = std::abs(det);
    if (!(det_mag > 0.0) || !std::isfinite(det_mag) || det_mag < 1e-14 * scale * scale) {
        const double cond = det_mag > 0.0 ? scale * scale / det_mag
                                          : std::numeric_limits<double>::infinity();
        throw SingularSystemError(
            "singular scattering system (condition estimate " + std::to_string(cond) + ")", cond);
    }
    const complexd r_xx = (-t_s(1, 0) * d + b * t_s(3, 0)) / det;
    const complexd r_yx = (-a * t_s(3, 0) + t_s(1, 0) * c) / det;
    const complexd t_xx = t_s(0, 0) + t_s(0, 1) * r_xx + t_s(0, 3) * r_yx;
    const complexd t_yx = t_s(2, 0) + t_s(2, 1) * r_xx + t_s(2, 3) * r_yx;
    return {r_xx, r_yx, t_xx, t_yx};
}

ScatterSolution solve_scattering(const SystemFactors& f) {
    // Unknowns x = (r_xx, r_yx, a). The bottom has no upward amplitudes,
    // so rows S_x- and S_y- of after*(before top + u a) vanish; the third
    // equation is the cavity definition denom * a = v . (before top).
    complexd ab0[4] = {}, ab1[4] = {}, ab3[4] = {}, au[4] = {};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            ab0[i] += f.after(i, j) * f.before(j, 0);
            ab1[i] += f.after(i, j) * f.before(j, 1);
            ab3[i] += f.after(i, j) * f.before(j, 3);
            au[i] += f.after(i, j) * f.u[j];
        }
    complexd vb0, vb1, vb3;
    for (int j = 0; j < 4; ++j) {
        vb0 += f.v[j] * f.before(j, 0);
        vb1 += f.v[j] * f.before(j, 1);
        vb3 += f.v[j] * f.before(j, 3);
    }

    complexd m[3][4] = {
        {ab1[1], ab3[1], au[1], -ab0[1]},
        {ab1[3], ab3[3], au[3], -ab0[3]},
        {-vb1, -vb3, f.denom, vb0},
    };

    // Scaled partial pivoting: the cavity row mixes O(kappa) couplings with
    // a denom that can be exactly zero (lossless cavity on resonance), so
    // pivots are judged relative to their own row scale.
    double rs[3];
    for (int r = 0; r < 3; ++r)
        rs[r] = std::max({std::abs(m[r][0]), std::abs(m[r][1]), std::abs(m[r][2])});
    if (rs[2] == 0.0) {
        // No cavity and no loss term at all: drop the border, a = 0.
        m[2][0] = 0.0;
        m[2][1] = 0.0;
        m[2][2] = 1.0;
        m[2][3] = 0.0;
        rs[2] = 1.0;
    }

    int perm[3] = {0, 1, 2};
    for (int k = 0; k < 3; ++k) {
        int best = -1;
        double best_ratio = 0.0;
        for (int r = k; r < 3; ++r) {
            if (rs[perm[r]] == 0.0) continue;
            const double ratio = std::abs(m[perm[r]][k]) / rs[perm[r]];
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best = r;
            }
        }
        if (best < 0 || best_ratio < 1e-14) {
            const double cond = best_ratio > 0.0 ? 1.0 / best_ratio
                                                 : std::numeric_limits<double>::infinity();
            throw SingularSystemError(
                "singular scattering system (condition estimate " + std::to_string(cond) + ")",
                cond);
        }
        std::swap(perm[k], perm[best]);
        const int pk = perm[k];
        for (int r = k + 1; r < 3; ++r) {
            const int pr = perm[r];
            const complexd factor = m[pr][k] / m[pk][k];
            if (factor == complexd(0.0, 0.0)) continue;
            for (int c = k + 1; c < 4; ++c) m[pr][c] -= factor * m[pk][c];
            m[pr][k] = 0.0;
        }
    }
    complexd x[3];
    for (int k = 2; k >= 0; --k) {
        complexd acc = m[perm[k]][3];
        for (int c = k + 1; c < 3; ++c) acc -= m[perm[k]][c] * x[c];
        x[k] = acc / m[perm[k]][k];
    }

    const complexd r_xx = x[0], r_yx = x[1], a = x[2];
    const complexd t_xx = ab0[0] + r_xx * ab1[0] + r_yx * ab3[0] + a * au[0];
    const complexd t_yx = ab0[2] + r_xx * ab1[2] + r_yx * ab3[2] + a * au[2];
    return {r_xx, r_yx, t_xx, t_yx};
}

double cross_pol_reflectance(const SlabGeometry& geometry, const CavityCoupling& coupling,
                             double wavelength_nm) {
    return std::norm(solve_scattering(system_factors(geometry, coupling, wavelength_nm)).r_yx);
}

Spectrum cross_pol_spectrum(const SlabGeometry& geometry, const CavityCoupling& coupling,
                            const std::vector<double>& wavelength_grid_nm) {
    Spectrum out;
    out.wavelength_nm = wavelength_grid_nm;
    out.reflectance.reserve(wavelength_grid_nm.size());
    for (double lambda : wavelength_grid_nm) {
        try {
            out.reflectance.push_back(cross_pol_reflectance(geometry, coupling, lambda));
        } catch (const SingularSystemError& err) {
            throw SingularSystemError(std::string(err.what()) + " at wavelength " +
                                          std::to_string(lambda) + " nm",
                                      err.condition_estimate());
        }
    }
    validate(out);
    return out;
}

double total_q_estimate(const CavityCoupling& coupling) {
    validate(coupling);
    const double inv_x = std::isinf(coupling.q_cav_x) ? 0.0 : 1.0 / coupling.q_cav_x;
    const double inv_y = std::isinf(coupling.q_cav_y) ? 0.0 : 1.0 / coupling.q_cav_y;
    const double inv_l = std::isinf(coupling.q_loss) ? 0.0 : 1.0 / coupling.q_loss;
    const double inv = inv_x + inv_y + inv_l;
    return inv > 0.0 ? 1.0 / inv : std::numeric_limits<double>::infinity();
}

namespace {

// Golden-section maximum refinement on [lo, hi] to 1e-10 relative in
// wavelength. Assumes a single maximum in the bracket.
double golden_max(const SlabGeometry& geometry, const CavityCoupling& coupling, double lo,
                  double hi, double* lambda_at_max = nullptr) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = cross_pol_reflectance(geometry, coupling, c);
    double fd = cross_pol_reflectance(geometry, coupling, d);
    const double tol = 1e-10 * std::max(std::abs(lo), std::abs(hi));
    while ((b - a) > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cross_pol_reflectance(geometry, coupling, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cross_pol_reflectance(geometry, coupling, d);
        }
    }
    const double lambda = 0.5 * (a + b);
    if (lambda_at_max) *lambda_at_max = lambda;
    return cross_pol_reflectance(geometry, coupling, lambda);
}

struct PeakSearch {
    double lambda_nm;
    double r_peak;
    double window_lo;
    double window_hi;
};

PeakSearch find_peak(const SlabGeometry& geometry, const CavityCoupling& coupling) {
    const double lambda0 = coupling.lambda0_nm;
    const double q_total = total_q_estimate(coupling);
    const double half_window = 20.0 * lambda0 / q_total;
    const double lo = lambda0 - half_window;
    const double hi = lambda0 + half_window;

    constexpr int coarse_points = 2001;
    double best_val = -1.0;
    int best_index = 0;
    const double step = (hi - lo) / (coarse_points - 1);
    for (int i = 0; i < coarse_points; ++i) {
        const double value = cross_pol_reflectance(geometry, coupling, lo + i * step);
        if (value > best_val) {
            best_val = value;
            best_index = i;
        }
    }
    const double bracket_lo = lo + std::max(best_index - 1, 0) * step;
    const double bracket_hi = lo + std::min(best_index + 1, coarse_points - 1) * step;
    double lambda_peak = 0.0;
    const double refined = golden_max(geometry, coupling, bracket_lo, bracket_hi, &lambda_peak);
    if (refined >= best_val) return {lambda_peak, refined, lo, hi};
    return {lo + best_index * step, best_val, lo, hi};
}

} // namespace

double peak_reflectivity(const SlabGeometry& geometry, const CavityCoupling& coupling_template,
                         double lambda_res_nm) {
    require(std::isfinite(lambda_res_nm) && lambda_res_nm > 0.0,
            "peak_reflectivity: lambda_res must be > 0");
    CavityCoupling coupling = coupling_template;
    coupling.lambda0_nm = lambda_res_nm;
    return find_peak(geometry, coupling).r_peak;
}

std::vector<SweepPoint> sweep_peak_reflectivity(const SlabGeometry& geometry,
                                                const CavityCoupling& coupling_template,
                                                const std::vector<double>& lambda_res_grid_nm) {
    std::vector<SweepPoint> curve;
    curve.reserve(lambda_res_grid_nm.size());
    for (double lambda_res : lambda_res_grid_nm)
        curve.push_back({lambda_res, peak_reflectivity(geometry, coupling_template, lambda_res)});
    return curve;
}

double model_total_q(const SlabGeometry& geometry, const CavityCoupling& coupling) {
    const PeakSearch peak = find_peak(geometry, coupling);

    // Background from the window edges; cross-polarized background is tiny
    // (the multilayer alone never mixes polarizations) but subtract it
    // anyway for a clean half level.
    const double background = 0.5 * (cross_pol_reflectance(geometry, coupling, peak.window_lo) +
                                     cross_pol_reflectance(geometry, coupling, peak.window_hi));
    if (peak.r_peak < 1e-20 || peak.r_peak < 10.0 * background)
        throw PeakNotFoundError("no resonant peak above background (peak " +
                                std::to_string(peak.r_peak) + ", background " +
                                std::to_string(background) + ")");
    const double half_level = background + 0.5 * (peak.r_peak - background);

    // Bisect the half-level crossings on both flanks.
    const auto crossing = [&](double inner, double outer) {
        double lo = inner, hi = outer;
        while (std::abs(hi - lo) > 1e-12 * peak.lambda_nm) {
            const double mid = 0.5 * (lo + hi);
            if (cross_pol_reflectance(geometry, coupling, mid) >= half_level)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double left = crossing(peak.lambda_nm, peak.window_lo);
    const double right = crossing(peak.lambda_nm, peak.window_hi);
    const double fwhm = std::abs(right - left);
    if (!(fwhm > 0.0))
        throw PeakNotFoundError("vanishing linewidth in half-maximum search");
    return peak.lambda_nm / fwhm;
}

} // namespace ncr
