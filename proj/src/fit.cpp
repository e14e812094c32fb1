#include "ncr/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ncr/leastsq.hpp"
#include "ncr/units.hpp"

namespace ncr {

namespace {

constexpr int parameters_per_peak = 5;
constexpr int trailing_parameters = 4; // fp_t1, fp_t2, fp_scale, floor

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

double median_of(std::vector<double> values) {
    const std::size_t n = values.size();
    std::sort(values.begin(), values.end());
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double percentile_of(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

// gamma_c from the exact wavelength-domain FWHM. Conjugate form of the
// quadratic-formula root: no cancellation, so the map stays smooth at the
// 1e-6 Jacobian steps the fitter probes with.
double gamma_from_fwhm(double fwhm_nm, double omega_c) {
    const double dl = fwhm_nm * 1e-9;
    const double a = 2.0 * std::numbers::pi * speed_of_light_m_per_s;
    return dl * omega_c * omega_c / (a + std::sqrt(a * a + dl * dl * omega_c * omega_c));
}

struct PeakGeometry {
    int index;        // sample index of the maximum
    int left_stop;    // first taller-terrain index (or edge) on the left
    int right_stop;
    double prominence;
    double base_level;
};

// Prominence of the local maximum at i: height above the higher of the
// two stretch minima, where each stretch runs to the nearest strictly
// taller sample or the spectrum edge.
PeakGeometry peak_geometry(const Spectrum& s, int i) {
    const auto& r = s.reflectance;
    const int n = static_cast<int>(r.size());
    double left_min = r[i];
    int left_stop = 0;
    for (int j = i - 1; j >= 0; --j) {
        if (r[j] > r[i]) {
            left_stop = j + 1;
            break;
        }
        left_min = std::min(left_min, r[j]);
    }
    double right_min = r[i];
    int right_stop = n - 1;
    for (int j = i + 1; j < n; ++j) {
        if (r[j] > r[i]) {
            right_stop = j - 1;
            break;
        }
        right_min = std::min(right_min, r[j]);
    }
    const double base = std::max(left_min, right_min);
    return {i, left_stop, right_stop, r[i] - base, base};
}

// Linear-interpolated wavelength where the flank first drops to `level`,
// scanning from the maximum toward `stop`. Falls back to the stretch end.
double flank_crossing(const Spectrum& s, int peak, int stop, double level) {
    const int step = stop < peak ? -1 : +1;
    for (int j = peak + step; step < 0 ? j >= stop : j <= stop; j += step) {
        if (s.reflectance[j] <= level) {
            const int inner = j - step; // still above level
            const double r0 = s.reflectance[inner], r1 = s.reflectance[j];
            const double l0 = s.wavelength_nm[inner], l1 = s.wavelength_nm[j];
            if (r1 == r0) return l1;
            return l0 + (l1 - l0) * (r0 - level) / (r0 - r1);
        }
    }
    return s.wavelength_nm[stop];
}

} // namespace

std::vector<PeakCandidate> detect_peaks(const Spectrum& spectrum, double min_prominence) {
    validate(spectrum);
    require(std::isfinite(min_prominence) && min_prominence >= 0.0,
            "detect_peaks: min_prominence must be >= 0");
    const auto& r = spectrum.reflectance;
    const int n = static_cast<int>(r.size());

    std::vector<PeakCandidate> out;
    for (int i = 1; i + 1 < n; ++i) {
        // ">=" on the right keeps exactly one candidate per flat top.
        if (!(r[i] > r[i - 1] && r[i] >= r[i + 1])) continue;
        const PeakGeometry g = peak_geometry(spectrum, i);
        if (g.prominence < min_prominence) continue;
        const double level = r[i] - 0.5 * g.prominence;
        const double left = flank_crossing(spectrum, i, g.left_stop, level);
        const double right = flank_crossing(spectrum, i, g.right_stop, level);
        out.push_back({spectrum.wavelength_nm[i], r[i], right - left});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const PeakCandidate& a, const PeakCandidate& b) {
                         return a.height > b.height;
                     });
    return out;
}

double robust_noise_sigma(const Spectrum& spectrum) {
    validate(spectrum);
    std::vector<double> diffs;
    diffs.reserve(spectrum.reflectance.size() - 1);
    for (std::size_t i = 1; i < spectrum.reflectance.size(); ++i)
        diffs.push_back(std::abs(spectrum.reflectance[i] - spectrum.reflectance[i - 1]));
    // Differencing doubles the variance of iid noise, hence the sqrt(2).
    return 1.4826 * median_of(std::move(diffs)) / std::sqrt(2.0);
}

std::vector<std::string> parameter_names(int peak_count) {
    require(peak_count >= 1, "parameter_names: need at least one peak");
    static const char* peak_fields[] = {"kappa", "lambda0_nm", "fwhm_nm", "fano_re", "fano_im"};
    std::vector<std::string> names;
    for (int p = 0; p < peak_count; ++p) {
        const std::string prefix =
            peak_count == 1 ? std::string() : "peak" + std::to_string(p + 1) + ".";
        for (const char* field : peak_fields) names.push_back(prefix + field);
    }
    names.insert(names.end(), {"fp_t1_nm", "fp_t2_nm", "fp_scale", "floor"});
    return names;
}

std::vector<double> pack_parameters(const CompositeModel& model) {
    require(!model.peaks.empty(), "pack: model needs at least one peak");
    require(model.fp_background.stack.layers.size() == 2,
            "pack: fp background must be a two-layer stack");
    std::vector<double> p;
    p.reserve(model.peaks.size() * parameters_per_peak + trailing_parameters);
    for (const FanoPeak& peak : model.peaks) {
        p.push_back(peak.base.kappa);
        p.push_back(peak.base.lambda_c_nm());
        p.push_back(peak.base.fwhm_nm());
        p.push_back(peak.background_re);
        p.push_back(peak.background_im);
    }
    p.push_back(model.fp_background.stack.layers[0].thickness_nm);
    p.push_back(model.fp_background.stack.layers[1].thickness_nm);
    p.push_back(model.fp_background.scale);
    p.push_back(model.floor);
    return p;
}

CompositeModel unpack_parameters(std::span<const double> params, const CompositeModel& shape) {
    const int k = static_cast<int>(shape.peaks.size());
    require(k >= 1, "unpack: shape needs at least one peak");
    require(shape.fp_background.stack.layers.size() == 2,
            "unpack: fp background must be a two-layer stack");
    require(static_cast<int>(params.size()) == k * parameters_per_peak + trailing_parameters,
            "unpack: parameter count mismatch");

    CompositeModel model = shape;
    for (int p = 0; p < k; ++p) {
        const double* v = params.data() + p * parameters_per_peak;
        require(std::isfinite(v[1]) && v[1] > 0.0, "unpack: lambda0 must be > 0");
        require(std::isfinite(v[2]) && v[2] > 0.0, "unpack: fwhm must be > 0");
        FanoPeak& peak = model.peaks[p];
        peak.base.kappa = v[0];
        peak.base.omega_c = omega_from_wavelength(v[1]);
        peak.base.gamma_c = gamma_from_fwhm(v[2], peak.base.omega_c);
        peak.background_re = v[3];
        peak.background_im = v[4];
    }
    const double* tail = params.data() + k * parameters_per_peak;
    model.fp_background.stack.layers[0].thickness_nm = tail[0];
    model.fp_background.stack.layers[1].thickness_nm = tail[1];
    model.fp_background.scale = tail[2];
    model.floor = tail[3];
    return model;
}

ParameterBounds default_bounds(const Spectrum& spectrum, const CompositeModel& init) {
    validate(spectrum);
    const double max_r = *std::max_element(spectrum.reflectance.begin(),
                                           spectrum.reflectance.end());
    const double lambda_lo = spectrum.wavelength_nm.front();
    const double lambda_hi = spectrum.wavelength_nm.back();
    const double span = lambda_hi - lambda_lo;
    double min_step = span;
    for (std::size_t i = 1; i < spectrum.wavelength_nm.size(); ++i)
        min_step = std::min(min_step, spectrum.wavelength_nm[i] - spectrum.wavelength_nm[i - 1]);

    // Amplitude-like bounds derive from the data so that fitting c*spectrum
    // rescales them by c; scale equivariance of the whole fit follows.
    const double amp_hi = 10.0 * max_r;
    ParameterBounds b;
    for (std::size_t p = 0; p < init.peaks.size(); ++p) {
        b.lower.insert(b.lower.end(), {0.0, lambda_lo, 0.25 * min_step, -10.0, -10.0});
        b.upper.insert(b.upper.end(), {amp_hi, lambda_hi, span, 10.0, 10.0});
    }
    b.lower.insert(b.lower.end(), {10.0, 10.0, 0.0, 0.0});
    b.upper.insert(b.upper.end(), {2000.0, 1e5, amp_hi, max_r});
    return b;
}

double q_from_linewidth(double lambda0_nm, double fwhm_nm) {
    require(std::isfinite(lambda0_nm) && lambda0_nm > 0.0, "q: lambda0 must be > 0");
    require(std::isfinite(fwhm_nm) && fwhm_nm > 0.0, "q: fwhm must be > 0");
    return lambda0_nm / fwhm_nm;
}

FitResult fit_composite(const Spectrum& spectrum, const CompositeModel& init,
                        const ParameterBounds& bounds, const FitOptions& options) {
    validate(spectrum);
    require(!init.peaks.empty(), "fit: init needs at least one peak");
    require(options.restarts >= 1, "fit: restarts must be >= 1");

    const std::vector<double> packed_init = pack_parameters(init);
    const int n_params = static_cast<int>(packed_init.size());
    require(static_cast<int>(bounds.lower.size()) == n_params &&
                static_cast<int>(bounds.upper.size()) == n_params,
            "fit: bounds do not match the packed parameter layout");

    const int n_data = static_cast<int>(spectrum.wavelength_nm.size());
    const ResidualFn residual_fn = [&](std::span<const double> p, std::span<double> out) {
        const CompositeModel model = unpack_parameters(p, init);
        for (int i = 0; i < n_data; ++i)
            out[i] = composite_eval(model, spectrum.wavelength_nm[i]) - spectrum.reflectance[i];
    };

    LeastSquaresOptions ls_options;
    ls_options.max_iterations = options.max_iterations;

    // Multi-start over linewidth jitter factors 2^k, symmetric around 1.
    LeastSquaresResult best;
    bool have_best = false;
    for (int s = 0; s < options.restarts; ++s) {
        const double factor = std::exp2(static_cast<double>(s) -
                                        0.5 * static_cast<double>(options.restarts - 1));
        std::vector<double> start = packed_init;
        for (std::size_t p = 0; p < init.peaks.size(); ++p)
            start[p * parameters_per_peak + 2] *= factor;
        LeastSquaresResult run = levenberg_marquardt(residual_fn, n_data, std::move(start),
                                                     bounds.lower, bounds.upper, ls_options);
        // A challenger has to beat the incumbent by a relative margin. Starts
        // that land in the same nearly flat basin produce near-tied costs, and
        // a margin-free comparison would let last-ulp input differences flip
        // the winner to a different point of the flat manifold.
        const double margin = 1e-6 * (have_best ? best.cost : 0.0);
        const bool better =
            !have_best ||
            (run.converged && !best.converged) ||
            (run.converged == best.converged &&
             (run.cost < best.cost - margin ||
              (run.cost <= best.cost + margin &&
               run.params_at_bounds < best.params_at_bounds)));
        if (better) {
            best = std::move(run);
            have_best = true;
        }
    }

    FitResult result;
    result.params = unpack_parameters(best.params, init);
    result.stderrs = best.stderrs;
    result.lambda0_nm = best.params[1];
    result.fwhm_nm = best.params[2];
    result.q_exp = q_from_linewidth(result.lambda0_nm, result.fwhm_nm);
    result.residual_rms = std::sqrt(best.cost / n_data);
    result.converged = best.converged;
    result.iterations = best.iterations;
    if (result.fwhm_nm < instrument_resolution_nm)
        result.flags.push_back("below_instrument_resolution");
    if (!best.singular_columns.empty()) {
        const std::vector<std::string> names =
            parameter_names(static_cast<int>(init.peaks.size()));
        for (int column : best.singular_columns)
            result.flags.push_back("singular_jacobian:" + names[column]);
    }
    return result;
}

double estimate_snr(const Spectrum& spectrum, const FitResult& fit,
                    double exclusion_halfwidths) {
    validate(spectrum);
    require(std::isfinite(exclusion_halfwidths) && exclusion_halfwidths > 0.0,
            "snr: exclusion must be > 0");
    require(!fit.params.peaks.empty(), "snr: fit has no peak");

    // Peak height above its own far-detuned background level
    // kappa*|b|^2: on resonance the amplitude is b - 1, so the height is
    // kappa*(1 - 2 b_re); the absolute value guards inverted (dip) fits.
    const FanoPeak& peak = fit.params.peaks.front();
    const double height = std::abs(peak.base.kappa * (1.0 - 2.0 * peak.background_re));

    std::vector<double> background_residuals;
    for (std::size_t i = 0; i < spectrum.wavelength_nm.size(); ++i) {
        const double lambda = spectrum.wavelength_nm[i];
        if (std::abs(lambda - fit.lambda0_nm) <= exclusion_halfwidths * fit.fwhm_nm) continue;
        background_residuals.push_back(spectrum.reflectance[i] -
                                       composite_eval(fit.params, lambda));
    }
    if (background_residuals.size() < 16)
        throw InsufficientBackgroundError(
            "snr: only " + std::to_string(background_residuals.size()) +
            " background samples outside the exclusion window (need 16)");

    const double center = median_of(background_residuals);
    for (double& r : background_residuals) r = std::abs(r - center);
    const double sigma = 1.4826 * median_of(std::move(background_residuals));
    if (sigma == 0.0) return std::numeric_limits<double>::infinity();
    return height / sigma;
}

std::vector<FitResult> analyze_spectrum(const Spectrum& raw_spectrum,
                                        const SlabGeometry& fp_geometry,
                                        const FitOptions& options) {
    validate(raw_spectrum);
    validate(fp_geometry);

    // The whole analysis runs on a max-normalized copy: every threshold,
    // init and bound then sees the same numbers regardless of the overall
    // intensity, so fitting c*y returns bit-identical shape parameters
    // (q, lambda0, fwhm, snr) up to the last-ulp wobble of one division,
    // and the amplitude-like outputs are scaled back by c afterwards.
    const double peak_value =
        *std::max_element(raw_spectrum.reflectance.begin(), raw_spectrum.reflectance.end());
    const double norm = peak_value > 0.0 ? peak_value : 1.0;
    Spectrum spectrum = raw_spectrum;
    for (double& r : spectrum.reflectance) r /= norm;

    const double sigma_n = robust_noise_sigma(spectrum);
    const auto [min_it, max_it] =
        std::minmax_element(spectrum.reflectance.begin(), spectrum.reflectance.end());
    const double prominence = options.min_prominence > 0.0
                                  ? options.min_prominence / norm
                                  : std::max(3.0 * sigma_n, 0.02 * (*max_it - *min_it));

    // Detection runs on a lightly smoothed copy. A centered 5-point moving
    // average leaves a resolved peak (>= 10 samples across) essentially
    // intact but pulls single-sample noise spikes down by sqrt(5), which is
    // what makes a 3 sigma threshold meaningful on grids with thousands of
    // samples (the largest of n raw noise excursions sits near 3.3 sigma).
    // Fitting still sees the raw data.
    const int n = static_cast<int>(spectrum.wavelength_nm.size());
    Spectrum smoothed = spectrum;
    for (int i = 0; i < n; ++i) {
        const int w = std::min({2, i, n - 1 - i});
        double sum = 0.0;
        for (int k = i - w; k <= i + w; ++k) sum += spectrum.reflectance[k];
        smoothed.reflectance[i] = sum / (2 * w + 1);
    }

    std::vector<PeakCandidate> candidates = detect_peaks(smoothed, prominence);
    if (candidates.size() > static_cast<std::size_t>(options.max_peaks))
        candidates.resize(options.max_peaks);
    if (candidates.empty())
        throw NoSignificantPeakError("no peak with prominence >= " + std::to_string(prominence));

    std::vector<FitResult> results;
    for (const PeakCandidate& candidate : candidates) {
        // Fit window: +-window_halfwidths rough widths, grown to at least
        // 32 samples so the spectrum invariant and the background
        // estimators have room.
        const double half = options.window_halfwidths * candidate.rough_width_nm;
        int lo = static_cast<int>(std::lower_bound(spectrum.wavelength_nm.begin(),
                                                   spectrum.wavelength_nm.end(),
                                                   candidate.lambda_nm - half) -
                                  spectrum.wavelength_nm.begin());
        int hi = static_cast<int>(std::upper_bound(spectrum.wavelength_nm.begin(),
                                                   spectrum.wavelength_nm.end(),
                                                   candidate.lambda_nm + half) -
                                  spectrum.wavelength_nm.begin()) -
                 1;
        while (hi - lo + 1 < 32 && (lo > 0 || hi < n - 1)) {
            if (lo > 0) --lo;
            if (hi < n - 1) ++hi;
        }
        if (hi - lo + 1 < 16) continue; // spectrum too short to window

        Spectrum window;
        window.wavelength_nm.assign(spectrum.wavelength_nm.begin() + lo,
                                    spectrum.wavelength_nm.begin() + hi + 1);
        window.reflectance.assign(spectrum.reflectance.begin() + lo,
                                  spectrum.reflectance.begin() + hi + 1);

        // Significance: the smoothed peak must clear the local (median)
        // floor by 3x the per-sample noise.
        std::vector<double> smoothed_window(smoothed.reflectance.begin() + lo,
                                            smoothed.reflectance.begin() + hi + 1);
        const double local_floor = percentile_of(smoothed_window, 0.5);
        if (candidate.height - local_floor < 3.0 * sigma_n) continue; // noise bump

        // Re-center on the raw samples: smoothing can shift the maximum by
        // a sample or two, and the init height should not be averaged down.
        int center = static_cast<int>(std::lower_bound(spectrum.wavelength_nm.begin(),
                                                       spectrum.wavelength_nm.end(),
                                                       candidate.lambda_nm) -
                                      spectrum.wavelength_nm.begin());
        center = std::clamp(center, lo, hi);
        int raw_center = center;
        for (int k = std::max(lo, center - 2); k <= std::min(hi, center + 2); ++k)
            if (spectrum.reflectance[k] > spectrum.reflectance[raw_center]) raw_center = k;

        const double floor_init = percentile_of(window.reflectance, 0.05);
        CompositeModel init;
        FanoPeak peak;
        peak.base.kappa = std::max(spectrum.reflectance[raw_center] - floor_init,
                                   std::numeric_limits<double>::min());
        peak.base.omega_c = omega_from_wavelength(spectrum.wavelength_nm[raw_center]);
        peak.base.gamma_c = gamma_from_fwhm(
            std::max(candidate.rough_width_nm, instrument_resolution_nm), peak.base.omega_c);
        init.peaks.push_back(peak);
        init.fp_background.stack.top_cladding_index = fp_geometry.n0;
        init.fp_background.stack.layers = {{complexd(fp_geometry.n1_eff), fp_geometry.t1_nm},
                                           {complexd(fp_geometry.n0), fp_geometry.t2_nm}};
        init.fp_background.stack.bottom_cladding_index = fp_geometry.n3;
        init.fp_background.scale =
            std::max(percentile_of(window.reflectance, 0.5) - floor_init, 0.0);
        init.floor = floor_init;

        FitResult fit = fit_composite(window, init, default_bounds(window, init), options);
        try {
            fit.snr = estimate_snr(window, fit, options.exclusion_halfwidths);
        } catch (const InsufficientBackgroundError&) {
            fit.snr = std::numeric_limits<double>::quiet_NaN();
            fit.flags.push_back("insufficient_background");
        }
        results.push_back(std::move(fit));
    }
    if (results.empty())
        throw NoSignificantPeakError("all detected peaks fall below 3x the robust noise level");

    // Undo the normalization on everything that carries intensity units.
    for (FitResult& fit : results) {
        for (FanoPeak& peak : fit.params.peaks) peak.base.kappa *= norm;
        fit.params.fp_background.scale *= norm;
        fit.params.floor *= norm;
        const std::size_t tail = fit.params.peaks.size() * parameters_per_peak;
        for (std::size_t p = 0; p < fit.params.peaks.size(); ++p)
            fit.stderrs[p * parameters_per_peak] *= norm;
        fit.stderrs[tail + 2] *= norm; // fp_scale
        fit.stderrs[tail + 3] *= norm; // floor
        fit.residual_rms *= norm;
    }
    return results;
}

} // namespace ncr
