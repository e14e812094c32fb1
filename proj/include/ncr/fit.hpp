#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncr/cavity.hpp"
#include "ncr/lineshape.hpp"
#include "ncr/spectrum.hpp"

// Extraction pipeline: peak detection, composite-model least-squares
// fitting, and the derived scalars Q_exp = lambda0/FWHM and SNR.
namespace ncr {

struct PeakCandidate {
    double lambda_nm = 0.0;
    double height = 0.0;        // reflectance at the maximum
    double rough_width_nm = 0.0; // half-prominence crossing distance
};

// Local maxima with prominence >= min_prominence, highest first. The
// prominence of a maximum is its height above the higher of the two
// valley minima separating it from taller terrain (or the spectrum edge).
std::vector<PeakCandidate> detect_peaks(const Spectrum& spectrum, double min_prominence);

// 1.4826 * median(|first difference|) / sqrt(2): robust per-sample noise,
// insensitive to smooth backgrounds and isolated peaks.
double robust_noise_sigma(const Spectrum& spectrum);

struct FitOptions {
    int max_iterations = 200;
    int restarts = 3;                  // linewidth jitter factors around the
                                       // init: {0.5, 1, 2} for 3, {1} for 1,
                                       // symmetric powers of two for 5
    double window_halfwidths = 25.0;   // fit window, in rough widths
    double exclusion_halfwidths = 5.0; // SNR background exclusion, in FWHM
    double min_prominence = 0.0;       // 0 = auto (3x robust noise, with a
                                       // 2% dynamic-range floor)
    int max_peaks = 3;
};

// Packed parameter vector layout per peak: kappa, lambda0_nm, fwhm_nm,
// fano_re, fano_im; then fp_t1_nm, fp_t2_nm, fp_scale, floor. The FP stack
// indices are frozen; only the two thicknesses and the scale move.
std::vector<std::string> parameter_names(int peak_count);
std::vector<double> pack_parameters(const CompositeModel& model);
CompositeModel unpack_parameters(std::span<const double> params, const CompositeModel& shape);

struct ParameterBounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

// Data-derived defaults: amplitude-like parameters scale with the data so
// fitting c*spectrum yields exactly c-scaled amplitudes.
ParameterBounds default_bounds(const Spectrum& spectrum, const CompositeModel& init);

struct FitResult {
    CompositeModel params;
    std::vector<double> stderrs; // aligned with pack_parameters order
    double q_exp = 0.0;
    double lambda0_nm = 0.0;
    double fwhm_nm = 0.0;
    double snr = 0.0;
    double residual_rms = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<std::string> flags; // "below_instrument_resolution",
                                    // "singular_jacobian:<param>", ...
};

class NoSignificantPeakError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientBackgroundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Least-squares fit of the composite model to the whole given spectrum.
// Multi-start over the linewidth jitter set; best converged cost wins,
// ties broken by fewer parameters at bounds. q_exp/lambda0/fwhm describe
// peaks[0].
FitResult fit_composite(const Spectrum& spectrum, const CompositeModel& init,
                        const ParameterBounds& bounds, const FitOptions& options = {});

// (peak height above its local background) / (1.4826 * MAD of the fit
// residuals outside +-exclusion_halfwidths*FWHM around lambda0). Noiseless
// data reports +inf. Requires >= 16 background samples.
double estimate_snr(const Spectrum& spectrum, const FitResult& fit,
                    double exclusion_halfwidths);

double q_from_linewidth(double lambda0_nm, double fwhm_nm);

// Wavelength-meter resolution: fitted linewidths below this are flagged
// "below_instrument_resolution".
inline constexpr double instrument_resolution_nm = 3e-4; // 0.3 pm

// Full pipeline: detect peaks, reject insignificant ones (< 3x robust
// noise above the local floor), fit a one-peak composite in a +-25
// rough-width window around each survivor, attach SNR. fp_geometry seeds
// the Fabry-Perot background stack. Throws NoSignificantPeakError when
// nothing significant is found.
std::vector<FitResult> analyze_spectrum(const Spectrum& spectrum,
                                        const SlabGeometry& fp_geometry,
                                        const FitOptions& options = {});

} // namespace ncr
