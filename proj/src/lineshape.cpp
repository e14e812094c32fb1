#include "ncr/lineshape.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ncr {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

// Deterministic normal deviates: Box-Muller over the raw mt19937_64
// stream. Hand-rolled (instead of std::normal_distribution) because the
// standard leaves that distribution's algorithm unspecified and the
// synthesis contract is bit-identical output across toolchains.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double next() {
        // (x >> 11) has 53 random bits; +0.5 keeps u1 strictly inside (0,1)
        // so the log never sees zero.
        const double u1 = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
        const double u2 = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace

double LorentzianPeak::fwhm_nm() const {
    // Solve R(w) = kappa/2 at w = w_c -+ gamma_c, then map both frequencies
    // through lambda = 2 pi c0 / w. Exact, no small-linewidth approximation.
    const double c0 = speed_of_light_m_per_s;
    return 4.0 * std::numbers::pi * c0 * gamma_c / (omega_c * omega_c - gamma_c * gamma_c) * 1e9;
}

LorentzianPeak LorentzianPeak::from_wavelength(double kappa, double lambda_c_nm, double q) {
    require(std::isfinite(lambda_c_nm) && lambda_c_nm > 0.0, "peak: lambda_c must be > 0");
    require(std::isfinite(q) && q > 1.0, "peak: q must be > 1");
    LorentzianPeak peak;
    peak.kappa = kappa;
    peak.omega_c = omega_from_wavelength(lambda_c_nm);
    peak.gamma_c = peak.omega_c / (2.0 * q);
    validate(peak);
    return peak;
}

void validate(const LorentzianPeak& peak) {
    require(std::isfinite(peak.kappa) && peak.kappa > 0.0, "peak: kappa must be > 0");
    require(std::isfinite(peak.gamma_c) && peak.gamma_c > 0.0, "peak: gamma_c must be > 0");
    require(std::isfinite(peak.omega_c) && peak.omega_c > 0.0, "peak: omega_c must be > 0");
    require(peak.omega_c > 2.0 * peak.gamma_c, "peak: implied q must exceed 1");
}

void validate(const FanoPeak& peak) {
    validate(peak.base);
    require(std::isfinite(peak.background_re) && std::isfinite(peak.background_im),
            "peak: fano offsets must be finite");
}

void validate(const CompositeModel& model) {
    for (const FanoPeak& peak : model.peaks) validate(peak);
    require(std::isfinite(model.fp_background.scale) && model.fp_background.scale >= 0.0,
            "model: fp scale must be >= 0");
    if (model.fp_background.scale > 0.0) validate(model.fp_background.stack);
    require(std::isfinite(model.floor) && model.floor >= 0.0, "model: floor must be >= 0");
}

double lorentzian_reflectance(const LorentzianPeak& peak, double omega_rad_s) {
    require(omega_rad_s > 0.0, "lorentzian: omega must be > 0");
    const double detuning = omega_rad_s - peak.omega_c;
    const double g2 = peak.gamma_c * peak.gamma_c;
    return peak.kappa * g2 / (g2 + detuning * detuning);
}

double fano_reflectance(const FanoPeak& peak, double omega_rad_s) {
    require(omega_rad_s > 0.0, "fano: omega must be > 0");
    const double detuning = omega_rad_s - peak.base.omega_c;
    const std::complex<double> resonant =
        -peak.base.gamma_c / std::complex<double>(peak.base.gamma_c, -detuning);
    const std::complex<double> amplitude =
        std::complex<double>(peak.background_re, peak.background_im) + resonant;
    return peak.base.kappa * std::norm(amplitude);
}

double composite_eval(const CompositeModel& model, double wavelength_nm) {
    require(wavelength_nm > 0.0, "composite: wavelength must be > 0");
    const double omega = omega_from_wavelength(wavelength_nm);
    double value = model.floor;
    for (const FanoPeak& peak : model.peaks) value += fano_reflectance(peak, omega);
    if (model.fp_background.scale > 0.0)
        value += model.fp_background.scale *
                 airy_stack_reflectance(model.fp_background.stack, wavelength_nm).reflectance;
    return value;
}

Spectrum synthesize_spectrum(const CompositeModel& model, const std::vector<double>& grid_nm,
                             double noise_sigma, const std::vector<AbsorptionDip>& dips,
                             std::uint64_t rng_seed) {
    validate(model);
    require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, "synth: noise_sigma must be >= 0");
    for (const AbsorptionDip& dip : dips) {
        require(std::isfinite(dip.center_nm) && dip.center_nm > 0.0,
                "synth: dip center must be > 0");
        require(std::isfinite(dip.depth) && dip.depth >= 0.0 && dip.depth <= 1.0,
                "synth: dip depth must be in [0, 1]");
        require(std::isfinite(dip.width_nm) && dip.width_nm > 0.0, "synth: dip width must be > 0");
    }

    GaussianSource noise(rng_seed);
    Spectrum out;
    out.wavelength_nm = grid_nm;
    out.reflectance.reserve(grid_nm.size());
    for (double lambda : grid_nm) {
        double value = composite_eval(model, lambda);
        for (const AbsorptionDip& dip : dips) {
            const double u = (lambda - dip.center_nm) / dip.width_nm;
            value *= 1.0 - dip.depth * std::exp(-0.5 * u * u);
        }
        if (noise_sigma > 0.0) value += noise_sigma * noise.next();
        out.reflectance.push_back(std::max(value, 0.0));
    }
    validate(out);
    return out;
}

} // namespace ncr
