#pragma once

#include <cstdint>
#include <vector>

#include "ncr/optics.hpp"
#include "ncr/spectrum.hpp"
#include "ncr/units.hpp"

// Closed-form spectral models: the symmetric cavity Lorentzian
//   R(w) = kappa * | -Gamma_c / (Gamma_c - i (w - w_c)) |^2,
// its Fano-asymmetric extension (complex constant added to the resonant
// amplitude), and the composite model used for fitting: cavity peaks plus a
// scaled Fabry-Perot background plus a constant floor, summed in intensity.
namespace ncr {

struct LorentzianPeak {
    double kappa = 0.0;   // peak reflectance at resonance; physically the
                          // input/output coupling efficiency in (0, 1]
    double gamma_c = 0.0; // field decay rate, rad/s
    double omega_c = 0.0; // resonance angular frequency, rad/s

    double lambda_c_nm() const { return wavelength_from_omega(omega_c); }
    // Exact wavelength-domain full width at half maximum. The half-maximum
    // frequencies w_c -+ gamma_c map to 4 pi c0 gamma_c / (w_c^2 - gamma_c^2).
    double fwhm_nm() const;
    double q() const { return omega_c / (2.0 * gamma_c); }

    static LorentzianPeak from_wavelength(double kappa, double lambda_c_nm, double q);
};

struct FanoPeak {
    LorentzianPeak base;
    double background_re = 0.0;
    double background_im = 0.0;
};

struct FpBackground {
    Stack stack;
    double scale = 0.0; // >= 0
};

struct CompositeModel {
    std::vector<FanoPeak> peaks;
    FpBackground fp_background;
    double floor = 0.0; // >= 0
};

void validate(const LorentzianPeak& peak);
void validate(const FanoPeak& peak);
void validate(const CompositeModel& model);

double lorentzian_reflectance(const LorentzianPeak& peak, double omega_rad_s);

// kappa * |(b_re + i b_im) - Gamma_c/(Gamma_c - i(w - w_c))|^2
double fano_reflectance(const FanoPeak& peak, double omega_rad_s);

// Incoherent sum: peaks + scale * Airy reflectance + floor.
double composite_eval(const CompositeModel& model, double wavelength_nm);

// Gaussian absorption dip: transmission factor 1 - depth * exp(-u^2/2),
// u = (lambda - center)/width, i.e. width is the Gaussian sigma in nm.
struct AbsorptionDip {
    double center_nm = 0.0;
    double depth = 0.0; // in [0, 1]
    double width_nm = 0.0;
};

// Samples the composite model on the grid, applies the dip transmission
// product, adds zero-mean Gaussian noise (fixed seed => bit-identical
// output; the generator is a hand-rolled Box-Muller over mt19937_64 so the
// stream does not depend on the standard library), clamps at zero.
Spectrum synthesize_spectrum(const CompositeModel& model, const std::vector<double>& grid_nm,
                             double noise_sigma, const std::vector<AbsorptionDip>& dips,
                             std::uint64_t rng_seed);

} // namespace ncr
