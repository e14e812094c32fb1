#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "ncr/optics.hpp"
#include "ncr/spectrum.hpp"
#include "ncr/units.hpp"

// Polarization-resolved transfer-matrix model of a photonic-crystal slab
// nanocavity embedded in a multilayer:
//
//     n0 (air, semi-infinite)
//     n1_eff, t1/2  .
//     -- cavity --  . effective-index slab, cavity plane at mid-slab
//     n1_eff, t1/2  .
//     n0, t2          air gap (removed sacrificial layer)
//     n3 (substrate, semi-infinite)
//
// Matrices act on the amplitude four-vector (S_x+, S_x-, S_y+, S_y-), "+"
// pointing down into the stack. Each factor maps the amplitudes directly
// above an element to the amplitudes directly below it, so the full system
// matrix is assembled by applying the top interface first. The nanocavity
// mode sits at 45 degrees between x and y, which is what couples the two
// polarization blocks and produces a cross-polarized reflection.
namespace ncr {

struct TransferMatrix4 {
    // row-major, basis (S_x+, S_x-, S_y+, S_y-)
    std::array<complexd, 16> m{};

    complexd& operator()(int row, int col) { return m[4 * row + col]; }
    const complexd& operator()(int row, int col) const { return m[4 * row + col]; }

    static TransferMatrix4 identity();
};

TransferMatrix4 operator*(const TransferMatrix4& a, const TransferMatrix4& b);

struct FourPortField {
    complexd s_x_plus;
    complexd s_x_minus;
    complexd s_y_plus;
    complexd s_y_minus;
};

FourPortField apply(const TransferMatrix4& m, const FourPortField& v);

// Cavity resonance and its decay channels. q_cav_x/q_cav_y are the vertical
// (radiative input/output) quality factors per polarization, q_loss the
// in-plane parasitic one. An infinite q_cav decouples that polarization
// exactly (coupling constant 0).
struct CavityCoupling {
    double lambda0_nm = 1310.0;
    double q_cav_x = 1e4;
    double q_cav_y = 1e4;
    double q_loss = 1e8;

    double omega0() const { return omega_from_wavelength(lambda0_nm); }
};

// Effective 1D geometry. n1_eff defaults to the calibrated value that puts
// the peak-reflectivity minimum of the default stack at 1370 nm (the
// area-weighted permittivity estimate for a r = 0.3a hole lattice in GaAs
// is 2.85; the calibration lowers it to 2.62).
struct SlabGeometry {
    double n0 = 1.0;
    double n1_eff = 2.62;
    double t1_nm = 200.0;
    double t2_nm = 1200.0;
    double n3 = 3.4;
};

void validate(const CavityCoupling& coupling);
void validate(const SlabGeometry& geometry);

// diag(e^{-i beta d}, e^{+i beta d}, e^{-i beta d}, e^{+i beta d}),
// beta d = 2 pi n d / lambda.
TransferMatrix4 propagation_matrix(complexd n, double d_nm, double wavelength_nm);

// Two identical 2x2 Fresnel blocks, no polarization mixing.
TransferMatrix4 interface_matrix(complexd n_j, complexd n_j1);

// kappa = sqrt(omega0 / (2 q_cav)); kappa^2 is the field decay rate into
// one polarization's up+down channel pair. q_cav = +inf gives exactly 0.
double coupling_constant(double q_cav, double omega0_rad_s);

// T_c = I + K / (i(w - w0) + w0/(2 q_loss)) with K the kappa-bilinear
// mixing matrix. The identity stays outside the resonant prefactor so that
// T_c -> I far off resonance and for kappa = 0. literal_prefactor = true
// instead evaluates (I + K)/denominator, the physically inconsistent
// variant kept for comparison only.
TransferMatrix4 cavity_matrix(const CavityCoupling& coupling, double omega_rad_s,
                              bool literal_prefactor = false);

// Seven-factor product for the slab/gap/substrate system with the cavity
// plane at mid-slab: T01, Tp(t1/2), Tc, Tp(t1/2), T12, Tp(t2), T23 applied
// to the top amplitudes in that traversal order.
TransferMatrix4 system_matrix(const SlabGeometry& geometry, const CavityCoupling& coupling,
                              double wavelength_nm);

// The same system kept factored around the resonant rank-one term:
// full = after * (I + u v^T / denom) * before. Near resonance with small
// parasitic loss the assembled matrix entries grow like kappa^2/|denom|
// and the direct solve loses the phases; solving on the factors with the
// cavity amplitude a = v . (before top) / denom as an explicit unknown
// stays well conditioned arbitrarily close to (and exactly at) resonance.
struct SystemFactors {
    TransferMatrix4 before; // Tp(t1/2) T01
    TransferMatrix4 after;  // T23 Tp(t2) T12 Tp(t1/2)
    std::array<double, 4> u{};
    std::array<double, 4> v{};
    complexd denom;
};

SystemFactors system_factors(const SlabGeometry& geometry, const CavityCoupling& coupling,
                             double wavelength_nm);

struct ScatterSolution {
    complexd r_xx; // S_x-0: co-polarized reflection
    complexd r_yx; // S_y-0: cross-polarized reflection
    complexd t_xx; // co-polarized transmission into the substrate
    complexd t_yx; // cross-polarized transmission
};

class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_estimate_(condition_estimate) {}
    double condition_estimate() const { return condition_estimate_; }

private:
    double condition_estimate_;
};

class PeakNotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Converts the transfer matrix to the scattering solution for unit
// x-polarized illumination from the top: S_x+0 = 1, S_y+0 = 0 and no
// upward amplitudes below the stack. The cross-polarized reflectivity is
// |r_yx|^2.
ScatterSolution solve_scattering(const TransferMatrix4& t_s);

// Same scattering problem solved on the factored system (the bordered
// 3x3 in r_xx, r_yx and the cavity amplitude). This is the production
// path; the assembled-matrix overload is kept for cross-checks.
ScatterSolution solve_scattering(const SystemFactors& factors);

double cross_pol_reflectance(const SlabGeometry& geometry, const CavityCoupling& coupling,
                             double wavelength_nm);

Spectrum cross_pol_spectrum(const SlabGeometry& geometry, const CavityCoupling& coupling,
                            const std::vector<double>& wavelength_grid_nm);

// 1/(1/q_cav_x + 1/q_cav_y + 1/q_loss): a-priori linewidth estimate used
// to size search windows.
double total_q_estimate(const CavityCoupling& coupling);

// Max over lambda of the cross-polarized reflectance with the resonance
// placed at lambda_res. Searched within +-20 linewidths (coarse scan, then
// golden-section refinement to 1e-10 relative): the interference
// background can push the maximum slightly off resonance.
double peak_reflectivity(const SlabGeometry& geometry, const CavityCoupling& coupling_template,
                         double lambda_res_nm);

struct SweepPoint {
    double lambda_res_nm;
    double r_peak;
};

std::vector<SweepPoint> sweep_peak_reflectivity(const SlabGeometry& geometry,
                                                const CavityCoupling& coupling_template,
                                                const std::vector<double>& lambda_res_grid_nm);

// Total quality factor lambda_peak/FWHM extracted numerically from the
// solved spectrum, FWHM taken at half the background-subtracted peak
// height. Throws PeakNotFoundError when no resonant peak stands above the
// background.
double model_total_q(const SlabGeometry& geometry, const CavityCoupling& coupling);

} // namespace ncr
