#pragma once

#include <complex>
#include <vector>

// Plane-wave multilayer optics at normal incidence.
//
// Sign conventions (stated once, used everywhere):
//   - time dependence exp(+i w t); a downward ("+") wave accumulates the
//     phase exp(-i beta d) across a layer of thickness d, beta = n w / c0
//   - amplitudes are plain field amplitudes; transfer matrices map the
//     (down, up) amplitude pair just above an element to the pair just
//     below it, so the top interface factor acts first
//   - absorbing media carry Im(n) >= 0 (validated, never exercised by the
//     lossless stacks modeled here)
namespace ncr {

using complexd = std::complex<double>;

struct Layer {
    complexd refractive_index;
    double thickness_nm = 0.0;
};

// Semi-infinite claddings around an ordered (top to bottom) layer list.
// An empty list is a bare interface between the claddings.
struct Stack {
    complexd top_cladding_index{1.0, 0.0};
    std::vector<Layer> layers;
    complexd bottom_cladding_index{1.0, 0.0};
};

void validate(const Layer& layer);
void validate(const Stack& stack);

struct FresnelAmplitudes {
    complexd r;
    complexd t;
};

// Scalar content of the normal-incidence transition matrix between media
// a (above) and b (below): r = (n_b - n_a)/(n_b + n_a), t = 2 n_b/(n_a + n_b).
// The matrix identity 1/(2 n_b) [[n_b+n_a, n_b-n_a], [n_b-n_a, n_b+n_a]]
// = (1/t) [[1, r], [r, 1]] holds for these amplitudes.
FresnelAmplitudes fresnel_amplitudes(complexd n_a, complexd n_b);

struct StackAmplitudes {
    complexd r; // reflected amplitude in the top cladding
    complexd t; // transmitted amplitude in the bottom cladding
};

// Full 2x2 transfer-matrix solve of the stack for unit illumination from
// the top cladding.
StackAmplitudes stack_amplitudes(const Stack& stack, double wavelength_nm);

struct StackResponse {
    double reflectance = 0.0;   // |r|^2
    double transmittance = 0.0; // Re(n_bottom)/Re(n_top) * |t|^2
};

// Airy multilayer reflectance/transmittance. For lossless stacks
// R + T = 1 to better than 1e-9.
StackResponse airy_stack_reflectance(const Stack& stack, double wavelength_nm);

// Fabry-Perot fringe spacing lambda^2 / (2 sum_i Re(n_i) d_i) at the given
// center wavelength. Requires at least one layer.
double free_spectral_range(const Stack& stack, double center_wavelength_nm);

} // namespace ncr
