#include "ncr/optics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ncr {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

void check_index(complexd n, const char* what) {
    require(std::isfinite(n.real()) && std::isfinite(n.imag()), "refractive index must be finite");
    if (n.real() <= 0.0) throw std::invalid_argument(std::string(what) + ": Re(n) must be > 0");
    if (n.imag() < 0.0) throw std::invalid_argument(std::string(what) + ": Im(n) must be >= 0");
}

// 2x2 transfer matrix on the (down, up) amplitude pair.
struct Mat2 {
    complexd a, b, c, d; // [[a, b], [c, d]]
};

Mat2 mul(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

Mat2 interface2(complexd n_a, complexd n_b) {
    const complexd s = 1.0 / (2.0 * n_b);
    return {s * (n_b + n_a), s * (n_b - n_a), s * (n_b - n_a), s * (n_b + n_a)};
}

Mat2 propagation2(complexd n, double d_nm, double lambda_nm) {
    const complexd phase = 2.0 * std::numbers::pi * n * d_nm / lambda_nm;
    const complexd down = std::exp(complexd(0.0, -1.0) * phase);
    const complexd up = std::exp(complexd(0.0, +1.0) * phase);
    return {down, 0.0, 0.0, up};
}

} // namespace

void validate(const Layer& layer) {
    check_index(layer.refractive_index, "layer index");
    require(std::isfinite(layer.thickness_nm) && layer.thickness_nm > 0.0,
            "layer thickness must be finite and > 0");
}

void validate(const Stack& stack) {
    check_index(stack.top_cladding_index, "top cladding");
    check_index(stack.bottom_cladding_index, "bottom cladding");
    for (const Layer& layer : stack.layers) validate(layer);
}

FresnelAmplitudes fresnel_amplitudes(complexd n_a, complexd n_b) {
    check_index(n_a, "n_a");
    check_index(n_b, "n_b");
    return {(n_b - n_a) / (n_b + n_a), 2.0 * n_b / (n_a + n_b)};
}

StackAmplitudes stack_amplitudes(const Stack& stack, double wavelength_nm) {
    validate(stack);
    require(std::isfinite(wavelength_nm) && wavelength_nm > 0.0, "wavelength must be > 0");

    // Accumulate top -> bottom; the top interface acts first.
    Mat2 m = interface2(stack.top_cladding_index,
                        stack.layers.empty() ? stack.bottom_cladding_index
                                             : stack.layers.front().refractive_index);
    for (std::size_t i = 0; i < stack.layers.size(); ++i) {
        const Layer& layer = stack.layers[i];
        m = mul(propagation2(layer.refractive_index, layer.thickness_nm, wavelength_nm), m);
        const complexd next = (i + 1 < stack.layers.size())
                                  ? stack.layers[i + 1].refractive_index
                                  : stack.bottom_cladding_index;
        m = mul(interface2(layer.refractive_index, next), m);
    }

    // Unit illumination from the top, nothing upward below the stack:
    // (t, 0) = m (1, r).
    if (m.d == complexd(0.0, 0.0))
        throw std::invalid_argument("degenerate stack: zero reflection denominator");
    const complexd r = -m.c / m.d;
    const complexd t = m.a + m.b * r;
    return {r, t};
}

StackResponse airy_stack_reflectance(const Stack& stack, double wavelength_nm) {
    const StackAmplitudes amps = stack_amplitudes(stack, wavelength_nm);
    const double flux_ratio = stack.bottom_cladding_index.real() / stack.top_cladding_index.real();
    return {std::norm(amps.r), flux_ratio * std::norm(amps.t)};
}

double free_spectral_range(const Stack& stack, double center_wavelength_nm) {
    validate(stack);
    require(std::isfinite(center_wavelength_nm) && center_wavelength_nm > 0.0,
            "wavelength must be > 0");
    if (stack.layers.empty())
        throw std::invalid_argument("free_spectral_range: stack has no layers");
    double optical_path = 0.0;
    for (const Layer& layer : stack.layers)
        optical_path += layer.refractive_index.real() * layer.thickness_nm;
    return center_wavelength_nm * center_wavelength_nm / (2.0 * optical_path);
}

} // namespace ncr
