#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "ncr/optics.hpp"

using ncr::complexd;
using ncr::Stack;

namespace {

Stack single_layer(double n, double d_nm) {
    Stack stack;
    stack.layers = {{complexd(n), d_nm}};
    return stack;
}

} // namespace

TEST_CASE("fresnel amplitudes: identical media are transparent") {
    const auto f = ncr::fresnel_amplitudes(1.0, 1.0);
    CHECK(std::abs(f.r) == 0.0);
    CHECK(std::abs(f.t - complexd(1.0)) == 0.0);
}

TEST_CASE("fresnel amplitudes: air to substrate magnitude") {
    // Closed form |r|^2 = ((n-1)/(n+1))^2 evaluated independently.
    const double expected = (2.4 / 4.4) * (2.4 / 4.4);
    const auto f = ncr::fresnel_amplitudes(1.0, 3.4);
    CHECK(std::norm(f.r) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fresnel amplitudes: direction reversal flips the sign of r") {
    const auto forward = ncr::fresnel_amplitudes(1.0, 3.4);
    const auto backward = ncr::fresnel_amplitudes(3.4, 1.0);
    CHECK(forward.r.real() == doctest::Approx(-backward.r.real()).epsilon(1e-15));
    CHECK(std::abs(forward.r) == doctest::Approx(std::abs(backward.r)).epsilon(1e-15));
}

TEST_CASE("fresnel amplitudes satisfy the transition-matrix identity") {
    // 1/(2 n_b) [[n_b+n_a, n_b-n_a], [n_b-n_a, n_b+n_a]] = (1/t) [[1, r], [r, 1]]
    const complexd n_a(1.0), n_b(3.4);
    const auto f = ncr::fresnel_amplitudes(n_a, n_b);
    const complexd m11 = (n_b + n_a) / (2.0 * n_b);
    const complexd m12 = (n_b - n_a) / (2.0 * n_b);
    CHECK(std::abs(m11 - 1.0 / f.t) < 1e-15);
    CHECK(std::abs(m12 - f.r / f.t) < 1e-15);
}

TEST_CASE("fresnel amplitudes reject non-positive indices") {
    CHECK_THROWS_AS(ncr::fresnel_amplitudes(complexd(0.0), complexd(1.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(ncr::fresnel_amplitudes(complexd(1.0), complexd(-2.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(ncr::fresnel_amplitudes(complexd(1.0, -0.1), complexd(1.0)),
                    std::invalid_argument);
}

TEST_CASE("empty stack between identical media is fully transparent") {
    const auto response = ncr::airy_stack_reflectance(Stack{}, 1310.0);
    CHECK(response.reflectance == doctest::Approx(0.0));
    CHECK(response.transmittance == doctest::Approx(1.0));
}

TEST_CASE("bare interface reflectance matches the Fresnel oracle") {
    Stack interface;
    interface.bottom_cladding_index = 3.4;
    const auto response = ncr::airy_stack_reflectance(interface, 1550.0);
    CHECK(response.reflectance == doctest::Approx((2.4 / 4.4) * (2.4 / 4.4)).epsilon(1e-12));
    CHECK(response.reflectance + response.transmittance == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bare interface scattering amplitudes are the physical Fresnel pair") {
    // Light incident from medium a: r = (n_a-n_b)/(n_a+n_b), t = 2 n_a/(n_a+n_b).
    Stack interface;
    interface.bottom_cladding_index = 3.4;
    const auto amps = ncr::stack_amplitudes(interface, 1000.0);
    CHECK(amps.r.real() == doctest::Approx((1.0 - 3.4) / 4.4).epsilon(1e-14));
    CHECK(amps.r.imag() == doctest::Approx(0.0));
    CHECK(amps.t.real() == doctest::Approx(2.0 / 4.4).epsilon(1e-14));
}

TEST_CASE("half-wave layer is transparent") {
    // 2 n t = 1360 nm: a half-wave layer at 1360 nm.
    const Stack slab = single_layer(3.4, 200.0);
    const auto response = ncr::airy_stack_reflectance(slab, 1360.0);
    CHECK(response.reflectance < 1e-10);
    CHECK(response.transmittance == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("quarter-wave layer maximizes single-slab reflectance") {
    // 2 n t = lambda/2 at lambda = 2720 nm: the slab's reflectance maximum,
    // R = ((n^2-1)/(n^2+1))^2 between identical claddings.
    const Stack slab = single_layer(3.4, 200.0);
    const double n2 = 3.4 * 3.4;
    const double expected = ((n2 - 1.0) / (n2 + 1.0)) * ((n2 - 1.0) / (n2 + 1.0));
    const auto response = ncr::airy_stack_reflectance(slab, 2720.0);
    CHECK(response.reflectance == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("energy conservation for lossless stacks on a dense grid") {
    Stack stack;
    stack.layers = {{complexd(2.62), 200.0}, {complexd(1.0), 1200.0}};
    stack.bottom_cladding_index = 3.4;
    for (int i = 0; i < 10000; ++i) {
        const double lambda = 1280.0 + 340.0 * i / 9999.0;
        const auto response = ncr::airy_stack_reflectance(stack, lambda);
        CHECK(response.reflectance + response.transmittance == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("complex index breaks the lossless energy balance") {
    // The stated conventions (exp(+i w t) time dependence, exp(-i beta d)
    // downward phase, Im(n) >= 0 accepted) make Im(n) > 0 act on the
    // downward amplitude with |exp(-i beta d)| = exp(+Im(beta) d) > 1, so
    // R + T leaves 1 from above. Documented as-is; nothing downstream
    // relies on complex indices.
    Stack stack;
    stack.layers = {{complexd(1.0, 0.05), 400.0}};
    const auto response = ncr::airy_stack_reflectance(stack, 1310.0);
    CHECK(std::abs(response.reflectance + response.transmittance - 1.0) > 1e-3);
    CHECK(response.reflectance + response.transmittance > 1.0);
}

TEST_CASE("half-wave insertion invariance") {
    // Inserting a 2 n t = m lambda layer between identical media leaves the
    // surrounding stack's response unchanged. Here the half-wave slab
    // (2 * 3.4 * 200 = 1360 = lambda) splits the air gap in two.
    Stack split;
    split.layers = {{complexd(1.0), 600.0}, {complexd(3.4), 200.0}, {complexd(1.0), 600.0}};
    split.bottom_cladding_index = 3.4;
    Stack plain;
    plain.layers = {{complexd(1.0), 1200.0}};
    plain.bottom_cladding_index = 3.4;
    const double r_split = ncr::airy_stack_reflectance(split, 1360.0).reflectance;
    const double r_plain = ncr::airy_stack_reflectance(plain, 1360.0).reflectance;
    CHECK(r_split == doctest::Approx(r_plain).epsilon(1e-9));
}

TEST_CASE("stack reversal leaves lossless reflectance unchanged") {
    Stack forward;
    forward.top_cladding_index = 1.0;
    forward.layers = {{complexd(2.62), 200.0}, {complexd(1.0), 1200.0}};
    forward.bottom_cladding_index = 3.4;
    Stack reversed;
    reversed.top_cladding_index = 3.4;
    reversed.layers = {{complexd(1.0), 1200.0}, {complexd(2.62), 200.0}};
    reversed.bottom_cladding_index = 1.0;
    for (double lambda : {1280.0, 1333.3, 1400.0, 1496.2, 1620.0}) {
        CHECK(ncr::airy_stack_reflectance(forward, lambda).reflectance ==
              doctest::Approx(ncr::airy_stack_reflectance(reversed, lambda).reflectance)
                  .epsilon(1e-9));
    }
}

TEST_CASE("free spectral range closed form") {
    // lambda^2 / (2 n d); the 1315 nm / 1200 nm gap case lands near 720 nm.
    CHECK(ncr::free_spectral_range(single_layer(1.0, 1200.0), 1315.0) ==
          doctest::Approx(1315.0 * 1315.0 / 2400.0).epsilon(1e-12));
    CHECK(std::abs(ncr::free_spectral_range(single_layer(1.0, 1200.0), 1315.0) - 720.3) < 0.5);
    CHECK(ncr::free_spectral_range(single_layer(3.4, 200.0), 1360.0) ==
          doctest::Approx(1360.0).epsilon(1e-12));
}

TEST_CASE("free spectral range matches adjacent Airy maxima") {
    // A single thick etalon gives unambiguous fringes (a multilayer mixes
    // several round-trip periods). Maxima sit at half-integer orders, so
    // adjacent-maxima spacing equals the FSR at the pair midpoint up to
    // (FSR/lambda)^2/4 ~ 0.3%.
    Stack stack;
    stack.layers = {{complexd(3.4), 2000.0}};
    const double predicted = ncr::free_spectral_range(stack, 1400.0);
    CHECK(predicted == doctest::Approx(1400.0 * 1400.0 / 13600.0).epsilon(1e-12));

    const auto reflectance = [&](double lambda) {
        return ncr::airy_stack_reflectance(stack, lambda).reflectance;
    };
    std::vector<double> maxima;
    double previous = reflectance(1200.0);
    double current = reflectance(1200.05);
    for (double lambda = 1200.10; lambda < 1700.0; lambda += 0.05) {
        const double next = reflectance(lambda);
        if (current > previous && current >= next) maxima.push_back(lambda - 0.05);
        previous = current;
        current = next;
    }
    REQUIRE(maxima.size() >= 2);
    double spacing = 0.0, midpoint = 0.0;
    for (std::size_t i = 1; i < maxima.size(); ++i)
        if (maxima[i - 1] < 1400.0 && maxima[i] >= 1400.0) {
            spacing = maxima[i] - maxima[i - 1];
            midpoint = 0.5 * (maxima[i] + maxima[i - 1]);
        }
    REQUIRE(spacing > 0.0);
    CHECK(std::abs(spacing - ncr::free_spectral_range(stack, midpoint)) / spacing < 0.01);
}

TEST_CASE("free spectral range rejects empty stacks") {
    CHECK_THROWS_AS(ncr::free_spectral_range(Stack{}, 1310.0), std::invalid_argument);
}

TEST_CASE("layer validation") {
    CHECK_THROWS_AS(ncr::validate(ncr::Layer{complexd(2.0), 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(ncr::validate(ncr::Layer{complexd(2.0), -5.0}), std::invalid_argument);
    CHECK_THROWS_AS(ncr::validate(ncr::Layer{complexd(2.0, -0.1), 10.0}), std::invalid_argument);
    CHECK_NOTHROW(ncr::validate(ncr::Layer{complexd(2.0, 0.1), 10.0}));
}
