#include "ncr/spectrum.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ncr {

void validate(const Spectrum& spectrum) {
    const std::size_t n = spectrum.wavelength_nm.size();
    if (spectrum.reflectance.size() != n)
        throw std::invalid_argument("spectrum: wavelength and reflectance lengths differ");
    if (n < 16)
        throw std::invalid_argument("spectrum: length >= 16 required, got " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(spectrum.wavelength_nm[i]) || spectrum.wavelength_nm[i] <= 0.0)
            throw std::invalid_argument("spectrum: non-finite or non-positive wavelength at sample " +
                                        std::to_string(i));
        if (!std::isfinite(spectrum.reflectance[i]) || spectrum.reflectance[i] < 0.0)
            throw std::invalid_argument("spectrum: non-finite or negative reflectance at sample " +
                                        std::to_string(i));
        if (i > 0 && spectrum.wavelength_nm[i] <= spectrum.wavelength_nm[i - 1])
            throw std::invalid_argument("spectrum: wavelengths not strictly increasing at sample " +
                                        std::to_string(i));
    }
}

} // namespace ncr
