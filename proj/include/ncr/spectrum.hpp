#pragma once

#include <string>
#include <vector>

namespace ncr {

// Sampled reflectance series, the unit of synthesis, ingestion and fitting.
// Wavelengths are vacuum nm, strictly increasing; reflectance values are
// non-negative and finite. A spectrum carries at least 16 samples.
struct Spectrum {
    std::vector<double> wavelength_nm;
    std::vector<double> reflectance;
    std::string meta; // free-form provenance, newline separated
};

// Throws std::invalid_argument naming the first violation.
void validate(const Spectrum& spectrum);

} // namespace ncr
