#pragma once

#include <numbers>

// Unit conventions used throughout:
//   - lengths and vacuum wavelengths in nm
//   - angular frequencies in rad/s
//   - refractive indices dimensionless, complex where lossy
namespace ncr {

inline constexpr double speed_of_light_m_per_s = 299792458.0;

// omega = 2*pi*c0/lambda, lambda in vacuum nm
inline double omega_from_wavelength(double lambda_nm) {
    return 2.0 * std::numbers::pi * speed_of_light_m_per_s / (lambda_nm * 1e-9);
}

inline double wavelength_from_omega(double omega_rad_s) {
    return 2.0 * std::numbers::pi * speed_of_light_m_per_s / omega_rad_s * 1e9;
}

} // namespace ncr
