#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ncr/cavity.hpp"
#include "ncr/fit.hpp"
#include "ncr/lineshape.hpp"
#include "ncr/spectrum.hpp"

// File surfaces: the two-column spectrum format, CSV tables, the fit
// report, and the flat key = value run configuration.
//
// Spectrum files are UTF-8 with LF endings: optional '#' comment lines
// (preserved as meta), a header line "wavelength_nm,reflectance", then
// rows formatted "%.9g,%.9g".
namespace ncr {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SpectrumFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_double(double value); // %.9g

Spectrum read_spectrum(const std::filesystem::path& path);
Spectrum parse_spectrum_text(std::string_view text, const std::string& origin);

void write_spectrum(const std::filesystem::path& path, const Spectrum& spectrum);

// Generic numeric CSV: '#' comment lines, one header line, %.9g cells.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows,
                 const std::vector<std::string>& comments = {});

// One CSV record per fitted peak with parameter values, standard errors,
// convergence diagnostics and flags.
void write_fit_report(const std::filesystem::path& path, const std::vector<FitResult>& results,
                      const std::vector<std::string>& comments = {});

// Everything the subcommands need, with defaults matching the shipped
// configs/default.conf. Unknown keys are hard errors.
struct RunConfig {
    SlabGeometry geometry;
    CavityCoupling coupling;

    double model_lambda_min_nm = 0.0; // 0 = auto: lambda0 +- 25 linewidths
    double model_lambda_max_nm = 0.0;
    int model_points = 2001;

    double sweep_lambda_min_nm = 1280.0;
    double sweep_lambda_max_nm = 1620.0;
    int sweep_points = 341;

    double synth_lambda_min_nm = 1389.0;
    double synth_lambda_max_nm = 1391.0;
    int synth_points = 2001;
    double synth_kappa = 0.5;
    double synth_peak_lambda0_nm = 1390.0;
    double synth_peak_q = 58000.0;
    double synth_fano_re = 0.0;
    double synth_fano_im = 0.0;
    double synth_fp_scale = 0.0;
    double synth_floor = 0.0;
    double synth_noise_sigma = 0.0;
    std::uint64_t synth_seed = 1;
    std::vector<AbsorptionDip> synth_dips;

    FitOptions fit;
};

RunConfig parse_config_text(std::string_view text, const std::string& origin);
RunConfig parse_config_file(const std::filesystem::path& path);

// The composite model described by the synth.* and geometry.* sections.
CompositeModel synth_model_from_config(const RunConfig& config);

// Documented template, parseable by parse_config_text.
std::string default_config_text();

} // namespace ncr
