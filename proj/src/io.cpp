#include "ncr/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace ncr {

namespace {

std::string trim(std::string_view text) {
    std::size_t first = 0, last = text.size();
    while (first < last && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
    while (last > first && std::isspace(static_cast<unsigned char>(text[last - 1]))) --last;
    return std::string(text.substr(first, last - first));
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    // Tolerate CRLF input; output always uses bare LF.
    for (auto& line : lines)
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return lines;
}

double parse_double(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    double value = 0.0;
    const char* begin = t.data();
    const char* end = begin + t.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(where + ": not a number: \"" + t + "\"");
    return value;
}

long long parse_int(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    long long value = 0;
    const char* begin = t.data();
    const char* end = begin + t.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(where + ": not an integer: \"" + t + "\"");
    return value;
}

std::uint64_t parse_uint64(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    std::uint64_t value = 0;
    const char* begin = t.data();
    const char* end = begin + t.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(where + ": not an unsigned integer: \"" + t + "\"");
    return value;
}

// "center:depth:width, center:depth:width, ..." (commas optional for a
// single dip); an empty value means no dips.
std::vector<AbsorptionDip> parse_dips(const std::string& text, const std::string& where) {
    std::vector<AbsorptionDip> dips;
    std::stringstream stream{text};
    std::string item;
    while (std::getline(stream, item, ',')) {
        const std::string entry = trim(item);
        if (entry.empty()) continue;
        const std::size_t c1 = entry.find(':');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                       : entry.find(':', c1 + 1);
        if (c2 == std::string::npos)
            throw ConfigError(where + ": dip must be center:depth:width, got \"" + entry + "\"");
        AbsorptionDip dip;
        dip.center_nm = parse_double(entry.substr(0, c1), where);
        dip.depth = parse_double(entry.substr(c1 + 1, c2 - c1 - 1), where);
        dip.width_nm = parse_double(entry.substr(c2 + 1), where);
        dips.push_back(dip);
    }
    return dips;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

constexpr const char* spectrum_header = "wavelength_nm,reflectance";

} // namespace

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.9g", value);
    return buffer;
}

Spectrum parse_spectrum_text(std::string_view text, const std::string& origin) {
    const std::vector<std::string_view> lines = split_lines(text);
    Spectrum spectrum;
    bool seen_header = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        const std::string where = origin + ":" + std::to_string(i + 1);
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string comment = line.substr(1);
            if (!comment.empty() && comment[0] == ' ') comment.erase(0, 1);
            if (!spectrum.meta.empty()) spectrum.meta += '\n';
            spectrum.meta += comment;
            continue;
        }
        if (!seen_header) {
            if (line != spectrum_header)
                throw SpectrumFormatError(where + ": expected header \"" +
                                          std::string(spectrum_header) + "\", got \"" + line +
                                          "\"");
            seen_header = true;
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw SpectrumFormatError(where + ": expected \"wavelength,reflectance\" row");
        double wavelength = 0.0, reflectance = 0.0;
        try {
            wavelength = parse_double(line.substr(0, comma), where);
            reflectance = parse_double(line.substr(comma + 1), where);
        } catch (const ConfigError& err) {
            throw SpectrumFormatError(err.what());
        }
        if (!std::isfinite(wavelength) || wavelength <= 0.0)
            throw SpectrumFormatError(where + ": wavelength must be finite and > 0");
        if (!std::isfinite(reflectance) || reflectance < 0.0)
            throw SpectrumFormatError(where + ": reflectance must be finite and >= 0");
        if (!spectrum.wavelength_nm.empty() && wavelength <= spectrum.wavelength_nm.back())
            throw SpectrumFormatError(where + ": wavelengths must be strictly increasing");
        spectrum.wavelength_nm.push_back(wavelength);
        spectrum.reflectance.push_back(reflectance);
    }
    if (!seen_header) throw SpectrumFormatError(origin + ": missing header line");
    try {
        validate(spectrum);
    } catch (const std::invalid_argument& err) {
        throw SpectrumFormatError(origin + ": " + err.what());
    }
    return spectrum;
}

Spectrum read_spectrum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpectrumFormatError("cannot open: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_spectrum_text(buffer.str(), path.string());
}

void write_spectrum(const std::filesystem::path& path, const Spectrum& spectrum) {
    validate(spectrum);
    std::ofstream out = open_output(path);
    if (!spectrum.meta.empty()) {
        std::stringstream meta{spectrum.meta};
        std::string line;
        while (std::getline(meta, line)) out << "# " << line << '\n';
    }
    out << spectrum_header << '\n';
    for (std::size_t i = 0; i < spectrum.wavelength_nm.size(); ++i)
        out << format_double(spectrum.wavelength_nm[i]) << ','
            << format_double(spectrum.reflectance[i]) << '\n';
    finish_output(out, path);
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows,
                 const std::vector<std::string>& comments) {
    std::ofstream out = open_output(path);
    for (const std::string& comment : comments) out << "# " << comment << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw std::invalid_argument("write_table: row width does not match header");
        for (std::size_t c = 0; c < row.size(); ++c)
            out << format_double(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
    finish_output(out, path);
}

void write_fit_report(const std::filesystem::path& path, const std::vector<FitResult>& results,
                      const std::vector<std::string>& comments) {
    std::ofstream out = open_output(path);
    for (const std::string& comment : comments) out << "# " << comment << '\n';
    out << "peak,lambda0_nm,fwhm_nm,q_exp,snr,kappa,fano_re,fano_im,fp_t1_nm,fp_t2_nm,"
           "fp_scale,floor,stderr_kappa,stderr_lambda0_nm,stderr_fwhm_nm,stderr_fano_re,"
           "stderr_fano_im,stderr_fp_t1_nm,stderr_fp_t2_nm,stderr_fp_scale,stderr_floor,"
           "residual_rms,converged,iterations,flags\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const FitResult& r = results[i];
        const std::vector<double> packed = pack_parameters(r.params);
        out << i + 1;
        out << ',' << format_double(r.lambda0_nm) << ',' << format_double(r.fwhm_nm) << ','
            << format_double(r.q_exp) << ',' << format_double(r.snr);
        // Parameter columns describe the first (reported) peak.
        out << ',' << format_double(packed[0]);           // kappa
        out << ',' << format_double(packed[3]) << ',' << format_double(packed[4]); // fano
        const std::size_t tail = r.params.peaks.size() * 5;
        for (std::size_t t = 0; t < 3; ++t) out << ',' << format_double(packed[tail + t]);
        out << ',' << format_double(packed[tail + 3]);    // floor
        const std::size_t stderr_order[] = {0, 1, 2, 3, 4, tail, tail + 1, tail + 2, tail + 3};
        for (std::size_t index : stderr_order)
            out << ',' << (index < r.stderrs.size() ? format_double(r.stderrs[index]) : "inf");
        out << ',' << format_double(r.residual_rms);
        out << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << ',';
        for (std::size_t f = 0; f < r.flags.size(); ++f)
            out << (f ? ";" : "") << r.flags[f];
        out << '\n';
    }
    finish_output(out, path);
}

namespace {

// Applies one key = value pair onto the config; throws ConfigError for
// unknown keys or malformed values.
void apply_key(RunConfig& config, const std::string& key, const std::string& value,
               const std::string& where) {
    const auto number = [&] { return parse_double(value, where); };
    const auto integer = [&] { return static_cast<int>(parse_int(value, where)); };

    if (key == "geometry.n0") config.geometry.n0 = number();
    else if (key == "geometry.n1_eff") config.geometry.n1_eff = number();
    else if (key == "geometry.t1_nm") config.geometry.t1_nm = number();
    else if (key == "geometry.t2_nm") config.geometry.t2_nm = number();
    else if (key == "geometry.n3") config.geometry.n3 = number();
    else if (key == "coupling.lambda0_nm") config.coupling.lambda0_nm = number();
    else if (key == "coupling.q_cav_x") config.coupling.q_cav_x = number();
    else if (key == "coupling.q_cav_y") config.coupling.q_cav_y = number();
    else if (key == "coupling.q_loss") config.coupling.q_loss = number();
    else if (key == "model.lambda_min_nm") config.model_lambda_min_nm = number();
    else if (key == "model.lambda_max_nm") config.model_lambda_max_nm = number();
    else if (key == "model.points") config.model_points = integer();
    else if (key == "sweep.lambda_min_nm") config.sweep_lambda_min_nm = number();
    else if (key == "sweep.lambda_max_nm") config.sweep_lambda_max_nm = number();
    else if (key == "sweep.points") config.sweep_points = integer();
    else if (key == "synth.lambda_min_nm") config.synth_lambda_min_nm = number();
    else if (key == "synth.lambda_max_nm") config.synth_lambda_max_nm = number();
    else if (key == "synth.points") config.synth_points = integer();
    else if (key == "synth.kappa") config.synth_kappa = number();
    else if (key == "synth.peak_lambda0_nm") config.synth_peak_lambda0_nm = number();
    else if (key == "synth.peak_q") config.synth_peak_q = number();
    else if (key == "synth.fano_re") config.synth_fano_re = number();
    else if (key == "synth.fano_im") config.synth_fano_im = number();
    else if (key == "synth.fp_scale") config.synth_fp_scale = number();
    else if (key == "synth.floor") config.synth_floor = number();
    else if (key == "synth.noise_sigma") config.synth_noise_sigma = number();
    else if (key == "synth.seed") config.synth_seed = parse_uint64(value, where);
    else if (key == "synth.dips") config.synth_dips = parse_dips(value, where);
    else if (key == "fit.max_iterations") config.fit.max_iterations = integer();
    else if (key == "fit.restarts") config.fit.restarts = integer();
    else if (key == "fit.window_halfwidths") config.fit.window_halfwidths = number();
    else if (key == "fit.exclusion_halfwidths") config.fit.exclusion_halfwidths = number();
    else if (key == "fit.min_prominence") config.fit.min_prominence = number();
    else if (key == "fit.max_peaks") config.fit.max_peaks = integer();
    else throw ConfigError(where + ": unknown key \"" + key + "\"");
}

void check_grid(double lo, double hi, int points, const char* section,
                const std::string& origin) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo > 0.0 && hi > lo))
        throw ConfigError(origin + ": " + section + " wavelength range must satisfy 0 < min < max");
    if (points < 2) throw ConfigError(origin + ": " + section + " needs at least 2 points");
}

} // namespace

RunConfig parse_config_text(std::string_view text, const std::string& origin) {
    RunConfig config;
    const std::vector<std::string_view> lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view raw = lines[i];
        const std::size_t hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(i + 1);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected key = value");
        apply_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
    }

    // Cross-field invariants; single-line diagnostics with the origin only
    // (last-wins duplicates make a line number misleading).
    try {
        validate(config.geometry);
        validate(config.coupling);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(origin + ": " + err.what());
    }
    if (config.model_lambda_min_nm != 0.0 || config.model_lambda_max_nm != 0.0)
        check_grid(config.model_lambda_min_nm, config.model_lambda_max_nm, config.model_points,
                   "model", origin);
    else if (config.model_points < 2)
        throw ConfigError(origin + ": model needs at least 2 points");
    check_grid(config.sweep_lambda_min_nm, config.sweep_lambda_max_nm, config.sweep_points,
               "sweep", origin);
    check_grid(config.synth_lambda_min_nm, config.synth_lambda_max_nm, config.synth_points,
               "synth", origin);
    if (!(config.synth_kappa > 0.0) || !(config.synth_peak_q > 1.0))
        throw ConfigError(origin + ": synth peak needs kappa > 0 and q > 1");
    if (config.synth_noise_sigma < 0.0)
        throw ConfigError(origin + ": synth.noise_sigma must be >= 0");
    if (config.fit.restarts < 1 || config.fit.max_iterations < 1 || config.fit.max_peaks < 1)
        throw ConfigError(origin + ": fit counters must be >= 1");
    return config;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path.string());
}

CompositeModel synth_model_from_config(const RunConfig& config) {
    CompositeModel model;
    FanoPeak peak;
    peak.base = LorentzianPeak::from_wavelength(config.synth_kappa, config.synth_peak_lambda0_nm,
                                                config.synth_peak_q);
    peak.background_re = config.synth_fano_re;
    peak.background_im = config.synth_fano_im;
    model.peaks.push_back(peak);
    model.fp_background.stack.top_cladding_index = config.geometry.n0;
    model.fp_background.stack.layers = {
        {complexd(config.geometry.n1_eff), config.geometry.t1_nm},
        {complexd(config.geometry.n0), config.geometry.t2_nm}};
    model.fp_background.stack.bottom_cladding_index = config.geometry.n3;
    model.fp_background.scale = config.synth_fp_scale;
    model.floor = config.synth_floor;
    validate(model);
    return model;
}

std::string default_config_text() {
    return R"(# Cross-polarized nanocavity reflectance: run configuration.
# Flat key = value pairs; '#' starts a comment; unknown keys are errors.

# 1D stack standing in for the suspended patterned slab: air / effective
# slab / air gap / substrate. n1_eff = 2.62 is calibrated so the modeled
# peak-reflectivity curve over 1280..1620 nm bottoms out at 1370 nm.
geometry.n0 = 1.0
geometry.n1_eff = 2.62
geometry.t1_nm = 200
geometry.t2_nm = 1200
geometry.n3 = 3.4

# Cavity resonance and quality factors (q_cav_*: vertical input/output
# coupling per polarization, q_loss: in-plane parasitic loss).
coupling.lambda0_nm = 1310
coupling.q_cav_x = 10000
coupling.q_cav_y = 10000
coupling.q_loss = 100000000

# "model" subcommand grid. min = max = 0 means auto: resonance +- 25
# total linewidths.
model.lambda_min_nm = 0
model.lambda_max_nm = 0
model.points = 2001

# "sweep" subcommand: resonance positions for the peak-reflectivity curve.
sweep.lambda_min_nm = 1280
sweep.lambda_max_nm = 1620
sweep.points = 341

# "synth" subcommand: synthetic spectrum generator.
synth.lambda_min_nm = 1389
synth.lambda_max_nm = 1391
synth.points = 2001
synth.kappa = 0.5
synth.peak_lambda0_nm = 1390
synth.peak_q = 58000
synth.fano_re = 0
synth.fano_im = 0
synth.fp_scale = 0
synth.floor = 0
synth.noise_sigma = 0
synth.seed = 1
# Absorption dips as center_nm:depth:width_nm triples, comma separated.
synth.dips =

# "fit" subcommand tuning.
fit.max_iterations = 200
fit.restarts = 3
fit.window_halfwidths = 25
fit.exclusion_halfwidths = 5
fit.min_prominence = 0
fit.max_peaks = 3
)";
}

} // namespace ncr
