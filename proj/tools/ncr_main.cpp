#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ncr/cavity.hpp"
#include "ncr/fit.hpp"
#include "ncr/io.hpp"
#include "ncr/lattice.hpp"
#include "ncr/lineshape.hpp"

namespace {

std::vector<double> linspace(double lo, double hi, int points) {
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    grid.back() = hi;
    return grid;
}

int run_synth(const std::string& config_path, const std::string& out_path) {
    const ncr::RunConfig config = ncr::parse_config_file(config_path);
    const ncr::CompositeModel model = ncr::synth_model_from_config(config);
    ncr::Spectrum spectrum = ncr::synthesize_spectrum(
        model,
        linspace(config.synth_lambda_min_nm, config.synth_lambda_max_nm, config.synth_points),
        config.synth_noise_sigma, config.synth_dips, config.synth_seed);
    spectrum.meta = "synthetic composite spectrum (seed " +
                    std::to_string(config.synth_seed) + ")";
    ncr::write_spectrum(out_path, spectrum);
    return 0;
}

int run_fit(const std::string& in_path, const std::string& config_path,
            const std::string& report_path) {
    const ncr::RunConfig config = ncr::parse_config_file(config_path);
    const ncr::Spectrum spectrum = ncr::read_spectrum(in_path);
    std::vector<ncr::FitResult> results;
    try {
        results = ncr::analyze_spectrum(spectrum, config.geometry, config.fit);
    } catch (const ncr::NoSignificantPeakError& err) {
        ncr::write_fit_report(report_path, {}, {std::string("no significant peak: ") +
                                                err.what()});
        std::cerr << "fit: no significant peak: " << err.what() << '\n';
        return 2;
    }
    ncr::write_fit_report(report_path, results);
    for (const ncr::FitResult& result : results)
        if (!result.converged) {
            std::cerr << "fit: peak at " << ncr::format_double(result.lambda0_nm)
                      << " nm did not converge\n";
            return 2;
        }
    return 0;
}

int run_model(const std::string& config_path, const std::string& out_path) {
    const ncr::RunConfig config = ncr::parse_config_file(config_path);
    double lo = config.model_lambda_min_nm, hi = config.model_lambda_max_nm;
    if (lo == 0.0 && hi == 0.0) { // auto window: resonance +- 25 linewidths
        const double q_total = ncr::total_q_estimate(config.coupling);
        const double half = 25.0 * config.coupling.lambda0_nm / q_total;
        if (!(half > 0.0) || !std::isfinite(half))
            throw ncr::ConfigError(
                "model: cannot auto-range an infinitely narrow resonance; "
                "set model.lambda_min_nm / model.lambda_max_nm");
        lo = config.coupling.lambda0_nm - half;
        hi = config.coupling.lambda0_nm + half;
    }
    ncr::Spectrum spectrum = ncr::cross_pol_spectrum(config.geometry, config.coupling,
                                                     linspace(lo, hi, config.model_points));
    spectrum.meta = "cross-polarized reflectance model";
    ncr::write_spectrum(out_path, spectrum);
    return 0;
}

int run_sweep(const std::string& config_path, const std::string& out_path) {
    const ncr::RunConfig config = ncr::parse_config_file(config_path);
    const std::vector<ncr::SweepPoint> curve = ncr::sweep_peak_reflectivity(
        config.geometry, config.coupling,
        linspace(config.sweep_lambda_min_nm, config.sweep_lambda_max_nm, config.sweep_points));
    std::vector<std::vector<double>> rows;
    rows.reserve(curve.size());
    for (const ncr::SweepPoint& point : curve)
        rows.push_back({point.lambda_res_nm, point.r_peak});
    ncr::write_table(out_path, {"lambda_res_nm", "r_peak"}, rows,
                     {"peak cross-polarized reflectivity vs resonance position"});
    return 0;
}

int run_qtheo(const std::string& shift_text, double a_nm) {
    const ncr::HoleShift shift = ncr::hole_shift_from_string(shift_text);
    std::cout << "q_theo = " << ncr::format_double(ncr::q_theo(a_nm, shift)) << '\n'
              << "lambda_res_nm = " << ncr::format_double(ncr::resonant_wavelength(a_nm))
              << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-polarized nanocavity reflectance toolkit"};
    app.require_subcommand(1);

    std::string config_path, in_path, out_path, report_path, shift_text;
    double a_nm = 350.0;

    CLI::App* synth = app.add_subcommand("synth", "synthesize a spectrum from the config");
    synth->add_option("--config", config_path, "run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    synth->add_option("--out", out_path, "output spectrum file")->required();

    CLI::App* fit = app.add_subcommand("fit", "detect and fit cavity peaks in a spectrum");
    fit->add_option("--in", in_path, "input spectrum file")->required()->check(CLI::ExistingFile);
    fit->add_option("--config", config_path, "run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    fit->add_option("--report", report_path, "output fit report (CSV)")->required();

    CLI::App* model = app.add_subcommand("model", "cross-polarized reflectance spectrum");
    model->add_option("--config", config_path, "run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    model->add_option("--out", out_path, "output spectrum file")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "peak reflectivity vs resonance position");
    sweep->add_option("--config", config_path, "run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--out", out_path, "output table (CSV)")->required();

    CLI::App* qtheo = app.add_subcommand("qtheo", "tabulated Q_theo and resonance wavelength");
    qtheo->add_option("--shift", shift_text, "end-hole shift: none, 0.1a or 0.2a")->required();
    qtheo->add_option("--a", a_nm, "lattice constant in nm")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::CallForAllHelp& help) {
        return app.exit(help);
    } catch (const CLI::ParseError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }

    try {
        if (synth->parsed()) return run_synth(config_path, out_path);
        if (fit->parsed()) return run_fit(in_path, config_path, report_path);
        if (model->parsed()) return run_model(config_path, out_path);
        if (sweep->parsed()) return run_sweep(config_path, out_path);
        if (qtheo->parsed()) return run_qtheo(shift_text, a_nm);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
