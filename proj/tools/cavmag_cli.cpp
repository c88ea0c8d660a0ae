// Command-line front end: config ingestion, experiment execution and
// bit-exact data emission for external plotting.
//
// Exit codes: 0 success, 2 config error, 3 numeric failure, 4 I/O failure.

#include <cstdlib>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cavmag/dynamics.hpp"
#include "cavmag/io.hpp"
#include "cavmag/model.hpp"
#include "cavmag/protocols.hpp"
#include "cavmag/robustness.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::string preset;
    std::string time_convention;
    std::string diagonal_sign;
    int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON run config");
    cmd->add_option("--out", opts.out_path, "output file path");
    cmd->add_option("--format", opts.format, "output format (csv or json)")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--jobs", opts.jobs, "worker pool width (0 = all cores)");
    cmd->add_option("--preset", opts.preset, "experiment preset name");
    cmd->add_option("--time-convention", opts.time_convention,
                    "time axis convention (raw, period; both only for calibrate)")
        ->check(CLI::IsMember({"raw", "period", "both"}));
    cmd->add_option("--diagonal-sign", opts.diagonal_sign,
                    "cavity diagonal sign convention")
        ->check(CLI::IsMember({"as-printed", "loss-loss"}));
}

cavmag::RunConfig resolve_config(const CommonOpts& opts, bool need_sweep) {
    cavmag::RunConfig cfg;
    bool have_source = false;
    if (!opts.config_path.empty()) {
        cfg = cavmag::load_config(opts.config_path);
        have_source = true;
    }
    if (!opts.preset.empty()) {
        const auto& preset = cavmag::find_preset(opts.preset);
        cfg.params = preset.params;
        cfg.protocol = preset.protocol;
        cfg.integrator.t_start = preset.t_start;
        cfg.integrator.t_end = preset.t_end;
        have_source = true;
    }
    if (!have_source) throw cavmag::ConfigError("either --config or --preset is required");
    if (need_sweep && !cfg.sweep)
        throw cavmag::ConfigError("this command requires a \"sweep\" config section");

    // flag overrides
    if (!opts.out_path.empty()) cfg.output_path = opts.out_path;
    if (!opts.format.empty())
        cfg.format = opts.format == "json" ? cavmag::OutputFormat::Json
                                           : cavmag::OutputFormat::Csv;
    if (!opts.time_convention.empty()) {
        if (opts.time_convention == "both")
            throw cavmag::ConfigError(
                "--time-convention both is only valid for the calibrate command");
        cfg.time_convention = cavmag::parse_time_convention(opts.time_convention);
    }
    if (!opts.diagonal_sign.empty())
        cfg.diagonal_sign = cavmag::parse_diagonal_sign(opts.diagonal_sign);
    if (opts.jobs > 0) cfg.jobs = opts.jobs;
    if (cfg.sweep) {
        cfg.sweep->sign = cfg.diagonal_sign;
        cfg.sweep->jobs = cfg.jobs;
    }
    if (cfg.output_path.empty()) throw cavmag::ConfigError("no output path (use --out)");
    return cfg;
}

cavmag::IntegratorConfig with_time_convention(cavmag::IntegratorConfig cfg,
                                              cavmag::TimeConvention tc) {
    if (tc == cavmag::TimeConvention::Period) {
        cfg.t_start *= 2.0 * std::numbers::pi;
        cfg.t_end *= 2.0 * std::numbers::pi;
    }
    return cfg;
}

int cmd_simulate(const CommonOpts& opts) {
    const cavmag::RunConfig cfg = resolve_config(opts, false);
    const auto icfg = with_time_convention(cfg.integrator, cfg.time_convention);
    cavmag::Trajectory traj = cavmag::evolve(cfg.params, cfg.protocol, cfg.errors,
                                             {1.0, 0.0}, icfg, cfg.diagonal_sign);
    traj.tracking_fidelity =
        cavmag::tracking_fidelity(cfg.params, cfg.protocol, traj, cfg.diagonal_sign);
    if (cfg.format == cavmag::OutputFormat::Csv)
        cavmag::write_trajectory_csv(traj, cfg.output_path);
    else
        cavmag::write_trajectory_json(traj, cfg.output_path);
    return 0;
}

int cmd_sweep(const CommonOpts& opts) {
    const cavmag::RunConfig cfg = resolve_config(opts, true);
    cavmag::SweepSpec spec = *cfg.sweep;
    spec.integrator = with_time_convention(spec.integrator, cfg.time_convention);
    const cavmag::SweepGrid grid =
        spec.y ? cavmag::sweep_2d(spec) : cavmag::sweep_1d(spec);
    const std::string x_name = spec.y ? cavmag::to_string(spec.x.axis) : "x";
    const std::string y_name = spec.y ? cavmag::to_string(spec.y->axis) : "";
    cavmag::write_grid_csv(grid, x_name, y_name, cfg.output_path);
    return 0;
}

int cmd_phase_diagram(const std::string& out_path, const cavmag::PhaseGridSpec& spec) {
    if (out_path.empty()) throw cavmag::ConfigError("no output path (use --out)");
    const cavmag::SweepGrid grid = cavmag::phase_diagram(spec);
    cavmag::write_phase_diagram_csv(grid, out_path);
    cavmag::write_ep_locus_csv(cavmag::ep_locus(spec), out_path + ".ep_locus");
    return 0;
}

int cmd_calibrate(const CommonOpts& opts) {
    const std::string& out_path = opts.out_path;
    std::vector<cavmag::TimeConvention> conventions{cavmag::TimeConvention::Raw,
                                                    cavmag::TimeConvention::Period};
    if (opts.time_convention == "raw")
        conventions = {cavmag::TimeConvention::Raw};
    else if (opts.time_convention == "period")
        conventions = {cavmag::TimeConvention::Period};
    cavmag::IntegratorConfig cfg;  // defaults; time spans come from the presets
    const cavmag::CalibrationReport report = cavmag::calibrate(cfg, conventions);
    const cavmag::Json j = cavmag::emit_calibration_report(report);
    if (out_path.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        auto out = cavmag::detail::open_output(out_path);
        out << j.dump(2) << '\n';
        if (!out) throw std::ios_base::failure("write failed: " + out_path);
    }
    std::cerr << "best convention: time=" << cavmag::to_string(report.best_time_convention)
              << " diagonal=" << cavmag::to_string(report.best_diagonal_sign)
              << " max deviation=" << report.best_max_deviation
              << (report.matched ? "" : "  [no convention match]") << '\n';
    return 0;
}

int cmd_presets_list() {
    cavmag::Json arr = cavmag::Json::array();
    for (const auto& preset : cavmag::preset_registry())
        arr.push_back(cavmag::emit_preset(preset));
    std::cout << arr.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-level non-Hermitian cavity-magnon transfer experiments"};
    app.require_subcommand(1);

    CommonOpts sim_opts, sweep_opts;
    auto* simulate = app.add_subcommand("simulate", "integrate one trajectory");
    add_common(simulate, sim_opts);
    auto* sweep = app.add_subcommand("sweep", "1D/2D transition-probability sweep");
    add_common(sweep, sweep_opts);

    auto* phase = app.add_subcommand("phase-diagram", "phase/stability grid + EP locus");
    std::string phase_out;
    cavmag::PhaseGridSpec phase_spec;
    phase->add_option("--out", phase_out, "output file path");
    phase->add_option("--kappa-c", phase_spec.kappa_c, "cavity rate used as the unit");
    phase->add_option("--g-points", phase_spec.g_points, "grid points along g_m/kappa_c");
    phase->add_option("--km-points", phase_spec.km_points,
                      "grid points along kappa_m/kappa_c");

    auto* calibrate = app.add_subcommand(
        "calibrate", "score time/sign conventions against published endpoints");
    CommonOpts calibrate_opts;
    calibrate_opts.time_convention = "both";
    add_common(calibrate, calibrate_opts);

    auto* presets = app.add_subcommand("presets", "preset registry");
    auto* presets_list = presets->add_subcommand("list", "list presets as run configs");
    presets->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim_opts);
        if (sweep->parsed()) return cmd_sweep(sweep_opts);
        if (phase->parsed()) return cmd_phase_diagram(phase_out, phase_spec);
        if (calibrate->parsed()) return cmd_calibrate(calibrate_opts);
        if (presets_list->parsed()) return cmd_presets_list();
    } catch (const cavmag::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const cavmag::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
