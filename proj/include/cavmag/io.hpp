#pragma once

// Run-config parsing (strict JSON: unknown keys rejected) and data emission.
// All numbers are written with std::to_chars at 17 significant digits, so
// files are locale-independent and byte-stable for identical doubles.

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cavmag/dynamics.hpp"
#include "cavmag/model.hpp"
#include "cavmag/protocols.hpp"
#include "cavmag/robustness.hpp"

namespace cavmag {

using Json = nlohmann::json;

enum class OutputFormat { Csv, Json };

struct RunConfig {
    SystemParams params;
    Protocol protocol = Protocol::Bare;
    ErrorParams errors;
    IntegratorConfig integrator;
    std::optional<SweepSpec> sweep;  // base/protocol/integrator filled from above
    std::string output_path;
    OutputFormat format = OutputFormat::Csv;
    TimeConvention time_convention = TimeConvention::Raw;
    DiagonalSign diagonal_sign = DiagonalSign::AsPrinted;
    int jobs = 0;
};

// --- number formatting ----------------------------------------------------

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

// --- config parsing ---------------------------------------------------------

namespace detail {

inline void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> known,
                                const std::string& where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            if (item.key() == k) { ok = true; break; }
        if (!ok) throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
    }
}

inline double require_number(const Json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key \"" + std::string(key) + "\" in " + where);
    if (!obj[key].is_number()) throw ConfigError("key \"" + std::string(key) + "\" in " + where + " must be a number");
    return obj[key].get<double>();
}

inline double number_or(const Json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("key \"" + std::string(key) + "\" must be a number");
    return obj[key].get<double>();
}

}  // namespace detail

inline Protocol parse_protocol(const std::string& s) {
    if (s == "Bare") return Protocol::Bare;
    if (s == "NHS") return Protocol::NHS;
    if (s == "CD") return Protocol::CD;
    throw ConfigError("protocol must be one of Bare, NHS, CD (got \"" + s + "\")");
}

inline DiagonalSign parse_diagonal_sign(const std::string& s) {
    if (s == "as-printed") return DiagonalSign::AsPrinted;
    if (s == "loss-loss") return DiagonalSign::LossLoss;
    throw ConfigError("diagonal_sign must be as-printed or loss-loss");
}

inline TimeConvention parse_time_convention(const std::string& s) {
    if (s == "raw") return TimeConvention::Raw;
    if (s == "period") return TimeConvention::Period;
    throw ConfigError("time_convention must be raw or period");
}

inline SweepAxis parse_sweep_axis(const std::string& s) {
    if (s == "alpha") return SweepAxis::Alpha;
    if (s == "eta") return SweepAxis::Eta;
    if (s == "g_over_kc") return SweepAxis::GOverKappaC;
    if (s == "km_over_kc") return SweepAxis::KmOverKappaC;
    throw ConfigError("unknown sweep axis \"" + s + "\"");
}

inline SystemParams parse_system_params(const Json& j) {
    detail::reject_unknown_keys(
        j, {"omega_c", "omega_m", "epsilon_m", "omega_d", "g_m", "kappa_c", "kappa_m"},
        "params");
    SystemParams p;
    p.omega_c = detail::require_number(j, "omega_c", "params");
    p.omega_m = detail::require_number(j, "omega_m", "params");
    p.epsilon_m = detail::require_number(j, "epsilon_m", "params");
    p.omega_d = detail::number_or(j, "omega_d", 1.0);
    p.g_m = detail::require_number(j, "g_m", "params");
    p.kappa_c = detail::number_or(j, "kappa_c", 0.0);
    p.kappa_m = detail::number_or(j, "kappa_m", 0.0);
    p.validate();
    return p;
}

inline IntegratorConfig parse_integrator(const Json& j) {
    detail::reject_unknown_keys(
        j, {"rel_tol", "abs_tol", "max_step", "t_start", "t_end", "sample_count"},
        "integrator");
    IntegratorConfig cfg;
    cfg.rel_tol = detail::number_or(j, "rel_tol", cfg.rel_tol);
    cfg.abs_tol = detail::number_or(j, "abs_tol", cfg.abs_tol);
    cfg.max_step = detail::number_or(j, "max_step", cfg.max_step);
    cfg.t_start = detail::number_or(j, "t_start", cfg.t_start);
    cfg.t_end = detail::number_or(j, "t_end", cfg.t_end);
    if (j.contains("sample_count")) {
        if (!j["sample_count"].is_number_integer())
            throw ConfigError("sample_count must be an integer");
        cfg.sample_count = j["sample_count"].get<int>();
    }
    cfg.validate();
    return cfg;
}

inline AxisSpec parse_axis(const Json& j, const char* axis_key, const char* range_key,
                           const char* points_key) {
    AxisSpec ax;
    if (!j.contains(axis_key)) throw ConfigError("sweep: missing " + std::string(axis_key));
    ax.axis = parse_sweep_axis(j[axis_key].get<std::string>());
    if (!j.contains(range_key) || !j[range_key].is_array() || j[range_key].size() != 2)
        throw ConfigError("sweep: " + std::string(range_key) + " must be [lo, hi]");
    ax.lo = j[range_key][0].get<double>();
    ax.hi = j[range_key][1].get<double>();
    if (!j.contains(points_key)) throw ConfigError("sweep: missing " + std::string(points_key));
    ax.points = j[points_key].get<int>();
    ax.validate();
    return ax;
}

inline RunConfig parse_config(const Json& j) {
    detail::reject_unknown_keys(j,
                                {"params", "protocol", "errors", "integrator", "sweep",
                                 "output", "time_convention", "diagonal_sign", "jobs"},
                                "config");
    RunConfig cfg;
    if (!j.contains("params")) throw ConfigError("config: missing params");
    cfg.params = parse_system_params(j["params"]);
    if (!j.contains("protocol")) throw ConfigError("config: missing protocol");
    cfg.protocol = parse_protocol(j["protocol"].get<std::string>());
    if (j.contains("errors")) {
        detail::reject_unknown_keys(j["errors"], {"alpha", "eta"}, "errors");
        cfg.errors.alpha = detail::number_or(j["errors"], "alpha", 0.0);
        cfg.errors.eta = detail::number_or(j["errors"], "eta", 0.0);
    }
    if (j.contains("integrator")) cfg.integrator = parse_integrator(j["integrator"]);
    if (j.contains("output")) {
        detail::reject_unknown_keys(j["output"], {"path", "format"}, "output");
        if (j["output"].contains("path"))
            cfg.output_path = j["output"]["path"].get<std::string>();
        if (j["output"].contains("format")) {
            const std::string f = j["output"]["format"].get<std::string>();
            if (f == "csv") cfg.format = OutputFormat::Csv;
            else if (f == "json") cfg.format = OutputFormat::Json;
            else throw ConfigError("output.format must be csv or json");
        }
    }
    if (j.contains("time_convention"))
        cfg.time_convention = parse_time_convention(j["time_convention"].get<std::string>());
    if (j.contains("diagonal_sign"))
        cfg.diagonal_sign = parse_diagonal_sign(j["diagonal_sign"].get<std::string>());
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
    if (j.contains("sweep")) {
        const Json& js = j["sweep"];
        detail::reject_unknown_keys(js,
                                    {"x_axis", "x_range", "x_points", "y_axis", "y_range",
                                     "y_points"},
                                    "sweep");
        SweepSpec spec;
        spec.x = parse_axis(js, "x_axis", "x_range", "x_points");
        if (js.contains("y_axis"))
            spec.y = parse_axis(js, "y_axis", "y_range", "y_points");
        spec.base = cfg.params;
        spec.protocol = cfg.protocol;
        spec.base_errors = cfg.errors;
        spec.integrator = cfg.integrator;
        spec.sign = cfg.diagonal_sign;
        spec.jobs = cfg.jobs;
        cfg.sweep = std::move(spec);
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

// --- config emission (round-trip partner of parse_config) ------------------

inline Json emit_system_params(const SystemParams& p) {
    return Json{{"omega_c", p.omega_c}, {"omega_m", p.omega_m}, {"epsilon_m", p.epsilon_m},
                {"omega_d", p.omega_d}, {"g_m", p.g_m},         {"kappa_c", p.kappa_c},
                {"kappa_m", p.kappa_m}};
}

inline Json emit_integrator(const IntegratorConfig& cfg) {
    return Json{{"rel_tol", cfg.rel_tol},   {"abs_tol", cfg.abs_tol},
                {"max_step", cfg.max_step}, {"t_start", cfg.t_start},
                {"t_end", cfg.t_end},       {"sample_count", cfg.sample_count}};
}

inline Json emit_config(const RunConfig& cfg) {
    Json j;
    j["params"] = emit_system_params(cfg.params);
    j["protocol"] = to_string(cfg.protocol);
    j["errors"] = Json{{"alpha", cfg.errors.alpha}, {"eta", cfg.errors.eta}};
    j["integrator"] = emit_integrator(cfg.integrator);
    if (!cfg.output_path.empty() || cfg.format != OutputFormat::Csv)
        j["output"] = Json{{"path", cfg.output_path},
                           {"format", cfg.format == OutputFormat::Csv ? "csv" : "json"}};
    j["time_convention"] = to_string(cfg.time_convention);
    j["diagonal_sign"] = to_string(cfg.diagonal_sign);
    if (cfg.jobs != 0) j["jobs"] = cfg.jobs;
    if (cfg.sweep) {
        Json js;
        js["x_axis"] = to_string(cfg.sweep->x.axis);
        js["x_range"] = {cfg.sweep->x.lo, cfg.sweep->x.hi};
        js["x_points"] = cfg.sweep->x.points;
        if (cfg.sweep->y) {
            js["y_axis"] = to_string(cfg.sweep->y->axis);
            js["y_range"] = {cfg.sweep->y->lo, cfg.sweep->y->hi};
            js["y_points"] = cfg.sweep->y->points;
        }
        j["sweep"] = js;
    }
    return j;
}

// Presets serialize with a "config" member in the exact document format the
// CLI ingests, so a preset listing can be fed straight back into --config.
inline Json emit_preset(const ExperimentPreset& preset) {
    RunConfig cfg;
    cfg.params = preset.params;
    cfg.protocol = preset.protocol;
    cfg.integrator.t_start = preset.t_start;
    cfg.integrator.t_end = preset.t_end;
    Json j;
    j["name"] = preset.name;
    j["config"] = emit_config(cfg);
    if (preset.expected) {
        j["expected"] = Json{{"p1r", preset.expected->p1r},
                             {"tol", preset.expected->tol},
                             {"note", preset.expected->note}};
    }
    return j;
}

// --- writers ----------------------------------------------------------------

namespace detail {

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: no newline translation
    if (!out) throw std::ios_base::failure("cannot open output file: " + path);
    return out;
}

}  // namespace detail

inline void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    auto out = detail::open_output(path);
    out << "t,re_a,im_a,re_m,im_m,p0r,p1r,log_scale,tracking_fidelity\n";
    const bool has_fid = traj.tracking_fidelity.size() == traj.times.size();
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out << format_double(traj.times[i]) << ','
            << format_double(traj.states[i].a.real()) << ','
            << format_double(traj.states[i].a.imag()) << ','
            << format_double(traj.states[i].m.real()) << ','
            << format_double(traj.states[i].m.imag()) << ','
            << format_double(traj.p0r[i]) << ',' << format_double(traj.p1r[i]) << ','
            << format_double(traj.log_scale[i]) << ','
            << (has_fid ? format_double(traj.tracking_fidelity[i]) : "nan") << '\n';
    }
    if (!out) throw std::ios_base::failure("write failed: " + path);
}

inline void write_trajectory_json(const Trajectory& traj, const std::string& path) {
    Json j;
    j["t"] = traj.times;
    Json a_re = Json::array(), a_im = Json::array(), m_re = Json::array(),
         m_im = Json::array();
    for (const auto& s : traj.states) {
        a_re.push_back(s.a.real());
        a_im.push_back(s.a.imag());
        m_re.push_back(s.m.real());
        m_im.push_back(s.m.imag());
    }
    j["re_a"] = a_re;
    j["im_a"] = a_im;
    j["re_m"] = m_re;
    j["im_m"] = m_im;
    j["p0r"] = traj.p0r;
    j["p1r"] = traj.p1r;
    j["log_scale"] = traj.log_scale;
    if (traj.tracking_fidelity.size() == traj.times.size())
        j["tracking_fidelity"] = traj.tracking_fidelity;
    auto out = detail::open_output(path);
    out << j.dump(2) << '\n';
    if (!out) throw std::ios_base::failure("write failed: " + path);
}

// 1D grids: "x,probability". 2D grids: "<x>,<y>,probability" in row-major
// order. Cell failures go to a sidecar "<path>.errors".
inline void write_grid_csv(const SweepGrid& grid, const std::string& x_name,
                           const std::string& y_name, const std::string& path) {
    auto out = detail::open_output(path);
    if (grid.y_values.empty()) {
        out << x_name << ",probability\n";
        for (std::size_t i = 0; i < grid.x_values.size(); ++i)
            out << format_double(grid.x_values[i]) << ','
                << format_double(grid.values[i]) << '\n';
    } else {
        out << x_name << ',' << y_name << ",probability\n";
        const std::size_t ny = grid.y_values.size();
        for (std::size_t ix = 0; ix < grid.x_values.size(); ++ix)
            for (std::size_t iy = 0; iy < ny; ++iy)
                out << format_double(grid.x_values[ix]) << ','
                    << format_double(grid.y_values[iy]) << ','
                    << format_double(grid.values[ix * ny + iy]) << '\n';
    }
    if (!out) throw std::ios_base::failure("write failed: " + path);

    if (!grid.failures.empty()) {
        auto err = detail::open_output(path + ".errors");
        err << "index,message\n";
        for (const auto& f : grid.failures) err << f.index << ",\"" << f.message << "\"\n";
    }
}

inline void write_phase_diagram_csv(const SweepGrid& grid, const std::string& path) {
    auto out = detail::open_output(path);
    out << "g_over_kc,km_over_kc,symmetry_code,stability_code\n";
    const std::size_t ny = grid.y_values.size();
    for (std::size_t ix = 0; ix < grid.x_values.size(); ++ix)
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const int code = static_cast<int>(grid.values[ix * ny + iy]);
            out << format_double(grid.x_values[ix]) << ','
                << format_double(grid.y_values[iy]) << ',' << code / 10 << ','
                << code % 10 << '\n';
        }
    if (!out) throw std::ios_base::failure("write failed: " + path);
}

inline void write_ep_locus_csv(const std::vector<std::pair<double, double>>& line,
                               const std::string& path) {
    auto out = detail::open_output(path);
    out << "km_over_kc,g_over_kc\n";
    for (const auto& [km, g] : line)
        out << format_double(km) << ',' << format_double(g) << '\n';
    if (!out) throw std::ios_base::failure("write failed: " + path);
}

inline Json emit_calibration_report(const CalibrationReport& report) {
    Json j;
    Json entries = Json::array();
    for (const auto& e : report.entries) {
        Json je{{"preset", e.preset},
                {"time_convention", to_string(e.time_convention)},
                {"diagonal_sign", to_string(e.diagonal_sign)},
                {"diverged", e.diverged}};
        if (!e.diverged) je["endpoint_p1r"] = e.endpoint_p1r;
        if (e.expected) je["expected_p1r"] = *e.expected;
        if (e.deviation) {
            je["deviation"] = std::isfinite(*e.deviation) ? Json(*e.deviation)
                                                          : Json("divergent");
        }
        entries.push_back(std::move(je));
    }
    j["entries"] = entries;
    j["best_time_convention"] = to_string(report.best_time_convention);
    j["best_diagonal_sign"] = to_string(report.best_diagonal_sign);
    j["best_max_deviation"] = report.best_max_deviation;
    j["match_tolerance"] = report.match_tolerance;
    j["matched"] = report.matched;
    if (!report.matched) j["flag"] = "no convention match";
    return j;
}

}  // namespace cavmag
