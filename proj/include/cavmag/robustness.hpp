#pragma once

// Parameter sweeps of the transition probability over error and phase-space
// coordinates, evaluated cell-by-cell on a worker pool. Cells are written to
// disjoint indices so parallel and serial runs produce identical grids; a
// diverged cell is recorded as a failure and never aborts the sweep.

#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cavmag/dynamics.hpp"
#include "cavmag/model.hpp"
#include "cavmag/spectra.hpp"

namespace cavmag {

enum class SweepAxis { Alpha, Eta, GOverKappaC, KmOverKappaC };

inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::Alpha: return "alpha";
        case SweepAxis::Eta: return "eta";
        case SweepAxis::GOverKappaC: return "g_over_kc";
        case SweepAxis::KmOverKappaC: return "km_over_kc";
    }
    return "?";
}

struct AxisSpec {
    SweepAxis axis = SweepAxis::Alpha;
    double lo = 0.0;
    double hi = 0.0;
    int points = 2;

    void validate() const {
        if (!(lo <= hi)) throw ConfigError("sweep axis: lo must be <= hi");
        if (lo == hi && points != 1)
            throw ConfigError("sweep axis: degenerate range requires points = 1");
        if (points < 1) throw ConfigError("sweep axis: points must be >= 1");
    }

    double value_at(int i) const {
        if (points == 1) return lo;
        return lo + (hi - lo) * i / (points - 1);
    }
};

struct SweepSpec {
    AxisSpec x;
    std::optional<AxisSpec> y;
    SystemParams base;
    Protocol protocol = Protocol::CD;
    ErrorParams base_errors;
    IntegratorConfig integrator;
    DiagonalSign sign = DiagonalSign::AsPrinted;
    int jobs = 0;  // 0: NHS_NUM_THREADS env var, else hardware concurrency
};

struct CellFailure {
    std::size_t index;
    std::string message;
};

struct SweepGrid {
    std::vector<double> x_values;
    std::vector<double> y_values;          // empty for 1D grids
    std::vector<double> values;            // row-major: values[ix * ny + iy]
    std::vector<CellFailure> failures;

    std::size_t nx() const { return x_values.size(); }
    std::size_t ny() const { return y_values.empty() ? 1 : y_values.size(); }
};

namespace detail {

inline int resolve_jobs(int requested) {
    if (const char* env = std::getenv("NHS_NUM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

inline void apply_axis(SweepAxis axis, double v, SystemParams& p, ErrorParams& e) {
    switch (axis) {
        case SweepAxis::Alpha: e.alpha = v; return;
        case SweepAxis::Eta: e.eta = v; return;
        case SweepAxis::GOverKappaC: p.g_m = v * p.kappa_c; return;
        case SweepAxis::KmOverKappaC: p.kappa_m = v * p.kappa_c; return;
    }
}

// Evaluates cells [0, total) with `eval(index) -> double` on `jobs` threads.
// Each thread owns a contiguous slab; failures are merged in index order.
template <typename Eval>
void run_cells(std::size_t total, int jobs, SweepGrid& grid, Eval&& eval) {
    grid.values.assign(total, std::numeric_limits<double>::quiet_NaN());
    const int nthreads = std::min<std::size_t>(std::max(jobs, 1), total);
    std::vector<std::vector<CellFailure>> failures(nthreads);

    auto worker = [&](int tid) {
        const std::size_t chunk = (total + nthreads - 1) / nthreads;
        const std::size_t begin = tid * chunk;
        const std::size_t end = std::min(total, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) {
            try {
                const double v = eval(i);
                if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                    throw std::runtime_error("probability out of range");
                grid.values[i] = v;
            } catch (const std::exception& ex) {
                failures[tid].push_back({i, ex.what()});
            }
        }
    };

    if (nthreads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int tid = 0; tid < nthreads; ++tid) pool.emplace_back(worker, tid);
        for (auto& th : pool) th.join();
    }
    for (auto& fs : failures)
        for (auto& f : fs) grid.failures.push_back(std::move(f));
}

}  // namespace detail

inline SweepGrid sweep_1d(const SweepSpec& spec) {
    spec.x.validate();
    spec.base.validate();
    spec.integrator.validate();

    SweepGrid grid;
    grid.x_values.reserve(spec.x.points);
    for (int i = 0; i < spec.x.points; ++i) grid.x_values.push_back(spec.x.value_at(i));

    detail::run_cells(grid.x_values.size(), detail::resolve_jobs(spec.jobs), grid,
                      [&](std::size_t i) {
                          SystemParams p = spec.base;
                          ErrorParams e = spec.base_errors;
                          detail::apply_axis(spec.x.axis, grid.x_values[i], p, e);
                          return transition_probability(p, spec.protocol, e,
                                                        spec.integrator, spec.sign);
                      });
    return grid;
}

inline SweepGrid sweep_2d(const SweepSpec& spec) {
    if (!spec.y) throw ConfigError("sweep_2d: second axis missing");
    spec.x.validate();
    spec.y->validate();
    spec.base.validate();
    spec.integrator.validate();

    SweepGrid grid;
    for (int i = 0; i < spec.x.points; ++i) grid.x_values.push_back(spec.x.value_at(i));
    for (int j = 0; j < spec.y->points; ++j) grid.y_values.push_back(spec.y->value_at(j));

    const std::size_t ny = grid.y_values.size();
    detail::run_cells(grid.x_values.size() * ny, detail::resolve_jobs(spec.jobs), grid,
                      [&](std::size_t idx) {
                          SystemParams p = spec.base;
                          ErrorParams e = spec.base_errors;
                          detail::apply_axis(spec.x.axis, grid.x_values[idx / ny], p, e);
                          detail::apply_axis(spec.y->axis, grid.y_values[idx % ny], p, e);
                          return transition_probability(p, spec.protocol, e,
                                                        spec.integrator, spec.sign);
                      });
    return grid;
}

// --- phase diagram -----------------------------------------------------

inline int symmetry_code(Symmetry s) {
    switch (s) {
        case Symmetry::PTSymmetric: return 0;
        case Symmetry::BrokenPT: return 1;
        case Symmetry::ExceptionalPoint: return 2;
    }
    return -1;
}

inline int stability_code(Stability s) {
    switch (s) {
        case Stability::Unstable: return 0;
        case Stability::AsymptoticallyStable: return 1;
        case Stability::Marginal: return 2;
    }
    return -1;
}

inline int phase_code(const PhasePoint& pp) {
    return 10 * symmetry_code(pp.symmetry) + stability_code(pp.stability);
}

inline PhasePoint decode_phase(int code) {
    static constexpr Symmetry sym[] = {Symmetry::PTSymmetric, Symmetry::BrokenPT,
                                       Symmetry::ExceptionalPoint};
    static constexpr Stability stab[] = {Stability::Unstable,
                                         Stability::AsymptoticallyStable,
                                         Stability::Marginal};
    return {sym[code / 10], stab[code % 10]};
}

struct PhaseGridSpec {
    double kappa_c = 1.0;   // the unit of the diagram
    int g_points = 200;     // g_m / kappa_c in (0, 2]
    int km_points = 200;    // kappa_m / kappa_c in [0, 3]
    double g_max = 2.0;
    double km_max = 3.0;

    void validate() const {
        if (!(kappa_c > 0.0)) throw ConfigError("phase diagram: kappa_c must be > 0");
        if (g_points < 2 || km_points < 2)
            throw ConfigError("phase diagram: grid must have >= 2 points per axis");
    }
};

// Grid of integer phase codes over (g_m/kappa_c, kappa_m/kappa_c). The g axis
// excludes zero (g/kappa_c = k * g_max / g_points for k = 1..g_points).
inline SweepGrid phase_diagram(const PhaseGridSpec& spec) {
    spec.validate();
    SweepGrid grid;
    for (int i = 0; i < spec.g_points; ++i)
        grid.x_values.push_back(spec.g_max * (i + 1) / spec.g_points);
    for (int j = 0; j < spec.km_points; ++j)
        grid.y_values.push_back(spec.km_max * j / (spec.km_points - 1));

    grid.values.reserve(grid.x_values.size() * grid.y_values.size());
    for (double g : grid.x_values)
        for (double km : grid.y_values)
            grid.values.push_back(phase_code(
                classify_phase(g * spec.kappa_c, spec.kappa_c, km * spec.kappa_c)));
    return grid;
}

// Analytic exceptional-point locus g/kappa_c = (1 + kappa_m/kappa_c)/2,
// sampled at the diagram's kappa_m values.
inline std::vector<std::pair<double, double>> ep_locus(const PhaseGridSpec& spec) {
    std::vector<std::pair<double, double>> line;
    line.reserve(spec.km_points);
    for (int j = 0; j < spec.km_points; ++j) {
        const double km = spec.km_max * j / (spec.km_points - 1);
        line.emplace_back(km, 0.5 * (1.0 + km));
    }
    return line;
}

}  // namespace cavmag
