#pragma once

// Time evolution of the amplitude equations psi' = -i H(t) psi with an
// adaptive Dormand-Prince 5(4) pair, plus the trajectory diagnostics:
// relative populations, overflow-protected norm bookkeeping and the
// biorthogonal adiabatic-tracking fidelity.

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "cavmag/model.hpp"
#include "cavmag/spectra.hpp"

namespace cavmag {

struct StateVector2 {
    Complex a;  // cavity amplitude
    Complex m;  // magnon amplitude

    double norm() const { return std::sqrt(std::norm(a) + std::norm(m)); }

    bool finite() const {
        return std::isfinite(a.real()) && std::isfinite(a.imag()) &&
               std::isfinite(m.real()) && std::isfinite(m.imag());
    }
};

// (|a|^2, |m|^2) / (|a|^2 + |m|^2)
inline std::pair<double, double> relative_populations(const StateVector2& s) {
    const double pa = std::norm(s.a);
    const double pm = std::norm(s.m);
    const double tot = pa + pm;
    if (!(tot > 0.0))
        throw std::invalid_argument("relative_populations: zero-norm state");
    return {pa / tot, pm / tot};
}

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 1e-2;
    double t_start = 0.0;
    double t_end = 2.0;
    int sample_count = 1001;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw ConfigError("integrator tolerances must be > 0");
        if (!(max_step > 0.0)) throw ConfigError("max_step must be > 0");
        if (!(t_end > t_start)) throw ConfigError("t_end must exceed t_start");
        if (sample_count < 2) throw ConfigError("sample_count must be >= 2");
    }

    friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector2> states;  // rescaled; true amplitude = state * exp(log_scale)
    std::vector<double> p0r, p1r;
    std::vector<double> log_scale;
    std::vector<double> tracking_fidelity;  // optional; empty unless computed
};

namespace detail {

inline StateVector2 rhs(const ComplexMatrix2& h, const StateVector2& y) {
    const Complex mi{0.0, -1.0};
    return {mi * (h(0, 0) * y.a + h(0, 1) * y.m), mi * (h(1, 0) * y.a + h(1, 1) * y.m)};
}

inline StateVector2 axpy(const StateVector2& y, double c, const StateVector2& k) {
    return {y.a + c * k.a, y.m + c * k.m};
}

}  // namespace detail

// Integrates psi' = -i H(t) psi over [t_start, t_end], sampling at
// sample_count uniform times. Whenever the running norm leaves
// [1e-150, 1e150] the state is rescaled to unit norm and the exponent
// accumulated into log_scale; relative populations are unaffected.
inline Trajectory evolve(const SystemParams& p, Protocol proto, const ErrorParams& err,
                         StateVector2 psi0, const IntegratorConfig& cfg,
                         DiagonalSign sign = DiagonalSign::AsPrinted) {
    p.validate();
    cfg.validate();
    // component-wise zero test: the squared norm underflows for magnitudes
    // below ~1e-154 that are still perfectly representable
    if (!psi0.finite() || (std::abs(psi0.a) == 0.0 && std::abs(psi0.m) == 0.0))
        throw ConfigError("evolve: initial state must be finite and nonzero");

    // Dormand-Prince 5(4) coefficients
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // embedded 4th-order weights
    static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                            e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

    auto hamiltonian = [&](double t) { return build_hamiltonian(p, proto, err, t, sign); };

    Trajectory traj;
    traj.times.reserve(cfg.sample_count);
    traj.states.reserve(cfg.sample_count);

    const double span = cfg.t_end - cfg.t_start;
    double t = cfg.t_start;
    StateVector2 y = psi0;
    double log_scale = 0.0;

    // Rescaling is keyed to the largest component magnitude, which neither
    // overflows nor underflows where the squared norm would.
    auto maybe_rescale = [&]() {
        const double n = std::max(std::abs(y.a), std::abs(y.m));
        if (n > 1e150 || (n > 0.0 && n < 1e-150)) {
            y = {y.a / n, y.m / n};
            log_scale += std::log(n);
        }
    };
    maybe_rescale();

    // The absolute tolerance is anchored to the initial state magnitude so
    // that error control -- and hence the relative populations -- is exactly
    // invariant under scaling the initial state.
    const double abs_floor =
        cfg.abs_tol * std::max(std::abs(y.a), std::abs(y.m));

    auto record = [&](double ts) {
        auto [p0, p1] = relative_populations(y);
        traj.times.push_back(ts);
        traj.states.push_back(y);
        traj.p0r.push_back(p0);
        traj.p1r.push_back(p1);
        traj.log_scale.push_back(log_scale);
    };
    record(t);

    StateVector2 k1 = detail::rhs(hamiltonian(t), y);  // FSAL
    double h = std::min(cfg.max_step, span / (cfg.sample_count - 1));

    for (int sample = 1; sample < cfg.sample_count; ++sample) {
        const double t_target = cfg.t_start + span * sample / (cfg.sample_count - 1);
        while (t < t_target) {
            const double remaining = t_target - t;
            if (remaining <= std::abs(t_target) * 1e-14) {
                t = t_target;  // within rounding of the sample time already
                break;
            }
            h = std::min({h, cfg.max_step, remaining});
            if (!(h > std::abs(t) * 1e-14 + 1e-300))
                throw NumericError("evolve: step size underflow", t);

            const StateVector2 y2 = detail::axpy(y, h * a21, k1);
            const StateVector2 k2 = detail::rhs(hamiltonian(t + c2 * h), y2);
            StateVector2 y3 = y;
            y3 = detail::axpy(y3, h * a31, k1);
            y3 = detail::axpy(y3, h * a32, k2);
            const StateVector2 k3 = detail::rhs(hamiltonian(t + c3 * h), y3);
            StateVector2 y4 = y;
            y4 = detail::axpy(y4, h * a41, k1);
            y4 = detail::axpy(y4, h * a42, k2);
            y4 = detail::axpy(y4, h * a43, k3);
            const StateVector2 k4 = detail::rhs(hamiltonian(t + c4 * h), y4);
            StateVector2 y5 = y;
            y5 = detail::axpy(y5, h * a51, k1);
            y5 = detail::axpy(y5, h * a52, k2);
            y5 = detail::axpy(y5, h * a53, k3);
            y5 = detail::axpy(y5, h * a54, k4);
            const StateVector2 k5 = detail::rhs(hamiltonian(t + c5 * h), y5);
            StateVector2 y6 = y;
            y6 = detail::axpy(y6, h * a61, k1);
            y6 = detail::axpy(y6, h * a62, k2);
            y6 = detail::axpy(y6, h * a63, k3);
            y6 = detail::axpy(y6, h * a64, k4);
            y6 = detail::axpy(y6, h * a65, k5);
            const StateVector2 k6 = detail::rhs(hamiltonian(t + h), y6);
            StateVector2 ynew = y;
            ynew = detail::axpy(ynew, h * b1, k1);
            ynew = detail::axpy(ynew, h * b3, k3);
            ynew = detail::axpy(ynew, h * b4, k4);
            ynew = detail::axpy(ynew, h * b5, k5);
            ynew = detail::axpy(ynew, h * b6, k6);
            const StateVector2 k7 = detail::rhs(hamiltonian(t + h), ynew);

            StateVector2 yhat = y;
            yhat = detail::axpy(yhat, h * e1, k1);
            yhat = detail::axpy(yhat, h * e3, k3);
            yhat = detail::axpy(yhat, h * e4, k4);
            yhat = detail::axpy(yhat, h * e5, k5);
            yhat = detail::axpy(yhat, h * e6, k6);
            yhat = detail::axpy(yhat, h * e7, k7);

            if (!ynew.finite())
                throw NumericError("evolve: non-finite state", t + h);

            auto scaled_err = [&](Complex v, Complex w, Complex diff) {
                const double sc =
                    abs_floor + cfg.rel_tol * std::max(std::abs(v), std::abs(w));
                return std::norm(diff) / (sc * sc);
            };
            const double err_norm =
                std::sqrt(0.5 * (scaled_err(y.a, ynew.a, ynew.a - yhat.a) +
                                 scaled_err(y.m, ynew.m, ynew.m - yhat.m)));

            if (err_norm <= 1.0) {
                t += h;
                y = ynew;
                k1 = k7;
                const double scale_before = log_scale;
                maybe_rescale();
                if (log_scale != scale_before)  // rescaled; k1 no longer matches
                    k1 = detail::rhs(hamiltonian(t), y);
            }
            const double fac =
                (err_norm > 0.0) ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
            h *= std::clamp(fac, 0.2, 5.0);
        }
        record(t_target);
    }

    return traj;
}

// Squared overlap of the evolving state with the instantaneous tracked right
// eigenstate, extracted through the biorthogonal left covector:
//   f = |left_k . psi|^2 * ||right_k||^2 / ||psi||^2.
// The tracked branch maximizes the overlap at the first sample and is then
// followed by continuity. Samples with a defective eigensystem yield NaN.
// The reference eigenbasis is the protocol's adiabatic target: for CD that is
// the underlying dissipative Hamiltonian without the auxiliary field, since
// the auxiliary field exists precisely to keep the state on those branches.
inline std::vector<double> tracking_fidelity(const SystemParams& p, Protocol proto,
                                             const Trajectory& traj,
                                             DiagonalSign sign = DiagonalSign::AsPrinted) {
    const Protocol reference = (proto == Protocol::CD) ? Protocol::Bare : proto;
    std::vector<double> out;
    out.reserve(traj.times.size());
    std::optional<Vector2> prev_tracked;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const EigenSystem es =
            eigensystem(build_hamiltonian(p, reference, {}, traj.times[i], sign));
        if (es.defective) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const Vector2 psi{traj.states[i].a, traj.states[i].m};
        const double psi2 = std::norm(psi.c0) + std::norm(psi.c1);
        auto fidelity = [&](const Vector2& left, const Vector2& right) {
            const double r2 = std::norm(right.c0) + std::norm(right.c1);
            return std::norm(left.dot(psi)) * r2 / psi2;
        };
        int branch;
        if (!prev_tracked) {
            branch = fidelity(es.left1, es.right1) >= fidelity(es.left2, es.right2) ? 1 : 2;
        } else {
            branch = std::abs(prev_tracked->inner(es.right1)) >=
                             std::abs(prev_tracked->inner(es.right2))
                         ? 1
                         : 2;
        }
        const Vector2& right = branch == 1 ? es.right1 : es.right2;
        const Vector2& left = branch == 1 ? es.left1 : es.left2;
        out.push_back(fidelity(left, right));
        prev_tracked = right;
    }
    return out;
}

// Endpoint magnon population of a transfer run started from the pure
// photon state (1, 0).
inline double transition_probability(const SystemParams& p, Protocol proto,
                                     const ErrorParams& err, const IntegratorConfig& cfg,
                                     DiagonalSign sign = DiagonalSign::AsPrinted) {
    const Trajectory traj = evolve(p, proto, err, {1.0, 0.0}, cfg, sign);
    return traj.p1r.back();
}

}  // namespace cavmag
