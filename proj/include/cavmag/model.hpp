#pragma once

// Two-level cavity-magnon model: parameter set, 2x2 complex matrices and
// every Hamiltonian variant (bare, engineered-dissipation, counterdiabatic),
// including the error-perturbed forms used by the robustness sweeps.
//
// Units: omega_d = 1 defines the frequency unit; time is dimensionless in
// units of 1/omega_d. All rates and frequencies are quoted relative to the
// drive frequency.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace cavmag {

using Complex = std::complex<double>;

// Thrown on invalid parameters or malformed run configs (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when the integrator or a matrix assembly fails numerically
// (CLI exit code 3). Carries the time at which the failure occurred.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double t)
        : std::runtime_error(what + " at t = " + std::to_string(t)), time_(t) {}
    double time() const { return time_; }

private:
    double time_;
};

// Physical rates and frequencies, all in units of omega_d.
// kappa_c and kappa_m may be any real: the sign written in the Hamiltonian
// decides whether they act as gain or loss.
struct SystemParams {
    double omega_c = 0.0;
    double omega_m = 0.0;
    double epsilon_m = 0.0;
    double omega_d = 1.0;
    double g_m = 0.0;
    double kappa_c = 0.0;
    double kappa_m = 0.0;

    void validate() const {
        if (!(g_m >= 0.0)) throw ConfigError("g_m must be >= 0");
        if (!(epsilon_m >= 0.0)) throw ConfigError("epsilon_m must be >= 0");
        if (!(omega_d > 0.0)) throw ConfigError("omega_d must be > 0");
        for (double v : {omega_c, omega_m, kappa_c, kappa_m})
            if (!std::isfinite(v)) throw ConfigError("non-finite system parameter");
    }

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

// Dimensionless error knobs. alpha perturbs the coupling strength,
// eta scales the Hamiltonian as a whole. Defaults reproduce the
// unperturbed Hamiltonian exactly.
struct ErrorParams {
    double alpha = 0.0;
    double eta = 0.0;

    friend bool operator==(const ErrorParams&, const ErrorParams&) = default;
};

enum class Protocol {
    Bare,  // constant kappa_c, kappa_m
    NHS,   // both diagonals driven by the engineered dissipation kappa(t)
    CD     // bare Hamiltonian plus the counterdiabatic field
};

// Sign of the i*kappa_c term on the cavity diagonal. AsPrinted keeps the
// published matrix (+i kappa_c cavity, -i kappa_m magnon); LossLoss flips
// the cavity term so both modes are damped. The switch exists for the
// calibration experiments only.
enum class DiagonalSign { AsPrinted, LossLoss };

inline const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::Bare: return "Bare";
        case Protocol::NHS: return "NHS";
        case Protocol::CD: return "CD";
    }
    return "?";
}

inline const char* to_string(DiagonalSign s) {
    return s == DiagonalSign::AsPrinted ? "as-printed" : "loss-loss";
}

// Dense 2x2 complex matrix. Construction rejects NaN/Inf entries.
class ComplexMatrix2 {
public:
    ComplexMatrix2() : e_{} {}
    ComplexMatrix2(Complex a00, Complex a01, Complex a10, Complex a11)
        : e_{a00, a01, a10, a11} {
        for (const Complex& z : e_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw std::invalid_argument("ComplexMatrix2: non-finite entry");
    }

    Complex operator()(int row, int col) const { return e_[2 * row + col]; }

    Complex trace() const { return e_[0] + e_[3]; }

    // max-norm over entries
    double max_norm() const {
        double n = 0.0;
        for (const Complex& z : e_) n = std::max(n, std::abs(z));
        return n;
    }

    ComplexMatrix2 scaled(Complex s) const {
        return {s * e_[0], s * e_[1], s * e_[2], s * e_[3]};
    }

    ComplexMatrix2 operator+(const ComplexMatrix2& o) const {
        return {e_[0] + o.e_[0], e_[1] + o.e_[1], e_[2] + o.e_[2], e_[3] + o.e_[3]};
    }

    ComplexMatrix2 operator-(const ComplexMatrix2& o) const {
        return {e_[0] - o.e_[0], e_[1] - o.e_[1], e_[2] - o.e_[2], e_[3] - o.e_[3]};
    }

    friend bool operator==(const ComplexMatrix2&, const ComplexMatrix2&) = default;

private:
    std::array<Complex, 4> e_;
};

// omega_m(t) = omega_m + epsilon_m cos(omega_d t)
inline double magnon_frequency(const SystemParams& p, double t) {
    return p.omega_m + p.epsilon_m * std::cos(p.omega_d * t);
}

// Delta(t) = omega_c - omega_m(t)
inline double detuning(const SystemParams& p, double t) {
    return p.omega_c - magnon_frequency(p, t);
}

// d/dt Delta(t) = epsilon_m omega_d sin(omega_d t)
inline double detuning_rate(const SystemParams& p, double t) {
    return p.epsilon_m * p.omega_d * std::sin(p.omega_d * t);
}

// Engineered dissipation schedule that cancels the nonadiabatic coupling:
// kappa(t) = -Delta'(t) / (2 sqrt(Delta^2 + 4 g_m^2))
inline double nhs_kappa(const SystemParams& p, double t) {
    const double d = detuning(p, t);
    return -detuning_rate(p, t) / (2.0 * std::sqrt(d * d + 4.0 * p.g_m * p.g_m));
}

namespace detail {

// Complex detuning of the dissipative Hamiltonian: the difference of the
// magnon and cavity diagonal entries, sign convention included.
inline Complex complex_detuning(const SystemParams& p, double t, DiagonalSign sign) {
    const double sc = (sign == DiagonalSign::AsPrinted) ? 1.0 : -1.0;
    const Complex d_cav{p.omega_c, sc * p.kappa_c};
    const Complex d_mag{magnon_frequency(p, t), -p.kappa_m};
    return d_mag - d_cav;
}

}  // namespace detail

// Counterdiabatic coupling field
// Q(t) = i g_m omega_d epsilon_m sin(omega_d t) / (Delta'^2 + 4 g_m^2),
// with Delta' the complex detuning of the dissipative Hamiltonian.
inline Complex cd_coupling(const SystemParams& p, double t,
                           DiagonalSign sign = DiagonalSign::AsPrinted) {
    const Complex dp = detail::complex_detuning(p, t, sign);
    const Complex denom = dp * dp + 4.0 * p.g_m * p.g_m;
    if (std::abs(denom) < 1e-9 * (4.0 * p.g_m * p.g_m))
        throw NumericError("cd_coupling: evaluation too close to the complex pole", t);
    const Complex num =
        Complex(0.0, 1.0) * p.g_m * p.omega_d * p.epsilon_m * std::sin(p.omega_d * t);
    return num / denom;
}

// Assembles the protocol Hamiltonian at time t, with the error model applied:
// alpha perturbs the off-diagonal coupling first, then eta scales the full
// matrix (NHS and CD only; the bare matrix takes alpha alone).
inline ComplexMatrix2 build_hamiltonian(const SystemParams& p, Protocol proto,
                                        const ErrorParams& err, double t,
                                        DiagonalSign sign = DiagonalSign::AsPrinted) {
    const double sc = (sign == DiagonalSign::AsPrinted) ? 1.0 : -1.0;
    const double wm = magnon_frequency(p, t);
    const double gp = (1.0 + err.alpha) * p.g_m;

    switch (proto) {
        case Protocol::Bare:
            return {Complex(p.omega_c, sc * p.kappa_c), gp, gp, Complex(wm, -p.kappa_m)};
        case Protocol::NHS: {
            const double k = nhs_kappa(p, t);
            ComplexMatrix2 h{Complex(p.omega_c, sc * k), gp, gp, Complex(wm, -k)};
            return h.scaled(1.0 + err.eta);
        }
        case Protocol::CD: {
            const Complex q = cd_coupling(p, t, sign);
            ComplexMatrix2 h{Complex(p.omega_c, sc * p.kappa_c),
                             (1.0 + err.alpha) * (p.g_m + q),
                             (1.0 + err.alpha) * (p.g_m - q), Complex(wm, -p.kappa_m)};
            return h.scaled(1.0 + err.eta);
        }
    }
    throw std::logic_error("build_hamiltonian: unknown protocol");
}

}  // namespace cavmag
