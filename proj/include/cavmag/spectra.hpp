#pragma once

// Instantaneous spectral data of the two-level non-Hermitian Hamiltonian:
// right/left eigensystem with biorthogonal normalization, adiabatic basis
// and frame Hamiltonian, supermode frequencies and the PT-phase/stability
// classification.

#include <algorithm>
#include <cmath>
#include <complex>

#include "cavmag/model.hpp"

namespace cavmag {

struct Vector2 {
    Complex c0, c1;

    double norm() const { return std::sqrt(std::norm(c0) + std::norm(c1)); }

    // bilinear dot (no conjugation), used for biorthogonal pairings
    Complex dot(const Vector2& o) const { return c0 * o.c0 + c1 * o.c1; }

    // sesquilinear inner product <this|o>
    Complex inner(const Vector2& o) const {
        return std::conj(c0) * o.c0 + std::conj(c1) * o.c1;
    }
};

// Eigen data of a 2x2 complex matrix. lambda1 carries the principal "+"
// branch of the square root. Right eigenvectors are unit Euclidean norm;
// left covectors are scaled so that left_k . right_k = 1 (bilinear pairing),
// which makes left_j . right_k vanish for j != k.
struct EigenSystem {
    Complex lambda1, lambda2;
    Vector2 right1, right2;
    Vector2 left1, left2;
    bool defective = false;
};

inline Vector2 apply(const ComplexMatrix2& h, const Vector2& v) {
    return {h(0, 0) * v.c0 + h(0, 1) * v.c1, h(1, 0) * v.c0 + h(1, 1) * v.c1};
}

inline EigenSystem eigensystem(const ComplexMatrix2& h) {
    EigenSystem es;
    const Complex mean = 0.5 * (h(0, 0) + h(1, 1));
    const Complex d = 0.5 * (h(0, 0) - h(1, 1));
    const Complex s = std::sqrt(d * d + h(0, 1) * h(1, 0));
    es.lambda1 = mean + s;
    es.lambda2 = mean - s;

    const double scale = h.max_norm();
    es.defective = std::abs(es.lambda1 - es.lambda2) < 1e-8 * scale;
    if (es.defective) return es;

    // For each eigenvalue, two algebraically equivalent eigenvector
    // constructions exist; pick the better-conditioned one.
    auto right_for = [&](Complex lambda) {
        Vector2 a{h(0, 1), lambda - h(0, 0)};
        Vector2 b{lambda - h(1, 1), h(1, 0)};
        Vector2 v = (a.norm() >= b.norm()) ? a : b;
        const double n = v.norm();
        return Vector2{v.c0 / n, v.c1 / n};
    };
    auto left_for = [&](Complex lambda) {
        Vector2 a{h(1, 0), lambda - h(0, 0)};
        Vector2 b{lambda - h(1, 1), h(0, 1)};
        return (a.norm() >= b.norm()) ? a : b;
    };

    es.right1 = right_for(es.lambda1);
    es.right2 = right_for(es.lambda2);
    Vector2 l1 = left_for(es.lambda1);
    Vector2 l2 = left_for(es.lambda2);
    const Complex n1 = l1.dot(es.right1);
    const Complex n2 = l2.dot(es.right2);
    if (std::abs(n1) < 1e-14 || std::abs(n2) < 1e-14) {
        es.defective = true;
        return es;
    }
    es.left1 = {l1.c0 / n1, l1.c1 / n1};
    es.left2 = {l2.c0 / n2, l2.c1 / n2};
    return es;
}

enum class Symmetry { PTSymmetric, BrokenPT, ExceptionalPoint };
enum class Stability { Unstable, AsymptoticallyStable, Marginal };

struct PhasePoint {
    Symmetry symmetry;
    Stability stability;

    friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

// Symmetry is decided by the sign of g_m - (kappa_c + kappa_m)/2,
// stability by the sign of kappa_m - kappa_c.
inline PhasePoint classify_phase(double g_m, double kappa_c, double kappa_m) {
    PhasePoint pp{};
    const double margin = g_m - 0.5 * (kappa_c + kappa_m);
    if (std::abs(margin) <= 1e-12)
        pp.symmetry = Symmetry::ExceptionalPoint;
    else
        pp.symmetry = margin > 0.0 ? Symmetry::PTSymmetric : Symmetry::BrokenPT;
    if (kappa_c > kappa_m)
        pp.stability = Stability::Unstable;
    else if (kappa_c < kappa_m)
        pp.stability = Stability::AsymptoticallyStable;
    else
        pp.stability = Stability::Marginal;
    return pp;
}

// Supermode eigenfrequencies of the resonant dissipative system
// (omega_1 taken as the common mode frequency omega_c):
// omega_pm = omega_1 - (i/2)(kappa_c - kappa_m)
//            +- sqrt(g_m^2 - (kappa_c + kappa_m)^2 / 4)
inline std::pair<Complex, Complex> supermode_frequencies(const SystemParams& p) {
    const Complex base{p.omega_c, -0.5 * (p.kappa_c - p.kappa_m)};
    const double disc = p.g_m * p.g_m - 0.25 * (p.kappa_c + p.kappa_m) * (p.kappa_c + p.kappa_m);
    const Complex root = std::sqrt(Complex(disc, 0.0));
    return {base + root, base - root};
}

// theta(t) = (1/2) atan2(2 g_m, Delta(t)), continuous through Delta = 0
// and confined to (0, pi/2) for g_m > 0.
inline double mixing_angle(const SystemParams& p, double t) {
    const double d = detuning(p, t);
    if (p.g_m == 0.0 && d == 0.0)
        throw NumericError("mixing_angle: undefined for g_m = 0 at zero detuning", t);
    return 0.5 * std::atan2(2.0 * p.g_m, d);
}

// d/dt theta(t) = g_m Delta'(t) / (Delta^2 + 4 g_m^2)
inline double nonadiabatic_coupling(const SystemParams& p, double t) {
    const double d = detuning(p, t);
    return p.g_m * detuning_rate(p, t) / (d * d + 4.0 * p.g_m * p.g_m);
}

// The counterdiabatic field as a matrix: H_c = [[0, Q(t)], [-Q(t), 0]].
inline ComplexMatrix2 counterdiabatic_hamiltonian(const SystemParams& p, double t,
                                                  DiagonalSign sign = DiagonalSign::AsPrinted) {
    const Complex q = cd_coupling(p, t, sign);
    return {0.0, q, -q, 0.0};
}

// Instantaneous adiabatic basis of the dissipationless Hamiltonian together
// with the rotated-frame Hamiltonian of the dissipative one. The frame
// matrix rows/columns are ordered (phi_minus, phi_plus); its off-diagonals
// carry the nonadiabatic coupling and the dissipative mixing term.
struct AdiabaticFrame {
    double theta = 0.0;
    double theta_dot = 0.0;
    double lambda_plus = 0.0;   // [omega_c + omega_m(t)]/2 + sqrt(g^2 + Delta^2/4)
    double lambda_minus = 0.0;  // [omega_c + omega_m(t)]/2 - sqrt(g^2 + Delta^2/4)
    ComplexMatrix2 frame_hamiltonian;
};

inline AdiabaticFrame adiabatic_frame(const SystemParams& p, double t) {
    AdiabaticFrame f;
    f.theta = mixing_angle(p, t);
    f.theta_dot = nonadiabatic_coupling(p, t);
    const double d = detuning(p, t);
    const double mid = 0.5 * (p.omega_c + magnon_frequency(p, t));
    const double gap = std::sqrt(p.g_m * p.g_m + 0.25 * d * d);
    f.lambda_plus = mid + gap;
    f.lambda_minus = mid - gap;

    const double c = std::cos(f.theta);
    const double s = std::sin(f.theta);
    const Complex i{0.0, 1.0};
    const Complex mix = -i * (p.kappa_c + p.kappa_m) * s * c;
    const Complex e_mm = f.lambda_minus + i * p.kappa_c * c * c - i * p.kappa_m * s * s;
    const Complex e_mp = mix - i * f.theta_dot;
    const Complex e_pm = mix + i * f.theta_dot;
    const Complex e_pp = f.lambda_plus + i * p.kappa_c * s * s - i * p.kappa_m * c * c;
    f.frame_hamiltonian = {e_mm, e_mp, e_pm, e_pp};
    return f;
}

}  // namespace cavmag
