#pragma once
// Closed-form resonance-fluorescence results and CHSH helpers.
#include <cmath>
#include <complex>
#include <vector>
#include <stdexcept>
#include "fluoro/units.hpp"
#include "fluoro/bloch.hpp"

namespace fluoro {

struct CorrelationCurve {
    std::vector<double> tau;
    std::vector<double> value;
};

// ---- populations and rates -------------------------------------------------

inline double steady_state_population(const EmitterParams& p) {
    double s = p.saturation();
    return s / (2.0 * (1.0 + s));
}

// total photon scattering rate 2*gamma*rho_ee = gamma*s/(1+s)
inline double emission_rate(const EmitterParams& p) {
    double s = p.saturation();
    return p.gamma * s / (1.0 + s);
}

inline double coherent_rate(const EmitterParams& p) {
    double s = p.saturation();
    return p.gamma * s / ((1.0 + s) * (1.0 + s));
}

inline double incoherent_rate(const EmitterParams& p) {
    double s = p.saturation();
    return p.gamma * s * s / ((1.0 + s) * (1.0 + s));
}

// ---- second-order correlation ----------------------------------------------

// weak-drive (heralded single-pair) closed form, valid as s0 -> 0:
// g2(tau) = |1 - exp(-(gamma - i delta)|tau|)|^2
inline double g2_weak(const EmitterParams& p, double tau) {
    std::complex<double> e = std::exp(-(std::complex<double>(p.gamma, -p.delta)) * std::abs(tau));
    return std::norm(1.0 - e);
}

inline std::complex<double> two_photon_wavefunction(const EmitterParams& p, double tau) {
    return 1.0 - std::exp(-(std::complex<double>(p.gamma, -p.delta)) * std::abs(tau));
}

// resonant (delta=0) closed form at arbitrary drive.  The damped Rabi
// frequency is sqrt(omega^2 - gamma^2/4); below omega = gamma/2 the root is
// imaginary and the oscillation turns into cosh/sinh; near the exceptional
// point a series in x = omega^2 - gamma^2/4 avoids 0/0.
inline double g2_resonant_strong(double gamma, double omega, double tau) {
    tau = std::abs(tau);
    double x = omega * omega - 0.25 * gamma * gamma;
    double env = std::exp(-1.5 * gamma * tau);
    double a = 1.5 * gamma;
    if (std::abs(x) < 1e-6 * gamma * gamma) {
        // cos(wt) + (a/w) sin(wt) = sum_k x^k f_k(t); first two terms suffice
        double t2 = tau * tau;
        double lead = 1.0 + a * tau;
        double corr = -0.5 * t2 - a * tau * t2 / 6.0;
        return 1.0 - env * (lead + x * corr);
    }
    if (x > 0) {
        double w = std::sqrt(x);
        return 1.0 - env * (std::cos(w * tau) + (a / w) * std::sin(w * tau));
    }
    double w = std::sqrt(-x);
    return 1.0 - env * (std::cosh(w * tau) + (a / w) * std::sinh(w * tau));
}

inline CorrelationCurve liouvillian_g2(const EmitterParams& p, const std::vector<double>& taus) {
    BlochPropagator prop(p);
    CorrelationCurve c;
    c.tau = taus;
    c.value.reserve(taus.size());
    for (double t : taus) c.value.push_back(prop.g2(t));
    return c;
}

// ---- first-order coherence and interferometer visibility ---------------------

inline std::complex<double> liouvillian_g1(const EmitterParams& p, double tau) {
    return BlochPropagator(p).g1(tau);
}

// detector rates at the two outputs of a delay-unbalanced interferometer fed
// by the stationary fluorescence, vs long-arm phase (per-photon probability):
//   n_{1,2}(phi) = 1/2 * (1 +- Re[e^{-i phi} g1(dt)] / g1(0))
inline std::pair<double, double> interferometer_output_rates(const BlochPropagator& prop,
                                                             double delay, double phi) {
    std::complex<double> g1 = prop.g1(delay);
    double g10 = prop.rho_ee_ss();
    double m = (std::exp(std::complex<double>(0, -phi)) * g1).real() / g10;
    return { 0.5 * (1.0 + m), 0.5 * (1.0 - m) };
}

// fringe visibility (max-min)/(max+min) over phi = |g1(dt)|/g1(0)
inline double visibility(const EmitterParams& p, double delay) {
    BlochPropagator prop(p);
    return std::abs(prop.g1(delay)) / prop.rho_ee_ss();
}

// ---- CHSH building blocks ----------------------------------------------------

// maximal CHSH S from the two-photon interference contrast: correlated
// (delay) peak amplitude vs uncorrelated (small-delay) background,
//   Smax = 2*sqrt(2) * g2_delay / (g2_small + g2_delay)
inline double smax_from_g2(double g2_small, double g2_delay) {
    if (g2_small < 0 || g2_delay < 0) throw std::invalid_argument("negative g2");
    double den = g2_small + g2_delay;
    if (den <= 0) throw std::invalid_argument("smax_from_g2: zero denominator");
    return 2.0 * kSqrt2 * g2_delay / den;
}

// joint two-photon fringe with an incoherent same-bin background:
//   E(phiA,phiB) = [g2_delay cos(phiA-phiB) + g2_small cos(phiA+phiB)]
//                  / (g2_small + g2_delay)
inline double joint_expectation_analytic(double phi_a, double phi_b,
                                         double g2_small, double g2_delay) {
    double den = g2_small + g2_delay;
    if (den <= 0) throw std::invalid_argument("joint_expectation_analytic: zero denominator");
    return (g2_delay * std::cos(phi_a - phi_b) + g2_small * std::cos(phi_a + phi_b)) / den;
}

// best separable (first-order coherent) model with fringe visibility V per side
inline double separable_expectation(double phi_a, double phi_b, double vis) {
    return vis * vis * std::cos(phi_a) * std::cos(phi_b);
}

// CHSH from the 4 expectations in canonical order (see ChshSettings)
inline double chsh_s(double e1, double e2, double e3, double e4) {
    return e1 - e2 + e3 + e4;
}

// g2 contrast at which Smax crosses the classical bound 2:
// g2_small* = (sqrt(2)-1) * g2_delay
inline double bell_violation_threshold(double g2_delay = 1.0) {
    return (kSqrt2 - 1.0) * g2_delay;
}

// FWHM-like antibunching timescale of the central g2 dip
inline double antibunching_window(const EmitterParams& p) {
    return 0.25 / std::sqrt(0.5 * p.omega * p.omega + p.gamma * p.gamma);
}

// ---- entangled-pair rate ------------------------------------------------------

// rate of usable time-bin pairs vs drive:
//   n_p = gamma^2 omega^4 / (64 (gamma^2 + omega^2/2)^(5/2))
inline double pair_rate(double gamma, double omega) {
    double d = gamma * gamma + 0.5 * omega * omega;
    return gamma * gamma * std::pow(omega, 4) / (64.0 * std::pow(d, 2.5));
}

struct PairRateOptimum {
    double omega_star;
    double rate_star;
};

// maximize pair_rate over omega by golden-section (the closed-form optimum is
// omega* = 2*sqrt(2)*gamma, rate gamma/(25*sqrt(5)); searched numerically so
// the formula and the optimizer cross-check each other in tests)
inline PairRateOptimum pair_rate_optimum(double gamma) {
    double lo = 0.1 * gamma, hi = 20.0 * gamma;
    const double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = pair_rate(gamma, c), fd = pair_rate(gamma, d);
    for (int it = 0; it < 200 && (b - a) > 1e-12 * gamma; ++it) {
        if (fc > fd) { b = d; d = c; fd = fc; c = b - invphi * (b - a); fc = pair_rate(gamma, c); }
        else { a = c; c = d; fc = fd; d = a + invphi * (b - a); fd = pair_rate(gamma, d); }
    }
    double om = 0.5 * (a + b);
    return { om, pair_rate(gamma, om) };
}

} // namespace fluoro
