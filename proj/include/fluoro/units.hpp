#pragma once
// Basic parameter structs and conventions.
//
// gamma is the HALF population decay rate: excited-state lifetime
// tau_life = 1/(2*gamma), total scattering rate of a saturated emitter
// 2*gamma*rho_ee.  All frequencies are angular (rad/s), all times seconds.
#include <cmath>
#include <stdexcept>

namespace fluoro {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;

struct EmitterParams {
    double gamma;  // half decay rate, rad/s
    double delta;  // laser-emitter detuning, rad/s
    double omega;  // Rabi frequency, rad/s

    static EmitterParams from_lifetime_s0(double lifetime, double detuning, double s0) {
        if (lifetime <= 0) throw std::invalid_argument("lifetime must be > 0");
        if (s0 < 0) throw std::invalid_argument("s0 must be >= 0");
        double g = 1.0 / (2.0 * lifetime);
        return { g, detuning, g * std::sqrt(2.0 * s0) };
    }

    double s0() const { return omega * omega / (2.0 * gamma * gamma); }            // on-resonance saturation
    double saturation() const {                                                    // detuned saturation
        return omega * omega / (2.0 * (gamma * gamma + delta * delta));
    }
    double lifetime() const { return 1.0 / (2.0 * gamma); }
};

struct InterferometerConfig {
    double delay_a;  // long-short path delay, Alice side (s)
    double delay_b;  // Bob side (s)
    double phase_a;  // phase on the long arm, Alice (rad)
    double phase_b;  // Bob (rad)
};

// canonical CHSH measurement order: (a,b), (a,b'), (a',b), (a',b')
// with a=0, a'=pi/2, b=pi/4, b'=3pi/4 and S = E1 - E2 + E3 + E4.
struct ChshSettings {
    double a = 0.0, a_prime = kPi / 2.0, b = kPi / 4.0, b_prime = 3.0 * kPi / 4.0;
};

} // namespace fluoro
