#pragma once
// Quantum-jump (Monte Carlo wavefunction) generation of emission times.
//
// Between jumps the unnormalized state evolves under the non-Hermitian
//   H_eff = [[0, omega/2], [omega/2, -delta - i*gamma]]
// (ground-state energy 0, rotating frame).  Each emission projects to the
// ground state, so the photon stream is a renewal process whose waiting-time
// survival is S(t) = |c_g|^2 + |c_e|^2 from c(0) = (1,0).  S is evaluated in
// closed form via the 2x2 matrix exponential; waiting times solve S(t) = u
// by a precomputed bracket grid plus bisection to 1 ps.
#include <complex>
#include <vector>
#include <cmath>
#include <stdexcept>
#include "fluoro/units.hpp"
#include "fluoro/rng.hpp"

namespace fluoro {

class EffectiveEvolution {
public:
    explicit EffectiveEvolution(const EmitterParams& p) {
        if (p.omega <= 0) throw std::invalid_argument("trajectories need omega > 0");
        // A = -i H_eff;  c(t) = e^{Tt/2} [cosh(Rt/2) I + (2/R) sinh(Rt/2) (A - T/2 I)] c0
        using C = std::complex<double>;
        a21_ = C(0, -0.5 * p.omega);
        trace_ = C(-p.gamma, p.delta);
        // det A = omega^2/4  =>  R^2 = T^2 - 4 det = T^2 - omega^2
        r_ = std::sqrt(trace_ * trace_ - C(p.omega * p.omega, 0));
        scale_ = std::max({p.gamma, std::abs(p.delta), p.omega});
    }

    // amplitudes from the ground start (c_g, c_e)
    void amplitudes(double t, std::complex<double>& cg, std::complex<double>& ce) const {
        using C = std::complex<double>;
        C half_rt = 0.5 * r_ * t;
        C ch, sh2;  // cosh(Rt/2), (2/R) sinh(Rt/2)
        if (std::abs(r_) < 1e-9 * scale_) {
            C z2 = half_rt * half_rt;
            ch = 1.0 + z2 * (0.5 + z2 / 24.0);
            sh2 = t * (1.0 + z2 * (1.0 / 6.0 + z2 / 120.0));
        } else {
            ch = std::cosh(half_rt);
            sh2 = 2.0 * std::sinh(half_rt) / r_;
        }
        C env = std::exp(0.5 * trace_ * t);
        cg = env * (ch + sh2 * (-0.5 * trace_));  // B00 = A00 - T/2 = -T/2
        ce = env * (sh2 * a21_);                  // B10 = A10
    }

    // no-jump survival probability from the ground state
    double survival(double t) const {
        std::complex<double> cg, ce;
        amplitudes(t, cg, ce);
        return std::norm(cg) + std::norm(ce);
    }

private:
    std::complex<double> a21_, trace_, r_;
    double scale_;
};

class WaitingTimeSampler {
public:
    explicit WaitingTimeSampler(const EmitterParams& p) : evo_(p) {
        // find t_max with S < 2^-60 (u is drawn with 53-bit resolution, so
        // every draw lands inside the grid), then tabulate S on a uniform grid
        double tmax = 1.0 / (2.0 * p.gamma);
        while (evo_.survival(tmax) > 8.7e-19 && tmax < 1.0) tmax *= 2.0;
        grid_t_.resize(kGrid + 1);
        grid_s_.resize(kGrid + 1);
        for (int i = 0; i <= kGrid; ++i) {
            grid_t_[i] = tmax * double(i) / kGrid;
            grid_s_[i] = evo_.survival(grid_t_[i]);
            if (i > 0 && grid_s_[i] > grid_s_[i - 1]) grid_s_[i] = grid_s_[i - 1];  // enforce monotone against rounding
        }
    }

    double survival(double t) const { return evo_.survival(t); }

    // draw one waiting time: solve S(t) = u to 1 ps
    double sample(Rng& rng) const {
        double u = rng.uniform_pos();
        // bracket from the monotone grid: first index with S <= u
        int lo = 0, hi = kGrid;
        while (hi - lo > 1) {
            int mid = (lo + hi) / 2;
            (grid_s_[mid] <= u ? hi : lo) = mid;
        }
        double a = grid_t_[lo], b = grid_t_[hi];
        while (b - a > 1e-12) {
            double m = 0.5 * (a + b);
            (evo_.survival(m) > u ? a : b) = m;
        }
        return 0.5 * (a + b);
    }

private:
    static constexpr int kGrid = 4096;
    EffectiveEvolution evo_;
    std::vector<double> grid_t_, grid_s_;
};

// renewal emission stream on [t0, t0+duration)
inline std::vector<double> emission_times(const WaitingTimeSampler& sampler, double t0,
                                          double duration, Rng& rng) {
    std::vector<double> out;
    if (duration <= 0) return out;
    out.reserve(size_t(duration * 1e6) + 16);
    double t = t0, end = t0 + duration;
    for (;;) {
        t += sampler.sample(rng);
        if (t >= end) break;
        out.push_back(t);
    }
    return out;
}

inline std::vector<double> emission_times(const EmitterParams& p, double duration, Rng& rng) {
    WaitingTimeSampler s(p);
    return emission_times(s, 0.0, duration, rng);
}

// ---- stream transformations --------------------------------------------------

// random deletion with survival probability `efficiency`
inline std::vector<double> thin(const std::vector<double>& times, double efficiency, Rng& rng) {
    if (efficiency < 0 || efficiency > 1) throw std::invalid_argument("efficiency outside [0,1]");
    std::vector<double> out;
    out.reserve(size_t(times.size() * efficiency) + 16);
    for (double t : times)
        if (rng.bernoulli(efficiency)) out.push_back(t);
    return out;
}

// 50:50 (or ratio) beam splitter: returns (transmitted=Alice, reflected=Bob)
inline std::pair<std::vector<double>, std::vector<double>>
split_to_alice_bob(const std::vector<double>& times, double ratio, Rng& rng) {
    if (ratio <= 0 || ratio >= 1) throw std::invalid_argument("splitter ratio outside (0,1)");
    std::pair<std::vector<double>, std::vector<double>> out;
    for (double t : times)
        (rng.bernoulli(ratio) ? out.first : out.second).push_back(t);
    return out;
}

// draw a detuning offset (slow spectral diffusion between runs)
inline EmitterParams apply_detuning_jitter(const EmitterParams& p, double sigma, Rng& rng) {
    EmitterParams q = p;
    q.delta += sigma * rng.normal();
    return q;
}

// keep photons only inside periodic on-windows [k*period, k*period + on)
inline std::vector<double> apply_duty_cycle(const std::vector<double>& times, double on,
                                            double period) {
    if (on <= 0 || period <= 0 || on > period)
        throw std::invalid_argument("duty cycle needs 0 < on <= period");
    std::vector<double> out;
    out.reserve(size_t(times.size() * on / period) + 16);
    for (double t : times)
        if (std::fmod(t, period) < on) out.push_back(t);
    return out;
}

// ---- slow blinking / bunching -------------------------------------------------

// long-timescale intensity bunching from two-state telegraph blinking:
// the normalized intensity correlation acquires a factor
//   1 + amplitude * exp(-|tau| / t_bunch)
inline double bunching_envelope(double amplitude, double t_bunch, double tau) {
    return 1.0 + amplitude * std::exp(-std::abs(tau) / t_bunch);
}

// telegraph parameters realizing that envelope: per-direction switching rate
// k = 1/(2 t_bunch), low-state relative intensity p = (1-sqrt(A))/(1+sqrt(A))
inline double blinking_low_state_intensity(double amplitude) {
    if (amplitude < 0 || amplitude > 1) throw std::invalid_argument("bunching amplitude outside [0,1]");
    double r = std::sqrt(amplitude);
    return (1.0 - r) / (1.0 + r);
}

// modulate a stream with the symmetric telegraph; amplitude = 0 is an exact no-op
inline std::vector<double> apply_blinking(const std::vector<double>& times, double amplitude,
                                          double t_bunch, Rng& rng) {
    if (amplitude == 0.0) return times;
    if (t_bunch <= 0) throw std::invalid_argument("t_bunch must be > 0");
    double p_low = blinking_low_state_intensity(amplitude);
    double k = 1.0 / (2.0 * t_bunch);
    bool high = rng.bernoulli(0.5);                    // stationary start
    double t_switch = rng.exponential(k);
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        while (t >= t_switch) {
            high = !high;
            t_switch += rng.exponential(k);
        }
        if (high || rng.bernoulli(p_low)) out.push_back(t);
    }
    return out;
}

} // namespace fluoro
