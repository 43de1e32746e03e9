#pragma once
// Franson interferometry on the split fluorescence stream.
//
// Each side has an unbalanced interferometer (short/long = delay, phase on
// the long arm).  A photon pair with emission separation tau reaching the two
// sides interferes over four indistinguishable path combinations; with
// sigma = +1/-1 for the two output ports and delta the detection-time
// difference (Bob - Alice), the outcome amplitude is
//
//   A(sA,sB; delta) = u0 + uc*sA*sB*e^{i(phiA+phiB)}
//                        + ub*sB*e^{i phiB} + ua*sA*e^{i phiA}
//   u0 = psi(delta),            uc = psi(delta + dA - dB),
//   ub = psi(delta - dB),       ua = psi(delta + dA)
//
// where psi is the (exchange-symmetric) pair amplitude.  Photons without a
// partner pass independently and show only the single-photon fringe set by
// the first-order coherence.
#include <complex>
#include <vector>
#include <functional>
#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include "fluoro/units.hpp"
#include "fluoro/rng.hpp"

namespace fluoro {

using PairAmplitudeFn = std::function<std::complex<double>(double)>;

struct DetectionEvent {
    double time;
    uint8_t side;  // 0 = Alice, 1 = Bob
    uint8_t port;  // 0, 1 (port 0 <-> sigma = +1)
};

inline int detection_channel(const DetectionEvent& e) { return e.side * 2 + e.port; }

struct FourPathAmplitudes {
    std::complex<double> u0, uc, ub, ua;
};

inline FourPathAmplitudes four_path_amplitudes(double delta, const InterferometerConfig& cfg,
                                               const PairAmplitudeFn& psi) {
    return { psi(delta), psi(delta + cfg.delay_a - cfg.delay_b),
             psi(delta - cfg.delay_b), psi(delta + cfg.delay_a) };
}

struct TwoPhotonDistribution {
    double p[2][2];                    // P(portA, portB), normalized
    double expectation;                // sum sA*sB*p
    std::complex<double> coh_a, coh_b; // effective marginal coherences:
                                       // P(sA) = 1/2 (1 + sA Re[coh_a e^{i phiA}])
};

inline TwoPhotonDistribution two_photon_outcome_distribution(const FourPathAmplitudes& u,
                                                             const InterferometerConfig& cfg) {
    using C = std::complex<double>;
    C ea = std::exp(C(0, cfg.phase_a)), eb = std::exp(C(0, cfg.phase_b));
    TwoPhotonDistribution d{};
    double tot = 0;
    for (int ia = 0; ia < 2; ++ia) {
        double sA = ia == 0 ? 1.0 : -1.0;
        for (int ib = 0; ib < 2; ++ib) {
            double sB = ib == 0 ? 1.0 : -1.0;
            C amp = u.u0 + u.uc * (sA * sB) * ea * eb + u.ub * sB * eb + u.ua * sA * ea;
            d.p[ia][ib] = std::norm(amp);
            tot += d.p[ia][ib];
        }
    }
    if (tot <= 0) throw std::runtime_error("two_photon_outcome_distribution: all amplitudes vanish");
    for (auto& row : d.p)
        for (double& v : row) v /= tot;
    d.expectation = d.p[0][0] + d.p[1][1] - d.p[0][1] - d.p[1][0];
    double sum2 = std::norm(u.u0) + std::norm(u.uc) + std::norm(u.ub) + std::norm(u.ua);
    d.coh_a = 2.0 * (std::conj(u.u0) * u.ua + std::conj(u.ub) * u.uc) / sum2;
    d.coh_b = 2.0 * (std::conj(u.u0) * u.ub + std::conj(u.ua) * u.uc) / sum2;
    return d;
}

inline TwoPhotonDistribution two_photon_outcome_distribution(double delta,
                                                             const InterferometerConfig& cfg,
                                                             const PairAmplitudeFn& psi) {
    return two_photon_outcome_distribution(four_path_amplitudes(delta, cfg, psi), cfg);
}

// single unpaired photon: arm choice only shifts the detection time; the port
// follows the first-order fringe P(port0) = 1/2 (1 + Re[coh e^{i phi}]).
struct SinglePhotonOutcome {
    uint8_t arm;   // 0 = short, 1 = long
    uint8_t port;
};

inline SinglePhotonOutcome single_photon_outcome(std::complex<double> coherence, double phi,
                                                 Rng& rng) {
    SinglePhotonOutcome o;
    o.arm = rng.bernoulli(0.5) ? 1 : 0;
    double p0 = 0.5 * (1.0 + (coherence * std::exp(std::complex<double>(0, phi))).real());
    p0 = std::clamp(p0, 0.0, 1.0);
    o.port = rng.bernoulli(p0) ? 0 : 1;
    return o;
}

// ---- full sampling of the detection record -----------------------------------

struct FransonSimOptions {
    double guard_factor = 5.0;  // cluster guard = factor * max(delay_a, delay_b)
};

// Streams (already thinned/split) are merged and segmented into clusters
// separated by gaps larger than the guard; within a cluster, A and B photons
// are greedily matched nearest-first and sampled as coherent pairs; leftovers
// are processed as singles.
inline std::vector<DetectionEvent>
simulate_franson(const std::vector<double>& times_a, const std::vector<double>& times_b,
                 const InterferometerConfig& cfg, const PairAmplitudeFn& psi,
                 std::complex<double> singles_coh_a, std::complex<double> singles_coh_b,
                 Rng& rng, const FransonSimOptions& opt = {}) {
    struct Tagged { double t; uint8_t side; };
    std::vector<Tagged> merged;
    merged.reserve(times_a.size() + times_b.size());
    for (double t : times_a) merged.push_back({t, 0});
    for (double t : times_b) merged.push_back({t, 1});
    std::sort(merged.begin(), merged.end(), [](const Tagged& x, const Tagged& y) {
        return x.t < y.t || (x.t == y.t && x.side < y.side);
    });

    const double guard = opt.guard_factor * std::max(cfg.delay_a, cfg.delay_b);
    std::vector<DetectionEvent> events;
    events.reserve(merged.size());

    auto emit_single = [&](const Tagged& ph) {
        bool is_a = ph.side == 0;
        auto o = single_photon_outcome(is_a ? singles_coh_a : singles_coh_b,
                                       is_a ? cfg.phase_a : cfg.phase_b, rng);
        double td = ph.t + (o.arm ? (is_a ? cfg.delay_a : cfg.delay_b) : 0.0);
        events.push_back({td, ph.side, o.port});
    };

    auto emit_pair = [&](double ta, double tb) {
        double arm_a = rng.bernoulli(0.5) ? cfg.delay_a : 0.0;
        double arm_b = rng.bernoulli(0.5) ? cfg.delay_b : 0.0;
        double tda = ta + arm_a, tdb = tb + arm_b;
        TwoPhotonDistribution d = two_photon_outcome_distribution(tdb - tda, cfg, psi);
        double w[4] = { d.p[0][0], d.p[0][1], d.p[1][0], d.p[1][1] };
        int k = rng.choose(w, 4);
        events.push_back({tda, 0, uint8_t(k >> 1)});
        events.push_back({tdb, 1, uint8_t(k & 1)});
    };

    std::vector<size_t> ia, ib;  // per-cluster members by side (indices into merged)
    size_t begin = 0;
    auto flush_cluster = [&](size_t end) {
        ia.clear(); ib.clear();
        for (size_t k = begin; k < end; ++k)
            (merged[k].side == 0 ? ia : ib).push_back(k);
        // greedy nearest A-B matching
        while (!ia.empty() && !ib.empty()) {
            size_t best_i = 0, best_j = 0;
            double best = 1e300;
            for (size_t i = 0; i < ia.size(); ++i)
                for (size_t j = 0; j < ib.size(); ++j) {
                    double dt = std::abs(merged[ia[i]].t - merged[ib[j]].t);
                    if (dt < best) { best = dt; best_i = i; best_j = j; }
                }
            emit_pair(merged[ia[best_i]].t, merged[ib[best_j]].t);
            ia.erase(ia.begin() + best_i);
            ib.erase(ib.begin() + best_j);
        }
        for (size_t k : ia) emit_single(merged[k]);
        for (size_t k : ib) emit_single(merged[k]);
    };

    for (size_t k = 1; k <= merged.size(); ++k) {
        if (k == merged.size() || merged[k].t - merged[k - 1].t > guard) {
            flush_cluster(k);
            begin = k;
        }
    }

    std::sort(events.begin(), events.end(), [](const DetectionEvent& x, const DetectionEvent& y) {
        return x.time < y.time || (x.time == y.time && (x.side * 2 + x.port) < (y.side * 2 + y.port));
    });
    return events;
}

} // namespace fluoro
