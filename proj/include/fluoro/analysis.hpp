#pragma once
// Coincidence counting, correlation histograms, CHSH estimation, and the
// analytic window-scan of the CHSH value.
#include <vector>
#include <array>
#include <cmath>
#include <algorithm>
#include <stdexcept>
#include <functional>
#include "fluoro/units.hpp"
#include "fluoro/bloch.hpp"
#include "fluoro/physics.hpp"
#include "fluoro/franson.hpp"
#include "fluoro/quadrature.hpp"

namespace fluoro {

struct CoincidencePair {
    size_t ia, ib;
    double delta;  // tb - ta
};

// greedy nearest matching: walk A photons in time order, each grabs the
// unused B photon minimizing |(tb - ta) - center| within the half-width.
inline std::vector<CoincidencePair>
pair_coincidences(const std::vector<double>& ta, const std::vector<double>& tb,
                  double center, double half_width) {
    if (half_width <= 0) throw std::invalid_argument("coincidence half-width must be > 0");
    std::vector<CoincidencePair> out;
    std::vector<char> used(tb.size(), 0);
    size_t lo = 0;
    for (size_t i = 0; i < ta.size(); ++i) {
        double want = ta[i] + center;
        while (lo < tb.size() && tb[lo] < want - half_width) ++lo;
        size_t best = tb.size();
        double best_d = half_width;
        for (size_t j = lo; j < tb.size() && tb[j] <= want + half_width; ++j) {
            if (used[j]) continue;
            double d = std::abs(tb[j] - want);
            if (d <= best_d) { best_d = d; best = j; }
        }
        if (best < tb.size()) {
            used[best] = 1;
            out.push_back({i, best, tb[best] - ta[i]});
        }
    }
    return out;
}

// ---- correlation histogram -----------------------------------------------------

struct Histogram {
    double bin_width = 0, span = 0;
    std::vector<double> center;      // bin centers, tau = tb - ta
    std::vector<double> counts;
    std::vector<double> normalized;  // counts / (uncorrelated baseline per bin)
    double baseline = 0;             // expected counts per bin for independent streams
};

// all-pairs cross correlation within [-span, span)
inline Histogram g2_histogram(const std::vector<double>& ta, const std::vector<double>& tb,
                              double bin_width, double span, double duration) {
    if (bin_width <= 0 || span <= 0) throw std::invalid_argument("histogram needs positive bin/span");
    int nbins = int(std::llround(2.0 * span / bin_width));
    if (nbins < 1 || std::abs(nbins * bin_width - 2.0 * span) > 1e-9 * span)
        throw std::invalid_argument("span must be an integer number of bins");
    Histogram h;
    h.bin_width = bin_width;
    h.span = span;
    h.counts.assign(nbins, 0.0);
    h.center.resize(nbins);
    for (int k = 0; k < nbins; ++k) h.center[k] = -span + (k + 0.5) * bin_width;

    size_t lo = 0;
    for (size_t i = 0; i < ta.size(); ++i) {
        while (lo < tb.size() && tb[lo] < ta[i] - span) ++lo;
        for (size_t j = lo; j < tb.size() && tb[j] < ta[i] + span; ++j) {
            int k = int((tb[j] - ta[i] + span) / bin_width);
            if (k >= 0 && k < nbins) h.counts[k] += 1.0;
        }
    }
    if (duration <= 0) throw std::invalid_argument("duration must be > 0");
    h.baseline = double(ta.size()) * double(tb.size()) * bin_width / duration;
    h.normalized.resize(nbins);
    for (int k = 0; k < nbins; ++k)
        h.normalized[k] = h.baseline > 0 ? h.counts[k] / h.baseline : 0.0;
    return h;
}

// merge `factor` adjacent bins (bin count must divide evenly)
inline Histogram rebin(const Histogram& h, int factor) {
    if (factor < 1 || h.counts.size() % size_t(factor) != 0)
        throw std::invalid_argument("rebin factor must divide the bin count");
    Histogram r;
    r.bin_width = h.bin_width * factor;
    r.span = h.span;
    r.baseline = h.baseline * factor;
    size_t n = h.counts.size() / size_t(factor);
    r.center.resize(n);
    r.counts.assign(n, 0.0);
    r.normalized.resize(n);
    for (size_t k = 0; k < n; ++k) {
        for (int j = 0; j < factor; ++j) r.counts[k] += h.counts[k * factor + j];
        r.center[k] = -h.span + (k + 0.5) * r.bin_width;
        r.normalized[k] = r.baseline > 0 ? r.counts[k] / r.baseline : 0.0;
    }
    return r;
}

// Pearson chi^2 of the observed counts against a model g2 curve evaluated at
// the bin centers (expected = baseline * g2 * envelope if given)
struct Chi2Result { double chi2; int dof; };
inline Chi2Result histogram_chi2(const Histogram& h, const std::function<double(double)>& g2_model) {
    double chi2 = 0;
    int dof = 0;
    for (size_t k = 0; k < h.counts.size(); ++k) {
        double expct = h.baseline * g2_model(h.center[k]);
        if (expct < 1e-9) continue;
        chi2 += (h.counts[k] - expct) * (h.counts[k] - expct) / expct;
        ++dof;
    }
    return { chi2, dof };
}

// ---- long-timescale baseline fit ------------------------------------------------

// fit counts(tau) = c0 * (1 + A exp(-|tau|/t_b)) over |tau| >= fit_min;
// linear least squares in (c0, c0*A) at fixed t_b, golden-section over log t_b.
struct BaselineFit {
    double c0, amplitude, t_bunch;
    double normalization;  // c0 * (1 + amplitude): the tau->0 plateau
};

inline BaselineFit fit_baseline(const Histogram& h, double fit_min_tau) {
    std::vector<double> tau, y;
    for (size_t k = 0; k < h.counts.size(); ++k)
        if (std::abs(h.center[k]) >= fit_min_tau) {
            tau.push_back(std::abs(h.center[k]));
            y.push_back(h.counts[k]);
        }
    if (tau.size() < 3) throw std::invalid_argument("fit_baseline: too few bins beyond fit_min_tau");

    auto sse_at = [&](double tb, double* c0_out, double* c1_out) {
        // least squares for y = c0 + c1 * e
        double s1 = double(tau.size()), se = 0, see = 0, sy = 0, sye = 0;
        for (size_t i = 0; i < tau.size(); ++i) {
            double e = std::exp(-tau[i] / tb);
            se += e; see += e * e; sy += y[i]; sye += y[i] * e;
        }
        double det = s1 * see - se * se;
        double c0, c1;
        if (std::abs(det) < 1e-30) { c0 = sy / s1; c1 = 0; }
        else {
            c0 = (sy * see - sye * se) / det;
            c1 = (s1 * sye - se * sy) / det;
        }
        double sse = 0;
        for (size_t i = 0; i < tau.size(); ++i) {
            double r = y[i] - c0 - c1 * std::exp(-tau[i] / tb);
            sse += r * r;
        }
        if (c0_out) *c0_out = c0;
        if (c1_out) *c1_out = c1;
        return sse;
    };

    double llo = std::log(h.bin_width), lhi = std::log(200.0 * h.span);
    const double invphi = 0.6180339887498949;
    double a = llo, b = lhi, c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = sse_at(std::exp(c), nullptr, nullptr), fd = sse_at(std::exp(d), nullptr, nullptr);
    for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
        if (fc < fd) { b = d; d = c; fd = fc; c = b - invphi * (b - a); fc = sse_at(std::exp(c), nullptr, nullptr); }
        else { a = c; c = d; fc = fd; d = a + invphi * (b - a); fd = sse_at(std::exp(d), nullptr, nullptr); }
    }
    double tb = std::exp(0.5 * (a + b)), c0, c1;
    sse_at(tb, &c0, &c1);
    BaselineFit f;
    f.c0 = c0;
    f.amplitude = c0 != 0 ? c1 / c0 : 0.0;
    f.t_bunch = tb;
    f.normalization = c0 + c1;
    return f;
}

// ---- CHSH from detection events ---------------------------------------------------

struct SettingCounts {
    double phi_a = 0, phi_b = 0;
    long long n[2][2] = {{0, 0}, {0, 0}};  // [portA][portB]
    long long total() const { return n[0][0] + n[0][1] + n[1][0] + n[1][1]; }
    double expectation() const {
        long long t = total();
        if (t == 0) return 0.0;
        return double(n[0][0] + n[1][1] - n[0][1] - n[1][0]) / double(t);
    }
    double sigma() const {
        long long t = total();
        if (t < 2) return 1.0;
        double e = expectation();
        return std::sqrt(std::max(1e-300, (1.0 - e * e) / double(t)));
    }
};

// classify coincidences of one measurement setting
inline SettingCounts count_setting(const std::vector<DetectionEvent>& events, double phi_a,
                                   double phi_b, double center, double half_width) {
    std::vector<double> ta, tb;
    std::vector<uint8_t> pa, pb;
    for (const auto& e : events) {
        if (e.side == 0) { ta.push_back(e.time); pa.push_back(e.port); }
        else             { tb.push_back(e.time); pb.push_back(e.port); }
    }
    SettingCounts sc;
    sc.phi_a = phi_a;
    sc.phi_b = phi_b;
    for (const auto& c : pair_coincidences(ta, tb, center, half_width))
        sc.n[pa[c.ia]][pb[c.ib]] += 1;
    return sc;
}

struct ChshEstimate {
    std::array<SettingCounts, 4> settings;
    double s = 0, sigma_s = 0;
};

// canonical order (a,b), (a,b'), (a',b), (a',b');  S = E1 - E2 + E3 + E4
inline ChshEstimate chsh_from_settings(const std::array<SettingCounts, 4>& sc) {
    ChshEstimate r;
    r.settings = sc;
    static const double sign[4] = {1, -1, 1, 1};
    double var = 0;
    for (int i = 0; i < 4; ++i) {
        r.s += sign[i] * sc[i].expectation();
        var += sc[i].sigma() * sc[i].sigma();
    }
    r.sigma_s = std::sqrt(var);
    return r;
}

// ---- analytic windowed CHSH --------------------------------------------------------

enum class ScanMode { four_amplitude, smax_g2_average };

// CHSH value of the four-path interference pattern averaged over detection
// delays |delta - center| <= window at the canonical settings.  At the
// canonical settings the (phiA+phiB) term drops out and
//   S_raw(w) = 2*sqrt(2) * Int 2 Re[conj(psi(d-dB)) psi(d+dA)] dd
//                        / Int sum_i |u_i(d)|^2 dd .
// The raw curve starts at 2*sqrt(2) (w -> 0) and decays to sqrt(2); the
// reported curve is affinely rescaled to approach the separable-model value
// sqrt(2)*V^2 instead, keeping the w -> 0 endpoint fixed:
//   S = 2*sqrt(2) + (S_raw - 2*sqrt(2)) * (2*sqrt(2) - sqrt(2) V^2)/(2*sqrt(2) - S_inf).
class WindowScanner {
public:
    WindowScanner(const EmitterParams& p, const InterferometerConfig& cfg, ScanMode mode)
        : prop_(p), cfg_(cfg), mode_(mode) {
        double dt_mean = 0.5 * (cfg.delay_a + cfg.delay_b);
        vis_ = std::abs(prop_.g1(dt_mean)) / prop_.rho_ee_ss();
        if (mode_ == ScanMode::four_amplitude) {
            s_inf_ = kSqrt2;
        } else {
            double g2d = prop_.g2(dt_mean);
            s_inf_ = 2.0 * kSqrt2 * g2d / (1.0 + g2d);
        }
    }

    double visibility() const { return vis_; }
    double separable_s() const { return kSqrt2 * vis_ * vis_; }

    double s_raw(double window) const {
        if (window <= 0) throw std::invalid_argument("window must be > 0");
        if (mode_ == ScanMode::four_amplitude) return s_raw_four_amplitude(window);
        return s_raw_smax_average(window);
    }

    double s_rescaled(double window) const {
        double a = (2.0 * kSqrt2 - kSqrt2 * vis_ * vis_) / (2.0 * kSqrt2 - s_inf_);
        return 2.0 * kSqrt2 + (s_raw(window) - 2.0 * kSqrt2) * a;
    }

    // largest window with S(w) > 2 (bisection; throws if no crossing in range)
    double bell_crossing(double lo = 2e-10, double hi = 3e-7) const {
        auto f = [&](double w) { return s_rescaled(w) - 2.0; };
        double flo = f(lo), fhi = f(hi);
        if (flo <= 0 || fhi >= 0) throw std::runtime_error("bell_crossing: no sign change in bracket");
        for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
            double mid = 0.5 * (lo + hi);
            (f(mid) > 0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    double s_raw_four_amplitude(double w) const {
        auto psi = [&](double t) { return prop_.pair_amplitude(t); };
        const double dA = cfg_.delay_a, dB = cfg_.delay_b;
        std::vector<double> kinks = {0.0, dB - dA, dB, -dA};
        auto num = [&](double d) {
            return (std::conj(psi(d - dB)) * psi(d + dA)).real();
        };
        auto den = [&](double d) {
            return std::norm(psi(d)) + std::norm(psi(d + dA - dB)) +
                   std::norm(psi(d - dB)) + std::norm(psi(d + dA));
        };
        double ni = gauss_legendre_piecewise(num, -w, w, kinks);
        double di = gauss_legendre_piecewise(den, -w, w, kinks);
        if (di <= 0) throw std::runtime_error("window scan: empty coincidence density");
        return 2.0 * kSqrt2 * 2.0 * ni / di;
    }

    double s_raw_smax_average(double w) const {
        double dt_mean = 0.5 * (cfg_.delay_a + cfg_.delay_b);
        double g2d = prop_.g2(dt_mean);
        auto wgt = [&](double d) { return prop_.g2(d); };
        auto num = [&](double d) { return wgt(d) * smax_from_g2(prop_.g2(d), g2d); };
        double ni = gauss_legendre_piecewise(num, -w, w, {0.0});
        double di = gauss_legendre_piecewise(wgt, -w, w, {0.0});
        if (di <= 0) throw std::runtime_error("window scan: empty coincidence density");
        return ni / di;
    }

    BlochPropagator prop_;
    InterferometerConfig cfg_;
    ScanMode mode_;
    double vis_ = 0, s_inf_ = 0;
};

struct WindowScanPoint {
    double window, s_raw, s;
};

inline std::vector<WindowScanPoint> s_vs_window_scan(const EmitterParams& p,
                                                     const InterferometerConfig& cfg,
                                                     const std::vector<double>& windows,
                                                     ScanMode mode = ScanMode::four_amplitude) {
    WindowScanner sc(p, cfg, mode);
    std::vector<WindowScanPoint> out;
    out.reserve(windows.size());
    for (double w : windows) out.push_back({w, sc.s_raw(w), sc.s_rescaled(w)});
    return out;
}

} // namespace fluoro
