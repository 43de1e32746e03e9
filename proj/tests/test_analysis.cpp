#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fluoro/analysis.hpp"
#include "fluoro/physics.hpp"
#include "fluoro/rng.hpp"
#include "fluoro/tomography.hpp"
#include "fluoro/trajectories.hpp"
#include "fluoro/units.hpp"

using namespace fluoro;

namespace {
const double kDetuning = 16084954.386379741;
EmitterParams weak() { return EmitterParams::from_lifetime_s0(26.5e-9, kDetuning, 0.10); }
EmitterParams strong() { return EmitterParams::from_lifetime_s0(26.5e-9, kDetuning, 2.75); }
InterferometerConfig kIfc{46e-9, 46e-9, 0.0, 0.0};
}  // namespace

TEST_CASE("coincidence pairing is greedy nearest-first without reuse") {
    std::vector<double> ta = {0.0, 100.0};
    std::vector<double> tb = {1.0, 99.5, 101.0};
    auto pairs = pair_coincidences(ta, tb, 0.0, 2.0);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].delta == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pairs[1].delta == doctest::Approx(-0.5).epsilon(1e-15));  // 99.5 beats 101
    // each partner used once
    CHECK(pairs[0].ib != pairs[1].ib);
    auto reuse = pair_coincidences({0.0, 0.5}, {0.4}, 0.0, 2.0);
    REQUIRE(reuse.size() == 1);  // the single B photon pairs only once
    CHECK(reuse[0].ia == 0);
    // offset windows
    auto off = pair_coincidences({0.0}, {46.0}, 46.0, 2.0);
    REQUIRE(off.size() == 1);
    CHECK(off[0].delta == doctest::Approx(46.0).epsilon(1e-15));
    CHECK(pair_coincidences({0.0}, {5.0}, 0.0, 2.0).empty());
}

TEST_CASE("correlation histogram bins and baseline") {
    std::vector<double> ta = {0.0, 10e-9};
    std::vector<double> tb = {3e-9, 200e-9};
    Histogram h = g2_histogram(ta, tb, 2e-9, 150e-9, 1.0);
    REQUIRE(h.counts.size() == 150);
    double total = 0;
    for (double c : h.counts) total += c;
    CHECK(total == doctest::Approx(2.0).epsilon(1e-15));  // 1 ns and -9 ns land, 200/190 ns don't
    // the 3 ns separation falls in bin [2,4) ns
    size_t idx = size_t((3e-9 + 150e-9) / 2e-9);
    CHECK(h.counts[idx] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(h.center[idx] == doctest::Approx(3e-9).epsilon(1e-12));
    CHECK(h.baseline == doctest::Approx(2.0 * 2.0 * 2e-9 / 1.0).epsilon(1e-12));
    CHECK_THROWS(g2_histogram(ta, tb, 2e-9, 151.5e-9, 1.0));  // 2*span not a bin multiple
}

TEST_CASE("rebinning preserves totals") {
    Rng rng(3);
    std::vector<double> ta, tb;
    double t = 0;
    for (int i = 0; i < 4000; ++i) {
        t += rng.exponential(1e6);
        (rng.bernoulli(0.5) ? ta : tb).push_back(t);
    }
    Histogram h = g2_histogram(ta, tb, 2e-9, 150e-9, t);
    Histogram r = rebin(h, 3);
    REQUIRE(r.counts.size() == 50);
    double s0 = 0, s1 = 0;
    for (double c : h.counts) s0 += c;
    for (double c : r.counts) s1 += c;
    CHECK(s0 == doctest::Approx(s1).epsilon(1e-15));
    CHECK(r.baseline == doctest::Approx(3.0 * h.baseline).epsilon(1e-12));
    CHECK_THROWS(rebin(h, 7));  // 150 not divisible
}

TEST_CASE("chi-square against the generating model") {
    // histogram filled exactly at the model expectation gives chi2 = 0
    Histogram h;
    h.bin_width = 2e-9;
    h.span = 20e-9;
    h.baseline = 1000.0;
    auto model = [](double tau) { return 1.0 - std::exp(-std::abs(tau) / 8e-9); };
    for (int k = 0; k < 20; ++k) {
        double c = -20e-9 + (k + 0.5) * 2e-9;
        h.center.push_back(c);
        h.counts.push_back(h.baseline * model(c));
        h.normalized.push_back(model(c));
    }
    Chi2Result r = histogram_chi2(h, model);
    CHECK(r.dof == 20);
    CHECK(r.chi2 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("bunching baseline fit recovers a noiseless envelope") {
    Histogram h;
    h.bin_width = 1e-4;
    h.span = 5e-3;
    double c0 = 5000.0, a = 0.5, tb = 1e-3;
    for (int k = 0; k < 100; ++k) {
        double c = -5e-3 + (k + 0.5) * 1e-4;
        h.center.push_back(c);
        h.counts.push_back(c0 * (1.0 + a * std::exp(-std::abs(c) / tb)));
    }
    BaselineFit f = fit_baseline(h, 0.0);
    CHECK(f.c0 == doctest::Approx(c0).epsilon(1e-6));
    CHECK(f.amplitude == doctest::Approx(a).epsilon(1e-6));
    CHECK(f.t_bunch == doctest::Approx(tb).epsilon(1e-6));
    CHECK(f.normalization == doctest::Approx(c0 * (1.0 + a)).epsilon(1e-6));
}

TEST_CASE("telegraph blinking shows up as a fitted bunching envelope") {
    // uniform uncorrelated stream -> telegraph modulation -> cross histogram
    Rng rng(5);
    const double duration = 2.0;
    std::vector<double> times(200000);
    for (auto& t : times) t = duration * rng.uniform();
    std::sort(times.begin(), times.end());
    double amp = 0.5, tb = 1e-3;
    auto kept = apply_blinking(times, amp, tb, rng);
    auto [a, b] = split_to_alice_bob(kept, 0.5, rng);
    Histogram h = g2_histogram(a, b, 1e-4, 5e-3, duration);
    BaselineFit f = fit_baseline(h, 0.0);
    CHECK(std::abs(f.amplitude - amp) < 0.1);        // within 20 percent
    CHECK(std::abs(f.t_bunch - tb) < 0.25 * tb);
    CHECK(f.c0 / h.baseline == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("CHSH combination and propagated error") {
    std::array<SettingCounts, 4> sc;
    double es[4] = {0.7, -0.7, 0.7, 0.7};
    const long long n = 10000;
    for (int i = 0; i < 4; ++i) {
        long long same = llround(n * 0.5 * (1.0 + es[i]));
        sc[i].n[0][0] = same / 2;
        sc[i].n[1][1] = same - same / 2;
        sc[i].n[0][1] = (n - same) / 2;
        sc[i].n[1][0] = (n - same) - (n - same) / 2;
    }
    ChshEstimate est = chsh_from_settings(sc);
    CHECK(est.s == doctest::Approx(0.7 * 4.0).epsilon(1e-12));
    double var = 0;
    for (int i = 0; i < 4; ++i) var += (1.0 - es[i] * es[i]) / double(n);
    CHECK(est.sigma_s == doctest::Approx(std::sqrt(var)).epsilon(1e-6));
}

TEST_CASE("setting counts classify ports within the window") {
    std::vector<DetectionEvent> ev = {
        {1e-6, 0, 0}, {1e-6 + 1e-9, 1, 1},        // coincidence, ports (0,1)
        {2e-6, 0, 1}, {2e-6 + 0.5e-9, 1, 1},      // coincidence, ports (1,1)
        {3e-6, 0, 0}, {3e-6 + 50e-9, 1, 0},       // outside the +-2 ns window
    };
    SettingCounts sc = count_setting(ev, 0.1, 0.2, 0.0, 2e-9);
    CHECK(sc.phi_a == doctest::Approx(0.1));
    CHECK(sc.n[0][1] == 1);
    CHECK(sc.n[1][1] == 1);
    CHECK(sc.total() == 2);
    CHECK(sc.expectation() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("windowed CHSH curve: frozen values, default mode") {
    WindowScanner wsc(weak(), kIfc, ScanMode::four_amplitude);
    CHECK(wsc.visibility() == doctest::Approx(0.9794674420270625).epsilon(1e-9));
    CHECK(wsc.s_raw(10e-9) == doctest::Approx(2.7039415965495586).epsilon(1e-9));
    CHECK(wsc.s_rescaled(10e-9) == doctest::Approx(2.698882065248617).epsilon(1e-9));
    CHECK(wsc.s_rescaled(3e-9) == doctest::Approx(2.815577818319153).epsilon(1e-9));
    // the rescale keeps the w -> 0 endpoint at the algebraic maximum
    CHECK(wsc.s_rescaled(1e-13) > 2.82);
    CHECK(wsc.bell_crossing() == doctest::Approx(2.977175677753004e-8).epsilon(1e-5));

    WindowScanner ssc(strong(), kIfc, ScanMode::four_amplitude);
    CHECK(ssc.visibility() == doctest::Approx(0.5615370287680823).epsilon(1e-9));
    CHECK(ssc.s_rescaled(3e-9) == doctest::Approx(2.7882995957395407).epsilon(1e-9));
    CHECK(ssc.bell_crossing() == doctest::Approx(1.6594459142059966e-8).epsilon(1e-5));
}

TEST_CASE("windowed CHSH curve: correlation-averaged mode") {
    WindowScanner wsc(weak(), kIfc, ScanMode::smax_g2_average);
    CHECK(wsc.bell_crossing() == doctest::Approx(4.2287831790842896e-8).epsilon(1e-5));
    WindowScanner ssc(strong(), kIfc, ScanMode::smax_g2_average);
    CHECK(ssc.bell_crossing() == doctest::Approx(1.822376616588572e-8).epsilon(1e-5));
    // both modes agree that vanishing windows maximize the correlation
    CHECK(wsc.s_rescaled(1e-13) > 2.8);
}

TEST_CASE("scan helper returns one row per window") {
    std::vector<double> ws = {2e-9, 5e-9, 10e-9, 20e-9};
    auto pts = s_vs_window_scan(weak(), kIfc, ws, ScanMode::four_amplitude);
    REQUIRE(pts.size() == 4);
    for (size_t i = 0; i < 4; ++i) CHECK(pts[i].window == ws[i]);
    // S decreases as the window widens over this range
    for (size_t i = 1; i < 4; ++i) CHECK(pts[i].s < pts[i - 1].s);
}

TEST_CASE("curve integration is exact for linear functions") {
    CorrelationCurve c;
    for (int i = 0; i <= 10; ++i) {
        c.tau.push_back(0.1 * i);
        c.value.push_back(2.0 * 0.1 * i);
    }
    CHECK(integrate_curve(c, 0.0, 0.5) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(integrate_curve(c, 0.25, 0.75) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK_THROWS(integrate_curve(c, -0.5, 0.5));
}

TEST_CASE("zz expectation from the correlation curve") {
    // weak closed form, delay 46 ns, window 10 ns
    EmitterParams p = weak();
    auto make_curve = [&](double step) {
        CorrelationCurve c;
        double reach = 58e-9;
        for (double t = -reach; t <= reach + 0.5 * step; t += step) {
            c.tau.push_back(t);
            c.value.push_back(g2_weak(p, t));
        }
        return c;
    };
    CorrelationCurve c1 = make_curve(2e-11), c2 = make_curve(1e-11);
    double zz1 = sigma_zz_from_g2(c1, 46e-9, 10e-9, true);
    double zz2 = sigma_zz_from_g2(c2, 46e-9, 10e-9, true);
    CHECK(zz1 == doctest::Approx(-0.937675868149612).epsilon(3e-6));
    // halving the grid step converges toward the frozen quadrature value
    CHECK(std::abs(zz2 + 0.937675868149612) <= std::abs(zz1 + 0.937675868149612) + 1e-12);
    CHECK(sigma_zz_from_g2(c1, 46e-9, 10e-9, false) ==
          doctest::Approx(-0.967835625723148).epsilon(3e-6));
}
