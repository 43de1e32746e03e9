#include "fluoro/pipelines.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fluoro/analysis.hpp"
#include "fluoro/bloch.hpp"
#include "fluoro/errors.hpp"
#include "fluoro/franson.hpp"
#include "fluoro/io.hpp"
#include "fluoro/physics.hpp"
#include "fluoro/rng.hpp"
#include "fluoro/tomography.hpp"
#include "fluoro/trajectories.hpp"
#include "fluoro/units.hpp"
#include "fluoro/util.hpp"

namespace fluoro {

namespace fs = std::filesystem;
using nlohmann::json;
using cd = std::complex<double>;

namespace {

constexpr const char* kVersion = "1.0.0";
// substream roots, one per randomized pipeline; chsh and scan-window share a
// root so scan --simulate re-windows the exact event streams a chsh run sees
constexpr uint64_t kStreamG2 = 1;
constexpr uint64_t kStreamChsh = 3;
constexpr uint64_t kStreamTomo = 5;

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

fs::path prep_outdir(const RunOptions& opt) {
    if (opt.outdir.empty()) throw ConfigError("output directory is required");
    fs::path d(opt.outdir);
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw IoError("cannot create output directory " + d.string());
    return d;
}

void write_json_file(const fs::path& p, const json& j) {
    write_text_file(p, j.dump(2) + "\n");
}

// everything here is derived from the config alone, so reruns are byte-identical
void write_metadata(const fs::path& outdir, const char* command, const Config& cfg) {
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["schema_version"] = 1;
    m["seed"] = cfg.seed;
    m["config_hash"] = hex64(cfg.hash);
    m["config"] = json::parse(cfg.canonical);
    write_json_file(outdir / "metadata.json", m);
}

// wall-clock record; the one output file excluded from reproducibility checks
void write_run_log(const fs::path& outdir, const char* command, double wall_s) {
    char ts[64];
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
    char buf[256];
    std::snprintf(buf, sizeof buf, "command: %s\nfinished: %s\nwall_s: %.3f\n", command, ts,
                  wall_s);
    write_text_file(outdir / "run_log.txt", buf);
}

void write_curve_csv(const fs::path& path, const CorrelationCurve& c) {
    std::string s = "tau_s,value\n";
    for (size_t i = 0; i < c.tau.size(); ++i)
        s += format_double(c.tau[i]) + "," + format_double(c.value[i]) + "\n";
    write_text_file(path, s);
}

// run the inner loop of parallel_for with exceptions carried back to the caller
void parallel_for_checked(int n, int threads, const std::function<void(int)>& fn) {
    std::mutex mtx;
    std::exception_ptr err;
    parallel_for(n, threads, [&](int i) {
        try {
            fn(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mtx);
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);
}

// ---- chunked photon-stream generation --------------------------------------------

struct ChunkOut {
    std::vector<double> alice, bob;
    double t0 = 0, t1 = 0;
    EmitterParams params{};  // per-chunk params (differ from base under jitter)
};

// one slice of the renewal emission stream; every random stage draws from a
// fixed substream of chunk_rng so results do not depend on thread scheduling
ChunkOut generate_chunk(const Config& cfg, const EmitterParams& base, Rng chunk_rng, int k) {
    const auto& sim = cfg.simulation;
    double slice = sim.duration_s / double(sim.chunks);
    ChunkOut out;
    out.t0 = slice * double(k);
    out.t1 = (k + 1 == sim.chunks) ? sim.duration_s : slice * double(k + 1);
    out.params = base;
    if (sim.detuning_jitter_rad_per_s > 0) {
        Rng jr = chunk_rng.sub(6);
        out.params = apply_detuning_jitter(base, sim.detuning_jitter_rad_per_s, jr);
    }
    WaitingTimeSampler wt(out.params);
    Rng er = chunk_rng.sub(0);
    std::vector<double> em = emission_times(wt, out.t0, out.t1 - out.t0, er);
    if (sim.duty_cycle)
        em = apply_duty_cycle(em, sim.duty_cycle->on_s, sim.duty_cycle->period_s);
    if (sim.blinking && sim.blinking->amplitude > 0) {
        Rng br = chunk_rng.sub(2);
        em = apply_blinking(em, sim.blinking->amplitude, sim.blinking->t_bunch_s, br);
    }
    Rng tr = chunk_rng.sub(3);
    std::vector<double> det = thin(em, sim.efficiency, tr);
    Rng sr = chunk_rng.sub(4);
    auto ab = split_to_alice_bob(det, sim.splitter_ratio, sr);
    out.alice = std::move(ab.first);
    out.bob = std::move(ab.second);
    return out;
}

ScanMode scan_mode_from(const Config& cfg) {
    return cfg.analysis.scan_mode == "smax_g2_average" ? ScanMode::smax_g2_average
                                                       : ScanMode::four_amplitude;
}

// one interferometer setting measured over all chunks; returns summed counts
// and (optionally) the per-chunk detection events for re-windowing
SettingCounts run_setting(const Config& cfg, const BlochPropagator& shared_prop, int setting_idx,
                          double phi_a, double phi_b, int threads,
                          std::vector<std::vector<DetectionEvent>>* chunk_events) {
    const auto& sim = cfg.simulation;
    InterferometerConfig ifc = cfg.interferometer;
    ifc.phase_a = phi_a;
    ifc.phase_b = phi_b;
    Rng root(cfg.seed);
    Rng setting_rng = root.sub(kStreamChsh, uint64_t(setting_idx));
    const int chunks = sim.chunks;
    std::vector<SettingCounts> per(chunks);
    if (chunk_events) chunk_events->assign(chunks, {});
    const bool jittered = sim.detuning_jitter_rad_per_s > 0;

    parallel_for_checked(chunks, threads, [&](int k) {
        Rng crng = setting_rng.sub(uint64_t(k));
        ChunkOut c = generate_chunk(cfg, cfg.emitter, crng, k);
        std::optional<BlochPropagator> local;
        if (jittered) local.emplace(c.params);
        const BlochPropagator& prop = local ? *local : shared_prop;
        PairAmplitudeFn psi = [&prop](double t) { return prop.pair_amplitude(t); };
        double rho = prop.rho_ee_ss();
        // singles fringe term Re[e^{-i phi} g1]/g1(0) => pass conj(g1)/g1(0)
        cd coh_a = std::conj(prop.g1(ifc.delay_a)) / rho;
        cd coh_b = std::conj(prop.g1(ifc.delay_b)) / rho;
        Rng fr = crng.sub(5);
        auto events = simulate_franson(c.alice, c.bob, ifc, psi, coh_a, coh_b, fr);
        per[k] = count_setting(events, phi_a, phi_b, cfg.analysis.window_center_s,
                               cfg.analysis.window_half_width_s);
        if (chunk_events) (*chunk_events)[k] = std::move(events);
    });

    SettingCounts total;
    total.phi_a = phi_a;
    total.phi_b = phi_b;
    for (const auto& p : per)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) total.n[i][j] += p.n[i][j];
    return total;
}

std::array<std::pair<double, double>, 4> chsh_setting_phases() {
    ChshSettings st;
    return {{{st.a, st.b}, {st.a, st.b_prime}, {st.a_prime, st.b}, {st.a_prime, st.b_prime}}};
}

json setting_to_json(const SettingCounts& s) {
    json j;
    j["phi_a"] = s.phi_a;
    j["phi_b"] = s.phi_b;
    j["counts"] = {{s.n[0][0], s.n[0][1]}, {s.n[1][0], s.n[1][1]}};
    j["n_pairs"] = s.total();
    j["expectation"] = s.expectation();
    j["sigma"] = s.sigma();
    return j;
}

}  // namespace

// ---- g2 --------------------------------------------------------------------------

void run_g2(const Config& cfg, const RunOptions& opt) {
    Stopwatch sw;
    fs::path outdir = prep_outdir(opt);
    const EmitterParams& p = cfg.emitter;
    BlochPropagator prop(p);

    const double span = cfg.analysis.span_s;
    const int npts = 601;
    CorrelationCurve qrt, weak;
    qrt.tau.resize(npts);
    qrt.value.resize(npts);
    weak.tau.resize(npts);
    weak.value.resize(npts);
    for (int i = 0; i < npts; ++i) {
        double t = span * double(i) / double(npts - 1);
        qrt.tau[i] = weak.tau[i] = t;
        qrt.value[i] = prop.g2(t);
        weak.value[i] = g2_weak(p, t);
    }
    write_curve_csv(outdir / "g2_qrt.csv", qrt);
    write_curve_csv(outdir / "g2_weak.csv", weak);

    json summary;
    summary["rho_ee_ss"] = prop.rho_ee_ss();
    summary["saturation"] = p.saturation();
    summary["emission_rate_per_s"] = emission_rate(p);
    summary["coherent_rate_per_s"] = coherent_rate(p);
    summary["incoherent_rate_per_s"] = incoherent_rate(p);
    summary["antibunching_window_s"] = antibunching_window(p);
    summary["pair_rate_per_s"] = pair_rate(p.gamma, p.omega);

    if (opt.simulate) {
        const int threads = resolve_threads(opt.threads);
        const int chunks = cfg.simulation.chunks;
        const double bin = cfg.analysis.bin_width_s;
        Rng root(cfg.seed);
        std::vector<Histogram> hists(chunks);
        std::vector<size_t> na(chunks, 0), nb(chunks, 0);
        std::vector<ChunkOut> kept(cfg.simulation.write_events ? chunks : 0);

        parallel_for_checked(chunks, threads, [&](int k) {
            ChunkOut c = generate_chunk(cfg, p, root.sub(kStreamG2, uint64_t(k)), k);
            hists[k] = g2_histogram(c.alice, c.bob, bin, span, c.t1 - c.t0);
            na[k] = c.alice.size();
            nb[k] = c.bob.size();
            if (cfg.simulation.write_events) kept[k] = std::move(c);
        });

        Histogram tot;
        tot.bin_width = bin;
        tot.span = span;
        tot.center = hists[0].center;
        tot.counts.assign(tot.center.size(), 0.0);
        for (const auto& h : hists) {
            tot.baseline += h.baseline;
            for (size_t i = 0; i < tot.counts.size(); ++i) tot.counts[i] += h.counts[i];
        }
        tot.normalized.resize(tot.counts.size());
        for (size_t i = 0; i < tot.counts.size(); ++i)
            tot.normalized[i] = tot.baseline > 0 ? tot.counts[i] / tot.baseline : 0.0;

        std::string hs = "tau_s,counts,g2_normalized\n";
        for (size_t i = 0; i < tot.counts.size(); ++i)
            hs += format_double(tot.center[i]) + "," + format_double(tot.counts[i]) + "," +
                  format_double(tot.normalized[i]) + "\n";
        write_text_file(outdir / "g2_histogram.csv", hs);

        Chi2Result c2 = histogram_chi2(tot, [&](double t) { return prop.g2(t); });
        size_t natot = 0, nbtot = 0;
        for (int k = 0; k < chunks; ++k) {
            natot += na[k];
            nbtot += nb[k];
        }
        size_t mid = tot.counts.size() / 2;
        double zero_bin =
            mid > 0 ? 0.5 * (tot.normalized[mid - 1] + tot.normalized[mid]) : tot.normalized[0];

        double duty = cfg.simulation.duty_cycle
                          ? cfg.simulation.duty_cycle->on_s / cfg.simulation.duty_cycle->period_s
                          : 1.0;
        json h;
        h["n_alice"] = natot;
        h["n_bob"] = nbtot;
        h["chi2"] = c2.chi2;
        h["dof"] = c2.dof;
        h["chi2_per_dof"] = c2.dof > 0 ? c2.chi2 / double(c2.dof) : 0.0;
        h["detected_rate_per_s"] = double(natot + nbtot) / cfg.simulation.duration_s;
        h["expected_rate_per_s"] = emission_rate(p) * cfg.simulation.efficiency * duty;
        h["zero_bin_normalized"] = zero_bin;
        if (cfg.simulation.blinking && cfg.analysis.fit_min_tau_s > 0) {
            BaselineFit bf = fit_baseline(tot, cfg.analysis.fit_min_tau_s);
            h["baseline_fit"] = {{"c0", bf.c0},
                                 {"amplitude", bf.amplitude},
                                 {"t_bunch_s", bf.t_bunch},
                                 {"normalization", bf.normalization}};
        }
        summary["histogram"] = h;

        if (cfg.simulation.write_events) {
            std::vector<double> alice, bob;
            for (auto& c : kept) {
                alice.insert(alice.end(), c.alice.begin(), c.alice.end());
                bob.insert(bob.end(), c.bob.begin(), c.bob.end());
            }
            write_photon_stream_csv(outdir / "stream_alice.csv", alice);
            write_photon_stream_csv(outdir / "stream_bob.csv", bob);
        }
    }

    write_json_file(outdir / "g2_summary.json", summary);
    write_metadata(outdir, "g2", cfg);
    write_run_log(outdir, "g2", sw.seconds());
}

// ---- visibility ------------------------------------------------------------------

void run_visibility(const Config& cfg, const RunOptions& opt) {
    Stopwatch sw;
    fs::path outdir = prep_outdir(opt);
    BlochPropagator prop(cfg.emitter);
    const auto& ifc = cfg.interferometer;
    double dmean = 0.5 * (ifc.delay_a + ifc.delay_b);

    const int npts = 181;
    std::string s = "phi_rad,n1_a,n2_a,n1_b,n2_b\n";
    for (int i = 0; i < npts; ++i) {
        double phi = 2.0 * kPi * double(i) / double(npts - 1);
        auto [a1, a2] = interferometer_output_rates(prop, ifc.delay_a, phi);
        auto [b1, b2] = interferometer_output_rates(prop, ifc.delay_b, phi);
        s += format_double(phi) + "," + format_double(a1) + "," + format_double(a2) + "," +
             format_double(b1) + "," + format_double(b2) + "\n";
    }
    write_text_file(outdir / "fringes.csv", s);

    double rho = prop.rho_ee_ss();
    json out;
    out["schema_version"] = 1;
    out["rho_ee_ss"] = rho;
    out["visibility_a"] = std::abs(prop.g1(ifc.delay_a)) / rho;
    out["visibility_b"] = std::abs(prop.g1(ifc.delay_b)) / rho;
    out["visibility_mean_delay"] = std::abs(prop.g1(dmean)) / rho;
    out["delay_a_s"] = ifc.delay_a;
    out["delay_b_s"] = ifc.delay_b;
    write_json_file(outdir / "visibility.json", out);
    write_metadata(outdir, "visibility", cfg);
    write_run_log(outdir, "visibility", sw.seconds());
}

// ---- chsh ------------------------------------------------------------------------

void run_chsh(const Config& cfg, const RunOptions& opt) {
    Stopwatch sw;
    fs::path outdir = prep_outdir(opt);
    const int threads = resolve_threads(opt.threads);
    BlochPropagator prop(cfg.emitter);
    auto phases = chsh_setting_phases();

    std::array<SettingCounts, 4> sc;
    for (int s = 0; s < 4; ++s) {
        std::vector<std::vector<DetectionEvent>> chunk_events;
        bool keep = cfg.simulation.write_events;
        sc[s] = run_setting(cfg, prop, s, phases[s].first, phases[s].second, threads,
                            keep ? &chunk_events : nullptr);
        if (keep) {
            std::vector<DetectionEvent> all;
            for (auto& ce : chunk_events) all.insert(all.end(), ce.begin(), ce.end());
            write_detection_events_csv(outdir / ("events_setting" + std::to_string(s) + ".csv"),
                                       all);
        }
    }
    ChshEstimate est = chsh_from_settings(sc);

    WindowScanner scan(cfg.emitter, cfg.interferometer, scan_mode_from(cfg));
    double w = cfg.analysis.window_half_width_s;

    json out;
    out["schema_version"] = 1;
    out["window_half_width_s"] = w;
    out["window_center_s"] = cfg.analysis.window_center_s;
    out["settings"] = json::array();
    long long ncoinc = 0;
    for (const auto& s : sc) {
        out["settings"].push_back(setting_to_json(s));
        ncoinc += s.total();
    }
    out["s"] = est.s;
    out["sigma_s"] = est.sigma_s;
    out["n_coincidences"] = ncoinc;
    out["analytic"] = {{"scan_mode", cfg.analysis.scan_mode},
                       {"s_predicted", scan.s_rescaled(w)},
                       {"s_raw", scan.s_raw(w)},
                       {"visibility", scan.visibility()},
                       {"separable_s", scan.separable_s()}};
    write_json_file(outdir / "chsh_result.json", out);
    write_metadata(outdir, "chsh", cfg);
    write_run_log(outdir, "chsh", sw.seconds());
}

// ---- scan-window -----------------------------------------------------------------

void run_scan_window(const Config& cfg, const RunOptions& opt) {
    Stopwatch sw;
    fs::path outdir = prep_outdir(opt);
    const int threads = resolve_threads(opt.threads);

    std::vector<double> windows = cfg.analysis.scan_windows_s;
    if (windows.empty())
        for (int i = 1; i <= 120; ++i) windows.push_back(0.5e-9 * double(i));

    ScanMode mode = scan_mode_from(cfg);
    auto pts = s_vs_window_scan(cfg.emitter, cfg.interferometer, windows, mode);
    std::string s = "window_s,s_raw,s_rescaled\n";
    for (const auto& pt : pts)
        s += format_double(pt.window) + "," + format_double(pt.s_raw) + "," +
             format_double(pt.s) + "\n";
    write_text_file(outdir / "scan.csv", s);

    WindowScanner scanner(cfg.emitter, cfg.interferometer, mode);
    json out;
    out["schema_version"] = 1;
    out["scan_mode"] = cfg.analysis.scan_mode;
    out["visibility"] = scanner.visibility();
    out["separable_s"] = scanner.separable_s();
    out["n_windows"] = windows.size();
    try {
        out["bell_crossing_s"] = scanner.bell_crossing();
    } catch (const std::exception&) {
        out["bell_crossing_s"] = nullptr;  // no sign change in the scanned range
    }

    if (opt.simulate) {
        BlochPropagator prop(cfg.emitter);
        auto phases = chsh_setting_phases();
        std::vector<std::array<SettingCounts, 4>> per_window(windows.size());
        for (int st = 0; st < 4; ++st) {
            std::vector<std::vector<DetectionEvent>> chunk_events;
            run_setting(cfg, prop, st, phases[st].first, phases[st].second, threads,
                        &chunk_events);
            parallel_for_checked(int(windows.size()), threads, [&](int wi) {
                SettingCounts acc;
                acc.phi_a = phases[st].first;
                acc.phi_b = phases[st].second;
                for (const auto& ev : chunk_events) {
                    SettingCounts c = count_setting(ev, acc.phi_a, acc.phi_b,
                                                    cfg.analysis.window_center_s, windows[wi]);
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j) acc.n[i][j] += c.n[i][j];
                }
                per_window[wi][st] = acc;
            });
        }
        std::string ss = "window_s,s,sigma_s,n_coincidences\n";
        for (size_t wi = 0; wi < windows.size(); ++wi) {
            ChshEstimate est = chsh_from_settings(per_window[wi]);
            long long n = 0;
            for (const auto& c : per_window[wi]) n += c.total();
            ss += format_double(windows[wi]) + "," + format_double(est.s) + "," +
                  format_double(est.sigma_s) + "," + std::to_string(n) + "\n";
        }
        write_text_file(outdir / "scan_sim.csv", ss);
    }

    write_json_file(outdir / "scan_result.json", out);
    write_metadata(outdir, "scan-window", cfg);
    write_run_log(outdir, "scan-window", sw.seconds());
}

// ---- tomography ------------------------------------------------------------------

void run_tomography(const Config& cfg, const RunOptions& opt) {
    Stopwatch sw;
    fs::path outdir = prep_outdir(opt);
    const int threads = resolve_threads(opt.threads);
    const auto& tc = cfg.tomography;
    if (tc.records_path.empty())
        throw ConfigError("tomography requires tomography.records_path in the config");

    fs::path rp(tc.records_path);
    if (rp.is_relative()) rp = fs::path(cfg.source_dir) / rp;
    json jr;
    try {
        jr = json::parse(read_text_file(rp));
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse records file " + rp.string() + ": " + e.what());
    }
    std::vector<TomoRecord> recs;
    if (!jr.contains("records") || !jr["records"].is_array())
        throw ConfigError("records file needs a top-level \"records\" array");
    for (const auto& r : jr["records"]) {
        TomoRecord t;
        t.basis = r.at("basis").get<std::string>();
        t.expectation = r.at("expectation").get<double>();
        t.n = r.at("n").get<double>();
        t.resample = r.value("resample", true);
        recs.push_back(t);
    }

    // zz row is synthesized from the correlation function: ratio of the central
    // coincidence peak to the side peaks at the interferometer delay
    const double delay = 0.5 * (cfg.interferometer.delay_a + cfg.interferometer.delay_b);
    const double w = tc.zz_window_half_width_s;
    const double reach = delay + w + 2e-9;
    const double step = 2e-11;
    std::vector<double> taus;
    for (double t = -reach; t <= reach + 0.5 * step; t += step) taus.push_back(t);
    CorrelationCurve g2c = liouvillian_g2(cfg.emitter, taus);
    double zz = sigma_zz_from_g2(g2c, delay, w, cfg.analysis.zz_normalized);
    recs.push_back({"zz", zz, tc.zz_record_n, true});
    // unmeasured cross terms pinned to zero so the fit stays identifiable;
    // excluded from resampling (they carry no counting noise)
    recs.push_back({"zx", 0.0, 1e6, false});
    recs.push_back({"zy", 0.0, 1e6, false});

    Rng root(cfg.seed);
    MleResult fit = mle_fit(recs, tc.n_starts, root.sub(kStreamTomo, 0));
    double f_bell = fidelity_bell(fit.rho);
    double s_horo = horodecki_s(fit.rho);

    const int nb = tc.n_bootstrap;
    std::vector<double> bf(nb), bs(nb);
    Rng broot = root.sub(kStreamTomo, 1);
    parallel_for_checked(nb, threads, [&](int k) {
        auto r = bootstrap_one(recs, k, broot, fit.x);
        bf[k] = r.first;
        bs[k] = r.second;
    });
    auto stddev = [](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        double m = 0;
        for (double x : v) m += x;
        m /= double(v.size());
        double acc = 0;
        for (double x : v) acc += (x - m) * (x - m);
        return std::sqrt(acc / double(v.size() - 1));
    };

    std::string bcsv = "fidelity,horodecki_s\n";
    for (int k = 0; k < nb; ++k)
        bcsv += format_double(bf[k]) + "," + format_double(bs[k]) + "\n";
    write_text_file(outdir / "bootstrap.csv", bcsv);

    json rho = json::array();
    for (int i = 0; i < 4; ++i) {
        json row = json::array();
        for (int j = 0; j < 4; ++j)
            row.push_back({fit.rho(i, j).real(), fit.rho(i, j).imag()});
        rho.push_back(row);
    }
    json rj = json::array();
    for (const auto& r : recs)
        rj.push_back({{"basis", r.basis},
                      {"expectation", r.expectation},
                      {"n", r.n},
                      {"resample", r.resample}});

    json out;
    out["schema_version"] = 1;
    out["zz"] = {{"expectation", zz},
                 {"n", tc.zz_record_n},
                 {"window_half_width_s", w},
                 {"delay_s", delay},
                 {"normalized", cfg.analysis.zz_normalized}};
    out["records"] = rj;
    out["rho"] = rho;  // 4x4 of [re, im], basis |ss>,|sl>,|ls>,|ll>
    out["fidelity"] = f_bell;
    out["horodecki_s"] = s_horo;
    out["sigma_fidelity"] = stddev(bf);
    out["sigma_horodecki"] = stddev(bs);
    out["log_likelihood"] = fit.log_l;
    out["converged"] = fit.converged;
    out["n_starts"] = tc.n_starts;
    out["n_bootstrap"] = nb;
    write_json_file(outdir / "tomography_result.json", out);
    write_metadata(outdir, "tomography", cfg);
    write_run_log(outdir, "tomography", sw.seconds());
}

// ---- pair-rate -------------------------------------------------------------------

void run_pair_rate(const Config& cfg, const RunOptions& opt) {
    Stopwatch sw;
    fs::path outdir = prep_outdir(opt);
    const auto& pr = cfg.pair_rate;

    std::string s = "omega_over_gamma,pair_rate_over_gamma\n";
    for (int i = 1; i <= pr.n_points; ++i) {
        double x = pr.omega_over_gamma_max * double(i) / double(pr.n_points);
        s += format_double(x) + "," + format_double(pair_rate(1.0, x)) + "\n";
    }
    write_text_file(outdir / "pair_rate.csv", s);

    PairRateOptimum o = pair_rate_optimum(1.0);
    const EmitterParams& p = cfg.emitter;
    json out;
    out["schema_version"] = 1;
    out["omega_star_over_gamma"] = o.omega_star;
    out["rate_star_over_gamma"] = o.rate_star;
    out["emitter"] = {{"pair_rate_per_s", pair_rate(p.gamma, p.omega)},
                      {"antibunching_window_s", antibunching_window(p)},
                      {"emission_rate_per_s", emission_rate(p)},
                      {"coherent_rate_per_s", coherent_rate(p)},
                      {"incoherent_rate_per_s", incoherent_rate(p)}};
    write_json_file(outdir / "pair_rate_result.json", out);
    write_metadata(outdir, "pair-rate", cfg);
    write_run_log(outdir, "pair-rate", sw.seconds());
}

}  // namespace fluoro
