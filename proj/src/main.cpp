// command-line front end: parse a JSON config, run one pipeline, write results
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "fluoro/config.hpp"
#include "fluoro/errors.hpp"
#include "fluoro/pipelines.hpp"

namespace {

struct CliArgs {
    std::string config_path;
    std::string outdir;
    long long seed = -1;  // <0: keep the config's seed
    int threads = 0;
    bool simulate = false;
};

void add_common(CLI::App* cmd, CliArgs& a, bool with_simulate) {
    cmd->add_option("-c,--config", a.config_path, "JSON config file")->required();
    cmd->add_option("-o,--out", a.outdir, "output directory")->required();
    cmd->add_option("--seed", a.seed, "override the config seed");
    cmd->add_option("--threads", a.threads, "worker threads (0 = auto)");
    if (with_simulate)
        cmd->add_flag("--simulate", a.simulate, "also run the stochastic photon-stream sampler");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-level emitter fluorescence: correlation, interference and Bell analysis"};
    app.require_subcommand(1);

    CliArgs args;
    CLI::App* c_g2 = app.add_subcommand("g2", "intensity correlation curves and histogram");
    CLI::App* c_vis = app.add_subcommand("visibility", "interferometer fringe visibility");
    CLI::App* c_chsh = app.add_subcommand("chsh", "four-setting Bell test on sampled streams");
    CLI::App* c_scan = app.add_subcommand("scan-window", "CHSH vs coincidence window");
    CLI::App* c_tomo = app.add_subcommand("tomography", "maximum-likelihood state fit");
    CLI::App* c_rate = app.add_subcommand("pair-rate", "coincidence yield vs drive strength");
    add_common(c_g2, args, true);
    add_common(c_vis, args, false);
    add_common(c_chsh, args, false);
    add_common(c_scan, args, true);
    add_common(c_tomo, args, false);
    add_common(c_rate, args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage problems map to the config-error code
    }

    try {
        fluoro::Config cfg = fluoro::load_config(args.config_path);
        if (args.seed >= 0) cfg.seed = uint64_t(args.seed);
        fluoro::RunOptions opt;
        opt.outdir = args.outdir;
        opt.threads = args.threads;
        opt.simulate = args.simulate;

        if (c_g2->parsed()) fluoro::run_g2(cfg, opt);
        else if (c_vis->parsed()) fluoro::run_visibility(cfg, opt);
        else if (c_chsh->parsed()) fluoro::run_chsh(cfg, opt);
        else if (c_scan->parsed()) fluoro::run_scan_window(cfg, opt);
        else if (c_tomo->parsed()) fluoro::run_tomography(cfg, opt);
        else if (c_rate->parsed()) fluoro::run_pair_rate(cfg, opt);
        return 0;
    } catch (const fluoro::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const fluoro::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
