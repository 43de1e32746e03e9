#pragma once
#include <string>
#include "fluoro/config.hpp"

// Top-level commands.  Each writes its outputs under `outdir` (created if
// missing) plus metadata.json (deterministic) and run_log.txt (wall-clock,
// excluded from reproducibility guarantees), and returns 0 on success.

namespace fluoro {

struct RunOptions {
    std::string outdir;
    int threads = 0;        // 0 = auto
    bool simulate = false;  // g2 / scan-window: also run the photon-stream sampler
};

void run_g2(const Config& cfg, const RunOptions& opt);
void run_visibility(const Config& cfg, const RunOptions& opt);
void run_chsh(const Config& cfg, const RunOptions& opt);
void run_scan_window(const Config& cfg, const RunOptions& opt);
void run_tomography(const Config& cfg, const RunOptions& opt);
void run_pair_rate(const Config& cfg, const RunOptions& opt);

} // namespace fluoro
