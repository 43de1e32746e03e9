#pragma once
// Small dense L-BFGS (two-loop recursion, Armijo backtracking).  Written here
// because no suitable single-header quasi-Newton optimizer ships with the
// toolchain; only needs to handle the 16-parameter likelihood below.
#include <Eigen/Dense>
#include <functional>
#include <deque>
#include <cmath>

namespace fluoro {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LbfgsOptions {
    int max_iter = 1000;
    int history = 10;
    double gtol_rel = 1e-9;   // stop when ||g||_inf <= gtol_rel * (1 + |f|)
    double ftol = 1e-13;      // stop after stalls of relative decrease below this
    int stall_limit = 6;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0;
    int iterations = 0;
    bool converged = false;
};

inline LbfgsResult lbfgs_minimize(const ObjectiveFn& fn, Eigen::VectorXd x,
                                  const LbfgsOptions& opt = {}) {
    const int n = int(x.size());
    Eigen::VectorXd g(n), g_new(n);
    double f = fn(x, g);
    std::deque<Eigen::VectorXd> S, Y;
    std::deque<double> rho;
    int stalls = 0;
    LbfgsResult res;

    for (int it = 0; it < opt.max_iter; ++it) {
        if (g.cwiseAbs().maxCoeff() <= opt.gtol_rel * (1.0 + std::abs(f))) {
            res.converged = true;
            res.iterations = it;
            break;
        }
        // two-loop recursion
        Eigen::VectorXd q = g;
        std::vector<double> alpha(S.size());
        for (int i = int(S.size()) - 1; i >= 0; --i) {
            alpha[i] = rho[i] * S[i].dot(q);
            q -= alpha[i] * Y[i];
        }
        double h0 = 1.0;
        if (!S.empty()) {
            double yy = Y.back().squaredNorm();
            if (yy > 0) h0 = S.back().dot(Y.back()) / yy;
        }
        Eigen::VectorXd d = h0 * q;
        for (size_t i = 0; i < S.size(); ++i) {
            double beta = rho[i] * Y[i].dot(d);
            d += (alpha[i] - beta) * S[i];
        }
        d = -d;

        double dir = g.dot(d);
        if (!(dir < 0)) {  // not a descent direction; reset to steepest descent
            d = -g;
            dir = -g.squaredNorm();
            S.clear(); Y.clear(); rho.clear();
        }

        // Armijo backtracking
        double step = S.empty() ? std::min(1.0, 1.0 / std::max(1e-12, g.cwiseAbs().maxCoeff())) : 1.0;
        double f_new = f;
        Eigen::VectorXd x_new = x;
        bool ok = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + step * d;
            f_new = fn(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * dir) { ok = true; break; }
            step *= 0.5;
        }
        if (!ok) { res.iterations = it; break; }  // line search failed; keep best

        Eigen::VectorXd s = x_new - x, yv = g_new - g;
        double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            S.push_back(s); Y.push_back(yv); rho.push_back(1.0 / sy);
            if (int(S.size()) > opt.history) { S.pop_front(); Y.pop_front(); rho.pop_front(); }
        }
        double decrease = f - f_new;
        x = std::move(x_new);
        g = g_new;
        f = f_new;
        res.iterations = it + 1;
        if (decrease <= opt.ftol * (1.0 + std::abs(f))) {
            if (++stalls >= opt.stall_limit) { res.converged = true; break; }
        } else stalls = 0;
    }
    res.x = std::move(x);
    res.f = f;
    return res;
}

} // namespace fluoro
