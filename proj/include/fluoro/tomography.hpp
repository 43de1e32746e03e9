#pragma once
// Two-qubit (time-bin s/l) state tomography by maximum likelihood, with the
// sigma_z x sigma_z expectation derived from the photon correlation function.
//
// Density matrix parameterization (physical by construction):
//   rho(x) = T^dag T / Tr(T^dag T),  T lower triangular,
//   x[0..3]   = diag (real),
//   x[4..15]  = row-major lower off-diagonal (re, im) pairs:
//               (1,0), (2,0), (2,1), (3,0), (3,1), (3,2).
// Basis order: |ss>, |sl>, |ls>, |ll> (Alice qubit first).
#include <Eigen/Dense>
#include <array>
#include <complex>
#include <string>
#include <vector>
#include <cmath>
#include <stdexcept>
#include "fluoro/lbfgs.hpp"
#include "fluoro/rng.hpp"
#include "fluoro/physics.hpp"

namespace fluoro {

using Matrix2cd = Eigen::Matrix2cd;

struct TomoRecord {
    std::string basis;   // two of {x,y,z}, Alice then Bob
    double expectation;  // measured E in [-1, 1]
    double n;            // number of coincidences behind it
    bool resample = true;  // false for constraint pseudo-records
};

inline Matrix2cd pauli(char c) {
    Matrix2cd m;
    const std::complex<double> i(0, 1);
    switch (c) {
        case 'x': m << 0, 1, 1, 0; break;
        case 'y': m << 0, -i, i, 0; break;
        case 'z': m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument(std::string("unknown Pauli axis: ") + c);
    }
    return m;
}

inline Matrix4cd kron2(const Matrix2cd& a, const Matrix2cd& b) {
    Matrix4cd m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return m;
}

// projector onto the +1/-1 eigenspace of sigma_a x sigma_b
inline Matrix4cd povm_element(char axis_a, char axis_b, int sign) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("povm sign must be +-1");
    return 0.5 * (Matrix4cd::Identity() + double(sign) * kron2(pauli(axis_a), pauli(axis_b)));
}

inline Matrix4cd t_matrix(const std::array<double, 16>& x) {
    using C = std::complex<double>;
    Matrix4cd T = Matrix4cd::Zero();
    T(0, 0) = x[0]; T(1, 1) = x[1]; T(2, 2) = x[2]; T(3, 3) = x[3];
    T(1, 0) = C(x[4], x[5]);
    T(2, 0) = C(x[6], x[7]);
    T(2, 1) = C(x[8], x[9]);
    T(3, 0) = C(x[10], x[11]);
    T(3, 1) = C(x[12], x[13]);
    T(3, 2) = C(x[14], x[15]);
    return T;
}

inline Matrix4cd rho_from_params(const std::array<double, 16>& x) {
    Matrix4cd T = t_matrix(x);
    Matrix4cd r = T.adjoint() * T;
    double tr = r.trace().real();
    if (!(tr > 1e-300)) throw std::runtime_error("rho_from_params: zero trace");
    return r / tr;
}

// lower-triangular factor with T^dag T = rho (reverse-order Cholesky); used
// to seed the optimizer at a chosen density matrix
inline std::array<double, 16> params_from_rho(const Matrix4cd& rho) {
    Matrix4cd B;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) B(i, j) = rho(3 - i, 3 - j);
    Eigen::LLT<Matrix4cd> llt(B + 1e-14 * Matrix4cd::Identity());
    if (llt.info() != Eigen::Success) throw std::runtime_error("params_from_rho: not PSD");
    Matrix4cd C = llt.matrixL();
    Matrix4cd U;  // U = J C J is upper triangular with U U^dag = rho
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) U(i, j) = C(3 - i, 3 - j);
    Matrix4cd T = U.adjoint();  // lower; T^dag T = U U^dag = rho
    std::array<double, 16> x{};
    x[0] = T(0, 0).real(); x[1] = T(1, 1).real(); x[2] = T(2, 2).real(); x[3] = T(3, 3).real();
    auto put = [&](int k, int i, int j) { x[k] = T(i, j).real(); x[k + 1] = T(i, j).imag(); };
    put(4, 1, 0); put(6, 2, 0); put(8, 2, 1); put(10, 3, 0); put(12, 3, 1); put(14, 3, 2);
    return x;
}

// ---- likelihood -----------------------------------------------------------------

struct PreparedRecord {
    Matrix4cd p_plus, p_minus;
    double n_plus, n_minus;  // N(1+-E)/2
};

inline std::vector<PreparedRecord> prepare_records(const std::vector<TomoRecord>& recs) {
    std::vector<PreparedRecord> out;
    out.reserve(recs.size());
    for (const auto& r : recs) {
        if (r.basis.size() != 2) throw std::invalid_argument("basis must be two axes, e.g. \"xy\"");
        if (!(r.n > 0)) throw std::invalid_argument("record needs n > 0");
        if (std::abs(r.expectation) > 1.0 + 1e-12) throw std::invalid_argument("|E| > 1");
        PreparedRecord p;
        p.p_plus = povm_element(r.basis[0], r.basis[1], +1);
        p.p_minus = povm_element(r.basis[0], r.basis[1], -1);
        p.n_plus = 0.5 * r.n * (1.0 + r.expectation);
        p.n_minus = 0.5 * r.n * (1.0 - r.expectation);
        out.push_back(std::move(p));
    }
    return out;
}

// log-likelihood sum_r [n+ ln p+ + n- ln p-]; probabilities clamped at 1e-12.
// If grad16 is non-null, the analytic gradient in the 16 real parameters is
// written there (Wirtinger: dL/dTbar = sum n_s/p_s (T P_s - p_s T)/Z).
inline double log_likelihood(const std::array<double, 16>& x,
                             const std::vector<PreparedRecord>& recs,
                             std::array<double, 16>* grad16 = nullptr) {
    Matrix4cd T = t_matrix(x);
    Matrix4cd TdT = T.adjoint() * T;
    double Z = TdT.trace().real();
    if (!(Z > 1e-300)) {
        if (grad16) grad16->fill(0.0);
        return -1e30;
    }
    const double clamp = 1e-12;
    double L = 0;
    Matrix4cd W = Matrix4cd::Zero();
    for (const auto& r : recs) {
        double pp = std::max(clamp, (TdT.cwiseProduct(r.p_plus.transpose())).sum().real() / Z);
        double pm = std::max(clamp, (TdT.cwiseProduct(r.p_minus.transpose())).sum().real() / Z);
        L += r.n_plus * std::log(pp) + r.n_minus * std::log(pm);
        if (grad16) {
            W += (r.n_plus / pp) * (T * r.p_plus - pp * T) / Z;
            W += (r.n_minus / pm) * (T * r.p_minus - pm * T) / Z;
        }
    }
    if (grad16) {
        auto& g = *grad16;
        g[0] = 2 * W(0, 0).real(); g[1] = 2 * W(1, 1).real();
        g[2] = 2 * W(2, 2).real(); g[3] = 2 * W(3, 3).real();
        auto put = [&](int k, int i, int j) { g[k] = 2 * W(i, j).real(); g[k + 1] = 2 * W(i, j).imag(); };
        put(4, 1, 0); put(6, 2, 0); put(8, 2, 1); put(10, 3, 0); put(12, 3, 1); put(14, 3, 2);
    }
    return L;
}

// ---- fitting --------------------------------------------------------------------

inline Eigen::Vector4cd bell_psi_plus() {
    Eigen::Vector4cd v;
    v << 0, 1.0 / kSqrt2, 1.0 / kSqrt2, 0;
    return v;
}

inline double fidelity(const Matrix4cd& rho, const Eigen::Vector4cd& psi) {
    return (psi.adjoint() * rho * psi)(0, 0).real();
}

inline double fidelity_bell(const Matrix4cd& rho) { return fidelity(rho, bell_psi_plus()); }

// Horodecki CHSH maximum: S = 2 sqrt(m1 + m2), m_i the two largest
// eigenvalues of M^T M, M_ij = Tr(rho sigma_i x sigma_j)
inline double horodecki_s(const Matrix4cd& rho) {
    const char ax[3] = {'x', 'y', 'z'};
    Eigen::Matrix3d M;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            M(i, j) = (rho * kron2(pauli(ax[i]), pauli(ax[j]))).trace().real();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M.transpose() * M);
    const auto& ev = es.eigenvalues();  // ascending
    return 2.0 * std::sqrt(std::max(0.0, ev[1] + ev[2]));
}

struct MleResult {
    std::array<double, 16> x{};
    Matrix4cd rho;
    double log_l = 0;
    bool converged = false;
    int starts_tried = 0;
};

inline std::array<double, 16> identity_start() {
    std::array<double, 16> x{};
    x[0] = x[1] = x[2] = x[3] = 0.5;
    return x;
}

inline std::array<double, 16> bell_start() {
    Matrix4cd seed = 0.9 * (bell_psi_plus() * bell_psi_plus().adjoint()) +
                     0.025 * Matrix4cd::Identity();
    return params_from_rho(seed);
}

inline MleResult mle_fit(const std::vector<TomoRecord>& records, int n_starts, Rng rng,
                         const std::vector<std::array<double, 16>>& extra_starts = {}) {
    if (n_starts < 1) throw std::invalid_argument("n_starts must be >= 1");
    auto recs = prepare_records(records);
    ObjectiveFn obj = [&recs](const Eigen::VectorXd& v, Eigen::VectorXd& grad) {
        std::array<double, 16> x, g;
        for (int i = 0; i < 16; ++i) x[i] = v[i];
        double L = log_likelihood(x, recs, &g);
        grad.resize(16);
        for (int i = 0; i < 16; ++i) grad[i] = -g[i];
        return -L;
    };

    std::vector<std::array<double, 16>> starts = extra_starts;
    starts.push_back(identity_start());
    starts.push_back(bell_start());
    for (int k = int(starts.size()); k < n_starts; ++k) {
        Rng r = rng.sub(0, uint64_t(k));
        std::array<double, 16> x{};
        for (auto& xi : x) xi = 0.5 * r.normal();
        starts.push_back(x);
    }

    MleResult best;
    double best_f = 1e300;
    LbfgsOptions opt;
    opt.max_iter = 1500;
    opt.gtol_rel = 1e-10;
    for (const auto& s : starts) {
        Eigen::VectorXd x0(16);
        for (int i = 0; i < 16; ++i) x0[i] = s[i];
        LbfgsResult r = lbfgs_minimize(obj, x0, opt);
        ++best.starts_tried;
        if (r.f < best_f) {
            best_f = r.f;
            for (int i = 0; i < 16; ++i) best.x[i] = r.x[i];
            best.converged = r.converged;
        }
    }
    best.rho = rho_from_params(best.x);
    best.log_l = -best_f;
    return best;
}

// ---- bootstrap ------------------------------------------------------------------

struct BootstrapResult {
    double sigma_fidelity = 0, sigma_horodecki = 0;
    std::vector<double> fidelities, horodeckis;
};

// One bootstrap resample: Poisson-resample the per-port counts n+- = N(1+-E)/2
// of every measured record (constraint pseudo-records pass through unchanged)
// and refit seeded from the center fit.  Keyed by k only, so resamples can run
// in any order (or in parallel) and still reproduce.
inline std::pair<double, double> bootstrap_one(const std::vector<TomoRecord>& records,
                                               int k, Rng rng,
                                               const std::array<double, 16>& center_fit) {
    Rng rk = rng.sub(1, uint64_t(k));
    std::vector<TomoRecord> res = records;
    for (size_t j = 0; j < res.size(); ++j) {
        if (!res[j].resample) continue;
        double np = 0.5 * res[j].n * (1.0 + res[j].expectation);
        double nm = 0.5 * res[j].n * (1.0 - res[j].expectation);
        double np2 = double(rk.sub(2, j).poisson(np));
        double nm2 = double(rk.sub(3, j).poisson(nm));
        if (np2 + nm2 <= 0) continue;  // astronomically unlikely; keep original
        res[j].expectation = (np2 - nm2) / (np2 + nm2);
        res[j].n = np2 + nm2;
    }
    MleResult fit = mle_fit(res, 3, rk.sub(4), {center_fit});
    return {fidelity_bell(fit.rho), horodecki_s(fit.rho)};
}

inline BootstrapResult bootstrap_uncertainty(const std::vector<TomoRecord>& records,
                                             int n_resamples, Rng rng,
                                             const std::array<double, 16>& center_fit) {
    BootstrapResult out;
    out.fidelities.reserve(n_resamples);
    for (int k = 0; k < n_resamples; ++k) {
        auto [f, s] = bootstrap_one(records, k, rng, center_fit);
        out.fidelities.push_back(f);
        out.horodeckis.push_back(s);
    }
    auto stddev = [](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        double m = 0;
        for (double x : v) m += x;
        m /= double(v.size());
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / double(v.size() - 1));
    };
    out.sigma_fidelity = stddev(out.fidelities);
    out.sigma_horodecki = stddev(out.horodeckis);
    return out;
}

// ---- zz from the correlation function ---------------------------------------------

// trapezoid integral of a sampled curve over [lo, hi] with linear
// interpolation at the window edges; the grid must cover the window
inline double integrate_curve(const CorrelationCurve& c, double lo, double hi) {
    if (c.tau.size() < 2) throw std::invalid_argument("curve too short");
    if (lo < c.tau.front() - 1e-15 || hi > c.tau.back() + 1e-15 || lo >= hi)
        throw std::invalid_argument("integration window outside curve grid");
    auto interp = [&](double t) {
        auto it = std::upper_bound(c.tau.begin(), c.tau.end(), t);
        size_t j = std::min(c.tau.size() - 1, size_t(std::max<ptrdiff_t>(1, it - c.tau.begin())));
        double t0 = c.tau[j - 1], t1 = c.tau[j];
        double w = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
        return c.value[j - 1] * (1 - w) + c.value[j] * w;
    };
    double acc = 0, prev_t = lo, prev_v = interp(lo);
    for (size_t j = 0; j < c.tau.size(); ++j) {
        if (c.tau[j] <= lo || c.tau[j] >= hi) continue;
        acc += 0.5 * (prev_v + c.value[j]) * (c.tau[j] - prev_t);
        prev_t = c.tau[j];
        prev_v = c.value[j];
    }
    acc += 0.5 * (prev_v + interp(hi)) * (hi - prev_t);
    return acc;
}

// sigma_z x sigma_z expectation from the correlation function: ratio of
// center-peak to side-peak coincidence mass in a +-window,
//   r = Int_{-w}^{w} g2 / Int_{-w}^{w} (g2(.-dt)+g2(.+dt))/2 ,
// normalized four-outcome estimator zz = -(1-r)/(1+r); the unnormalized
// variant -(1-r) is the small-r limit.
inline double sigma_zz_from_g2(const CorrelationCurve& g2, double delay, double window,
                               bool normalized = true) {
    double a = integrate_curve(g2, -window, window);
    double b = 0.5 * (integrate_curve(g2, -delay - window, -delay + window) +
                      integrate_curve(g2, delay - window, delay + window));
    if (b <= 0) throw std::runtime_error("sigma_zz_from_g2: empty side peaks");
    double r = a / b;
    return normalized ? -(1.0 - r) / (1.0 + r) : -(1.0 - r);
}

} // namespace fluoro
