#pragma once
// Optical Bloch equations for a driven two-level emitter, in Liouville
// (column-stacked) form with basis order (gg, ge, eg, ee), ge = <g|rho|e>.
//
//   d/dt vec(rho) = L vec(rho)
//
// gamma = half population decay rate (population decays at 2*gamma),
// delta = laser detuning, omega = Rabi frequency.  The propagator
// diagonalizes L once and evaluates exp(L*tau)*v0 from the spectrum; a
// scaling-and-squaring Pade expm is kept as a fallback for (unphysical)
// parameter corners where the eigenbasis is ill-conditioned.
#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include "fluoro/units.hpp"

namespace fluoro {

using cd = std::complex<double>;
using Matrix4cd = Eigen::Matrix4cd;
using Vector4cd = Eigen::Vector4cd;

inline Matrix4cd build_liouvillian(const EmitterParams& p) {
    const cd i(0.0, 1.0);
    const double g = p.gamma, d = p.delta, om = p.omega;
    Matrix4cd L;
    L << cd(0), i * om / 2.0, -i * om / 2.0, cd(2 * g),
         i * om / 2.0, -(cd(g) + i * d), cd(0), -i * om / 2.0,
         -i * om / 2.0, cd(0), -(cd(g) - i * d), i * om / 2.0,
         cd(0), -i * om / 2.0, i * om / 2.0, cd(-2 * g);
    return L;
}

// exp(A) by scaling-and-squaring with the (6,6) Pade approximant; plenty for
// a 4x4 with moderate norm after scaling.
inline Matrix4cd expm_pade(Matrix4cd A) {
    double nrm = A.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
    int squarings = 0;
    if (nrm > 0.5) {
        squarings = std::max(0, int(std::ceil(std::log2(nrm / 0.5))));
        A /= std::pow(2.0, squarings);
    }
    // Pade(6,6) coefficients
    static const double c[7] = {1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
    Matrix4cd A2 = A * A, A4 = A2 * A2, A6 = A4 * A2;
    Matrix4cd U = A * (c[1] * Matrix4cd::Identity() + c[3] * A2 + c[5] * A4);
    Matrix4cd V = c[0] * Matrix4cd::Identity() + c[2] * A2 + c[4] * A4 + c[6] * A6;
    Matrix4cd F = (V - U).partialPivLu().solve(V + U);
    for (int k = 0; k < squarings; ++k) F = F * F;
    return F;
}

class BlochPropagator {
public:
    explicit BlochPropagator(const EmitterParams& p) : params_(p), L_(build_liouvillian(p)) {
        Eigen::ComplexEigenSolver<Matrix4cd> es(L_);
        if (es.info() != Eigen::Success) throw std::runtime_error("Liouvillian eigensolver failed");
        evals_ = es.eigenvalues();
        V_ = es.eigenvectors();
        Eigen::FullPivLU<Matrix4cd> lu(V_);
        diagonalizable_ = lu.isInvertible();
        if (diagonalizable_) {
            Vinv_ = lu.inverse();
            double resid = (V_ * evals_.asDiagonal() * Vinv_ - L_).cwiseAbs().maxCoeff();
            double scale = L_.cwiseAbs().maxCoeff();
            if (scale > 0 && resid > 1e-9 * scale) diagonalizable_ = false;
        }
        // steady state: eigenvector of the eigenvalue closest to 0,
        // normalized to unit trace (gg + ee = 1)
        int k = 0;
        for (int j = 1; j < 4; ++j)
            if (evals_[j].real() > evals_[k].real()) k = j;
        Vector4cd ss = V_.col(k);
        cd tr = ss[0] + ss[3];
        if (std::abs(tr) < 1e-300) throw std::runtime_error("degenerate steady state");
        ss_ = ss / tr;
        if ((L_ * ss_).cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, L_.cwiseAbs().maxCoeff()))
            throw std::runtime_error("steady state residual too large");
    }

    const EmitterParams& params() const { return params_; }
    const Matrix4cd& liouvillian() const { return L_; }
    const Vector4cd& steady_state() const { return ss_; }
    double rho_ee_ss() const { return ss_[3].real(); }

    Vector4cd propagate(const Vector4cd& v0, double tau) const {
        if (diagonalizable_) {
            Vector4cd c = Vinv_ * v0;
            for (int j = 0; j < 4; ++j) c[j] *= std::exp(evals_[j] * tau);
            return V_ * c;
        }
        return expm_pade(L_ * tau) * v0;
    }

    // g2(tau) = <rho_ee(tau | emission)>/rho_ee_ss, i.e. quantum regression
    // from the post-emission ground state vec|g><g| = (1,0,0,0).
    double g2(double tau) const {
        Vector4cd v = propagate(ground(), std::abs(tau));
        return (v[3] / ss_[3]).real();
    }

    // first-order coherence <sigma+(t+tau) sigma-(t)>_ss (unnormalized);
    // initial vector is vec(sigma- rho_ss) = (rho_eg_ss, rho_ee_ss, 0, 0),
    // read out on the ge component.  g1(0) = rho_ee_ss.
    cd g1(double tau) const {
        Vector4cd v0;
        v0 << ss_[2], ss_[3], cd(0), cd(0);
        Vector4cd v = propagate(v0, std::abs(tau));
        cd val = v[1];
        return tau < 0 ? std::conj(val) : val;
    }

    // conditional pair amplitude: coherence of the conditional state after an
    // emission, normalized to the steady-state coherence.  Reduces to
    // 1 - exp(-(gamma - i delta)|tau|) in the weak-drive limit; symmetric in
    // tau (pair-exchange symmetry).
    cd pair_amplitude(double tau) const {
        if (std::abs(ss_[1]) < 1e-300) throw std::runtime_error("zero steady-state coherence (omega=0?)");
        Vector4cd v = propagate(ground(), std::abs(tau));
        return v[1] / ss_[1];
    }

private:
    static Vector4cd ground() {
        Vector4cd v;
        v << cd(1), cd(0), cd(0), cd(0);
        return v;
    }

    EmitterParams params_;
    Matrix4cd L_, V_, Vinv_;
    Vector4cd evals_, ss_;
    bool diagonalizable_ = false;
};

} // namespace fluoro
