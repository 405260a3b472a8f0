#include "hodgex/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace hodgex {

namespace {

GevpResult solve_dense(const Eigen::MatrixXd& S, const Eigen::MatrixXd& m, int count) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, m);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("dense generalized eigensolver failed");
    GevpResult out;
    const int n = static_cast<int>(S.rows());
    count = std::min(count, n);
    out.values = es.eigenvalues().head(count);
    out.vectors = es.eigenvectors().leftCols(count);
    out.lambda_max = std::max(0.0, es.eigenvalues()(n - 1));
    out.space_dim = n;
    out.method = "dense";
    out.residuals.resize(count);
    for (int i = 0; i < count; ++i)
        out.residuals(i) =
            (S * out.vectors.col(i) - out.values(i) * (m * out.vectors.col(i))).norm();
    return out;
}

// Robust LOBPCG: full-basis Rayleigh-Ritz over [X, W, P] with an
// (S + sigma m)^-1 preconditioner. Deterministic for a fixed seed.
GevpResult solve_lobpcg(const Eigen::MatrixXd& S, const Eigen::MatrixXd& m, int count,
                        const GevpOptions& opts) {
    const int n = static_cast<int>(S.rows());
    const int nb = std::min(n, count + std::min(count, 8) + 2);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> N01(0.0, 1.0);

    // scale and preconditioner
    double snorm = S.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm proxy
    double mnorm = m.cwiseAbs().rowwise().sum().maxCoeff();
    double sigma = 1e-3 * std::max(snorm / std::max(mnorm, 1e-300), 1e-300);
    Eigen::LLT<Eigen::MatrixXd> prec(S + sigma * m);
    if (prec.info() != Eigen::Success)
        throw std::runtime_error("lobpcg preconditioner factorization failed");

    Eigen::MatrixXd X(n, nb);
    for (int j = 0; j < nb; ++j)
        for (int i = 0; i < n; ++i) X(i, j) = N01(rng);
    X = mass_orthonormalize(X, m, 1e-14);
    Eigen::MatrixXd P(n, 0);
    Eigen::VectorXd theta;

    // crude largest-eigenvalue estimate for the convergence scale
    double lmax_est = 0.0;
    {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = N01(rng);
        Eigen::LLT<Eigen::MatrixXd> mllt(m);
        for (int it = 0; it < 25; ++it) {
            v = mllt.solve(S * v);
            double nv = v.norm();
            if (nv == 0) break;
            v /= nv;
        }
        lmax_est = v.dot(S * v) / std::max(v.dot(m * v), 1e-300);
    }

    Eigen::MatrixXd Xprev = X;
    for (int it = 0; it < opts.max_iter; ++it) {
        // Rayleigh-Ritz over [X P W]
        Eigen::MatrixXd R = S * X;
        Eigen::MatrixXd MX = m * X;
        // current Ritz values for residuals
        Eigen::MatrixXd xsx = X.transpose() * R;
        Eigen::MatrixXd xmx = X.transpose() * MX;
        // residual block with current Ritz approximations
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> small(
            0.5 * (xsx + xsx.transpose()), 0.5 * (xmx + xmx.transpose()));
        theta = small.eigenvalues();
        X = X * small.eigenvectors();
        R = S * X - (m * X) * theta.asDiagonal();

        // convergence on the leading `count` pairs
        bool done = true;
        for (int j = 0; j < count; ++j)
            if (R.col(j).norm() > opts.tol * std::max(snorm, lmax_est)) done = false;
        if (done) {
            GevpResult out;
            out.values = theta.head(count);
            out.vectors = X.leftCols(count);
            out.lambda_max = lmax_est;
            out.space_dim = n;
            out.method = "lobpcg";
            out.residuals.resize(count);
            for (int j = 0; j < count; ++j) out.residuals(j) = R.col(j).norm();
            return out;
        }

        Eigen::MatrixXd W = prec.solve(R);
        Eigen::MatrixXd Pnew = X - Xprev * (Xprev.transpose() * (m * X));
        Xprev = X;
        Eigen::MatrixXd basis(n, X.cols() + W.cols() + Pnew.cols());
        basis << X, W, Pnew;
        basis = mass_orthonormalize(basis, m, 1e-13);
        Eigen::MatrixXd bs = basis.transpose() * (S * basis);
        Eigen::MatrixXd bm = basis.transpose() * (m * basis);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(
            0.5 * (bs + bs.transpose()), 0.5 * (bm + bm.transpose()));
        int take = std::min<int>(nb, static_cast<int>(basis.cols()));
        X = basis * rr.eigenvectors().leftCols(take);
    }
    throw std::runtime_error("lobpcg failed to converge within the iteration budget");
}

}  // namespace

GevpResult solve_gevp(const Eigen::MatrixXd& S, const Eigen::MatrixXd& m, int count,
                      const GevpOptions& opts) {
    if (S.rows() != S.cols() || m.rows() != m.cols() || S.rows() != m.rows())
        throw std::invalid_argument("solve_gevp: dimension mismatch");
    if (count < 1) throw std::invalid_argument("solve_gevp: count must be positive");
    const int n = static_cast<int>(S.rows());
    count = std::min(count, n);
    if (opts.force_dense || (!opts.force_iterative && n < opts.dense_threshold))
        return solve_dense(S, m, count);
    return solve_lobpcg(S, m, count, opts);
}

NearKernel detect_kernel(const GevpResult& eigs, const KernelOptions& opts) {
    NearKernel out;
    out.lambda_max = eigs.lambda_max;
    const int ncomp = static_cast<int>(eigs.values.size());
    double lmax = std::max(eigs.lambda_max, 1e-300);
    out.spectrum.resize(ncomp);
    for (int i = 0; i < ncomp; ++i)
        out.spectrum(i) = std::max(eigs.values(i), 0.0) / lmax;

    // r = largest prefix below tau_abs with a rho_min gap above it; r = 0 needs
    // lambda_1 above tau_abs.
    int r = -1;
    if (ncomp > 0 && out.spectrum(0) > opts.tau_abs) {
        r = 0;
        out.gap_ratio = out.spectrum(0) / opts.tau_floor;
    } else if (ncomp > 0 && ncomp == eigs.space_dim &&
               out.spectrum(ncomp - 1) <= opts.tau_abs) {
        // the whole space is the kernel; there is no complement to gap against
        r = ncomp;
        out.gap_ratio = 1.0 / opts.tau_floor;
    } else {
        for (int cand = ncomp - 1; cand >= 1; --cand) {
            if (out.spectrum(cand - 1) > opts.tau_abs) continue;
            if (cand < ncomp) {
                double gap =
                    out.spectrum(cand) / std::max(out.spectrum(cand - 1), opts.tau_floor);
                if (gap >= opts.rho_min) {
                    r = cand;
                    out.gap_ratio = gap;
                    break;
                }
            }
        }
    }
    if (r < 0) {
        out.verdict = KernelVerdict::Ambiguous;
        out.dim = 0;
        return out;
    }
    out.verdict = KernelVerdict::Clean;
    out.dim = r;
    out.eigenvalues = eigs.values.head(r);
    out.basis = eigs.vectors.leftCols(r);
    return out;
}

Eigen::MatrixXd mass_orthonormalize(const Eigen::MatrixXd& V, const Eigen::MatrixXd& m,
                                    double drop_tol) {
    const int n = static_cast<int>(V.rows());
    Eigen::MatrixXd Q(n, V.cols());
    Eigen::MatrixXd MQ(n, V.cols());  // cached m * Q columns
    int kept = 0;
    double scale = 0.0;
    {
        Eigen::MatrixXd MV = m * V;
        for (int j = 0; j < V.cols(); ++j)
            scale = std::max(scale, std::sqrt(std::max(0.0, V.col(j).dot(MV.col(j)))));
    }
    if (scale == 0.0) return Eigen::MatrixXd(n, 0);
    for (int j = 0; j < V.cols(); ++j) {
        Eigen::VectorXd v = V.col(j);
        for (int pass = 0; pass < 2 && kept > 0; ++pass) {
            Eigen::VectorXd coef = MQ.leftCols(kept).transpose() * v;
            v -= Q.leftCols(kept) * coef;
        }
        Eigen::VectorXd mv = m * v;
        double nv = std::sqrt(std::max(0.0, v.dot(mv)));
        if (nv <= drop_tol * scale) continue;
        Q.col(kept) = v / nv;
        MQ.col(kept) = mv / nv;
        ++kept;
    }
    return Q.leftCols(kept);
}

}  // namespace hodgex
