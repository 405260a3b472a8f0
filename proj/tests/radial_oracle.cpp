#include "radial_oracle.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace hodgex_test {

namespace {

// Unknowns: f at nodes 0..N (values at r_i), G at nodes 1..N (G(0) = 0 is
// forced by regularity of the 2-form part). Weighted L2 norms:
//   |f|^2      = int f^2 r dr
//   |G part|^2 = int G^2 / r dr
//   d_X(f,G)   = (f' - s G) dr           with |a dr|^2 = int a^2 r dr
//   delta-part = Schur form of the pairing b -> int (s f b r + G b' / r) dr
// over test functions b with b(0) = 0 and the norm int b^2 / r dr.
// The common 2*pi factor cancels everywhere.

struct Assembled {
    Eigen::SparseMatrix<double> S;  // stiffness (d-part + delta Schur part)
    Eigen::SparseMatrix<double> M;  // block mass
    int nfdof = 0, ngdof = 0;
};

// 8-point Gauss-Legendre on [0,1]
const double kGx[8] = {0.01985507175123188, 0.10166676129318664, 0.2372337950418355,
                       0.40828267875217505, 0.5917173212478249, 0.7627662049581645,
                       0.8983332387068134, 0.9801449282487681};
const double kGw[8] = {0.05061426814518813, 0.11119051722668723, 0.15685332293894363,
                       0.18134189168918097, 0.18134189168918097, 0.15685332293894363,
                       0.11119051722668723, 0.05061426814518813};

Assembled assemble(double s, int N, bool dirichlet) {
    const double h = 1.0 / N;
    // dof maps; Neumann constrains G(1) = 0, Dirichlet constrains f(1) = 0
    const int nf = dirichlet ? N : N + 1;   // f dofs: nodes 0..N (minus last if D)
    const int ng = dirichlet ? N : N - 1;   // G dofs: nodes 1..N (minus last if N)
    // delta test space: b(0) = 0 always (regularity); b(1) = 0 for the
    // Dirichlet problem (the adjoint is tested against Dirichlet forms)
    const int nb = dirichlet ? N - 1 : N;
    const int tot = nf + ng;
    auto fidx = [&](int node) { return (node < nf) ? node : -1; };
    auto gidx = [&](int node) { return (node >= 1 && node - 1 < ng) ? nf + node - 1 : -1; };
    auto bidx = [&](int node) { return (node >= 1 && node - 1 < nb) ? node - 1 : -1; };

    std::vector<Eigen::Triplet<double>> tS, tM, tMb, tP;
    // element loop
    for (int e = 0; e < N; ++e) {
        double r0 = e * h;
        for (int q = 0; q < 8; ++q) {
            double r = r0 + kGx[q] * h;
            double w = kGw[q] * h;
            double phi[2] = {1.0 - kGx[q], kGx[q]};
            double dphi[2] = {-1.0 / h, 1.0 / h};
            int nodes[2] = {e, e + 1};
            // d-part: a = f' - s G, weight r
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    double ai, aj;
                    // assemble as quadratic form in (f, G)
                    // a contribution of f-dof: dphi; of G-dof: -s phi
                    int fi = fidx(nodes[i]), fj = fidx(nodes[j]);
                    int gi = gidx(nodes[i]), gj = gidx(nodes[j]);
                    ai = dphi[i];
                    aj = dphi[j];
                    if (fi >= 0 && fj >= 0) tS.emplace_back(fi, fj, w * r * ai * aj);
                    if (fi >= 0 && gj >= 0)
                        tS.emplace_back(fi, gj, w * r * ai * (-s * phi[j]));
                    if (gi >= 0 && fj >= 0)
                        tS.emplace_back(gi, fj, w * r * (-s * phi[i]) * aj);
                    if (gi >= 0 && gj >= 0)
                        tS.emplace_back(gi, gj, w * r * s * s * phi[i] * phi[j]);
                    // masses
                    if (fi >= 0 && fj >= 0) tM.emplace_back(fi, fj, w * r * phi[i] * phi[j]);
                    if (gi >= 0 && gj >= 0)
                        tM.emplace_back(gi, gj, w / r * phi[i] * phi[j]);
                    // b mass (1/r weight)
                    int bi = bidx(nodes[i]), bj = bidx(nodes[j]);
                    if (bi >= 0 && bj >= 0)
                        tMb.emplace_back(bi, bj, w / r * phi[i] * phi[j]);
                    // pairing P[b, (f,G)] = s f phi_b r + G dphi_b / r
                    if (bi >= 0 && fj >= 0)
                        tP.emplace_back(bi, fj, w * r * s * phi[i] * phi[j]);
                    if (bi >= 0 && gj >= 0)
                        tP.emplace_back(bi, gj, w / r * dphi[i] * phi[j]);
                }
        }
    }
    Eigen::SparseMatrix<double> Sd(tot, tot), M(tot, tot), Mb(nb, nb), P(nb, tot);
    Sd.setFromTriplets(tS.begin(), tS.end());
    M.setFromTriplets(tM.begin(), tM.end());
    Mb.setFromTriplets(tMb.begin(), tMb.end());
    P.setFromTriplets(tP.begin(), tP.end());
    // Schur delta-part: P^T Mb^{-1} P (dense solve is fine at this size,
    // but keep it sparse via a factorization)
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> mb(Mb);
    Eigen::MatrixXd Pd(P);
    Eigen::MatrixXd MinvP = mb.solve(Pd);
    Eigen::MatrixXd Sdel = Pd.transpose() * MinvP;
    Eigen::MatrixXd Sfull = Eigen::MatrixXd(Sd) + Sdel;
    Assembled out;
    out.S = Sfull.sparseView();
    out.M = M;
    out.nfdof = nf;
    out.ngdof = ng;
    return out;
}

Eigen::VectorXd kernel_vector(const Assembled& a) {
    // inverse iteration on (S + eps M) x = M x_prev
    Eigen::SparseMatrix<double> shifted = a.S + 1e-10 * a.M;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(a.S.rows());
    x.normalize();
    for (int it = 0; it < 60; ++it) {
        x = ldlt.solve(a.M * x);
        double nx = std::sqrt(x.dot(a.M * x));
        x /= nx;
    }
    return x;
}

}  // namespace

double radial_duality_angle(double s, int elements) {
    Assembled an = assemble(s, elements, false);
    Assembled ad = assemble(s, elements, true);
    Eigen::VectorXd zn = kernel_vector(an);
    Eigen::VectorXd zd_red = kernel_vector(ad);
    // embed the Dirichlet solution into the unconstrained dof layout
    // f nodes 0..N (D: 0..N-1 then 0), G nodes 1..N (N bc dropped last G)
    const int N = elements;
    Eigen::VectorXd zn_f = zn.head(N + 1);
    Eigen::VectorXd zn_g = Eigen::VectorXd::Zero(N);
    zn_g.head(N - 1) = zn.tail(N - 1);  // G(1..N-1), G(N)=0
    Eigen::VectorXd zd_f = Eigen::VectorXd::Zero(N + 1);
    zd_f.head(N) = zd_red.head(N);  // f(N)=0
    Eigen::VectorXd zd_g = zd_red.tail(N);
    // weighted inner products
    const double h = 1.0 / N;
    double ip = 0, nn = 0, nd = 0;
    for (int e = 0; e < N; ++e) {
        double r0 = e * h;
        for (int q = 0; q < 8; ++q) {
            double r = r0 + kGx[q] * h;
            double w = kGw[q] * h;
            double phi[2] = {1.0 - kGx[q], kGx[q]};
            auto eval = [&](const Eigen::VectorXd& nodal, int base) {
                return nodal(e + base) * phi[0] + nodal(e + 1 + base) * phi[1];
            };
            double fn = eval(zn_f, 0), fd = eval(zd_f, 0);
            double gn = (e == 0 ? zn_g(0) * phi[1]
                                : zn_g(e - 1) * phi[0] + zn_g(e) * phi[1]);
            double gd = (e == 0 ? zd_g(0) * phi[1]
                                : zd_g(e - 1) * phi[0] + zd_g(e) * phi[1]);
            ip += w * (r * fn * fd + gn * gd / r);
            nn += w * (r * fn * fn + gn * gn / r);
            nd += w * (r * fd * fd + gd * gd / r);
        }
    }
    double c = std::abs(ip) / std::sqrt(nn * nd);
    return std::acos(std::min(1.0, c));
}

double radial_duality_angle_closed_form(double s) {
    return std::acos(std::tanh(s / 2.0));
}

}  // namespace hodgex_test
