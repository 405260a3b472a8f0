#include "hodgex/witten.hpp"

#include <cmath>
#include <random>

namespace hodgex {

std::vector<int> BlockSpec::degrees(int n) const {
    std::vector<int> out;
    switch (kind) {
        case Kind::Even:
            for (int k = 0; k <= n; k += 2) out.push_back(k);
            break;
        case Kind::Odd:
            for (int k = 1; k <= n; k += 2) out.push_back(k);
            break;
        case Kind::Single:
            out.push_back(degree);
            break;
    }
    return out;
}

BlockSpec BlockSpec::opposite(int n) const {
    switch (kind) {
        case Kind::Even: return odd();
        case Kind::Odd: return even();
        case Kind::Single: {
            // opposite parity class of a single degree
            return (degree % 2 == 0) ? odd() : even();
        }
    }
    return even();
}

std::string BlockSpec::name() const {
    switch (kind) {
        case Kind::Even: return "even";
        case Kind::Odd: return "odd";
        case Kind::Single: return "k" + std::to_string(degree);
    }
    return "?";
}

BlockIndex WittenBundle::block(const BlockSpec& spec) const {
    BlockIndex idx;
    idx.degrees = spec.degrees(n);
    int off = 0;
    for (int k : idx.degrees) {
        idx.offsets.push_back(off);
        off += inv_dim(k);
    }
    idx.total = off;
    return idx;
}

Eigen::MatrixXd WittenBundle::forward(const BlockSpec& from) const {
    return forward_into(from, from.opposite(n));
}

Eigen::MatrixXd WittenBundle::forward_into(const BlockSpec& from,
                                           const BlockSpec& into) const {
    BlockIndex src = block(from);
    BlockIndex dst = block(into);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dst.total, src.total);
    for (size_t j = 0; j < dst.degrees.size(); ++j) {
        int dj = dst.degrees[j];
        for (size_t i = 0; i < src.degrees.size(); ++i) {
            int k = src.degrees[i];
            if (dj == k + 1 && k < n)
                A.block(dst.offsets[j], src.offsets[i], inv_dim(dj), inv_dim(k)) = d[k];
            if (dj == k - 1 && k >= 1 && s != 0.0)
                A.block(dst.offsets[j], src.offsets[i], inv_dim(dj), inv_dim(k)) =
                    s * cw[k];
        }
    }
    return A;
}

Eigen::MatrixXd WittenBundle::adjoint_neumann(const BlockSpec& from) const {
    // delta^(N) w = m_T^{-1} A_{from<-T}^T m_from w, mapping `from` to T
    BlockSpec T = from.opposite(n);
    BlockIndex src = block(from);
    BlockIndex dst = block(T);
    Eigen::MatrixXd Aback = forward_into(T, from);  // T -> from
    Eigen::MatrixXd rhs = Aback.transpose() * block_mass(from);
    // solve block mass on the T side degree by degree
    Eigen::MatrixXd out(dst.total, src.total);
    for (size_t j = 0; j < dst.degrees.size(); ++j) {
        int k = dst.degrees[j];
        out.middleRows(dst.offsets[j], inv_dim(k)) =
            mass_llt[k].solve(rhs.middleRows(dst.offsets[j], inv_dim(k)));
    }
    return out;
}

Eigen::MatrixXd WittenBundle::block_mass(const BlockSpec& spec) const {
    BlockIndex idx = block(spec);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(idx.total, idx.total);
    for (size_t i = 0; i < idx.degrees.size(); ++i) {
        int k = idx.degrees[i];
        M.block(idx.offsets[i], idx.offsets[i], inv_dim(k), inv_dim(k)) = m[k];
    }
    return M;
}

std::vector<char> WittenBundle::block_boundary_mask(const BlockSpec& spec) const {
    BlockIndex idx = block(spec);
    std::vector<char> mask(idx.total, 0);
    for (size_t i = 0; i < idx.degrees.size(); ++i) {
        int k = idx.degrees[i];
        for (int c = 0; c < inv_dim(k); ++c)
            mask[idx.offsets[i] + c] = col_boundary[k][c];
    }
    return mask;
}

double WittenBundle::ip(const BlockSpec& spec, const Eigen::VectorXd& a,
                        const Eigen::VectorXd& b) const {
    BlockIndex idx = block(spec);
    double acc = 0;
    for (size_t i = 0; i < idx.degrees.size(); ++i) {
        int k = idx.degrees[i];
        acc += a.segment(idx.offsets[i], inv_dim(k))
                   .dot(m[k] * b.segment(idx.offsets[i], inv_dim(k)));
    }
    return acc;
}

double WittenBundle::norm(const BlockSpec& spec, const Eigen::VectorXd& a) const {
    return std::sqrt(std::max(0.0, ip(spec, a, a)));
}

WittenBundle assemble_bundle(const OrientedComplex& c, const EmbeddedGeometry& g,
                             const CyclicAction& a, const PLVectorField& X, double s,
                             AssemblyCache* cache) {
    WittenBundle B;
    B.n = c.dim;
    B.s = s;
    B.cx = &c;
    B.inv = invariant_basis(c, a);
    B.m.resize(c.dim + 1);
    B.d.resize(std::max(c.dim, 0));
    B.b.resize(c.dim + 1);
    B.cw.resize(c.dim + 1);
    B.mass_llt.resize(c.dim + 1);
    B.col_boundary = B.inv.col_boundary;
    B.M_full.resize(c.dim + 1);
    B.B_full.resize(c.dim + 1);

    const bool use_cache = cache && cache->ready;
    if (cache && !cache->ready) {
        cache->M.resize(c.dim + 1);
        cache->B.resize(c.dim + 1);
    }
    for (int k = 0; k <= c.dim; ++k) {
        B.M_full[k] = use_cache ? cache->M[k] : mass_matrix(g, c, k).mat;
        if (cache && !cache->ready) cache->M[k] = B.M_full[k];
        Eigen::MatrixXd JMJ =
            Eigen::MatrixXd(B.inv.J[k].transpose() * (B.M_full[k] * B.inv.J[k]));
        B.m[k] = 0.5 * (JMJ + JMJ.transpose());
        B.mass_llt[k].compute(B.m[k]);
        if (B.mass_llt[k].info() != Eigen::Success)
            throw ValidationError("invariant mass matrix not positive definite at degree " +
                                  std::to_string(k));
    }
    // invariant coboundary blocks: J_{k+1} d_k = D_k J_k with integer d_k
    for (int k = 0; k + 1 <= c.dim; ++k) {
        SpMatD DJ = c.coboundary_d(k) * B.inv.J[k];
        Eigen::MatrixXd raw =
            Eigen::MatrixXd(B.inv.J[k + 1].transpose() * DJ);
        for (int col = 0; col < raw.cols(); ++col)
            for (int row = 0; row < raw.rows(); ++row) {
                double v = raw(row, col) / B.inv.orbit_size[k + 1][row];
                double r = std::round(v);
                if (std::abs(v - r) > 1e-9)
                    throw ValidationError("invariant coboundary is not integral");
                raw(row, col) = r;
            }
        B.d[k] = raw;
        // exactness of the restriction
        Eigen::MatrixXd recon = Eigen::MatrixXd(B.inv.J[k + 1]) * B.d[k] - Eigen::MatrixXd(DJ);
        if (recon.size() && recon.cwiseAbs().maxCoeff() > 1e-9)
            throw ValidationError("invariant coboundary restriction failed");
    }
    // nilpotency of the restricted complex is exact in integers
    for (int k = 0; k + 2 <= c.dim; ++k) {
        Eigen::MatrixXd dd = B.d[k + 1] * B.d[k];
        if (dd.size() && dd.cwiseAbs().maxCoeff() != 0.0)
            throw ValidationError("restricted coboundary composition nonzero");
    }
    for (int k = 1; k <= c.dim; ++k) {
        B.B_full[k] = use_cache ? cache->B[k] : contraction_matrix(g, c, X, k);
        if (cache && !cache->ready) cache->B[k] = B.B_full[k];
        B.b[k] = Eigen::MatrixXd(B.inv.J[k - 1].transpose() * (B.B_full[k] * B.inv.J[k]));
        B.cw[k] = B.mass_llt[k - 1].solve(B.b[k]);
    }

    if (cache) cache->ready = true;
    // Green/adjoint probe: the materialized adjoint must match the pairing.
    {
        std::mt19937_64 rng(0x5eed5u);
        std::normal_distribution<double> N01(0.0, 1.0);
        for (BlockSpec spec : {BlockSpec::even(), BlockSpec::odd()}) {
            BlockIndex src = B.block(spec);
            BlockIndex dst = B.block(spec.opposite(c.dim));
            if (src.total == 0 || dst.total == 0) continue;
            Eigen::MatrixXd A = B.forward(spec);
            Eigen::MatrixXd Adj = B.adjoint_neumann(spec.opposite(c.dim));
            for (int probe = 0; probe < 3; ++probe) {
                Eigen::VectorXd x(src.total), y(dst.total);
                for (int i = 0; i < src.total; ++i) x(i) = N01(rng);
                for (int i = 0; i < dst.total; ++i) y(i) = N01(rng);
                double lhs = B.ip(spec.opposite(c.dim), A * x, y);
                double rhs = B.ip(spec, x, Adj * y);
                double scale = B.norm(spec, x) * B.norm(spec.opposite(c.dim), y);
                if (std::abs(lhs - rhs) > 1e-10 * std::max(1.0, scale) *
                                               std::max(1.0, A.cwiseAbs().maxCoeff()))
                    throw ValidationError("assembled adjoint fails the Green identity probe");
            }
        }
    }
    return B;
}

StiffnessPair stiffness(const WittenBundle& bundle, BC bc, const BlockSpec& spec) {
    const int n = bundle.n;
    BlockIndex src = bundle.block(spec);
    BlockSpec T = spec.opposite(n);
    BlockIndex dst = bundle.block(T);
    Eigen::MatrixXd A = bundle.forward(spec);                // src -> dst
    Eigen::MatrixXd Aback = bundle.forward_into(T, spec);    // dst -> src
    Eigen::MatrixXd Msrc = bundle.block_mass(spec);
    Eigen::MatrixXd Mdst = bundle.block_mass(T);

    StiffnessPair out;
    if (bc == BC::Neumann) {
        Eigen::MatrixXd Sd = A.transpose() * Mdst * A;
        // delta part: |m_dst^{-1} Aback^T m_src w|^2 via Schur form
        Eigen::MatrixXd W = Aback.transpose() * Msrc;  // dst x src
        Eigen::MatrixXd MinvW(W.rows(), W.cols());
        for (size_t j = 0; j < dst.degrees.size(); ++j) {
            int k = dst.degrees[j];
            MinvW.middleRows(dst.offsets[j], bundle.inv_dim(k)) =
                bundle.mass_llt[k].solve(W.middleRows(dst.offsets[j], bundle.inv_dim(k)));
        }
        Eigen::MatrixXd Sdel = W.transpose() * MinvW;
        out.S = Sd + Sdel;
        out.mass = Msrc;
    } else {
        std::vector<char> bsrc = bundle.block_boundary_mask(spec);
        std::vector<char> bdst = bundle.block_boundary_mask(T);
        std::vector<int> keep, keep_dst;
        for (int i = 0; i < src.total; ++i)
            if (!bsrc[i]) keep.push_back(i);
        for (int i = 0; i < dst.total; ++i)
            if (!bdst[i]) keep_dst.push_back(i);
        Eigen::MatrixXd AP(A.rows(), keep.size());
        for (size_t i = 0; i < keep.size(); ++i) AP.col(i) = A.col(keep[i]);
        Eigen::MatrixXd Sd = AP.transpose() * Mdst * AP;
        // delta^(D): tested against the Dirichlet-restricted opposite space
        Eigen::MatrixXd W = Aback.transpose() * Msrc;  // dst x src
        Eigen::MatrixXd Wr(keep_dst.size(), keep.size());
        for (size_t r = 0; r < keep_dst.size(); ++r)
            for (size_t c2 = 0; c2 < keep.size(); ++c2)
                Wr(r, c2) = W(keep_dst[r], keep[c2]);
        Eigen::MatrixXd MdstD(keep_dst.size(), keep_dst.size());
        for (size_t r = 0; r < keep_dst.size(); ++r)
            for (size_t c2 = 0; c2 < keep_dst.size(); ++c2)
                MdstD(r, c2) = Mdst(keep_dst[r], keep_dst[c2]);
        Eigen::LLT<Eigen::MatrixXd> llt(MdstD);
        Eigen::MatrixXd Sdel = Wr.transpose() * llt.solve(Wr);
        out.S = Sd + Sdel;
        out.mass.resize(keep.size(), keep.size());
        for (size_t r = 0; r < keep.size(); ++r)
            for (size_t c2 = 0; c2 < keep.size(); ++c2)
                out.mass(r, c2) = Msrc(keep[r], keep[c2]);
        out.keep = keep;
    }
    out.S = 0.5 * (out.S + out.S.transpose().eval());
    return out;
}

Eigen::VectorXd expand_constrained(const StiffnessPair& sp, int block_total,
                                   const Eigen::VectorXd& y) {
    if (sp.keep.empty()) return y;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(block_total);
    for (size_t i = 0; i < sp.keep.size(); ++i) out(sp.keep[i]) = y(i);
    return out;
}

GreenResidual green_residual(const WittenBundle& bundle, const BlockSpec& from,
                             const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta) {
    BlockSpec T = from.opposite(bundle.n);
    Eigen::MatrixXd A = bundle.forward(from);
    Eigen::MatrixXd Adj = bundle.adjoint_neumann(T);
    auto rel = [&](const Eigen::VectorXd& a) {
        double lhs = bundle.ip(T, A * a, beta);
        double rhs = bundle.ip(from, a, Adj * beta);
        double scale = bundle.norm(T, A * a) * bundle.norm(T, beta) +
                       bundle.norm(from, a) * bundle.norm(from, Adj * beta);
        return std::abs(lhs - rhs) / std::max(scale, 1e-300);
    };
    GreenResidual out;
    out.r1 = rel(alpha);
    Eigen::VectorXd ad = alpha;
    std::vector<char> mask = bundle.block_boundary_mask(from);
    for (int i = 0; i < ad.size(); ++i)
        if (mask[i]) ad(i) = 0.0;
    out.r2 = rel(ad);
    return out;
}

namespace {
// largest generalized eigenvalue of (K, M) with K, M symmetric, M SPD
double max_gen_eig(const Eigen::MatrixXd& K, const Eigen::LLT<Eigen::MatrixXd>& mllt) {
    Eigen::MatrixXd W =
        mllt.matrixL().solve((mllt.matrixL().solve(K)).transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (W + W.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}
}  // namespace

NilpotencyReport nilpotency_defect(const WittenBundle& bundle) {
    NilpotencyReport rep;
    for (BlockSpec spec : {BlockSpec::even(), BlockSpec::odd()}) {
        BlockIndex src = bundle.block(spec);
        if (src.total == 0) continue;
        Eigen::MatrixXd A = bundle.forward(spec);
        Eigen::MatrixXd A2 = bundle.forward(spec.opposite(bundle.n)) * A;
        Eigen::MatrixXd Msrc = bundle.block_mass(spec);
        Eigen::MatrixXd Mdst = bundle.block_mass(spec.opposite(bundle.n));
        Eigen::LLT<Eigen::MatrixXd> mllt(Msrc);
        double eta2 = max_gen_eig(A2.transpose() * Msrc * A2, mllt);
        double na2 = max_gen_eig(A.transpose() * Mdst * A, mllt);
        rep.eta_abs = std::max(rep.eta_abs, std::sqrt(std::max(0.0, eta2)));
        rep.norm_A = std::max(rep.norm_A, std::sqrt(std::max(0.0, na2)));
    }
    rep.eta_rel = (rep.norm_A > 0) ? rep.eta_abs / (rep.norm_A * rep.norm_A) : 0.0;
    return rep;
}

double stokes_probe(const OrientedComplex& c, const EmbeddedGeometry& g,
                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& one_form,
                    double analytic_boundary_integral) {
    Eigen::VectorXd x = interpolate_one_form(g, c, one_form);
    Eigen::VectorXd dx = c.coboundary_d(c.dim - 1) * x;
    double total = integrate_top(c, dx);
    return std::abs(total - analytic_boundary_integral);
}

}  // namespace hodgex
