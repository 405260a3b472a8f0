#include "hodgex/decomp.hpp"

#include <cmath>
#include <sstream>

namespace hodgex {

namespace {

Eigen::MatrixXd selection_cols(const Eigen::MatrixXd& A, const std::vector<int>& keep) {
    Eigen::MatrixXd out(A.rows(), keep.size());
    for (size_t i = 0; i < keep.size(); ++i) out.col(i) = A.col(keep[i]);
    return out;
}

// principal angles between m-orthonormal bases (may have different dims)
Eigen::VectorXd principal_angles(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V,
                                 const Eigen::MatrixXd& m) {
    if (U.cols() == 0 || V.cols() == 0) return Eigen::VectorXd();
    Eigen::MatrixXd G = U.transpose() * m * V;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
    Eigen::VectorXd s = svd.singularValues();
    Eigen::VectorXd th(s.size());
    for (int i = 0; i < s.size(); ++i)
        th(i) = std::acos(std::clamp(s(i), -1.0, 1.0));
    std::sort(th.data(), th.data() + th.size());
    return th;
}

}  // namespace

HarmonicBasis harmonic_fields(const WittenBundle& bundle, BC bc, const BlockSpec& spec,
                              const HarmonicOptions& opts) {
    StiffnessPair sp = stiffness(bundle, bc, spec);
    BlockIndex idx = bundle.block(spec);
    const int dim = static_cast<int>(sp.S.rows());
    if (dim == 0) {
        HarmonicBasis out;
        out.block = spec;
        out.bc = bc;
        out.basis.resize(idx.total, 0);
        return out;
    }
    int count = std::min(dim, std::max(8, opts.expected >= 0 ? opts.expected + 4 : 8));
    NearKernel nk;
    while (true) {
        GevpResult eigs = solve_gevp(sp.S, sp.mass, count, opts.gevp);
        nk = detect_kernel(eigs, opts.kernel);
        bool saturated = (nk.verdict == KernelVerdict::Ambiguous) && count < dim &&
                         eigs.values.size() > 0 &&
                         nk.spectrum(eigs.values.size() - 1) <= opts.kernel.tau_abs;
        if (!saturated) break;
        count = std::min(dim, 2 * count);
    }
    HarmonicBasis out;
    out.block = spec;
    out.bc = bc;
    out.kernel = nk;
    out.basis.resize(idx.total, nk.dim);
    for (int j = 0; j < nk.dim; ++j)
        out.basis.col(j) = expand_constrained(sp, idx.total, nk.basis.col(j));
    // per-column degree component norms and field residuals
    out.degree_norms.resize(nk.dim, idx.degrees.size());
    for (int j = 0; j < nk.dim; ++j)
        for (size_t i = 0; i < idx.degrees.size(); ++i) {
            int k = idx.degrees[i];
            Eigen::VectorXd seg = out.basis.col(j).segment(idx.offsets[i], bundle.inv_dim(k));
            out.degree_norms(j, i) = std::sqrt(std::max(0.0, seg.dot(bundle.m[k] * seg)));
        }
    double lmax = std::max(nk.lambda_max, 1e-300);
    for (int j = 0; j < nk.dim; ++j)
        out.max_field_residual =
            std::max(out.max_field_residual, std::max(0.0, nk.eigenvalues(j)) / lmax);
    if (nk.dim > 0 && out.max_field_residual > opts.tau_field)
        throw ValidationError("harmonic column exceeds the field-residual budget");
    return out;
}

PoissonResult solve_poisson(const WittenBundle& bundle, BC bc, const BlockSpec& spec,
                            const Eigen::VectorXd& eta, const HarmonicOptions& opts) {
    StiffnessPair sp = stiffness(bundle, bc, spec);
    BlockIndex idx = bundle.block(spec);
    Eigen::VectorXd eta_c = eta;
    if (!sp.keep.empty()) {
        eta_c.resize(sp.keep.size());
        for (size_t i = 0; i < sp.keep.size(); ++i) eta_c(i) = eta(sp.keep[i]);
    }
    const int dim = static_cast<int>(sp.S.rows());
    GevpResult eigs = solve_gevp(sp.S, sp.mass, dim, [&] {
        GevpOptions g = opts.gevp;
        g.force_dense = true;  // unique-representative solve wants the full basis
        return g;
    }());
    NearKernel nk = detect_kernel(eigs, opts.kernel);
    if (nk.verdict == KernelVerdict::Ambiguous)
        throw ValidationError("poisson solve: ambiguous kernel");
    // precondition: eta orthogonal to the kernel
    double eta_norm = std::sqrt(std::max(eta_c.dot(sp.mass * eta_c), 1e-300));
    for (int j = 0; j < nk.dim; ++j) {
        double p = nk.basis.col(j).dot(sp.mass * eta_c);
        if (std::abs(p) > 1e-10 * eta_norm)
            throw ValidationError("poisson rhs not orthogonal to the harmonic space: " +
                                  std::to_string(std::abs(p)));
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd rhs_coeff = eigs.vectors.transpose() * (sp.mass * eta_c);
    for (int i = nk.dim; i < dim; ++i)
        y += (rhs_coeff(i) / eigs.values(i)) * eigs.vectors.col(i);
    PoissonResult out;
    double scale = (sp.S * y).norm() + (sp.mass * eta_c).norm();
    out.residual = (sp.S * y - sp.mass * eta_c).norm() / std::max(scale, 1e-300);
    out.omega = expand_constrained(sp, idx.total, y);
    return out;
}

MorreyContext make_morrey_context(const WittenBundle& bundle, const BlockSpec& spec,
                                  const HarmonicBasis* hn, const HarmonicBasis* hd) {
    MorreyContext ctx;
    ctx.spec = spec;
    const int n = bundle.n;
    BlockSpec T = spec.opposite(n);
    BlockIndex idx = bundle.block(spec);
    BlockIndex idxT = bundle.block(T);
    ctx.M = bundle.block_mass(spec);
    ctx.A = bundle.forward(spec);
    ctx.Aback = bundle.forward_into(T, spec);  // T -> spec

    HarmonicBasis hn_local, hd_local;
    if (!hn) {
        hn_local = harmonic_fields(bundle, BC::Neumann, spec);
        hn = &hn_local;
    }
    if (!hd) {
        if (bundle.cx->has_boundary()) {
            hd_local = harmonic_fields(bundle, BC::Dirichlet, spec);
            hd = &hd_local;
        } else {
            hd = hn;
        }
    }
    Eigen::MatrixXd U(idx.total, hn->dim() + hd->dim());
    if (hn->dim()) U.leftCols(hn->dim()) = hn->basis;
    if (hd->dim()) U.rightCols(hd->dim()) = hd->basis;
    ctx.QU = mass_orthonormalize(U, ctx.M);

    // E = range of d_X on Dirichlet opposite-parity cochains, carved out of
    // the harmonic complement
    std::vector<char> bmask = bundle.block_boundary_mask(T);
    for (int i = 0; i < idxT.total; ++i)
        if (!bmask[i]) ctx.keepT.push_back(i);
    Eigen::MatrixXd AD = selection_cols(ctx.Aback, ctx.keepT);
    // C = range of the weak codifferential over the full opposite-parity space
    Eigen::MatrixXd C = bundle.adjoint_neumann(T);  // T -> spec

    Eigen::MatrixXd ue(idx.total, ctx.QU.cols() + AD.cols());
    ue << ctx.QU, AD;
    ctx.QE = mass_orthonormalize(ue, ctx.M);
    Eigen::MatrixXd both(idx.total, ctx.QE.cols() + C.cols());
    both << ctx.QE, C;
    ctx.QEC = mass_orthonormalize(both, ctx.M);

    Eigen::MatrixXd MT = bundle.block_mass(T);
    Eigen::MatrixXd MTD(ctx.keepT.size(), ctx.keepT.size());
    for (size_t r = 0; r < ctx.keepT.size(); ++r)
        for (size_t c2 = 0; c2 < ctx.keepT.size(); ++c2)
            MTD(r, c2) = MT(ctx.keepT[r], ctx.keepT[c2]);
    ctx.mtd_llt.compute(MTD);
    ctx.norm_A = std::sqrt(std::max(
        1e-300,
        (ctx.A.transpose() * MT * ctx.A).cwiseAbs().rowwise().sum().maxCoeff()));
    return ctx;
}

MorreyParts morrey_decompose(const WittenBundle& bundle, const MorreyContext& ctx,
                             const Eigen::VectorXd& omega) {
    const BlockSpec& spec = ctx.spec;
    BlockSpec T = spec.opposite(bundle.n);
    MorreyParts out;
    Eigen::VectorXd Mw = ctx.M * omega;
    // QE and QEC both contain the harmonic prefix QU; subtracting it keeps
    // the harmonic content inside kappa
    Eigen::VectorXd u = ctx.QU * (ctx.QU.transpose() * Mw);
    out.e = ctx.QE * (ctx.QE.transpose() * Mw) - u;
    Eigen::VectorXd ec = ctx.QEC * (ctx.QEC.transpose() * Mw) - u;
    out.c = ec - out.e;
    out.kappa = omega - ec;

    double wn = std::max(bundle.norm(spec, omega), 1e-300);
    out.reconstruction_residual =
        bundle.norm(spec, omega - out.e - out.c - out.kappa) / wn;
    const Eigen::VectorXd* parts[3] = {&out.e, &out.c, &out.kappa};
    for (int a = 0; a < 3; ++a)
        for (int b2 = a + 1; b2 < 3; ++b2) {
            double na = bundle.norm(spec, *parts[a]);
            double nb = bundle.norm(spec, *parts[b2]);
            if (na > 1e-14 * wn && nb > 1e-14 * wn)
                out.max_pairwise_ip =
                    std::max(out.max_pairwise_ip,
                             std::abs(bundle.ip(spec, *parts[a], *parts[b2])) / (na * nb));
        }
    // field residuals of kappa: d_X and the Dirichlet-tested adjoint
    double kn = bundle.norm(spec, out.kappa);
    if (kn > 1e-13 * wn) {
        out.kappa_residual_d =
            bundle.norm(T, ctx.A * out.kappa) / std::max(ctx.norm_A * kn, 1e-300);
        // Dirichlet-tested adjoint: rows of Aback^T m kappa on interior orbits
        Eigen::VectorXd functional = ctx.Aback.transpose() * (ctx.M * out.kappa);
        Eigen::VectorXd fr(ctx.keepT.size());
        for (size_t i = 0; i < ctx.keepT.size(); ++i) fr(i) = functional(ctx.keepT[i]);
        Eigen::VectorXd z = ctx.mtd_llt.solve(fr);
        out.kappa_residual_delta =
            std::sqrt(std::max(0.0, z.dot(fr))) / std::max(ctx.norm_A * kn, 1e-300);
    }
    return out;
}

MorreyParts morrey_decompose(const WittenBundle& bundle, const BlockSpec& spec,
                             const Eigen::VectorXd& omega) {
    return morrey_decompose(bundle, make_morrey_context(bundle, spec), omega);
}

FiveTermParts five_term_decompose(const WittenBundle& bundle, const BlockSpec& spec,
                                  const Eigen::VectorXd& omega, const HarmonicBasis& HN,
                                  const HarmonicBasis& HD, const MorreyContext* ctx) {
    MorreyContext local;
    if (!ctx) {
        local = make_morrey_context(bundle, spec, &HN, &HD);
        ctx = &local;
    }
    MorreyParts mp = morrey_decompose(bundle, *ctx, omega);
    FiveTermParts out;
    out.e = mp.e;
    out.c = mp.c;
    Eigen::MatrixXd M = bundle.block_mass(spec);
    const double wn = std::max(bundle.norm(spec, omega), 1e-300);

    if (!bundle.cx->has_boundary()) {
        out.closed_degenerate = true;
        out.h_n = mp.kappa;
        out.h_d = Eigen::VectorXd::Zero(mp.kappa.size());
        out.exco = Eigen::VectorXd::Zero(mp.kappa.size());
        out.hn_hd_min_angle = 0.0;
    } else {
        const int rn = HN.dim(), rd = HD.dim();
        if (rn > 0 && rd > 0) {
            Eigen::VectorXd th = principal_angles(HN.basis, HD.basis, M);
            out.hn_hd_min_angle = th.size() ? th(0) : M_PI / 2;
            if (out.hn_hd_min_angle < 1e-6)
                throw ValidationError("oblique N/D projection ill-conditioned: angle " +
                                      std::to_string(out.hn_hd_min_angle));
        } else {
            out.hn_hd_min_angle = M_PI / 2;
        }
        Eigen::MatrixXd U(omega.size(), rn + rd);
        if (rn) U.leftCols(rn) = HN.basis;
        if (rd) U.rightCols(rd) = HD.basis;
        Eigen::VectorXd hN = Eigen::VectorXd::Zero(omega.size());
        Eigen::VectorXd hD = Eigen::VectorXd::Zero(omega.size());
        if (rn + rd > 0) {
            Eigen::MatrixXd G = U.transpose() * M * U;
            Eigen::VectorXd rhs = U.transpose() * (M * mp.kappa);
            Eigen::VectorXd a = G.ldlt().solve(rhs);
            if (rn) hN = HN.basis * a.head(rn);
            if (rd) hD = HD.basis * a.tail(rd);
        }
        out.h_n = hN;
        out.h_d = hD;
        out.exco = mp.kappa - hN - hD;
    }
    out.reconstruction_residual =
        bundle.norm(spec, omega - out.e - out.c - out.h_n - out.h_d - out.exco) / wn;
    Eigen::VectorXd hnd = out.h_n + out.h_d;
    const Eigen::VectorXd* parts[4] = {&out.e, &out.c, &hnd, &out.exco};
    for (int a = 0; a < 4; ++a)
        for (int b2 = a + 1; b2 < 4; ++b2) {
            double na = bundle.norm(spec, *parts[a]);
            double nb = bundle.norm(spec, *parts[b2]);
            if (na > 1e-13 * wn && nb > 1e-13 * wn)
                out.max_pairwise_ip =
                    std::max(out.max_pairwise_ip,
                             std::abs(bundle.ip(spec, *parts[a], *parts[b2])) / (na * nb));
        }
    return out;
}

BoundarySetup build_boundary_setup(const WittenBundle& ambient,
                                   const OrientedComplex& c, const EmbeddedGeometry& g,
                                   const CyclicAction& a, const PLVectorField& X,
                                   const SubcomplexResult& bd, double s,
                                   const HarmonicOptions& opts) {
    BoundarySetup out;
    if (bd.complex.count(bd.complex.dim) == 0 || c.dim == 0 || !c.has_boundary()) {
        out.closed = true;
        return out;
    }
    out.closed = false;
    EmbeddedGeometry gb = restrict_geometry(g, bd.vertex_map);
    PLVectorField Xb = restrict_field(X, bd.vertex_map);
    CyclicAction ab = restrict_action(bd.complex, a, bd.vertex_map, c.nverts);
    out.bundle = assemble_bundle(bd.complex, gb, ab, Xb, s);
    out.harm_even = harmonic_fields(out.bundle, BC::Neumann, BlockSpec::even(), opts);
    out.harm_odd = harmonic_fields(out.bundle, BC::Neumann, BlockSpec::odd(), opts);

    // block trace matrices: ambient invariant coords -> boundary invariant coords
    auto block_trace = [&](const BlockSpec& spec) {
        BlockIndex ai = ambient.block(spec);
        BlockIndex bi = out.bundle.block(spec);
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(bi.total, ai.total);
        for (size_t jb = 0; jb < bi.degrees.size(); ++jb) {
            int k = bi.degrees[jb];
            // per-degree: reduce_bd . restrict . expand_ambient
            auto pos_a = std::find(ai.degrees.begin(), ai.degrees.end(), k);
            if (pos_a == ai.degrees.end()) continue;
            size_t ja = pos_a - ai.degrees.begin();
            Eigen::MatrixXd JM(bd.selector.indices[k].size(), ambient.inv_dim(k));
            {
                Eigen::MatrixXd JMfull = Eigen::MatrixXd(ambient.inv.J[k]);
                for (size_t r = 0; r < bd.selector.indices[k].size(); ++r)
                    JM.row(r) = JMfull.row(bd.selector.indices[k][r]);
            }
            Eigen::MatrixXd Jb = Eigen::MatrixXd(out.bundle.inv.J[k]);
            Eigen::MatrixXd red = Jb.transpose() * JM;
            for (int r = 0; r < red.rows(); ++r)
                red.row(r) /= out.bundle.inv.orbit_size[k][r];
            T.block(bi.offsets[jb], ai.offsets[ja], out.bundle.inv_dim(k),
                    ambient.inv_dim(k)) = red;
        }
        return T;
    };
    out.trace_even = block_trace(BlockSpec::even());
    out.trace_odd = block_trace(BlockSpec::odd());
    return out;
}

SplitBases interior_boundary_split(const WittenBundle& bundle, const HarmonicBasis& basis,
                                   const HarmonicBasis& other, const BoundarySetup& bctx,
                                   const SplitOptions& opts) {
    SplitBases out;
    const int r = basis.dim();
    Eigen::MatrixXd M = bundle.block_mass(basis.block);
    if (bctx.closed || r == 0) {
        out.interior = basis.basis;
        out.boundary.resize(basis.basis.rows(), 0);
        out.dim_interior_a = out.dim_interior_b = r;
        out.method_agreement = true;
        return out;
    }

    // Method A: null directions of the cross-Gram against `other`
    Eigen::VectorXd sv = Eigen::VectorXd::Zero(r);
    Eigen::MatrixXd U = Eigen::MatrixXd::Identity(r, r);
    if (other.dim() > 0) {
        Eigen::MatrixXd G = basis.basis.transpose() * M * other.basis;  // r x r'
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(
            G, Eigen::ComputeFullU | Eigen::ComputeThinV);
        sv.head(svd.singularValues().size()) = svd.singularValues();
        U = svd.matrixU();
    }
    double smax = sv.size() ? sv.maxCoeff() : 0.0;
    std::vector<int> int_dirs, bnd_dirs;
    for (int i = 0; i < r; ++i) {
        double s = sv(i);
        if (s <= opts.tau_split * std::max(1.0, smax))
            bnd_dirs.push_back(i);
        else
            int_dirs.push_back(i);
    }
    Eigen::MatrixXd IA(basis.basis.rows(), int_dirs.size());
    Eigen::MatrixXd BA(basis.basis.rows(), bnd_dirs.size());
    for (size_t i = 0; i < int_dirs.size(); ++i)
        IA.col(i) = basis.basis * U.col(int_dirs[i]);
    for (size_t i = 0; i < bnd_dirs.size(); ++i)
        BA.col(i) = basis.basis * U.col(bnd_dirs[i]);
    out.dim_interior_a = static_cast<int>(IA.cols());
    if (other.dim() > 0 && BA.cols() > 0)
        out.max_cross_gram = (BA.transpose() * M * other.basis).cwiseAbs().maxCoeff();

    // Method B
    Eigen::MatrixXd IB, BB;
    if (basis.bc == BC::Neumann) {
        // class of the boundary trace in the boundary X-harmonic space
        const HarmonicBasis& hb = bctx.harm(basis.block);
        if (hb.dim() == 0) {
            IB = basis.basis;
            BB.resize(basis.basis.rows(), 0);
        } else {
            Eigen::MatrixXd T = bctx.trace(basis.block);
            Eigen::MatrixXd Mb = bctx.bundle.block_mass(basis.block);
            Eigen::MatrixXd K = hb.basis.transpose() * Mb * (T * basis.basis);
            Eigen::JacobiSVD<Eigen::MatrixXd> ks(K, Eigen::ComputeFullV);
            Eigen::VectorXd ksv = Eigen::VectorXd::Zero(r);
            ksv.head(ks.singularValues().size()) = ks.singularValues();
            double kmax = ksv.size() ? ksv.maxCoeff() : 0.0;
            std::vector<int> null_dirs, class_dirs;
            for (int i = 0; i < r; ++i) {
                double s = (i < ksv.size()) ? ksv(i) : 0.0;
                if (s <= opts.tau_trace * std::max(1.0, kmax))
                    null_dirs.push_back(i);
                else
                    class_dirs.push_back(i);
            }
            Eigen::MatrixXd V = ks.matrixV();
            IB.resize(basis.basis.rows(), null_dirs.size());
            BB.resize(basis.basis.rows(), class_dirs.size());
            for (size_t i = 0; i < null_dirs.size(); ++i)
                IB.col(i) = basis.basis * V.col(null_dirs[i]);
            for (size_t i = 0; i < class_dirs.size(); ++i)
                BB.col(i) = basis.basis * V.col(class_dirs[i]);
        }
    } else {
        // d_X-range membership over unrestricted opposite-parity cochains
        BlockSpec T = basis.block.opposite(bundle.n);
        Eigen::MatrixXd A = bundle.forward(T);  // T -> basis block
        Eigen::LLT<Eigen::MatrixXd> mllt(M);
        Eigen::MatrixXd L = mllt.matrixL();
        Eigen::MatrixXd WA = L.transpose() * A;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(WA);
        Eigen::MatrixXd rhs = L.transpose() * basis.basis;
        Eigen::MatrixXd alpha = cod.solve(rhs);
        Eigen::MatrixXd R = basis.basis - A * alpha;  // residuals per column
        Eigen::MatrixXd W = R.transpose() * M * R;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (W + W.transpose()));
        std::vector<int> exact_dirs, non_dirs;
        for (int i = 0; i < r; ++i) {
            double resid = std::sqrt(std::max(0.0, es.eigenvalues()(i)));
            if (resid <= opts.tau_trace)
                exact_dirs.push_back(i);
            else
                non_dirs.push_back(i);
        }
        BB.resize(basis.basis.rows(), exact_dirs.size());
        IB.resize(basis.basis.rows(), non_dirs.size());
        for (size_t i = 0; i < exact_dirs.size(); ++i)
            BB.col(i) = basis.basis * es.eigenvectors().col(exact_dirs[i]);
        for (size_t i = 0; i < non_dirs.size(); ++i)
            IB.col(i) = basis.basis * es.eigenvectors().col(non_dirs[i]);
    }
    out.dim_interior_b = static_cast<int>(IB.cols());

    // agreement: dimension plus span angles both ways
    double angle = 0.0;
    if (out.dim_interior_a == out.dim_interior_b) {
        if (IA.cols() > 0) {
            Eigen::VectorXd th = principal_angles(IA, IB, M);
            if (th.size()) angle = std::max(angle, th(th.size() - 1));
        }
        if (BA.cols() > 0 && BB.cols() == BA.cols()) {
            Eigen::VectorXd th = principal_angles(BA, BB, M);
            if (th.size()) angle = std::max(angle, th(th.size() - 1));
        }
        out.method_agreement = angle <= opts.tau_split;
    }
    out.span_angle = angle;
    out.interior = IA;
    out.boundary = BA;
    if (!out.method_agreement && opts.throw_on_disagreement) {
        std::ostringstream os;
        os << "interior/boundary split methods disagree: dim A=" << out.dim_interior_a
           << " dim B=" << out.dim_interior_b << " span angle=" << angle;
        throw ValidationError(os.str());
    }
    return out;
}

AngleReport duality_angles(const Eigen::MatrixXd& iN, const Eigen::MatrixXd& iD,
                           const Eigen::MatrixXd& mass) {
    if (iN.cols() != iD.cols())
        throw ValidationError("duality angle dimension mismatch: " +
                              std::to_string(iN.cols()) + " vs " +
                              std::to_string(iD.cols()));
    AngleReport out;
    out.dim_n = static_cast<int>(iN.cols());
    out.dim_d = static_cast<int>(iD.cols());
    out.angles = principal_angles(iN, iD, mass);
    if (out.angles.size()) {
        out.margin_zero = out.angles(0);
        out.margin_halfpi = M_PI / 2 - out.angles(out.angles.size() - 1);
    }
    return out;
}

}  // namespace hodgex
