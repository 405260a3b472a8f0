#include "hodgex/cohomology.hpp"

namespace hodgex {

namespace {

void fold_block(const HarmonicBasis& hb, int& dim, XCohomologyDims& out) {
    dim = hb.dim();
    if (hb.kernel.verdict != KernelVerdict::Clean) out.all_clean = false;
    const auto& sp = hb.kernel.spectrum;
    if (hb.dim() == 0) {
        if (sp.size() > 0) {
            double l1 = sp(0);
            out.min_empty_lambda =
                (out.min_empty_lambda < 0) ? l1 : std::min(out.min_empty_lambda, l1);
        }
    } else if (hb.kernel.gap_ratio > 0) {
        out.min_gap_ratio = (out.min_gap_ratio < 0)
                                ? hb.kernel.gap_ratio
                                : std::min(out.min_gap_ratio, hb.kernel.gap_ratio);
    }
}

}  // namespace

XCohomologyDims dims_from_bases(const HarmonicBasis& ne, const HarmonicBasis& no,
                                const HarmonicBasis* de, const HarmonicBasis* dd) {
    XCohomologyDims out;
    out.closed = (de == nullptr);
    fold_block(ne, out.neumann.even, out);
    fold_block(no, out.neumann.odd, out);
    if (out.closed) {
        out.dirichlet = out.neumann;
    } else {
        fold_block(*de, out.dirichlet.even, out);
        fold_block(*dd, out.dirichlet.odd, out);
    }
    return out;
}

XCohomologyDims x_cohomology_dims(const WittenBundle& bundle, const HarmonicOptions& opts) {
    HarmonicBasis ne = harmonic_fields(bundle, BC::Neumann, BlockSpec::even(), opts);
    HarmonicBasis no = harmonic_fields(bundle, BC::Neumann, BlockSpec::odd(), opts);
    if (!bundle.cx->has_boundary()) return dims_from_bases(ne, no, nullptr, nullptr);
    HarmonicBasis de = harmonic_fields(bundle, BC::Dirichlet, BlockSpec::even(), opts);
    HarmonicBasis dd = harmonic_fields(bundle, BC::Dirichlet, BlockSpec::odd(), opts);
    return dims_from_bases(ne, no, &de, &dd);
}

FixedPointReference fixed_point_reference(const OrientedComplex& c, const CyclicAction& a,
                                          const EmbeddedGeometry& g, const PLVectorField& X,
                                          const std::vector<int>* metadata_fixed) {
    SubcomplexResult N = fixed_subcomplex(c, a, g, X, metadata_fixed);
    FixedPointReference out;
    out.empty = (N.complex.nverts == 0);
    if (out.empty) return out;
    std::vector<long> abs = reference_betti(N.complex);
    SubcomplexSelector bd_sel;
    bd_sel.indices.resize(N.complex.dim + 1);
    bd_sel.signs.resize(N.complex.dim + 1);
    for (int k = 0; k <= N.complex.dim; ++k)
        for (int i = 0; i < N.complex.count(k); ++i)
            if (N.complex.on_boundary[k][i]) {
                bd_sel.indices[k].push_back(i);
                bd_sel.signs[k].push_back(1);
            }
    std::vector<long> rel = reference_betti(N.complex, &bd_sel);
    for (int k = 0; k <= N.complex.dim; ++k) {
        if (k % 2 == 0) {
            out.even_abs += abs[k];
            out.even_rel += rel[k];
        } else {
            out.odd_abs += abs[k];
            out.odd_rel += rel[k];
        }
    }
    out.chi_n = euler_characteristic(N.complex, EulerMode::Absolute);
    out.chi_bn = euler_characteristic(N.complex, EulerMode::Boundary);
    out.chi_n_rel = euler_characteristic(N.complex, EulerMode::Relative);
    return out;
}

EulerReport euler_identities(const OrientedComplex& m, const FixedPointReference& ref) {
    EulerReport out;
    out.chi_m = euler_characteristic(m, EulerMode::Absolute);
    out.chi_bm = euler_characteristic(m, EulerMode::Boundary);
    out.chi_m_rel = euler_characteristic(m, EulerMode::Relative);
    out.chi_n = ref.chi_n;
    out.chi_bn = ref.chi_bn;
    out.chi_n_rel = ref.chi_n_rel;
    out.additivity = (out.chi_m == out.chi_bm + out.chi_m_rel);
    out.match_abs = (out.chi_m == out.chi_n);
    out.match_rel = (out.chi_m_rel == out.chi_n_rel);
    out.match_bnd = (out.chi_bm == out.chi_bn);
    out.pass = out.additivity && out.match_abs && out.match_rel && out.match_bnd;
    return out;
}

IsomorphismVerdict pair_dims(int n, const XCohomologyDims& dims,
                             const FixedPointReference& ref) {
    IsomorphismVerdict out;
    out.dims = dims;
    out.ref = ref;
    out.neumann_match = (dims.neumann.even == ref.even_abs) &&
                        (dims.neumann.odd == ref.odd_abs);
    out.dirichlet_match = (dims.dirichlet.even == ref.even_rel) &&
                          (dims.dirichlet.odd == ref.odd_rel);
    const ParityDims& N = dims.neumann;
    const ParityDims& D = dims.dirichlet;
    if (n % 2 == 0)
        out.duality = (D.even == N.even) && (D.odd == N.odd);
    else
        out.duality = (D.even == N.odd) && (D.odd == N.even);
    out.pass = out.neumann_match && out.dirichlet_match && out.duality && dims.all_clean;
    return out;
}

}  // namespace hodgex
