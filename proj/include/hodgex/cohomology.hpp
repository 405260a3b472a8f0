#pragma once

#include "hodgex/decomp.hpp"

namespace hodgex {

struct ParityDims {
    int even = 0;
    int odd = 0;
    bool operator==(const ParityDims&) const = default;
};

/// Spectrally measured X-cohomology dimensions for one bundle, with the
/// evidence needed by the verdicts (verdicts, gaps, smallest eigenvalues).
struct XCohomologyDims {
    ParityDims neumann, dirichlet;
    bool closed = false;  // no boundary: Dirichlet duplicates Neumann
    bool all_clean = true;
    double min_empty_lambda = -1.0;  // min normalized lambda_1 over empty kernels
    double min_gap_ratio = -1.0;     // min gap ratio over nonempty kernels
};

XCohomologyDims x_cohomology_dims(const WittenBundle& bundle,
                                  const HarmonicOptions& opts = {});

/// Assemble the dimension table from already-computed bases (Dirichlet
/// pointers null on a closed manifold).
XCohomologyDims dims_from_bases(const HarmonicBasis& ne, const HarmonicBasis& no,
                                const HarmonicBasis* de, const HarmonicBasis* dd);

/// Exact integer Betti sums of the fixed-point subcomplex N(X), absolute and
/// relative to its boundary N(X) cap dM.
struct FixedPointReference {
    long even_abs = 0, odd_abs = 0;
    long even_rel = 0, odd_rel = 0;
    bool empty = true;
    long chi_n = 0, chi_bn = 0, chi_n_rel = 0;
};
FixedPointReference fixed_point_reference(const OrientedComplex& c, const CyclicAction& a,
                                          const EmbeddedGeometry& g, const PLVectorField& X,
                                          const std::vector<int>* metadata_fixed = nullptr);

/// chi(M)=chi(N), chi(M,dM)=chi(N,dN), chi(dM)=chi(dN), plus the additivity
/// identity; all exact integer counting.
struct EulerReport {
    long chi_m = 0, chi_bm = 0, chi_m_rel = 0;
    long chi_n = 0, chi_bn = 0, chi_n_rel = 0;
    bool additivity = false;
    bool match_abs = false, match_rel = false, match_bnd = false;
    bool pass = false;
};
EulerReport euler_identities(const OrientedComplex& m, const FixedPointReference& ref);

/// Pairing of the spectral dimensions against the fixed-point oracle, plus
/// Poincare-Lefschetz parity duality of the dimension table.
struct IsomorphismVerdict {
    XCohomologyDims dims;
    FixedPointReference ref;
    bool neumann_match = false;    // dims N == Betti sums of N(X)
    bool dirichlet_match = false;  // dims D == relative Betti sums
    bool duality = false;          // dim H_D^p == dim H_N^{n-p}
    bool pass = false;
};
IsomorphismVerdict pair_dims(int n, const XCohomologyDims& dims,
                             const FixedPointReference& ref);

}  // namespace hodgex
