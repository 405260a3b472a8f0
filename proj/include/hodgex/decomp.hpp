#pragma once

#include <optional>

#include "hodgex/spectral.hpp"
#include "hodgex/witten.hpp"

namespace hodgex {

struct HarmonicOptions {
    KernelOptions kernel;
    GevpOptions gevp;
    int expected = -1;        // dimension hint, widens the request
    double tau_field = 1e-5;  // cap on the normalized residual lambda/lambda_max
};

/// Mass-orthonormal near-kernel of the bc-constrained stiffness: the discrete
/// X-harmonic fields of one (block, bc). Columns live in full block
/// coordinates; Dirichlet columns have exact zeros on boundary orbits.
struct HarmonicBasis {
    BlockSpec block;
    BC bc = BC::Neumann;
    NearKernel kernel;
    Eigen::MatrixXd basis;         // block_total x dim, m-orthonormal
    Eigen::MatrixXd degree_norms;  // dim x #degrees, per-column component norms
    double max_field_residual = 0.0;

    int dim() const { return static_cast<int>(basis.cols()); }
};

HarmonicBasis harmonic_fields(const WittenBundle& bundle, BC bc, const BlockSpec& spec,
                              const HarmonicOptions& opts = {});

/// Unique solution of S w = m eta on the bc-constrained block, mass-orthogonal
/// to the harmonic fields. eta must be orthogonal to them already.
struct PoissonResult {
    Eigen::VectorXd omega;  // full block coords
    double residual = 0.0;  // relative back-substitution residual
};
PoissonResult solve_poisson(const WittenBundle& bundle, BC bc, const BlockSpec& spec,
                            const Eigen::VectorXd& eta,
                            const HarmonicOptions& opts = {});

/// X-Hodge-Morrey split w = e + c + kappa: e in the range of d_X on Dirichlet
/// forms, c in the (E-orthogonalized) range of delta^(N), kappa a discrete
/// X-harmonic field. Components are pairwise mass-orthogonal by construction.
struct MorreyParts {
    Eigen::VectorXd e, c, kappa;
    double reconstruction_residual = 0.0;
    double max_pairwise_ip = 0.0;      // relative
    double kappa_residual_d = 0.0;     // |A kappa| / (|A| |kappa|)
    double kappa_residual_delta = 0.0; // Dirichlet-tested adjoint, same scale
};
/// Reusable projection data for the Morrey split of one (bundle, block).
/// The certified harmonic subspaces are projected out first and the exact /
/// coexact ranges are orthogonalized against them: the discrete operator is
/// only approximately nilpotent away from s = 0, and carving the ranges out
/// of the harmonic complement keeps both the orthogonality and the harmonic
/// attribution exact.
struct MorreyContext {
    BlockSpec spec;
    Eigen::MatrixXd M;
    Eigen::MatrixXd QU;       // orthonormalized span of H_N and H_D
    Eigen::MatrixXd QE, QEC;  // bases of U + E and U + E + C
    Eigen::MatrixXd A;        // forward on the block
    Eigen::MatrixXd Aback;    // opposite block, restricted into this one
    std::vector<int> keepT;
    Eigen::LLT<Eigen::MatrixXd> mtd_llt;
    double norm_A = 0.0;
};
/// hn/hd may be omitted; they are then computed internally.
MorreyContext make_morrey_context(const WittenBundle& bundle, const BlockSpec& spec,
                                  const HarmonicBasis* hn = nullptr,
                                  const HarmonicBasis* hd = nullptr);

MorreyParts morrey_decompose(const WittenBundle& bundle, const MorreyContext& ctx,
                             const Eigen::VectorXd& omega);
MorreyParts morrey_decompose(const WittenBundle& bundle, const BlockSpec& spec,
                             const Eigen::VectorXd& omega);

/// Five-term refinement: kappa is split obliquely across H_N + H_D plus the
/// exact-coexact remainder. On a closed manifold the oblique split degenerates
/// (H_N = H_D) and kappa is reported as the harmonic part.
struct FiveTermParts {
    Eigen::VectorXd e, c, h_n, h_d, exco;
    bool closed_degenerate = false;
    double hn_hd_min_angle = 0.0;  // radians, between H_N and H_D
    double reconstruction_residual = 0.0;
    double max_pairwise_ip = 0.0;  // among e, c, (h_n + h_d), exco
};
FiveTermParts five_term_decompose(const WittenBundle& bundle, const BlockSpec& spec,
                                  const Eigen::VectorXd& omega, const HarmonicBasis& HN,
                                  const HarmonicBasis& HD,
                                  const MorreyContext* ctx = nullptr);

/// Trace machinery for the interior/boundary split: the boundary's own
/// Witten bundle, its X-harmonic bases, and block trace matrices.
struct BoundarySetup {
    bool closed = true;  // ambient manifold has no boundary
    WittenBundle bundle;
    HarmonicBasis harm_even, harm_odd;
    Eigen::MatrixXd trace_even, trace_odd;

    const HarmonicBasis& harm(const BlockSpec& spec) const {
        return spec.kind == BlockSpec::Kind::Odd ||
                       (spec.kind == BlockSpec::Kind::Single && spec.degree % 2 == 1)
                   ? harm_odd
                   : harm_even;
    }
    const Eigen::MatrixXd& trace(const BlockSpec& spec) const {
        return spec.kind == BlockSpec::Kind::Odd ||
                       (spec.kind == BlockSpec::Kind::Single && spec.degree % 2 == 1)
                   ? trace_odd
                   : trace_even;
    }
};

BoundarySetup build_boundary_setup(const WittenBundle& ambient,
                                   const OrientedComplex& c, const EmbeddedGeometry& g,
                                   const CyclicAction& a, const PLVectorField& X,
                                   const SubcomplexResult& bd, double s,
                                   const HarmonicOptions& opts = {});

struct SplitOptions {
    double tau_trace = 1e-6;
    double tau_split = 1e-6;
    bool throw_on_disagreement = true;
};

/// Interior/boundary decomposition of one harmonic basis, cross-validated:
/// Method A (orthogonality against the other boundary-condition basis) and
/// Method B (boundary-trace class for Neumann, d_X-range membership for
/// Dirichlet) must agree in dimension and span.
struct SplitBases {
    Eigen::MatrixXd interior;  // m-orthonormal, full block coords
    Eigen::MatrixXd boundary;
    int dim_interior_a = 0, dim_interior_b = 0;
    bool method_agreement = false;
    double span_angle = 0.0;        // principal angle between the two methods
    double max_cross_gram = 0.0;    // |boundary^T m other| orthogonality evidence
};
SplitBases interior_boundary_split(const WittenBundle& bundle, const HarmonicBasis& basis,
                                   const HarmonicBasis& other, const BoundarySetup& bctx,
                                   const SplitOptions& opts = {});

/// Principal angles between two mass-orthonormal sub-bases of equal dimension.
struct AngleReport {
    Eigen::VectorXd angles;  // ascending, radians
    int dim_n = 0, dim_d = 0;
    double margin_zero = 0.0;
    double margin_halfpi = 0.0;
};
AngleReport duality_angles(const Eigen::MatrixXd& iN, const Eigen::MatrixXd& iD,
                           const Eigen::MatrixXd& mass);

}  // namespace hodgex
