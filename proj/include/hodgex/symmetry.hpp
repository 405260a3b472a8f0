#pragma once

#include <vector>

#include "hodgex/complex.hpp"
#include "hodgex/geometry.hpp"

namespace hodgex {

/// Exact simplicial action of Z_m given by one generator vertex permutation.
/// Per-degree simplex images carry the orientation sign of the sorted-tuple
/// rewrite, so R_k is an integer signed permutation matrix.
struct CyclicAction {
    int order = 1;
    std::vector<int> vertex_perm;
    std::vector<std::vector<int>> image;  // [k][i] image simplex index
    std::vector<std::vector<int>> sign;   // [k][i] +-1
};

struct ActionReport {
    double isometry_defect = 0.0;
    double field_defect = 0.0;
    bool orientation_preserving = true;
};

/// Derive per-degree simplex images from the vertex permutation.
/// Throws if the permutation does not map the complex to itself.
CyclicAction build_action(const OrientedComplex& c, int order,
                          const std::vector<int>& vertex_perm);

/// Verify all CyclicAction invariants (period, exact chain map, boundary
/// preservation, orientation preservation, isometry within tolerance) and
/// that the action fixes the field. Fatal on failure.
ActionReport validate_action(const OrientedComplex& c, const EmbeddedGeometry& g,
                             const CyclicAction& a, const PLVectorField& X,
                             double tol = 1e-12);

/// Orbit-sum basis of the invariant cochain subspace per degree.
/// Orientation-reversing orbits contribute no column.
struct InvariantBasis {
    std::vector<SpMatD> J;                       // count(k) x n_orbits(k)
    std::vector<std::vector<double>> orbit_size; // diagonal of J^T J
    std::vector<std::vector<char>> col_boundary; // orbit lies in the boundary

    int dim(int k) const { return static_cast<int>(J[k].cols()); }
    /// invariant coordinates of an invariant cochain: (J^T J)^{-1} J^T x
    Eigen::VectorXd reduce(int k, const Eigen::VectorXd& x) const;
    Eigen::VectorXd expand(int k, const Eigen::VectorXd& w) const;
};

InvariantBasis invariant_basis(const OrientedComplex& c, const CyclicAction& a);

/// Subcomplex spanned by pi-fixed, X-zero vertices (or by trusted generator
/// metadata when provided), closed under faces, boundary flags inherited.
SubcomplexResult fixed_subcomplex(const OrientedComplex& c, const CyclicAction& a,
                                  const EmbeddedGeometry& g, const PLVectorField& X,
                                  const std::vector<int>* metadata_fixed = nullptr);

/// Restriction of the action to a subcomplex (e.g. the boundary).
CyclicAction restrict_action(const OrientedComplex& sub, const CyclicAction& a,
                             const std::vector<int>& vertex_map, int ambient_nverts);

}  // namespace hodgex
