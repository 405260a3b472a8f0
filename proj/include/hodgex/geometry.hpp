#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hodgex/complex.hpp"

namespace hodgex {

/// Vertex embedding in R^d plus the quadrature rule used for assembly.
/// The metric is the simplexwise-flat one induced by the embedding.
struct EmbeddedGeometry {
    Eigen::MatrixXd coords;  // nverts x d

    int ambient_dim() const { return static_cast<int>(coords.cols()); }
};

/// Piecewise-linear tangent vector field sampled at vertices. `scale` is the
/// field's own multiplier (applied on use, so doubling it is bit-exact).
struct PLVectorField {
    Eigen::MatrixXd vectors;  // nverts x d
    double scale = 1.0;
};

/// Quadrature on the reference n-simplex in barycentric coordinates.
/// Conical Gauss-Jacobi product rule: positive weights, exact to the stated
/// polynomial degree, weights normalized to sum to 1.
struct QuadratureRule {
    Eigen::MatrixXd bary;    // npts x (n+1)
    Eigen::VectorXd weights; // sums to 1
};
QuadratureRule simplex_quadrature(int n, int degree);

struct MassMatrix {
    int degree = 0;
    SpMatD mat;
};

/// Galerkin mass matrix of Whitney k-forms in the canonical (sorted-tuple)
/// cochain basis. Throws on degenerate elements.
MassMatrix mass_matrix(const EmbeddedGeometry& g, const OrientedComplex& c, int k);

/// Weak-contraction pairing matrix B_k with
///   (B_k)_{rho,sigma} = \int (i_X W_sigma, W_rho) dV,
/// rho over (k-1)-simplices, sigma over k-simplices. The weak contraction
/// itself is C_k = M_{k-1}^{-1} B_k and is applied via mass solves.
SpMatD contraction_matrix(const EmbeddedGeometry& g, const OrientedComplex& c,
                          const PLVectorField& X, int k);

struct FieldReport {
    double max_tangency_defect = 0.0;
    double max_fixed_norm = 0.0;
    bool fixed_ok = true;
    double invariance_defect = -1.0;  // filled by symmetry::validate_action
};

/// Check boundary tangency (vertexwise, against averaged boundary normals)
/// and exact zeros on the fixed set. Tangency defect above tau_tan throws.
FieldReport validate_field(const EmbeddedGeometry& g, const OrientedComplex& c,
                           const PLVectorField& X,
                           const std::vector<int>& fixed_vertices,
                           double tau_tan = 1e-12);

/// Geometry / field restricted to a subcomplex's compact vertex numbering.
EmbeddedGeometry restrict_geometry(const EmbeddedGeometry& g,
                                   const std::vector<int>& vertex_map);
PLVectorField restrict_field(const PLVectorField& X,
                             const std::vector<int>& vertex_map);

/// Integral of an n-cochain over the oriented manifold: sum of coefficients
/// weighted by the stored geometric orientation.
double integrate_top(const OrientedComplex& c, const Eigen::VectorXd& cochain);

/// Whitney interpolation helpers used by probes and tests.
Eigen::VectorXd interpolate_vertex(
    const EmbeddedGeometry& g,
    const std::function<double(const Eigen::VectorXd&)>& f);
/// Edge integrals of a 1-form given pointwise as a covector in R^d.
Eigen::VectorXd interpolate_one_form(
    const EmbeddedGeometry& g, const OrientedComplex& c,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& w);
/// Canonical top-cochain of the n-form (density * oriented volume form),
/// density taken w.r.t. the stored geometric orientation.
Eigen::VectorXd interpolate_top_density(
    const EmbeddedGeometry& g, const OrientedComplex& c,
    const std::function<double(const Eigen::VectorXd&)>& density);

}  // namespace hodgex
