#pragma once

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>

namespace hodgex {

using SpMatI = Eigen::SparseMatrix<long long>;
using SpMatD = Eigen::SparseMatrix<double>;

/// Thrown when a mesh, action or field fails a structural validation check.
/// The message names the offending simplex or vertex.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Combinatorial oriented simplicial complex with boundary.
///
/// Simplices of every degree are stored as ascending vertex tuples; this
/// sorted tuple is the canonical cochain basis element for all matrices
/// (coboundary, mass, contraction). The geometric orientation of a stored
/// simplex relative to its sorted tuple is kept in `orient` and only enters
/// top-degree bookkeeping: orientation consistency checks, integrals of
/// n-cochains, and induced boundary orientations.
struct OrientedComplex {
    int dim = 0;
    int nverts = 0;
    // simplices[k][i] = ascending vertex tuple of the i-th k-simplex
    std::vector<std::vector<std::vector<int>>> simplices;
    // orient[k][i] = +-1, geometric orientation vs sorted tuple
    std::vector<std::vector<int>> orient;
    // on_boundary[k][i] = simplex lies in the boundary (n-1)-subcomplex
    std::vector<std::vector<char>> on_boundary;
    // coboundary[k]: C^k -> C^{k+1}, integer entries, sorted-tuple convention
    std::vector<SpMatI> coboundary;
    // index[k]: sorted tuple -> position
    std::vector<std::map<std::vector<int>, int>> index;

    int count(int k) const {
        return (k >= 0 && k <= dim) ? static_cast<int>(simplices[k].size()) : 0;
    }
    SpMatD coboundary_d(int k) const;
    bool has_boundary() const;
};

/// Degree-indexed selection of a closed subcomplex (used for the boundary,
/// the Dirichlet constraint and fixed-point sets). P_k as a matrix has one
/// orthonormal column per selected simplex.
struct SubcomplexSelector {
    // indices[k] = positions of selected k-simplices, ascending
    std::vector<std::vector<int>> indices;
    // signs[k] = orientation of the selected simplex inside the subcomplex
    // relative to its orientation in the ambient complex
    std::vector<std::vector<int>> signs;

    int count(int k) const {
        return (k >= 0 && k < static_cast<int>(indices.size()))
                   ? static_cast<int>(indices[k].size())
                   : 0;
    }
};

enum class EulerMode { Absolute, Relative, Boundary };

/// Build a validated complex from oriented top-dimensional simplices.
/// Faces are derived; throws ValidationError on non-manifold incidence,
/// inconsistent orientation or dangling vertices.
OrientedComplex build_complex(int dim, int nverts,
                              const std::vector<std::vector<int>>& top_simplices,
                              bool require_manifold = true);

/// A subcomplex realized as its own complex (compact vertex numbering)
/// together with the inclusion selector into the ambient complex.
struct SubcomplexResult {
    OrientedComplex complex;
    SubcomplexSelector selector;          // into the ambient complex
    std::vector<int> vertex_map;          // sub vertex -> ambient vertex
};

/// Extract the boundary as a closed oriented (n-1)-complex plus the
/// inclusion selector. The selector's signs carry the induced orientation.
SubcomplexResult boundary_subcomplex(const OrientedComplex& c);

/// The sub-complex spanned by the masked vertices, closed under faces,
/// as its own complex (dimension = highest simplex present).
/// Orientation is inherited; manifold checks are not enforced.
SubcomplexResult spanned_subcomplex(const OrientedComplex& c,
                                    const std::vector<char>& vertex_mask);

/// Betti numbers b_0..b_n over Q from exact integer ranks of the (optionally
/// relative) coboundary matrices. `relative_to` deletes the selected rows
/// and columns, realizing the subcomplex-vanishing condition.
std::vector<long> reference_betti(const OrientedComplex& c,
                                  const SubcomplexSelector* relative_to = nullptr);

long euler_characteristic(const OrientedComplex& c, EulerMode mode);

}  // namespace hodgex
