#pragma once

#include <vector>

#include <Eigen/Sparse>

namespace hodgex {

/// Exact rank over Q of a sparse integer matrix, by fraction-free (one-step
/// Bareiss) Gaussian elimination over arbitrary-precision integers with
/// Markowitz-style pivoting. Deterministic.
long exact_rank(const Eigen::SparseMatrix<long long>& A);

/// Rank of the submatrix with the given rows/columns removed.
long exact_rank_restricted(const Eigen::SparseMatrix<long long>& A,
                           const std::vector<char>& drop_row,
                           const std::vector<char>& drop_col);

/// Floating-point rank by tolerance-thresholded singular values; the
/// documented fallback for complexes past the exact-arithmetic cap.
long float_rank(const Eigen::SparseMatrix<long long>& A, double rel_tol = 1e-10);

/// Simplex-count cap above which reference_betti switches to float_rank.
inline constexpr long kExactRankCap = 100000;

}  // namespace hodgex
