#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

namespace hodgex {

struct GevpOptions {
    int dense_threshold = 500;
    double tol = 1e-9;       // residual |S x - lambda m x| <= tol * |S|
    int max_iter = 600;
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
    bool force_iterative = false;
    bool force_dense = false;
};

struct GevpResult {
    Eigen::VectorXd values;    // ascending
    Eigen::MatrixXd vectors;   // m-orthonormal columns
    Eigen::VectorXd residuals; // |S x - lambda m x|_2 per pair
    double lambda_max = 0.0;   // largest eigenvalue (dense) or estimate
    int space_dim = 0;
    std::string method;        // "dense" or "lobpcg"
};

/// Smallest `count` eigenpairs of S x = lambda m x, S symmetric PSD,
/// m symmetric PD. Dense solver below the threshold, block iteration above;
/// deterministic for a fixed seed. Throws on non-convergence.
GevpResult solve_gevp(const Eigen::MatrixXd& S, const Eigen::MatrixXd& m, int count,
                      const GevpOptions& opts = {});

enum class KernelVerdict { Clean, Ambiguous };

struct NearKernel {
    Eigen::MatrixXd basis;        // mass-orthonormal kernel columns
    Eigen::VectorXd eigenvalues;  // the retained small eigenvalues (absolute)
    Eigen::VectorXd spectrum;     // all computed eigenvalues, normalized
    int dim = 0;
    double gap_ratio = 0.0;
    KernelVerdict verdict = KernelVerdict::Ambiguous;
    double lambda_max = 0.0;
};

struct KernelOptions {
    double rho_min = 100.0;   // gap threshold
    double tau_abs = 1e-7;    // absolute floor on normalized eigenvalues
    double tau_floor = 1e-15; // ratio denominator floor
};

/// Gap-based near-kernel detection on normalized eigenvalues.
NearKernel detect_kernel(const GevpResult& eigs, const KernelOptions& opts = {});

/// Modified Gram-Schmidt in the m-inner product with re-orthogonalization;
/// drops columns below `drop_tol` relative to the largest original norm.
Eigen::MatrixXd mass_orthonormalize(const Eigen::MatrixXd& V, const Eigen::MatrixXd& m,
                                    double drop_tol = 1e-10);

}  // namespace hodgex
