#ifndef MRCT_MRCT_HPP
#define MRCT_MRCT_HPP

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "mrct/funcdata.hpp"
#include "mrct/wchisq.hpp"

namespace mrct {

/// Spectral summary of a trimmed covariance: descending eigenvalues of the
/// kernel-unit covariance matrix, unit eigenvector columns, retained rank,
/// the consistency factor k, and the subset mean the decomposition was
/// centered at. The estimator works in plain Euclidean row geometry, so the
/// regularization parameter lives on the same scale as these eigenvalues.
struct EigenSystem {
    Eigen::VectorXd eigvals;   // descending, >= 0
    Eigen::MatrixXd eigvecs;   // orthonormal columns, one per retained eigenvalue
    int rank = 0;
    double k = 1.0;
    Eigen::VectorXd mean;      // subset mean (grid values or basis coefficients)
    std::vector<int> subset;   // indices the decomposition was computed from
};

enum class Selection { Trace, TraceQ, Kurtosis };

struct MrctConfig {
    int h = 0;                    // subset size, ceil(n/2) <= h <= n
    double alpha = 1.0;           // regularization parameter, > 0
    int n_starts = 10;            // random starts; a deterministic median start is always added
    double eps_k = 1e-6;          // stop when (k1 - k0)^2 < eps_k
    int max_k_iters = 100;
    int max_outer_iters = 50;
    double cutoff_q = 0.99;
    int mc_n = 2000;              // Monte Carlo rows for medians and cutoffs
    Selection selection = Selection::Trace;
    double selection_q = 0.75;    // fraction for Selection::TraceQ
    double rank_tol = 1e-12;      // drop eigenvalues <= rank_tol * max eigenvalue
    std::uint64_t seed = 0;
};

struct ChainSummary {
    std::vector<int> subset;
    double objective;       // trace objective of this chain's result
    double k;
    int n_iters;
    bool converged;         // terminated by revisiting a subset
    bool fixed_point;       // revisit was an immediate fixed point
    bool median_start;
};

struct MrctResult {
    SubsetH subset;                  // H_opt, sorted ascending
    double alpha;
    double k;
    Eigen::VectorXd distances;       // robust squared alpha-Mahalanobis distances k^{-1} d_i^2, all n
    double cutoff;
    std::vector<bool> flags;         // distances[i] > cutoff
    double trace_objective;          // (1/h) sum_{i in subset} distances[i]
    int n_outer_iters;
    int n_starts_converged;
    bool converged;
    EigenSystem eig;                 // final eigensystem, carries the converged k
    std::uint64_t final_draws_seed;  // chi-square substream of the winning chain's last iteration
    std::vector<ChainSummary> chains;
};

/// Result of one consistency-factor solve: the last k iterate and the
/// distances of the final iteration (computed at alpha/k of the previous
/// iterate, as ordered by the estimation loop).
struct KSolve {
    double k;
    Eigen::VectorXd distances;     // raw d_i^2, all n
    bool converged;
    std::vector<double> history;   // k iterates
};

/// One concentration step: subset of the h smallest distances together with
/// the solved k and the raw squared distances it was derived from.
struct CStep {
    SubsetH subset;
    double k;
    Eigen::VectorXd distances;     // raw d_i^2
    bool k_converged;
};

/// Eigendecomposition of the trimmed covariance of rows H with eigenvalues
/// <= rank_tol * max dropped. Throws DegenerateSubsetError when nothing
/// remains.
EigenSystem eigensystem(const FunctionalSample& sample, const SubsetH& H, double rank_tol = 1e-12);

/// Squared regularized distances d_i^2 = sum_j lambda_j/(lambda_j+a)^2 (psi_j' (x_i - mean))^2
/// for every curve.
Eigen::VectorXd standardized_distances(const FunctionalSample& sample, const EigenSystem& eig,
                                       double a);

/// Fixed-point iteration for the consistency factor k: starting from k = 1,
/// match the sample median of d_i^2(alpha/k0) with the Monte Carlo median of
/// sum_j lambda_j^2/(lambda_j+alpha/k0)^2 chi^2(1) on frozen draws.
KSolve solve_k(const FunctionalSample& sample, const EigenSystem& eig, double alpha,
               const ChiSqDraws& draws, const MrctConfig& cfg);

CStep c_step(const FunctionalSample& sample, const SubsetH& h0, double alpha,
             const MrctConfig& cfg, const ChiSqDraws& draws);

/// Full estimator: multi-start concentration chains, consistency-factor solve,
/// trace-objective subset selection, cutoff, and outlier flags.
MrctResult mrct_fit(const FunctionalSample& sample, const MrctConfig& cfg);

/// Outlier cutoff: empirical q-quantile of sum_j w_j chi^2(1) with
/// w_j = (k*lambda_j)^2 / (k*lambda_j + alpha)^2, on fresh draws.
double cutoff(const EigenSystem& eig_final, double alpha, double q, std::uint64_t seed,
              int mc_n = 2000);

std::vector<bool> flag_outliers(const Eigen::Ref<const Eigen::VectorXd>& distances, double cut);

}  // namespace mrct

#endif
