#ifndef MRCT_ALPHA_SELECT_HPP
#define MRCT_ALPHA_SELECT_HPP

#include <Eigen/Core>

#include <functional>
#include <vector>

#include "mrct/coeff.hpp"
#include "mrct/mrct.hpp"

namespace mrct {

struct AlphaSelectionTrace {
    Eigen::VectorXd grid;          // ascending alpha values
    Eigen::VectorXd g_values;      // objective per grid point, final outer iteration
    std::vector<int> m_alpha;      // split index per grid point, final outer iteration
    double chosen_alpha;
    std::vector<int> history;      // chosen grid index per outer iteration
    bool converged;
};

struct HScanTrace {
    std::vector<int> h_values;
    Eigen::VectorXd objective;     // trace objective per h
    Eigen::VectorXd cov_shift;     // Frobenius norm of consecutive covariance differences
};

/// Applies x -> x^2/(x+alpha)^2 elementwise to robust eigenvalue estimates.
/// The map is monotone, so a descending input stays descending in [0, 1).
Eigen::VectorXd standardized_eigvals(const Eigen::Ref<const Eigen::VectorXd>& robust_eigvals,
                                     double alpha);

struct Partition {
    int m;     // size of the signal cluster, 1-based count
    double g;  // (within-cluster sum of squares) / (signal center)^2
};

/// Best two-cluster split of descending standardized eigenvalues: the signal
/// cluster {1..m} with a free center, the noise cluster centered at 0.
Partition partition_objective(const Eigen::Ref<const Eigen::VectorXd>& std_eigvals);

/// Log-spaced default grid, 30 points from 1e-3 to 1e2.
Eigen::VectorXd default_alpha_grid();

/// 0.01 when the data dimension is below n, 1 otherwise.
double default_alpha0(Eigen::Index dim, Eigen::Index n);

/// Iterative grid search for the regularization parameter: fit at the current
/// alpha, score every grid point with the two-cluster objective of the robust
/// eigenvalues, move to the argmin, stop on a repeat (cycles resolve to the
/// smallest objective seen). At most 20 outer iterations.
AlphaSelectionTrace select_alpha(const FunctionalSample& sample,
                                 const Eigen::Ref<const Eigen::VectorXd>& grid, double alpha0,
                                 const MrctConfig& cfg);
AlphaSelectionTrace select_alpha(const CoefficientSample& sample,
                                 const Eigen::Ref<const Eigen::VectorXd>& grid, double alpha0,
                                 const MrctConfig& cfg);

/// Full fit for every subset size in h_values; records the trace objective and
/// the shift between consecutive robust covariance estimates (k * C_H in
/// kernel units).
HScanTrace h_scan(const FunctionalSample& sample, double alpha,
                  const std::vector<int>& h_values, const MrctConfig& cfg);

namespace detail {
AlphaSelectionTrace select_alpha_impl(const std::function<MrctResult(double)>& fit_at,
                                      const Eigen::Ref<const Eigen::VectorXd>& grid,
                                      double alpha0, int max_outer = 20);
}

}  // namespace mrct

#endif
