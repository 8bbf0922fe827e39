#ifndef MRCT_WCHISQ_HPP
#define MRCT_WCHISQ_HPP

#include <Eigen/Core>

#include <cstdint>

#include "mrct/errors.hpp"

namespace mrct {

/// Frozen matrix of independent chi-square(1) draws. One object is reused for
/// every iteration of a consistency-factor solve, which makes that fixed-point
/// map deterministic.
struct ChiSqDraws {
    Eigen::MatrixXd values;  // N x r, entries >= 0
    std::uint64_t seed;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

/// N x r matrix of squared standard normals, deterministic given `seed`.
ChiSqDraws draw_chisq(int n_rows, int n_cols, std::uint64_t seed);

/// Median over rows of sum_j weights_j * draws(row, j). Weights may be shorter
/// than the number of draw columns; trailing columns are ignored. Even row
/// counts take the midpoint of the two central order statistics.
double wchisq_median(const Eigen::Ref<const Eigen::VectorXd>& weights, const ChiSqDraws& draws);

/// Empirical q-quantile (order statistic ceil(q*N), 1-based) of the weighted row sums.
double wchisq_quantile(const Eigen::Ref<const Eigen::VectorXd>& weights, double q,
                       const ChiSqDraws& draws);

namespace detail {
/// Midpoint-of-central-pair sample median; consumes its argument.
double median_inplace(Eigen::VectorXd& v);
}  // namespace detail

}  // namespace mrct

#endif
