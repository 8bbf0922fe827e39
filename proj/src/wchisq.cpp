#include "mrct/wchisq.hpp"

#include <algorithm>
#include <cmath>

#include "mrct/rng.hpp"

namespace mrct {

ChiSqDraws draw_chisq(int n_rows, int n_cols, std::uint64_t seed) {
    if (n_rows < 1 || n_cols < 1) throw DomainError("draw_chisq: need N >= 1 and r >= 1");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(n_rows, n_cols);
    for (int i = 0; i < n_rows; ++i)
        for (int j = 0; j < n_cols; ++j) {
            const double z = normal(gen);
            m(i, j) = z * z;
        }
    return ChiSqDraws{std::move(m), seed};
}

namespace {

Eigen::VectorXd weighted_row_sums(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                  const ChiSqDraws& draws) {
    if (weights.size() > draws.cols())
        throw DimensionError("wchisq: more weights than draw columns");
    for (Eigen::Index j = 0; j < weights.size(); ++j) {
        if (!std::isfinite(weights[j]) || weights[j] < 0.0)
            throw DomainError("wchisq: weights must be finite and nonnegative");
    }
    if (weights.size() == 0) return Eigen::VectorXd::Zero(draws.rows());
    return draws.values.leftCols(weights.size()) * weights;
}

}  // namespace

namespace detail {

double median_inplace(Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    if (n == 0) throw DomainError("median of an empty sequence");
    double* first = v.data();
    double* last = v.data() + n;
    double* mid = first + n / 2;
    std::nth_element(first, mid, last);
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(first, mid);
    return 0.5 * (lower + upper);
}

}  // namespace detail

double wchisq_median(const Eigen::Ref<const Eigen::VectorXd>& weights, const ChiSqDraws& draws) {
    Eigen::VectorXd sums = weighted_row_sums(weights, draws);
    return detail::median_inplace(sums);
}

double wchisq_quantile(const Eigen::Ref<const Eigen::VectorXd>& weights, double q,
                       const ChiSqDraws& draws) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("wchisq_quantile: q must lie in (0,1)");
    Eigen::VectorXd sums = weighted_row_sums(weights, draws);
    const Eigen::Index n = sums.size();
    Eigen::Index rank = static_cast<Eigen::Index>(std::ceil(q * static_cast<double>(n)));
    rank = std::max<Eigen::Index>(1, std::min(rank, n));
    double* first = sums.data();
    std::nth_element(first, first + (rank - 1), first + n);
    return sums[rank - 1];
}

}  // namespace mrct
