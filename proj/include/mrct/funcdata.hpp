#ifndef MRCT_FUNCDATA_HPP
#define MRCT_FUNCDATA_HPP

#include <Eigen/Core>

#include <vector>

#include "mrct/errors.hpp"

namespace mrct {

/// Common observation grid t_1 < ... < t_p together with the quadrature weight
/// of the uniform rectangle rule, weight = (t_p - t_1)/p. Integrals of curves
/// sampled on the grid are approximated by weight * sum of pointwise values;
/// constants integrate exactly under this convention.
class Grid {
public:
    explicit Grid(Eigen::VectorXd points);

    /// Equidistant grid of p points spanning [a, b] inclusive.
    static Grid equidistant(int p, double a = 0.0, double b = 1.0);

    const Eigen::VectorXd& points() const { return points_; }
    double weight() const { return weight_; }
    Eigen::Index size() const { return points_.size(); }

private:
    Eigen::VectorXd points_;
    double weight_;
};

/// n curves sampled on one shared grid; rows of `values` are curves.
/// `labels` are optional ground-truth outlier marks used only for evaluation.
struct FunctionalSample {
    Grid grid;
    Eigen::MatrixXd values;           // n x p
    std::vector<bool> labels;         // empty or length n

    FunctionalSample(Grid g, Eigen::MatrixXd v, std::vector<bool> lab = {});

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index p() const { return values.cols(); }
};

/// Strictly increasing subset of curve indices with ceil(n/2) <= h <= n,
/// validated against the owning sample size at construction.
class SubsetH {
public:
    SubsetH(std::vector<int> indices, int n);

    const std::vector<int>& indices() const { return indices_; }
    int size() const { return static_cast<int>(indices_.size()); }
    int n() const { return n_; }
    bool contains(int i) const;

    friend bool operator==(const SubsetH& a, const SubsetH& b) {
        return a.indices_ == b.indices_;
    }
    /// Lexicographic order on the sorted index sequences (used for tie-breaking).
    friend bool operator<(const SubsetH& a, const SubsetH& b) {
        return a.indices_ < b.indices_;
    }

private:
    std::vector<int> indices_;
    int n_;
};

inline int min_subset_size(int n) { return (n + 1) / 2; }

/// Rectangle-rule L2 inner product of two curves on a common grid.
template <class F, class G>
double inner_product(const Eigen::MatrixBase<F>& f, const Eigen::MatrixBase<G>& g,
                     const Grid& grid) {
    if (f.size() != g.size() || f.size() != grid.size())
        throw DimensionError("inner_product: curve/grid length mismatch");
    return grid.weight() * f.cwiseProduct(g).sum();
}

template <class F>
double l2_norm_sq(const Eigen::MatrixBase<F>& f, const Grid& grid) {
    return inner_product(f, f, grid);
}

/// Pointwise mean of the curves indexed by H.
Eigen::VectorXd trimmed_mean(const FunctionalSample& sample, const SubsetH& H);

/// Trimmed covariance in kernel units: (1/h) sum_{i in H} (x_i - xbar_H)(x_i - xbar_H)'.
/// Symmetric PSD with rank <= h-1; no quadrature weight is applied here.
Eigen::MatrixXd trimmed_cov_matrix(const FunctionalSample& sample, const SubsetH& H);

/// Shared kernel: (1/h) X_H_centered' X_H_centered for rows H of `values`.
Eigen::MatrixXd centered_scatter(const Eigen::Ref<const Eigen::MatrixXd>& values,
                                 const SubsetH& H);

}  // namespace mrct

#endif
