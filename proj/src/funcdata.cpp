#include "mrct/funcdata.hpp"

#include <algorithm>
#include <cmath>

namespace mrct {

Grid::Grid(Eigen::VectorXd points) : points_(std::move(points)) {
    const Eigen::Index p = points_.size();
    if (p < 2) throw DomainError("Grid: need at least 2 points");
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!std::isfinite(points_[j])) throw DomainError("Grid: non-finite point");
        if (j > 0 && !(points_[j] > points_[j - 1]))
            throw DomainError("Grid: points must be strictly increasing");
    }
    weight_ = (points_[p - 1] - points_[0]) / static_cast<double>(p);
}

Grid Grid::equidistant(int p, double a, double b) {
    if (p < 2) throw DomainError("Grid: need at least 2 points");
    if (!(b > a)) throw DomainError("Grid: empty interval");
    return Grid(Eigen::VectorXd::LinSpaced(p, a, b));
}

FunctionalSample::FunctionalSample(Grid g, Eigen::MatrixXd v, std::vector<bool> lab)
    : grid(std::move(g)), values(std::move(v)), labels(std::move(lab)) {
    if (values.cols() != grid.size())
        throw DimensionError("FunctionalSample: value columns must match grid length");
    if (!values.allFinite())
        throw DomainError("FunctionalSample: non-finite entries are rejected at ingestion");
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != values.rows())
        throw DimensionError("FunctionalSample: label length must equal the number of curves");
}

SubsetH::SubsetH(std::vector<int> indices, int n) : indices_(std::move(indices)), n_(n) {
    const int h = static_cast<int>(indices_.size());
    if (h < min_subset_size(n) || h > n)
        throw DomainError("SubsetH: size must satisfy ceil(n/2) <= h <= n");
    for (int i = 0; i < h; ++i) {
        if (indices_[i] < 0 || indices_[i] >= n)
            throw DomainError("SubsetH: index out of range");
        if (i > 0 && indices_[i] <= indices_[i - 1])
            throw DomainError("SubsetH: indices must be strictly increasing");
    }
}

bool SubsetH::contains(int i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
}

Eigen::VectorXd trimmed_mean(const FunctionalSample& sample, const SubsetH& H) {
    if (H.n() != sample.n()) throw DimensionError("trimmed_mean: subset built for another sample");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(sample.p());
    for (int i : H.indices()) mean += sample.values.row(i);
    return mean / static_cast<double>(H.size());
}

Eigen::MatrixXd centered_scatter(const Eigen::Ref<const Eigen::MatrixXd>& values,
                                 const SubsetH& H) {
    const int h = H.size();
    Eigen::MatrixXd rows(h, values.cols());
    for (int i = 0; i < h; ++i) rows.row(i) = values.row(H.indices()[i]);
    rows.rowwise() -= rows.colwise().mean();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(values.cols(), values.cols());
    cov.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose(), 1.0 / h);
    return cov.selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd trimmed_cov_matrix(const FunctionalSample& sample, const SubsetH& H) {
    if (H.n() != sample.n())
        throw DimensionError("trimmed_cov_matrix: subset built for another sample");
    return centered_scatter(sample.values, H);
}

}  // namespace mrct
