#ifndef MRCT_METRICS_HPP
#define MRCT_METRICS_HPP

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "mrct/funcdata.hpp"

namespace mrct {

/// Classification rates; a rate is absent when its class is empty, never
/// silently zero.
struct ConfusionRates {
    std::optional<double> tpr, fpr, fnr, tnr;
};

ConfusionRates confusion_rates(const std::vector<bool>& flags, const std::vector<bool>& labels);

/// TPR / (TPR + 0.5*(FPR + FNR)), on rates. A total miss returns 0.
double f_score(const ConfusionRates& rates);

/// Mean squared entrywise difference between covariance kernels on a grid.
double ise(const Eigen::Ref<const Eigen::MatrixXd>& true_kernel,
           const Eigen::Ref<const Eigen::MatrixXd>& est_kernel);

struct Overlap {
    double o1;  // mean over subsets of |H intersect H_opt| / h
    double o2;  // |intersection of all subsets| / h
};

Overlap subset_overlap(const std::vector<SubsetH>& subsets, const SubsetH& h_opt);

/// Squared excess kurtosis (m4/m2^2 - 3)^2 with central sample moments.
double excess_kurtosis_sq(const Eigen::Ref<const Eigen::VectorXd>& values);

}  // namespace mrct

#endif
