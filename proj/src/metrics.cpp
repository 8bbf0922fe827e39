#include "mrct/metrics.hpp"

#include <algorithm>

namespace mrct {

ConfusionRates confusion_rates(const std::vector<bool>& flags, const std::vector<bool>& labels) {
    if (flags.size() != labels.size())
        throw DimensionError("confusion_rates: flags and labels differ in length");
    long n_out = 0, n_reg = 0, tp = 0, fp = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (labels[i]) {
            ++n_out;
            if (flags[i]) ++tp;
        } else {
            ++n_reg;
            if (flags[i]) ++fp;
        }
    }
    ConfusionRates r;
    if (n_out > 0) {
        r.tpr = static_cast<double>(tp) / n_out;
        r.fnr = 1.0 - *r.tpr;
    }
    if (n_reg > 0) {
        r.fpr = static_cast<double>(fp) / n_reg;
        r.tnr = 1.0 - *r.fpr;
    }
    return r;
}

double f_score(const ConfusionRates& rates) {
    if (!rates.tpr || !rates.fpr || !rates.fnr)
        throw DomainError("f_score: needs both classes present");
    const double denom = *rates.tpr + 0.5 * (*rates.fpr + *rates.fnr);
    if (!(denom > 0.0)) throw DomainError("f_score: zero denominator");
    return *rates.tpr / denom;
}

double ise(const Eigen::Ref<const Eigen::MatrixXd>& true_kernel,
           const Eigen::Ref<const Eigen::MatrixXd>& est_kernel) {
    if (true_kernel.rows() != est_kernel.rows() || true_kernel.cols() != est_kernel.cols())
        throw DimensionError("ise: kernel shapes differ");
    return (true_kernel - est_kernel).squaredNorm() /
           static_cast<double>(true_kernel.size());
}

Overlap subset_overlap(const std::vector<SubsetH>& subsets, const SubsetH& h_opt) {
    if (subsets.empty()) throw DomainError("subset_overlap: no subsets");
    const int h = h_opt.size();
    std::vector<int> common = subsets.front().indices();
    double o1_sum = 0.0;
    for (const SubsetH& s : subsets) {
        if (s.size() != h) throw DimensionError("subset_overlap: subsets differ in size");
        std::vector<int> inter;
        std::set_intersection(s.indices().begin(), s.indices().end(), h_opt.indices().begin(),
                              h_opt.indices().end(), std::back_inserter(inter));
        o1_sum += static_cast<double>(inter.size()) / h;
        std::vector<int> next;
        std::set_intersection(common.begin(), common.end(), s.indices().begin(),
                              s.indices().end(), std::back_inserter(next));
        common = std::move(next);
    }
    return Overlap{o1_sum / static_cast<double>(subsets.size()),
                   static_cast<double>(common.size()) / h};
}

double excess_kurtosis_sq(const Eigen::Ref<const Eigen::VectorXd>& values) {
    if (values.size() < 4) throw DomainError("excess_kurtosis_sq: need at least 4 values");
    const double mean = values.mean();
    const Eigen::ArrayXd centered = values.array() - mean;
    const double m2 = centered.square().mean();
    if (!(m2 > 0.0)) throw DomainError("excess_kurtosis_sq: zero variance");
    const double m4 = centered.pow(4).mean();
    const double ek = m4 / (m2 * m2) - 3.0;
    return ek * ek;
}

}  // namespace mrct
