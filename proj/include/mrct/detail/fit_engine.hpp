#ifndef MRCT_DETAIL_FIT_ENGINE_HPP
#define MRCT_DETAIL_FIT_ENGINE_HPP

#include "mrct/mrct.hpp"

namespace mrct::detail {

/// The estimator is identical on grid values and on orthonormal basis
/// coefficients; both paths hand the engine a plain data matrix whose rows
/// are compared in Euclidean geometry.
struct DataView {
    const Eigen::MatrixXd& values;  // n x dim, row = observation
};

EigenSystem decompose(const DataView& data, const SubsetH& H, double rank_tol);

Eigen::VectorXd spectral_distances(const DataView& data, const EigenSystem& eig, double a);

KSolve solve_k_view(const DataView& data, const EigenSystem& eig, double alpha,
                    const ChiSqDraws& draws, const MrctConfig& cfg);

CStep c_step_view(const DataView& data, const SubsetH& h0, double alpha, const MrctConfig& cfg,
                  const ChiSqDraws& draws);

MrctResult fit_view(const DataView& data, const MrctConfig& cfg);

/// Indices of the h smallest values under (value, index) ordering.
SubsetH smallest_h(const Eigen::Ref<const Eigen::VectorXd>& values, int h, int n);

}  // namespace mrct::detail

#endif
