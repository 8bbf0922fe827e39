#ifndef MRCT_COEFF_HPP
#define MRCT_COEFF_HPP

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "mrct/mrct.hpp"

namespace mrct {

/// Clamped B-spline basis with equidistant interior knots on [a, b].
struct BasisSpec {
    int degree;
    int num_basis;  // M >= degree + 1
    double a;
    double b;

    BasisSpec(int num_basis_, double a_ = 0.0, double b_ = 1.0, int degree_ = 3);

    /// Full clamped knot vector of length M + degree + 1.
    std::vector<double> knots() const;
};

/// Values of all M basis functions at t (Cox-de Boor recurrence).
Eigen::VectorXd basis_eval(const BasisSpec& basis, double t);

/// Gram matrix <phi_i, phi_j>, integrated exactly by per-interval
/// Gauss-Legendre quadrature with degree+1 nodes.
Eigen::MatrixXd gram_matrix(const BasisSpec& basis);

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Rewrites coefficients in the orthonormalized basis gram^{-1/2} * Phi:
/// returns C * gram^{1/2} with the symmetric PD square root. Curve values are
/// unchanged.
Eigen::MatrixXd orthonormalize(const Eigen::Ref<const Eigen::MatrixXd>& coeffs,
                               const Eigen::Ref<const Eigen::MatrixXd>& gram);

/// Irregularly observed curves: per-curve (t, value) observations.
struct SparseCurves {
    std::vector<std::string> ids;
    std::vector<Eigen::VectorXd> times;   // sorted within each curve
    std::vector<Eigen::VectorXd> values;

    std::size_t size() const { return ids.size(); }
    int min_observations() const;
    double t_min() const;
    double t_max() const;
};

/// n x M coefficient matrix; `orthonormalized` marks the form whose effective
/// basis Gram is the identity (the only form the estimator accepts).
struct CoefficientSample {
    std::optional<BasisSpec> basis;
    Eigen::MatrixXd coeffs;
    bool orthonormalized = false;
    std::vector<bool> labels;  // optional ground truth, evaluation only

    Eigen::Index n() const { return coeffs.rows(); }
    Eigen::Index m() const { return coeffs.cols(); }
};

/// Per-curve ordinary least squares onto the basis, then orthonormalization.
/// Requires p_i >= M for every curve.
CoefficientSample fit_coefficients(const SparseCurves& curves, const BasisSpec& basis);

/// Trimmed covariance of coefficient rows via the projector form
/// (1/h) C' (I_H - (1/h) 1_H 1_H') C;  symmetric PSD with the operator
/// eigenvalues of the trimmed covariance of the expanded curves.
Eigen::MatrixXd coeff_trimmed_cov(const Eigen::Ref<const Eigen::MatrixXd>& coeffs,
                                  const SubsetH& H);

/// Squared regularized distances in coefficient space (orthonormal basis).
Eigen::VectorXd coeff_distances(const Eigen::Ref<const Eigen::MatrixXd>& coeffs, const SubsetH& H,
                                double a);

/// The estimator on basis coefficients: identical orchestration to mrct_fit
/// with distances and eigenvalues computed in coefficient space. M may exceed
/// n; regularization keeps every solve well posed.
MrctResult mrct_fit_coeff(const CoefficientSample& sample, const MrctConfig& cfg);

}  // namespace mrct

#endif
