#include "mrct/coeff.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>

#include "mrct/detail/fit_engine.hpp"

namespace mrct {

BasisSpec::BasisSpec(int num_basis_, double a_, double b_, int degree_)
    : degree(degree_), num_basis(num_basis_), a(a_), b(b_) {
    if (degree < 0) throw DomainError("BasisSpec: degree must be nonnegative");
    if (num_basis < degree + 1) throw DomainError("BasisSpec: need M >= degree + 1");
    if (!(b > a)) throw DomainError("BasisSpec: empty domain");
}

std::vector<double> BasisSpec::knots() const {
    const int n_interior = num_basis - degree - 1;
    std::vector<double> t;
    t.reserve(num_basis + degree + 1);
    for (int i = 0; i <= degree; ++i) t.push_back(a);
    for (int i = 1; i <= n_interior; ++i)
        t.push_back(a + (b - a) * static_cast<double>(i) / (n_interior + 1));
    for (int i = 0; i <= degree; ++i) t.push_back(b);
    return t;
}

Eigen::VectorXd basis_eval(const BasisSpec& basis, double t) {
    if (!(t >= basis.a && t <= basis.b))
        throw DomainError("basis_eval: t outside the basis domain");
    const std::vector<double> knots = basis.knots();
    const int d = basis.degree;
    const int m = basis.num_basis;

    // Knot span such that knots[span] <= t < knots[span+1]; t == b uses the
    // last nonempty span so the right endpoint interpolates.
    int span = d;
    while (span < m - 1 && t >= knots[span + 1]) ++span;

    // Cox-de Boor: values of the d+1 B-splines alive on the span.
    std::vector<double> local(d + 1, 0.0), left(d + 1), right(d + 1);
    local[0] = 1.0;
    for (int j = 1; j <= d; ++j) {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double tmp = denom != 0.0 ? local[r] / denom : 0.0;
            local[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        local[j] = saved;
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
    for (int j = 0; j <= d; ++j) {
        const int idx = span - d + j;
        if (idx >= 0 && idx < m) out[idx] = local[j];
    }
    return out;
}

void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
    if (n < 1) throw DomainError("gauss_legendre: need at least one node");
    if (n == 1) {
        nodes = Eigen::VectorXd::Zero(1);
        weights = Eigen::VectorXd::Constant(1, 2.0);
        return;
    }
    // Golub-Welsch: eigenvalues of the Jacobi matrix are the nodes, the first
    // eigenvector components give the weights.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double beta = i / std::sqrt(4.0 * i * i - 1.0);
        jacobi(i, i - 1) = beta;
        jacobi(i - 1, i) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    nodes = es.eigenvalues();
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double c = es.eigenvectors()(0, i);
        weights[i] = 2.0 * c * c;
    }
}

Eigen::MatrixXd gram_matrix(const BasisSpec& basis) {
    const std::vector<double> knots = basis.knots();
    const int m = basis.num_basis;
    Eigen::VectorXd nodes, weights;
    gauss_legendre(basis.degree + 1, nodes, weights);  // exact for degree 2d integrands

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t s = basis.degree; s + 1 < knots.size() - basis.degree; ++s) {
        const double lo = knots[s], hi = knots[s + 1];
        if (!(hi > lo)) continue;
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int q = 0; q < nodes.size(); ++q) {
            const Eigen::VectorXd phi = basis_eval(basis, mid + half * nodes[q]);
            gram.selfadjointView<Eigen::Lower>().rankUpdate(phi, half * weights[q]);
        }
    }
    return gram.selfadjointView<Eigen::Lower>();
}

namespace {

Eigen::MatrixXd symmetric_sqrt_pd(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw NumericalError(std::string(what) + ": eigendecomposition failed");
    const double max_val = es.eigenvalues().maxCoeff();
    if (!(es.eigenvalues().minCoeff() > 1e-12 * std::max(max_val, 0.0)))
        throw NumericalError(std::string(what) + ": matrix is not positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

}  // namespace

Eigen::MatrixXd orthonormalize(const Eigen::Ref<const Eigen::MatrixXd>& coeffs,
                               const Eigen::Ref<const Eigen::MatrixXd>& gram) {
    if (gram.rows() != gram.cols() || gram.rows() != coeffs.cols())
        throw DimensionError("orthonormalize: Gram shape does not match the coefficients");
    return coeffs * symmetric_sqrt_pd(gram, "orthonormalize");
}

int SparseCurves::min_observations() const {
    int m = std::numeric_limits<int>::max();
    for (const auto& t : times) m = std::min(m, static_cast<int>(t.size()));
    return times.empty() ? 0 : m;
}

double SparseCurves::t_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& t : times)
        if (t.size() > 0) m = std::min(m, t[0]);
    return m;
}

double SparseCurves::t_max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& t : times)
        if (t.size() > 0) m = std::max(m, t[t.size() - 1]);
    return m;
}

CoefficientSample fit_coefficients(const SparseCurves& curves, const BasisSpec& basis) {
    const int n = static_cast<int>(curves.size());
    if (n < 2) throw DomainError("fit_coefficients: need at least 2 curves");
    const int m = basis.num_basis;

    Eigen::MatrixXd raw(n, m);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd& t = curves.times[i];
        const int p_i = static_cast<int>(t.size());
        if (p_i < m)
            throw UnderdeterminedCurveError(
                "fit_coefficients: curve '" + curves.ids[i] + "' has " + std::to_string(p_i) +
                    " observations but the basis has " + std::to_string(m) + " functions",
                curves.ids[i]);
        Eigen::MatrixXd design(p_i, m);
        for (int j = 0; j < p_i; ++j) design.row(j) = basis_eval(basis, t[j]);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        if (qr.rank() < m)
            throw NumericalError("fit_coefficients: rank-deficient design for curve '" +
                                 curves.ids[i] + "' (coincident observation times?)");
        raw.row(i) = qr.solve(curves.values[i]).transpose();
    }
    return CoefficientSample{basis, orthonormalize(raw, gram_matrix(basis)), true, {}};
}

Eigen::MatrixXd coeff_trimmed_cov(const Eigen::Ref<const Eigen::MatrixXd>& coeffs,
                                  const SubsetH& H) {
    if (H.n() != coeffs.rows())
        throw DimensionError("coeff_trimmed_cov: subset built for another sample");
    // (1/h) C' (diag(1_H) - (1/h) 1_H 1_H') C, evaluated through the nonzero
    // rows of the projector.
    return centered_scatter(coeffs, H);
}

Eigen::VectorXd coeff_distances(const Eigen::Ref<const Eigen::MatrixXd>& coeffs, const SubsetH& H,
                                double a) {
    if (!(a > 0.0)) throw DomainError("coeff_distances: a must be positive");
    const Eigen::MatrixXd values = coeffs;
    const detail::DataView view{values};
    const EigenSystem eig = detail::decompose(view, H, 1e-12);
    return detail::spectral_distances(view, eig, a);
}

MrctResult mrct_fit_coeff(const CoefficientSample& sample, const MrctConfig& cfg) {
    if (!sample.orthonormalized)
        throw DomainError("mrct_fit_coeff: coefficients must be orthonormalized first");
    return detail::fit_view(detail::DataView{sample.coeffs}, cfg);
}

}  // namespace mrct
