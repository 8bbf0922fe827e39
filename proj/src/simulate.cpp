#include "mrct/simulate.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "mrct/rng.hpp"

namespace mrct {

KernelSpec::KernelSpec(double scale_, double range_) : scale(scale_), range(range_) {
    if (!(scale > 0.0) || !(range > 0.0))
        throw DomainError("KernelSpec: scale and range must be positive");
}

double kernel_eval(const KernelSpec& spec, double s, double t) {
    return spec.scale * std::exp(-std::abs(s - t) / spec.range);
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Grid& grid) {
    const Eigen::Index p = grid.size();
    Eigen::MatrixXd k(p, p);
    for (Eigen::Index a = 0; a < p; ++a)
        for (Eigen::Index b = 0; b <= a; ++b) {
            const double v = kernel_eval(spec, grid.points()[a], grid.points()[b]);
            k(a, b) = v;
            k(b, a) = v;
        }
    return k;
}

namespace {

// Symmetric square root with negative eigenvalues clipped at zero; OU kernels
// on fine grids are ill-conditioned, so this is preferred over Cholesky.
Eigen::MatrixXd symmetric_sqrt_clipped(const Eigen::MatrixXd& k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    if (es.info() != Eigen::Success)
        throw NumericalError("gp_sample: eigendecomposition of the kernel matrix failed");
    Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

FunctionalSample gp_sample(const KernelSpec& spec, const Grid& grid, int n, std::uint64_t seed) {
    if (n < 0) throw DomainError("gp_sample: n must be nonnegative");
    const Eigen::Index p = grid.size();
    Eigen::MatrixXd values(n, p);
    if (n > 0) {
        const Eigen::MatrixXd factor = symmetric_sqrt_clipped(kernel_matrix(spec, grid));
        std::mt19937_64 gen(seed);
        std::normal_distribution<double> normal;
        Eigen::VectorXd z(p);
        for (int i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) z[j] = normal(gen);
            values.row(i) = (factor * z).transpose();
        }
    }
    return FunctionalSample(grid, std::move(values));
}

ModelSpec::ModelSpec(int model_id_, int n_, int p_, double c_, std::uint64_t seed_)
    : model_id(model_id_), n(n_), p(p_), c(c_), seed(seed_) {
    if (model_id < 1 || model_id > 3) throw DomainError("ModelSpec: model_id must be 1, 2 or 3");
    if (n < 0 || p < 2) throw DomainError("ModelSpec: need n >= 0 and p >= 2");
    if (!(c >= 0.0) || c >= 1.0) throw DomainError("ModelSpec: contamination rate must lie in [0,1)");
}

KernelSpec model_kernel(int model_id) {
    return model_id == 1 ? KernelSpec(0.3, 0.3) : KernelSpec(1.0, 1.0);
}

double model_main_mean(int model_id, double t) {
    if (model_id == 1) return 30.0 * t * std::pow(1.0 - t, 1.5);
    return 4.0 * t;
}

namespace {

double model_contaminated_mean(int model_id, double t, bool u, double mu) {
    switch (model_id) {
        case 1:
            return 30.0 * std::pow(t, 1.5) * (1.0 - t);
        case 2: {
            const double sign = u ? -1.0 : 1.0;
            const double bump = std::pow(0.02 * std::numbers::pi, -0.5) *
                                std::exp(-(t - mu) * (t - mu) / 0.02);
            return 4.0 * t + sign * 1.8 + bump;
        }
        default:
            return 4.0 * t + 2.0 * std::sin(4.0 * (t + mu) * std::numbers::pi);
    }
}

}  // namespace

FunctionalSample model_dataset(const ModelSpec& spec) {
    const Grid grid = Grid::equidistant(spec.p, 0.0, 1.0);
    const int n_out = static_cast<int>(std::floor(spec.n * spec.c));

    FunctionalSample noise =
        gp_sample(model_kernel(spec.model_id), grid, spec.n,
                  rng::substream_seed(spec.seed, "gp"));

    // Outlier rows are placed by a partial Fisher-Yates pick so that
    // index-based detectors cannot exploit their position.
    std::vector<int> perm(spec.n);
    for (int i = 0; i < spec.n; ++i) perm[i] = i;
    {
        std::mt19937_64 gen = rng::substream(spec.seed, "placement");
        for (int i = 0; i < n_out; ++i) {
            std::uniform_int_distribution<int> pick(i, spec.n - 1);
            std::swap(perm[i], perm[pick(gen)]);
        }
    }
    std::vector<bool> labels(spec.n, false);
    std::vector<int> outlier_rows(perm.begin(), perm.begin() + n_out);
    std::sort(outlier_rows.begin(), outlier_rows.end());
    for (int r : outlier_rows) labels[r] = true;

    std::mt19937_64 contam = rng::substream(spec.seed, "contam");
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Eigen::MatrixXd values = noise.values;
    std::size_t next_out = 0;
    for (int i = 0; i < spec.n; ++i) {
        if (next_out < outlier_rows.size() && outlier_rows[next_out] == i) {
            const bool u = unit(contam) < 0.5;
            const double mu = 0.25 + 0.5 * unit(contam);
            for (int j = 0; j < spec.p; ++j)
                values(i, j) += model_contaminated_mean(spec.model_id, grid.points()[j], u, mu);
            ++next_out;
        } else {
            for (int j = 0; j < spec.p; ++j)
                values(i, j) += model_main_mean(spec.model_id, grid.points()[j]);
        }
    }
    return FunctionalSample(grid, std::move(values), std::move(labels));
}

}  // namespace mrct
