#ifndef MRCT_SIMULATE_HPP
#define MRCT_SIMULATE_HPP

#include <cstdint>

#include "mrct/funcdata.hpp"

namespace mrct {

/// Exponential (Ornstein-Uhlenbeck) covariance kernel
/// gamma(s,t) = scale * exp(-|s-t| / range).
struct KernelSpec {
    double scale;  // sigma^2 > 0
    double range;  // rho > 0

    KernelSpec(double scale_, double range_);
};

double kernel_eval(const KernelSpec& spec, double s, double t);

/// Kernel matrix gamma(t_a, t_b) on a grid.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Grid& grid);

/// n independent zero-mean Gaussian draws with the given covariance kernel.
/// The kernel matrix is factored by a symmetric eigendecomposition with
/// negative eigenvalues clipped at zero, then applied to standard normal
/// vectors. Deterministic given `seed`; n = 0 yields an empty sample.
FunctionalSample gp_sample(const KernelSpec& spec, const Grid& grid, int n, std::uint64_t seed);

/// Contamination scenarios of the simulation study.
struct ModelSpec {
    int model_id;  // 1, 2, 3
    int n;
    int p;
    double c;           // contamination rate in [0,1)
    std::uint64_t seed;

    ModelSpec(int model_id_, int n_, int p_, double c_, std::uint64_t seed_);
};

/// Noise kernel of a model: 0.3*exp(-|s-t|/0.3) for model 1, exp(-|s-t|) otherwise.
KernelSpec model_kernel(int model_id);

/// Mean of the uncontaminated process at time t.
double model_main_mean(int model_id, double t);

/// Sample with floor(n*c) contaminated rows at uniformly random positions and
/// ground-truth labels marking them. Grid: p equidistant points on [0,1].
/// Bit-identical for equal specs.
FunctionalSample model_dataset(const ModelSpec& spec);

}  // namespace mrct

#endif
