#include "mrct/alpha_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace mrct {

Eigen::VectorXd standardized_eigvals(const Eigen::Ref<const Eigen::VectorXd>& robust_eigvals,
                                     double alpha) {
    if (!(alpha > 0.0)) throw DomainError("standardized_eigvals: alpha must be positive");
    return (robust_eigvals.array() / (robust_eigvals.array() + alpha)).square().matrix();
}

Partition partition_objective(const Eigen::Ref<const Eigen::VectorXd>& std_eigvals) {
    const Eigen::Index r = std_eigvals.size();
    if (r == 0) throw DomainError("partition_objective: empty eigenvalue list");
    if (!(std_eigvals.maxCoeff() > 0.0))
        throw DomainError("partition_objective: all standardized eigenvalues are zero");

    // Two guards keep the objective faithful to its purpose of balancing a
    // tight signal plateau against a noise cluster at zero. The signal
    // cluster needs at least two members, otherwise its spread is zero by
    // construction and the objective collapses onto the relative tail energy,
    // which slides to arbitrarily large alpha. And each cluster contributes
    // its mean squared deviation rather than the plain sum, so the long
    // near-zero eigenvalue tail cannot drown out the signal cluster.
    const Eigen::Index m_lo = std::min<Eigen::Index>(2, r);
    Partition best{0, std::numeric_limits<double>::infinity()};
    double head_sum = std_eigvals.head(m_lo - 1).sum();
    for (Eigen::Index m = m_lo; m <= r; ++m) {
        head_sum += std_eigvals[m - 1];
        const double center = head_sum / static_cast<double>(m);
        double v1 = 0.0, v2 = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double d = std_eigvals[i] - center;
            v1 += d * d;
        }
        for (Eigen::Index i = m; i < r; ++i) v2 += std_eigvals[i] * std_eigvals[i];
        const double within = v1 / static_cast<double>(m) +
                              (m < r ? v2 / static_cast<double>(r - m) : 0.0);
        const double g = within / (center * center);
        if (g < best.g) best = Partition{static_cast<int>(m), g};
    }
    return best;
}

Eigen::VectorXd default_alpha_grid() {
    const int n_points = 30;
    Eigen::VectorXd grid(n_points);
    for (int i = 0; i < n_points; ++i)
        grid[i] = std::pow(10.0, -3.0 + 5.0 * i / (n_points - 1));
    return grid;
}

double default_alpha0(Eigen::Index dim, Eigen::Index n) { return dim < n ? 0.01 : 1.0; }

namespace detail {

AlphaSelectionTrace select_alpha_impl(const std::function<MrctResult(double)>& fit_at,
                                      const Eigen::Ref<const Eigen::VectorXd>& grid,
                                      double alpha0, int max_outer) {
    const Eigen::Index m = grid.size();
    if (m == 0) throw DomainError("select_alpha: empty grid");
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(grid[i] > 0.0)) throw DomainError("select_alpha: grid values must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw DomainError("select_alpha: grid must be strictly ascending");
    }
    if (!(alpha0 > 0.0)) throw DomainError("select_alpha: alpha0 must be positive");

    AlphaSelectionTrace trace;
    trace.grid = grid;
    trace.g_values.resize(m);
    trace.m_alpha.assign(m, 0);
    trace.converged = false;

    std::map<int, double> g_of_choice;  // grid index -> objective when it was chosen
    double current = alpha0;
    int current_idx = -1;
    for (Eigen::Index i = 0; i < m; ++i)
        if (grid[i] == alpha0) current_idx = static_cast<int>(i);

    for (int outer = 0; outer < max_outer; ++outer) {
        const MrctResult fit = fit_at(current);
        const Eigen::VectorXd robust = fit.k * fit.eig.eigvals;

        int arg = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const Partition part = partition_objective(standardized_eigvals(robust, grid[i]));
            trace.g_values[i] = part.g;
            trace.m_alpha[i] = part.m;
            if (trace.g_values[i] < trace.g_values[arg]) arg = static_cast<int>(i);
        }
        trace.history.push_back(arg);

        if (arg == current_idx) {
            trace.converged = true;
            trace.chosen_alpha = grid[arg];
            return trace;
        }
        if (auto it = g_of_choice.find(arg); it != g_of_choice.end()) {
            // Revisit of an earlier choice: take the smallest objective seen.
            int best = arg;
            double best_g = trace.g_values[arg];
            for (const auto& [idx, g] : g_of_choice)
                if (g < best_g) best = idx, best_g = g;
            trace.chosen_alpha = grid[best];
            trace.converged = true;
            return trace;
        }
        g_of_choice.emplace(arg, trace.g_values[arg]);
        current_idx = arg;
        current = grid[arg];
    }
    trace.chosen_alpha = grid[trace.history.back()];
    return trace;
}

}  // namespace detail

AlphaSelectionTrace select_alpha(const FunctionalSample& sample,
                                 const Eigen::Ref<const Eigen::VectorXd>& grid, double alpha0,
                                 const MrctConfig& cfg) {
    auto fit_at = [&](double alpha) {
        MrctConfig c = cfg;
        c.alpha = alpha;
        return mrct_fit(sample, c);
    };
    return detail::select_alpha_impl(fit_at, grid, alpha0);
}

AlphaSelectionTrace select_alpha(const CoefficientSample& sample,
                                 const Eigen::Ref<const Eigen::VectorXd>& grid, double alpha0,
                                 const MrctConfig& cfg) {
    auto fit_at = [&](double alpha) {
        MrctConfig c = cfg;
        c.alpha = alpha;
        return mrct_fit_coeff(sample, c);
    };
    return detail::select_alpha_impl(fit_at, grid, alpha0);
}

HScanTrace h_scan(const FunctionalSample& sample, double alpha, const std::vector<int>& h_values,
                  const MrctConfig& cfg) {
    const int n = static_cast<int>(sample.n());
    if (h_values.empty()) throw DomainError("h_scan: empty h range");
    for (std::size_t i = 0; i < h_values.size(); ++i) {
        if (h_values[i] < min_subset_size(n) || h_values[i] > n)
            throw DomainError("h_scan: h outside [ceil(n/2), n]");
        if (i > 0 && h_values[i] <= h_values[i - 1])
            throw DomainError("h_scan: h values must be strictly ascending");
    }

    HScanTrace trace;
    trace.h_values = h_values;
    trace.objective.resize(h_values.size());
    trace.cov_shift.resize(h_values.empty() ? 0 : h_values.size() - 1);

    Eigen::MatrixXd prev_cov;
    for (std::size_t i = 0; i < h_values.size(); ++i) {
        MrctConfig c = cfg;
        c.h = h_values[i];
        c.alpha = alpha;
        const MrctResult fit = mrct_fit(sample, c);
        trace.objective[i] = fit.trace_objective;
        // Covariance shifts are tracked in kernel units so the diagnostic does
        // not depend on the quadrature weight.
        Eigen::MatrixXd cov = fit.k * trimmed_cov_matrix(sample, fit.subset);
        if (i > 0) trace.cov_shift[i - 1] = (cov - prev_cov).norm();
        prev_cov = std::move(cov);
    }
    return trace;
}

}  // namespace mrct
