#include "mrct/detail/fit_engine.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <map>
#include <set>

#include "mrct/rng.hpp"

namespace mrct::detail {

namespace {

constexpr std::uint64_t kMedianChainKey = 0xffffffffULL;

void validate_config(const DataView& data, const MrctConfig& cfg) {
    const int n = static_cast<int>(data.values.rows());
    if (n < 2) throw DomainError("mrct: need at least 2 observations");
    if (cfg.h < min_subset_size(n) || cfg.h > n)
        throw DomainError("mrct: subset size must satisfy ceil(n/2) <= h <= n");
    if (!(cfg.alpha > 0.0)) throw DomainError("mrct: alpha must be positive");
    if (!(cfg.cutoff_q > 0.0 && cfg.cutoff_q < 1.0))
        throw DomainError("mrct: cutoff_q must lie in (0,1)");
    if (cfg.n_starts < 0) throw DomainError("mrct: n_starts must be nonnegative");
    if (cfg.mc_n < 1) throw DomainError("mrct: mc_n must be positive");
    if (cfg.selection == Selection::TraceQ && !(cfg.selection_q > 0.0 && cfg.selection_q <= 1.0))
        throw DomainError("mrct: selection_q must lie in (0,1]");
}

Eigen::VectorXd subset_mean(const Eigen::MatrixXd& values, const SubsetH& H) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(values.cols());
    for (int i : H.indices()) mean += values.row(i);
    return mean / static_cast<double>(H.size());
}

// Weights of the limiting weighted chi-square sum in the k equation.
Eigen::VectorXd mc_weights(const Eigen::VectorXd& eigvals, double a) {
    return (eigvals.array() / (eigvals.array() + a)).square().matrix();
}

double chain_key_objective(double k, const Eigen::VectorXd& d, const SubsetH& H) {
    double s = 0.0;
    for (int i : H.indices()) s += d[i];
    return s / (k * H.size());
}

struct IterRecord {
    SubsetH subset;
    double objective;          // trace objective of `subset` under its own estimates
    double k;
    Eigen::VectorXd distances; // raw d^2
    std::uint64_t draws_seed;
    bool k_converged;
};

struct ChainOutcome {
    IterRecord best;
    int n_iters;
    bool converged;     // terminated by revisiting a subset
    bool fixed_point;   // the revisit was H1 == H0
};

std::optional<ChainOutcome> run_chain(const DataView& data, const MrctConfig& cfg,
                                      SubsetH start, std::uint64_t chain_key) {
    const int n = static_cast<int>(data.values.rows());
    const int dim = static_cast<int>(data.values.cols());
    const int max_rank = std::min(cfg.h - 1, dim);

    std::vector<IterRecord> records;
    std::set<std::vector<int>> visited;
    SubsetH current = std::move(start);
    bool damped = false;

    for (int iter = 0; iter < cfg.max_outer_iters; ++iter) {
        const std::uint64_t dseed = rng::substream_seed(cfg.seed, "kmedian", chain_key,
                                                        static_cast<std::uint64_t>(iter));
        EigenSystem eig;
        try {
            eig = decompose(data, current, cfg.rank_tol);
        } catch (const DegenerateSubsetError&) {
            return std::nullopt;  // chain unusable; other starts may still succeed
        }
        const ChiSqDraws draws = draw_chisq(cfg.mc_n, max_rank, dseed);
        KSolve ks;
        try {
            ks = solve_k_view(data, eig, cfg.alpha, draws, cfg);
        } catch (const ConvergenceError&) {
            return std::nullopt;
        }

        IterRecord rec{current, chain_key_objective(ks.k, ks.distances, current), ks.k,
                       ks.distances, dseed, ks.converged};
        records.push_back(std::move(rec));
        const Eigen::VectorXd& d = records.back().distances;

        const SubsetH target = smallest_h(d, cfg.h, n);
        if (target == current) return ChainOutcome{records.back(), iter + 1, true, true};

        visited.insert(current.indices());
        if (!damped && visited.count(target.indices()) > 0) damped = true;

        if (!damped) {
            current = target;
        } else {
            // Wholesale reassignment has started to oscillate. Exchange one
            // member per iteration instead: drop the worst current member and
            // admit the best outsider. A subset is stationary for these steps
            // exactly when the h smallest distances are its own members, the
            // same fixed-point equation the full step solves.
            int worst_in = current.indices().front();
            for (int i : current.indices())
                if (d[i] > d[worst_in] || (d[i] == d[worst_in] && i > worst_in)) worst_in = i;
            int best_out = -1;
            for (int j = 0; j < n; ++j) {
                if (current.contains(j)) continue;
                if (best_out < 0 || d[j] < d[best_out]) best_out = j;
            }
            std::vector<int> idx = current.indices();
            idx.erase(std::find(idx.begin(), idx.end(), worst_in));
            idx.insert(std::upper_bound(idx.begin(), idx.end(), best_out), best_out);
            current = SubsetH(std::move(idx), n);
        }
    }
    // Iteration cap: keep the best subset seen, ties to the smaller subset.
    int best_idx = 0;
    for (int j = 1; j < static_cast<int>(records.size()); ++j) {
        const IterRecord& a = records[j];
        const IterRecord& b = records[best_idx];
        if (a.objective < b.objective || (a.objective == b.objective && a.subset < b.subset))
            best_idx = j;
    }
    return ChainOutcome{records[best_idx], cfg.max_outer_iters, false, false};
}

SubsetH random_subset(int n, int h, std::mt19937_64& gen) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 0; i < h; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(perm[i], perm[pick(gen)]);
    }
    std::vector<int> idx(perm.begin(), perm.begin() + h);
    std::sort(idx.begin(), idx.end());
    return SubsetH(std::move(idx), n);
}

// h observations nearest to the spatial median (Weiszfeld iteration). The
// spatial median commutes with rotations of an orthonormal basis and with row
// permutations, so this start preserves the estimator's equivariances.
SubsetH median_start(const DataView& data, int h) {
    const int n = static_cast<int>(data.values.rows());
    Eigen::VectorXd center = data.values.colwise().mean();
    const double scale = std::max(1e-300, data.values.rowwise().norm().maxCoeff());
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd num = Eigen::VectorXd::Zero(data.values.cols());
        double denom = 0.0;
        for (int i = 0; i < n; ++i) {
            const double dist =
                std::max((data.values.row(i).transpose() - center).norm(), 1e-12 * scale);
            num += data.values.row(i).transpose() / dist;
            denom += 1.0 / dist;
        }
        const Eigen::VectorXd next = num / denom;
        const double move = (next - center).norm();
        center = next;
        if (move <= 1e-10 * scale) break;
    }
    const Eigen::VectorXd scores =
        (data.values.rowwise() - center.transpose()).rowwise().squaredNorm();
    return smallest_h(scores, h, n);
}

// Ranking value for a candidate subset from an evaluation record; smaller wins.
double selection_value(const IterRecord& rec, const MrctConfig& cfg) {
    switch (cfg.selection) {
        case Selection::Trace:
            return rec.objective;
        case Selection::TraceQ: {
            const int h = rec.subset.size();
            const int q_count = std::min<int>(
                h, static_cast<int>(std::ceil(cfg.selection_q * static_cast<double>(h))));
            std::vector<double> in_subset;
            in_subset.reserve(h);
            for (int i : rec.subset.indices()) in_subset.push_back(rec.distances[i] / rec.k);
            std::partial_sort(in_subset.begin(), in_subset.begin() + q_count, in_subset.end());
            return std::accumulate(in_subset.begin(), in_subset.begin() + q_count, 0.0) / h;
        }
        case Selection::Kurtosis: {
            // Maximize the squared excess kurtosis of all n distances.
            const Eigen::ArrayXd d = rec.distances.array() / rec.k;
            const double mean = d.mean();
            const double m2 = (d - mean).square().mean();
            if (!(m2 > 0.0)) return std::numeric_limits<double>::infinity();
            const double m4 = (d - mean).pow(4).mean();
            const double ek = m4 / (m2 * m2) - 3.0;
            return -(ek * ek);
        }
    }
    return rec.objective;
}

}  // namespace

SubsetH smallest_h(const Eigen::Ref<const Eigen::VectorXd>& values, int h, int n) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;
    });
    std::vector<int> idx(order.begin(), order.begin() + h);
    std::sort(idx.begin(), idx.end());
    return SubsetH(std::move(idx), n);
}

EigenSystem decompose(const DataView& data, const SubsetH& H, double rank_tol) {
    const Eigen::MatrixXd scatter = centered_scatter(data.values, H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scatter);
    if (es.info() != Eigen::Success)
        throw NumericalError("eigensystem: symmetric eigendecomposition failed");

    const Eigen::Index dim = scatter.rows();
    const double max_val = es.eigenvalues()[dim - 1];

    // Centering identical rows leaves eigenvalues at roundoff level, about
    // eps^2 relative to the squared data magnitude; anything that close to
    // zero is variation-free for estimation purposes.
    double row_scale = 0.0;
    for (int i : H.indices())
        row_scale = std::max(row_scale, data.values.row(i).squaredNorm());
    if (max_val <= 1e-24 * row_scale)
        throw DegenerateSubsetError("degenerate subset: no usable variation");

    const double threshold = rank_tol * std::max(max_val, 0.0);
    const int max_rank = std::min<int>(H.size() - 1, static_cast<int>(dim));

    int rank = 0;  // eigenvalues come back ascending; retained ones sit at the top
    for (Eigen::Index j = dim - 1; j >= 0 && rank < max_rank; --j) {
        if (es.eigenvalues()[j] <= threshold || es.eigenvalues()[j] <= 0.0) break;
        ++rank;
    }
    if (rank == 0)
        throw DegenerateSubsetError("degenerate subset: no eigenvalue above the rank threshold");

    EigenSystem eig;
    eig.rank = rank;
    eig.eigvals.resize(rank);
    eig.eigvecs.resize(dim, rank);
    for (int j = 0; j < rank; ++j) {
        eig.eigvals[j] = es.eigenvalues()[dim - 1 - j];
        eig.eigvecs.col(j) = es.eigenvectors().col(dim - 1 - j);
    }
    eig.k = 1.0;
    eig.mean = subset_mean(data.values, H);
    eig.subset = H.indices();
    return eig;
}

Eigen::VectorXd spectral_distances(const DataView& data, const EigenSystem& eig, double a) {
    if (!(a > 0.0)) throw DomainError("standardized distances: a must be positive");
    if (data.values.cols() != eig.eigvecs.rows())
        throw DimensionError("standardized distances: eigensystem does not match the data");
    // d_i^2 = sum_j lambda_j/(lambda_j+a)^2 * (psi_j' (x_i - mean))^2
    const Eigen::VectorXd weights =
        (eig.eigvals.array() / (eig.eigvals.array() + a).square()).matrix();
    const Eigen::MatrixXd proj =
        (data.values.rowwise() - eig.mean.transpose()) * eig.eigvecs;  // n x rank
    return proj.array().square().matrix() * weights;
}

KSolve solve_k_view(const DataView& data, const EigenSystem& eig, double alpha,
                    const ChiSqDraws& draws, const MrctConfig& cfg) {
    if (!(alpha > 0.0)) throw DomainError("solve_k: alpha must be positive");
    KSolve out;
    out.converged = false;
    double k1 = 1.0;
    for (int it = 0; it < cfg.max_k_iters; ++it) {
        const double k0 = k1;
        const double a = alpha / k0;
        out.distances = spectral_distances(data, eig, a);
        Eigen::VectorXd d_copy = out.distances;
        const double sample_med = median_inplace(d_copy);
        const double mc_med = wchisq_median(mc_weights(eig.eigvals, a), draws);
        k1 = sample_med / mc_med;
        out.history.push_back(k1);
        if (!std::isfinite(k1) || k1 <= 0.0)
            throw ConvergenceError("solve_k: consistency factor left (0, inf)", out.history);
        if ((k1 - k0) * (k1 - k0) < cfg.eps_k) {
            out.converged = true;
            break;
        }
    }
    out.k = k1;
    return out;
}

CStep c_step_view(const DataView& data, const SubsetH& h0, double alpha, const MrctConfig& cfg,
                  const ChiSqDraws& draws) {
    const EigenSystem eig = decompose(data, h0, cfg.rank_tol);
    const KSolve ks = solve_k_view(data, eig, alpha, draws, cfg);
    SubsetH next = smallest_h(ks.distances, h0.size(), h0.n());
    return CStep{std::move(next), ks.k, ks.distances, ks.converged};
}

// Number of h-subsets, saturating at `cap`.
double subset_count_capped(int n, int h, double cap) {
    double count = 1.0;
    for (int i = 1; i <= h; ++i) {
        count *= static_cast<double>(n - h + i) / i;
        if (count > cap) return cap;
    }
    return count;
}

// Exhaustive mode for small problems: evaluate the concentration map on every
// h-subset under one frozen draw set and return the best fixed point. Falls
// back to the multi-start search when no subset is a fixed point.
std::optional<MrctResult> fit_exact(const DataView& data, const MrctConfig& cfg) {
    const int n = static_cast<int>(data.values.rows());
    const int dim = static_cast<int>(data.values.cols());
    const std::uint64_t dseed = rng::substream_seed(cfg.seed, "selection");
    const ChiSqDraws draws = draw_chisq(cfg.mc_n, std::min(cfg.h - 1, dim), dseed);

    std::optional<IterRecord> best;
    double best_value = 0.0;
    std::vector<int> pick(cfg.h);
    std::iota(pick.begin(), pick.end(), 0);
    bool any_usable = false;
    while (true) {
        SubsetH subset(pick, n);
        try {
            const EigenSystem eig = decompose(data, subset, cfg.rank_tol);
            const KSolve ks = solve_k_view(data, eig, cfg.alpha, draws, cfg);
            any_usable = true;
            if (smallest_h(ks.distances, cfg.h, n) == subset) {
                IterRecord rec{std::move(subset),
                               chain_key_objective(ks.k, ks.distances, SubsetH(pick, n)), ks.k,
                               ks.distances, dseed, ks.converged};
                const double value = selection_value(rec, cfg);
                if (!best || value < best_value ||
                    (value == best_value && rec.subset < best->subset))
                    best = std::move(rec), best_value = value;
            }
        } catch (const DegenerateSubsetError&) {
        } catch (const ConvergenceError&) {
        }
        int j = cfg.h - 1;
        while (j >= 0 && pick[j] == n - cfg.h + j) --j;
        if (j < 0) break;
        ++pick[j];
        for (int l = j + 1; l < cfg.h; ++l) pick[l] = pick[l - 1] + 1;
    }
    if (!any_usable) throw EstimationError("mrct: every subset degenerated; no estimate available");
    if (!best) return std::nullopt;  // no fixed point; the iterative search decides

    EigenSystem eig = decompose(data, best->subset, cfg.rank_tol);
    eig.k = best->k;
    MrctResult result{best->subset,
                      cfg.alpha,
                      best->k,
                      best->distances / best->k,
                      0.0,
                      {},
                      best->objective,
                      1,
                      1,
                      true,
                      std::move(eig),
                      dseed,
                      {ChainSummary{best->subset.indices(), best->objective, best->k, 1, true,
                                    true, false}}};
    result.cutoff = cutoff(result.eig, cfg.alpha, cfg.cutoff_q,
                           rng::substream_seed(cfg.seed, "cutoff"), cfg.mc_n);
    result.flags = flag_outliers(result.distances, result.cutoff);
    return result;
}

MrctResult fit_view(const DataView& data, const MrctConfig& cfg) {
    validate_config(data, cfg);
    const int n = static_cast<int>(data.values.rows());

    // Small problems are solved exactly: enumerating every subset costs about
    // as much as the multi-start search and returns the global optimum over
    // the fixed points.
    if (subset_count_capped(n, cfg.h, 1001.0) <= 1000.0) {
        if (std::optional<MrctResult> exact = fit_exact(data, cfg)) return *std::move(exact);
    }

    struct Candidate {
        ChainOutcome outcome;
        double sel_value;
        bool median;
    };
    std::vector<Candidate> candidates;
    std::vector<ChainSummary> summaries;

    auto run_start = [&](SubsetH start, std::uint64_t key, bool median) {
        auto outcome = run_chain(data, cfg, std::move(start), key);
        if (!outcome) return;
        summaries.push_back(ChainSummary{outcome->best.subset.indices(), outcome->best.objective,
                                         outcome->best.k, outcome->n_iters, outcome->converged,
                                         outcome->fixed_point, median});
        candidates.push_back(
            Candidate{std::move(*outcome), 0.0, median});
        candidates.back().sel_value = selection_value(candidates.back().outcome.best, cfg);
    };

    for (int c = 0; c < cfg.n_starts; ++c) {
        std::mt19937_64 gen = rng::substream(cfg.seed, "starts", static_cast<std::uint64_t>(c));
        run_start(random_subset(n, cfg.h, gen), static_cast<std::uint64_t>(c), false);
    }
    run_start(median_start(data, cfg.h), kMedianChainKey, true);

    if (candidates.empty())
        throw EstimationError("mrct: every start degenerated; no estimate available");

    // The optimal subset is selected among fixed points; chains that hit the
    // iteration cap only compete when no chain settled at all. Candidates are
    // ranked by re-solving the scale factor on one shared draw set, so the
    // comparison is not distorted by each chain's own Monte Carlo stream.
    const bool any_converged =
        std::any_of(candidates.begin(), candidates.end(),
                    [](const Candidate& c) { return c.outcome.converged; });
    {
        const ChiSqDraws selection_draws =
            draw_chisq(cfg.mc_n, std::min(cfg.h - 1, static_cast<int>(data.values.cols())),
                       rng::substream_seed(cfg.seed, "selection"));
        std::map<std::vector<int>, double> ranked;
        for (Candidate& cand : candidates) {
            if (any_converged && !cand.outcome.converged) continue;
            const std::vector<int>& key = cand.outcome.best.subset.indices();
            auto it = ranked.find(key);
            if (it == ranked.end()) {
                const EigenSystem eig = decompose(data, cand.outcome.best.subset, cfg.rank_tol);
                const KSolve ks = solve_k_view(data, eig, cfg.alpha, selection_draws, cfg);
                IterRecord eval{cand.outcome.best.subset,
                                chain_key_objective(ks.k, ks.distances, cand.outcome.best.subset),
                                ks.k, ks.distances, 0, ks.converged};
                it = ranked.emplace(key, selection_value(eval, cfg)).first;
            }
            cand.sel_value = it->second;
        }
    }

    int best = -1;
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
        const auto& a = candidates[i];
        if (any_converged && !a.outcome.converged) continue;
        if (best < 0) {
            best = i;
            continue;
        }
        const auto& b = candidates[best];
        if (a.sel_value < b.sel_value ||
            (a.sel_value == b.sel_value && a.outcome.best.subset < b.outcome.best.subset))
            best = i;
    }
    const ChainOutcome& win = candidates[best].outcome;

    EigenSystem eig = decompose(data, win.best.subset, cfg.rank_tol);
    eig.k = win.best.k;

    MrctResult result{win.best.subset,
                      cfg.alpha,
                      win.best.k,
                      win.best.distances / win.best.k,
                      0.0,
                      {},
                      win.best.objective,
                      win.n_iters,
                      0,
                      false,
                      std::move(eig),
                      win.best.draws_seed,
                      std::move(summaries)};
    for (const ChainSummary& s : result.chains)
        if (s.converged) ++result.n_starts_converged;
    result.converged = win.converged && win.best.k_converged;
    result.cutoff = cutoff(result.eig, cfg.alpha, cfg.cutoff_q,
                           rng::substream_seed(cfg.seed, "cutoff"), cfg.mc_n);
    result.flags = flag_outliers(result.distances, result.cutoff);
    return result;
}

}  // namespace mrct::detail
