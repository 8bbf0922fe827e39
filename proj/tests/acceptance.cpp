// Integration suite: runs the estimator's acceptance checks end to end and
// prints one [PASS]/[FAIL]/[WARN] line per criterion. The exit code is the
// number of failed criteria. `--criterion N` restricts the run to one check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrct/alpha_select.hpp"
#include "mrct/coeff.hpp"
#include "mrct/metrics.hpp"
#include "mrct/mrct.hpp"
#include "mrct/rng.hpp"
#include "mrct/simulate.hpp"

using namespace mrct;

namespace {

struct Outcome {
    bool pass = false;
    bool warn = false;
    std::string detail;
};

std::vector<int> iota_vec(int n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

double median_of(std::vector<double> v) {
    Eigen::VectorXd tmp = Eigen::Map<Eigen::VectorXd>(v.data(), v.size());
    return detail::median_inplace(tmp);
}

FunctionalSample gaussian_instance(int n, int p, std::uint64_t seed, int n_out, double shift,
                                   double scale = 1.0, double range = 0.5) {
    FunctionalSample s = gp_sample(KernelSpec(scale, range), Grid::equidistant(p), n, seed);
    Eigen::MatrixXd v = s.values;
    for (int i = 0; i < n_out; ++i) v.row(i).array() += shift;
    return FunctionalSample(s.grid, std::move(v));
}

MrctResult fit_auto_alpha(const FunctionalSample& s, MrctConfig cfg,
                          AlphaSelectionTrace* trace_out = nullptr) {
    const AlphaSelectionTrace tr =
        select_alpha(s, default_alpha_grid(), default_alpha0(s.p(), s.n()), cfg);
    cfg.alpha = tr.chosen_alpha;
    if (trace_out) *trace_out = tr;
    return mrct_fit(s, cfg);
}

bool is_fixed_point(const FunctionalSample& s, const MrctResult& res, const MrctConfig& cfg) {
    const int max_rank = std::min<int>(cfg.h - 1, static_cast<int>(s.p()));
    const ChiSqDraws draws = draw_chisq(cfg.mc_n, max_rank, res.final_draws_seed);
    const CStep verify = c_step(s, res.subset, cfg.alpha, cfg, draws);
    return verify.subset == res.subset;
}

// ---------------------------------------------------------------- criterion 1
Outcome fixed_point_soundness() {
    std::mt19937_64 gen(rng::substream_seed(2024, "accept-c1"));
    std::uniform_int_distribution<int> n_pick(10, 40), p_pick(3, 30);
    std::uniform_real_distribution<double> alpha_pick(0.05, 5.0), shift_pick(2.0, 8.0);

    int ok = 0;
    const int total = 50;
    std::string failures;
    for (int rep = 0; rep < total; ++rep) {
        const int n = n_pick(gen);
        const int p = p_pick(gen);
        const int n_out = rep % 3 == 0 ? std::max(1, n / 10) : 0;
        const double shift = shift_pick(gen);
        const double alpha = alpha_pick(gen);
        // kernel scale keeps the whole alpha range below the top eigenvalues,
        // where the concentration map is guaranteed usable
        const FunctionalSample s =
            gaussian_instance(n, p, rng::substream_seed(9, "c1-data", rep), n_out, shift, 4.0, 1.0);
        MrctConfig cfg;
        cfg.h = std::max(min_subset_size(n), (3 * n) / 4);
        cfg.alpha = alpha;
        cfg.seed = rep;
        const MrctResult res = mrct_fit(s, cfg);
        if (is_fixed_point(s, res, cfg)) {
            ++ok;
        } else {
            char buf[96];
            std::snprintf(buf, sizeof(buf), " [rep %d: n=%d p=%d alpha=%.2f settled_chains=%d]",
                          rep, n, p, alpha, res.n_starts_converged);
            failures += buf;
        }
    }
    return {ok == total, false,
            std::to_string(ok) + "/" + std::to_string(total) +
                " returned subsets are exact c-step fixed points" + failures};
}

// ---------------------------------------------------------------- criterion 2
Outcome brute_force_oracle() {
    const int n = 12, h = 7, p = 4;
    const double alpha = 0.5;
    int seeds_ok = 0, fp_always = 0;
    for (unsigned seed = 0; seed < 10; ++seed) {
        const FunctionalSample s =
            gaussian_instance(n, p, rng::substream_seed(17, "c2-data", seed), 2, 8.0);
        MrctConfig cfg;
        cfg.h = h;
        cfg.alpha = alpha;
        cfg.seed = seed;
        MrctConfig fit_cfg = cfg;
        fit_cfg.n_starts = 20;
        const MrctResult res = mrct_fit(s, fit_cfg);

        // Enumerate the map the fit solved at termination: the same config and
        // the draw set recorded in the result.
        const ChiSqDraws frozen = draw_chisq(cfg.mc_n, std::min(h - 1, p), res.final_draws_seed);
        std::vector<std::vector<int>> fixed_points;
        std::vector<double> fixed_objs;
        std::vector<int> pick(h);
        std::iota(pick.begin(), pick.end(), 0);
        int n_subsets = 0;
        while (true) {
            ++n_subsets;
            const SubsetH H(pick, n);
            const CStep step = c_step(s, H, alpha, cfg, frozen);
            if (step.subset == H) {
                double obj = 0.0;
                for (int i : H.indices()) obj += step.distances[i];
                fixed_points.push_back(pick);
                fixed_objs.push_back(obj / (step.k * h));
            }
            // next combination
            int j = h - 1;
            while (j >= 0 && pick[j] == n - h + j) --j;
            if (j < 0) break;
            ++pick[j];
            for (int l = j + 1; l < h; ++l) pick[l] = pick[l - 1] + 1;
        }
        if (n_subsets != 792) return {false, false, "enumeration bug"};
        if (fixed_points.empty()) continue;  // (a) fails for this seed
        ++fp_always;

        const auto found = std::find(fixed_points.begin(), fixed_points.end(),
                                     res.subset.indices());
        if (found == fixed_points.end()) continue;
        const double obj = fixed_objs[found - fixed_points.begin()];
        const double best = *std::min_element(fixed_objs.begin(), fixed_objs.end());
        if (obj <= best + 1e-10) ++seeds_ok;
    }
    const bool pass = fp_always == 10 && seeds_ok >= 9;
    return {pass, false,
            "fixed points existed on " + std::to_string(fp_always) +
                "/10 seeds; fit matched the enumeration optimum on " +
                std::to_string(seeds_ok) + "/10 (need >= 9)"};
}

// ---------------------------------------------------------------- criterion 3
Outcome grid_coeff_equivalence() {
    // (a) identity-basis reduction
    std::mt19937_64 gen(rng::substream_seed(3, "c3"));
    std::normal_distribution<double> normal;
    const int n = 20, p = 12;
    Eigen::MatrixXd values(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) values(i, j) = normal(gen) + (i < 3 ? 4.0 : 0.0);
    MrctConfig cfg;
    cfg.h = 15;
    cfg.alpha = 0.7;
    cfg.seed = 11;
    const MrctResult a = mrct_fit(FunctionalSample(Grid::equidistant(p), values), cfg);
    const MrctResult b = mrct_fit_coeff(CoefficientSample{{}, values, true, {}}, cfg);
    bool same = a.subset == b.subset && std::abs(a.k - b.k) <= 1e-10 * std::abs(a.k);
    double max_rel = 0.0;
    for (int i = 0; i < n; ++i)
        max_rel = std::max(max_rel, std::abs(a.distances[i] - b.distances[i]) /
                                        std::max(1e-300, std::abs(a.distances[i])));
    same = same && max_rel <= 1e-10;

    // (b) cross-path eigenvalue agreement on exactly representable curves.
    // Zero first and last coefficients make the curves vanish at the domain
    // ends, so the rectangle rule is uniformly accurate to O(1/p) and the two
    // eigenvalue paths can be compared at the stated tolerance.
    const int m = 8, nc = 10, fine_p = 40000;
    const BasisSpec basis(m, 0.0, 1.0, 3);
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(nc, m);
    for (int i = 0; i < nc; ++i)
        for (int j = 1; j + 1 < m; ++j) raw(i, j) = normal(gen);
    const Eigen::MatrixXd tilde = orthonormalize(raw, gram_matrix(basis));
    const SubsetH H({0, 1, 3, 4, 6, 8, 9}, nc);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ces(coeff_trimmed_cov(tilde, H));
    const Eigen::VectorXd coeff_eigs = ces.eigenvalues().reverse();

    const Grid fine = Grid::equidistant(fine_p, 0.0, 1.0);
    Eigen::MatrixXd curves(H.size(), fine_p);
    for (int j = 0; j < fine_p; ++j) {
        const Eigen::VectorXd phi = basis_eval(basis, fine.points()[j]);
        for (int r = 0; r < H.size(); ++r) curves(r, j) = raw.row(H.indices()[r]).dot(phi);
    }
    curves.rowwise() -= curves.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> des(
        (fine.weight() / H.size()) * (curves * curves.transpose()));
    const Eigen::VectorXd grid_eigs = des.eigenvalues().reverse();
    double max_eig_rel = 0.0;
    for (int j = 0; j < H.size() - 1; ++j) {
        if (coeff_eigs[j] < 1e-8 * coeff_eigs[0]) break;
        max_eig_rel = std::max(max_eig_rel,
                               std::abs(grid_eigs[j] - coeff_eigs[j]) / coeff_eigs[j]);
    }
    const bool pass = same && max_eig_rel <= 1e-4;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "identity reduction max rel diff %.2e (<=1e-10: %s); cross-path eigenvalue "
                  "rel err %.2e (<=1e-4)",
                  max_rel, same ? "yes" : "no", max_eig_rel);
    return {pass, false, buf};
}

// ---------------------------------------------------------------- criterion 4
Outcome scale_equivariance() {
    const FunctionalSample s = gaussian_instance(40, 20, rng::substream_seed(4, "c4"), 4, 6.0);
    MrctConfig cfg;
    cfg.h = 30;
    cfg.alpha = 0.8;
    cfg.seed = 21;
    const MrctResult base = mrct_fit(s, cfg);

    double worst = 0.0;
    bool subsets_equal = true;
    for (double c : {0.25, 4.0, 100.0}) {
        FunctionalSample scaled(s.grid, std::sqrt(c) * s.values);
        MrctConfig cfg2 = cfg;
        cfg2.alpha = c * cfg.alpha;
        const MrctResult res = mrct_fit(scaled, cfg2);
        subsets_equal = subsets_equal && res.subset == base.subset;
        worst = std::max(worst, std::abs(res.k - base.k) / base.k);
        for (int i = 0; i < 40; ++i)
            worst = std::max(worst, std::abs(res.distances[i] - base.distances[i]) /
                                        std::max(1e-300, base.distances[i]));
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "subsets identical: %s; max rel drift %.2e (tol 1e-10)",
                  subsets_equal ? "yes" : "no", worst);
    return {subsets_equal && worst <= 1e-10, false, buf};
}

// ---------------------------------------------------------------- criterion 5
Outcome wchisq_accuracy() {
    const double chi_median = 0.454936423119572;   // chi2(1) quantile function
    const double chi_q99 = 6.6348966010212145;
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);

    const double m2k = wchisq_median(one, draw_chisq(2000, 1, 1001));
    const double m50k = wchisq_median(one, draw_chisq(50000, 1, 1002));
    const double q99 = wchisq_quantile(one, 0.99, draw_chisq(20000, 1, 1003));

    const bool pass = std::abs(m2k - chi_median) < 0.08 &&
                      std::abs(m50k - chi_median) < 0.02 && std::abs(q99 - chi_q99) < 0.5;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "median errors %.4f (N=2000, tol 0.08), %.4f (N=50000, tol 0.02); q99 error "
                  "%.3f (tol 0.5)",
                  std::abs(m2k - chi_median), std::abs(m50k - chi_median),
                  std::abs(q99 - chi_q99));
    return {pass, false, buf};
}

// ---------------------------------------------------------------- criterion 6
Outcome null_calibration() {
    char buf[200];
    double per_model[3] = {0.0, 0.0, 0.0};
    for (int model : {1, 2, 3}) {
        double total = 0.0;
        for (unsigned seed = 1; seed <= 10; ++seed) {
            const FunctionalSample s = model_dataset(ModelSpec(model, 200, 100, 0.0, seed));
            MrctConfig cfg;
            cfg.h = 150;
            cfg.seed = seed;
            const MrctResult res = fit_auto_alpha(s, cfg);
            total += std::count(res.flags.begin(), res.flags.end(), true) / 200.0;
        }
        per_model[model - 1] = total / 10.0;
    }
    const double mean = (per_model[0] + per_model[1] + per_model[2]) / 3.0;
    std::snprintf(buf, sizeof(buf),
                  "mean flagged fraction %.4f (tol 0.03, nominal 0.01); per model %.4f %.4f %.4f",
                  mean, per_model[0], per_model[1], per_model[2]);
    return {mean <= 0.03, false, buf};
}

// ---------------------------------------------------------------- criterion 7
Outcome detection_power() {
    char buf[200];
    std::string detail;
    bool pass = true;
    for (int model : {1, 2, 3}) {
        std::vector<double> tprs, fprs;
        for (unsigned seed = 1; seed <= 10; ++seed) {
            const FunctionalSample s = model_dataset(ModelSpec(model, 200, 100, 0.2, seed));
            MrctConfig cfg;
            cfg.h = 150;
            cfg.seed = seed;
            const MrctResult res = fit_auto_alpha(s, cfg);
            const ConfusionRates r = confusion_rates(res.flags, s.labels);
            tprs.push_back(*r.tpr);
            fprs.push_back(*r.fpr);
        }
        const double med_tpr = median_of(tprs);
        const double med_fpr = median_of(fprs);
        const double tpr_floor = model == 1 ? 0.90 : 0.98;
        pass = pass && med_tpr >= tpr_floor && med_fpr <= 0.10;
        std::snprintf(buf, sizeof(buf), "m%d TPR %.3f (>=%.2f) FPR %.3f; ", model, med_tpr,
                      tpr_floor, med_fpr);
        detail += buf;
    }
    return {pass, false, detail};
}

// ---------------------------------------------------------------- criterion 8
Outcome robust_covariance_quality() {
    const Eigen::MatrixXd truth =
        kernel_matrix(model_kernel(1), Grid::equidistant(100, 0.0, 1.0));
    int better = 0;
    for (unsigned seed = 1; seed <= 10; ++seed) {
        const FunctionalSample s = model_dataset(ModelSpec(1, 200, 100, 0.2, seed));
        MrctConfig cfg;
        cfg.h = 150;
        cfg.seed = seed;
        const MrctResult res = fit_auto_alpha(s, cfg);

        std::vector<int> keep;
        for (int i = 0; i < 200; ++i)
            if (!res.flags[i]) keep.push_back(i);
        if (static_cast<int>(keep.size()) < min_subset_size(200)) continue;
        const double ise_robust = ise(truth, trimmed_cov_matrix(s, SubsetH(keep, 200)));
        const double ise_full =
            ise(truth, trimmed_cov_matrix(s, SubsetH(iota_vec(200), 200)));
        if (ise_robust < ise_full) ++better;
    }
    return {better >= 9, false,
            "non-outlier covariance beat the full-sample covariance on " +
                std::to_string(better) + "/10 seeds (need >= 9)"};
}

// ---------------------------------------------------------------- criterion 9
Outcome alpha_selection_behavior() {
    int near_local_min = 0, unimodal = 0, anchored = 0;
    for (unsigned seed = 1; seed <= 10; ++seed) {
        const FunctionalSample s = model_dataset(ModelSpec(1, 200, 100, 0.2, seed));
        MrctConfig cfg;
        cfg.h = 150;
        cfg.seed = seed;
        const AlphaSelectionTrace tr =
            select_alpha(s, default_alpha_grid(), default_alpha0(100, 200), cfg);
        const Eigen::VectorXd& g = tr.g_values;
        const int m = static_cast<int>(g.size());
        int chosen_idx = 0;
        for (int i = 0; i < m; ++i)
            if (tr.grid[i] == tr.chosen_alpha) chosen_idx = i;

        // local minima of the final curve
        bool near = false;
        for (int i = 0; i < m && !near; ++i) {
            const bool left_ok = i == 0 || g[i] <= g[i - 1];
            const bool right_ok = i == m - 1 || g[i] <= g[i + 1];
            if (left_ok && right_ok && std::abs(i - chosen_idx) <= 1) near = true;
        }
        if (near) ++near_local_min;

        // Single valley to noise: one run of decreases into the global
        // minimum, then increases. The first few grid points can sit below
        // the left peak because the sample spectrum has no tail beneath
        // them, so the descent is measured from the left peak onward.
        const double tol = 0.05;
        int arg = 0;
        for (int i = 1; i < m; ++i)
            if (g[i] < g[arg]) arg = i;
        int peak = 0;
        for (int i = 1; i <= arg; ++i)
            if (g[i] > g[peak]) peak = i;
        bool ok = true;
        for (int i = peak; i < arg; ++i)
            if (g[i + 1] > g[i] * (1.0 + tol)) ok = false;
        for (int i = arg; i + 1 < m; ++i)
            if (g[i + 1] < g[i] * (1.0 - tol)) ok = false;
        if (ok) ++unimodal;

        if (tr.chosen_alpha >= 0.1 && tr.chosen_alpha <= 3.0) ++anchored;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "chosen near local min %d/10; unimodal curves %d/10 (need >= 8); chosen in "
                  "[0.1,3] %d/10 (need >= 8)",
                  near_local_min, unimodal, anchored);
    return {near_local_min == 10 && unimodal >= 8 && anchored >= 8, false, buf};
}

// --------------------------------------------------------------- criterion 10
Outcome h_scan_localization() {
    std::vector<int> hs;
    for (int h = 100; h <= 200; ++h) hs.push_back(h);
    int localized = 0;
    for (unsigned seed = 1; seed <= 10; ++seed) {
        const FunctionalSample s = model_dataset(ModelSpec(1, 200, 100, 0.2, seed));
        MrctConfig cfg;
        cfg.seed = seed;
        const HScanTrace tr = h_scan(s, 0.6, hs, cfg);
        int arg = 0;
        for (int i = 0; i < tr.cov_shift.size(); ++i) {
            const double jump = tr.objective[i + 1] - tr.objective[i];
            const double best = tr.objective[arg + 1] - tr.objective[arg];
            if (jump > best) arg = i;
        }
        const int at = hs[arg + 1];  // subset size where the increase lands
        if (at >= 155 && at <= 168) ++localized;
    }
    return {localized >= 7, false,
            "largest objective jump in [155,168] on " + std::to_string(localized) +
                "/10 seeds (need >= 7)"};
}

// --------------------------------------------------------------- criterion 11
Outcome start_insensitivity() {
    const FunctionalSample s = model_dataset(ModelSpec(2, 200, 100, 0.1, 7));
    MrctConfig cfg;
    cfg.h = 150;
    cfg.seed = 7;
    AlphaSelectionTrace tr;
    MrctConfig fit_cfg = cfg;
    fit_cfg.n_starts = 100;
    {
        const AlphaSelectionTrace sel =
            select_alpha(s, default_alpha_grid(), default_alpha0(100, 200), cfg);
        fit_cfg.alpha = sel.chosen_alpha;
    }
    const MrctResult res = mrct_fit(s, fit_cfg);

    std::vector<SubsetH> random_chains;
    for (const ChainSummary& c : res.chains)
        if (!c.median_start) random_chains.emplace_back(c.subset, 200);
    const Overlap o = subset_overlap(random_chains, res.subset);
    char buf[120];
    std::snprintf(buf, sizeof(buf), "O1 = %.4f (>= 0.95), O2 = %.4f (>= 0.90), alpha = %.3f",
                  o.o1, o.o2, fit_cfg.alpha);
    return {o.o1 >= 0.95 && o.o2 >= 0.90, false, buf};
}

// --------------------------------------------------------------- criterion 12
Outcome runtime_scaling() {
    const std::vector<int> ps = {50, 100, 200, 400};
    std::vector<double> mean_times;
    for (int p : ps) {
        double total = 0.0;
        for (unsigned run = 1; run <= 5; ++run) {
            const FunctionalSample s = model_dataset(ModelSpec(1, 200, p, 0.2, run));
            MrctConfig cfg;
            cfg.h = 150;
            cfg.alpha = 0.6;
            cfg.seed = run;
            const auto start = std::chrono::steady_clock::now();
            const MrctResult res = mrct_fit(s, cfg);
            const auto stop = std::chrono::steady_clock::now();
            (void)res;
            total += std::chrono::duration<double>(stop - start).count();
        }
        mean_times.push_back(std::max(total / 5.0, 1e-6));
    }
    // OLS slope of log t on log p
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(ps.size());
    for (int i = 0; i < m; ++i) {
        const double x = std::log(static_cast<double>(ps[i]));
        const double y = std::log(mean_times[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "log-log slope %.2f (diagnostic window [1.8, 3.6]); mean times %.3fs %.3fs "
                  "%.3fs %.3fs",
                  slope, mean_times[0], mean_times[1], mean_times[2], mean_times[3]);
    const bool in_window = slope >= 1.8 && slope <= 3.6;
    return {true, !in_window, buf};  // diagnostic gate: out-of-window is a warning
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0) only = std::atoi(argv[i + 1]);

    const std::vector<Criterion> criteria = {
        {1, "fixed-point soundness", fixed_point_soundness},
        {2, "brute-force subset oracle", brute_force_oracle},
        {3, "grid/coefficient equivalence", grid_coeff_equivalence},
        {4, "scale equivariance", scale_equivariance},
        {5, "weighted chi-square accuracy", wchisq_accuracy},
        {6, "null false-positive calibration", null_calibration},
        {7, "detection power", detection_power},
        {8, "robust covariance quality", robust_covariance_quality},
        {9, "alpha-selection behavior", alpha_selection_behavior},
        {10, "h-scan localization", h_scan_localization},
        {11, "start insensitivity", start_insensitivity},
        {12, "runtime scaling", runtime_scaling},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.id != only) continue;
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, false, std::string("exception: ") + e.what()};
        }
        const char* tag = out.pass ? (out.warn ? "WARN" : "PASS") : "FAIL";
        std::printf("[%s] criterion %2d: %s - %s\n", tag, c.id, c.name, out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures;
}
