// Command-line front end: simulate | fit | select-alpha | scan-h | evaluate.
// Exit codes: 0 success, 2 parse/config error, 3 numerical or degenerate
// error, 4 fit did not converge (results are still written).

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "mrct/alpha_select.hpp"
#include "mrct/coeff.hpp"
#include "mrct/io.hpp"
#include "mrct/metrics.hpp"
#include "mrct/mrct.hpp"
#include "mrct/simulate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNotConverged = 4;

struct CommonOpts {
    std::string input = "-";
    std::string format = "dense";
    std::string alpha = "auto";
    double h_frac = 0.75;
    int h = 0;  // 0 = derive from h_frac
    int n_starts = 10;
    std::uint64_t seed = 0;
    double cutoff_q = 0.99;
    int mc_n = 2000;
    int basis_m = 15;
    int basis_degree = 3;
    std::string selection = "trace";
    std::string out;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o, bool with_alpha = true) {
    cmd->set_help_flag("--help", "print usage");
    cmd->add_option("--input", o.input, "input CSV path, '-' for stdin");
    cmd->add_option("--format", o.format, "dense|sparse")
        ->check(CLI::IsMember({"dense", "sparse"}));
    if (with_alpha) cmd->add_option("--alpha", o.alpha, "regularization parameter or 'auto'");
    cmd->add_option("--h-frac", o.h_frac, "subset fraction of n")->check(CLI::Range(0.5, 1.0));
    cmd->add_option("--h", o.h, "subset size (overrides --h-frac)");
    cmd->add_option("--n-starts", o.n_starts, "random starts");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--cutoff-q", o.cutoff_q, "cutoff quantile");
    cmd->add_option("--mc-n", o.mc_n, "Monte Carlo repetitions");
    cmd->add_option("--basis-m", o.basis_m, "basis functions (sparse format)");
    cmd->add_option("--basis-degree", o.basis_degree, "B-spline degree (sparse format)");
    cmd->add_option("--selection", o.selection, "trace|trace-q=<q>|kurtosis");
    cmd->add_option("--out", o.out, "output directory")->required();
}

mrct::MrctConfig build_config(const CommonOpts& o, int n) {
    mrct::MrctConfig cfg;
    cfg.h = o.h > 0 ? o.h : static_cast<int>(std::floor(o.h_frac * n));
    cfg.h = std::max(cfg.h, mrct::min_subset_size(n));
    cfg.h = std::min(cfg.h, n);
    cfg.n_starts = o.n_starts;
    cfg.seed = o.seed;
    cfg.cutoff_q = o.cutoff_q;
    cfg.mc_n = o.mc_n;
    if (o.selection == "trace") {
        cfg.selection = mrct::Selection::Trace;
    } else if (o.selection == "kurtosis") {
        cfg.selection = mrct::Selection::Kurtosis;
    } else if (o.selection.rfind("trace-q=", 0) == 0) {
        cfg.selection = mrct::Selection::TraceQ;
        cfg.selection_q = std::stod(o.selection.substr(8));
    } else {
        throw mrct::DomainError("unknown --selection value '" + o.selection + "'");
    }
    return cfg;
}

/// Either a dense sample or an orthonormalized coefficient sample.
struct LoadedData {
    std::optional<mrct::FunctionalSample> dense;
    std::optional<mrct::CoefficientSample> coeff;
    std::optional<int> basis_m;
    std::optional<int> basis_degree;

    int n() const {
        return dense ? static_cast<int>(dense->n()) : static_cast<int>(coeff->n());
    }
    int dim() const {
        return dense ? static_cast<int>(dense->p()) : static_cast<int>(coeff->m());
    }
};

LoadedData load(const CommonOpts& o) {
    LoadedData data;
    const bool from_stdin = o.input == "-";
    if (o.format == "dense") {
        data.dense = from_stdin ? mrct::ingest_dense(std::cin)
                                : mrct::ingest_dense_file(o.input);
    } else {
        mrct::SparseCurves curves = from_stdin ? mrct::ingest_sparse(std::cin)
                                               : mrct::ingest_sparse_file(o.input);
        // M is capped by the sparsest curve so every per-curve fit stays
        // overdetermined.
        const int m = std::min(o.basis_m, curves.min_observations());
        if (m < o.basis_degree + 1)
            throw mrct::DomainError("sparse data too sparse for degree " +
                                    std::to_string(o.basis_degree) + " splines");
        mrct::BasisSpec basis(m, curves.t_min(), curves.t_max(), o.basis_degree);
        data.coeff = mrct::fit_coefficients(curves, basis);
        data.basis_m = m;
        data.basis_degree = o.basis_degree;
    }
    return data;
}

struct FitOutput {
    std::optional<mrct::MrctResult> result;
    std::optional<mrct::AlphaSelectionTrace> alpha_trace;
    mrct::MrctConfig cfg;
    bool alpha_auto = false;
};

FitOutput run_fit(const LoadedData& data, const CommonOpts& o) {
    FitOutput out;
    out.cfg = build_config(o, data.n());
    mrct::MrctConfig& cfg = out.cfg;
    if (o.alpha == "auto") {
        out.alpha_auto = true;
        const double alpha0 = mrct::default_alpha0(data.dim(), data.n());
        const Eigen::VectorXd grid = mrct::default_alpha_grid();
        out.alpha_trace = data.dense ? mrct::select_alpha(*data.dense, grid, alpha0, cfg)
                                     : mrct::select_alpha(*data.coeff, grid, alpha0, cfg);
        cfg.alpha = out.alpha_trace->chosen_alpha;
    } else {
        cfg.alpha = std::stod(o.alpha);
    }
    out.result = data.dense ? mrct::mrct_fit(*data.dense, cfg)
                            : mrct::mrct_fit_coeff(*data.coeff, cfg);
    return out;
}

void write_fit_report(const FitOutput& fit, const LoadedData& data, const CommonOpts& o,
                      const mrct::HScanTrace* h_trace = nullptr) {
    mrct::ReportBundle bundle;
    bundle.result = &*fit.result;
    bundle.cfg = &fit.cfg;
    bundle.data_format = o.format;
    bundle.alpha_auto = fit.alpha_auto;
    bundle.alpha_trace = fit.alpha_trace ? &*fit.alpha_trace : nullptr;
    bundle.h_trace = h_trace;
    bundle.basis_m = data.basis_m;
    bundle.basis_degree = data.basis_degree;
    mrct::emit_report(bundle, o.out);
}

int cmd_simulate(int model, int n, int p, double c, std::uint64_t seed,
                 const std::string& out) {
    const mrct::FunctionalSample sample =
        mrct::model_dataset(mrct::ModelSpec(model, n, p, c, seed));
    if (out.empty()) {
        mrct::write_dense(std::cout, sample);
    } else {
        std::filesystem::create_directories(out);
        std::ofstream f(std::filesystem::path(out) / "data.csv");
        if (!f) throw mrct::Error("cannot write to '" + out + "'");
        mrct::write_dense(f, sample);
    }
    return kExitOk;
}

int cmd_fit(const CommonOpts& o) {
    const LoadedData data = load(o);
    const FitOutput fit = run_fit(data, o);
    write_fit_report(fit, data, o);
    return fit.result->converged ? kExitOk : kExitNotConverged;
}

int cmd_select_alpha(const CommonOpts& o, double alpha0_flag) {
    const LoadedData data = load(o);
    mrct::MrctConfig cfg = build_config(o, data.n());
    const double alpha0 =
        alpha0_flag > 0 ? alpha0_flag : mrct::default_alpha0(data.dim(), data.n());
    const Eigen::VectorXd grid = mrct::default_alpha_grid();
    const mrct::AlphaSelectionTrace trace =
        data.dense ? mrct::select_alpha(*data.dense, grid, alpha0, cfg)
                   : mrct::select_alpha(*data.coeff, grid, alpha0, cfg);

    std::filesystem::create_directories(o.out);
    {
        std::ofstream f(std::filesystem::path(o.out) / "alpha_objective.csv");
        f << "alpha,g\n";
        for (Eigen::Index i = 0; i < trace.grid.size(); ++i)
            f << mrct::format_double(trace.grid[i]) << ','
              << mrct::format_double(trace.g_values[i]) << '\n';
    }
    nlohmann::ordered_json j;
    j["chosen_alpha"] = trace.chosen_alpha;
    j["converged"] = trace.converged;
    j["history"] = trace.history;
    j["alpha0"] = alpha0;
    std::ofstream f(std::filesystem::path(o.out) / "selection.json");
    f << j.dump(2) << '\n';
    std::cout << "chosen alpha: " << trace.chosen_alpha << '\n';
    return trace.converged ? kExitOk : kExitNotConverged;
}

int cmd_scan_h(const CommonOpts& o, int h_min, int h_max, int h_step) {
    if (o.format != "dense") throw mrct::DomainError("scan-h works on dense data");
    const LoadedData data = load(o);
    const int n = data.n();
    mrct::MrctConfig cfg = build_config(o, n);

    double alpha;
    std::optional<mrct::AlphaSelectionTrace> alpha_trace;
    if (o.alpha == "auto") {
        alpha_trace = mrct::select_alpha(*data.dense, mrct::default_alpha_grid(),
                                         mrct::default_alpha0(data.dim(), n), cfg);
        alpha = alpha_trace->chosen_alpha;
    } else {
        alpha = std::stod(o.alpha);
    }

    std::vector<int> hs;
    const int lo = h_min > 0 ? h_min : mrct::min_subset_size(n);
    const int hi = h_max > 0 ? h_max : n;
    for (int h = lo; h <= hi; h += h_step) hs.push_back(h);
    const mrct::HScanTrace trace = mrct::h_scan(*data.dense, alpha, hs, cfg);

    std::filesystem::create_directories(o.out);
    std::ofstream f(std::filesystem::path(o.out) / "h_scan.csv");
    f << "h,objective,cov_shift\n";
    for (std::size_t i = 0; i < trace.h_values.size(); ++i) {
        f << trace.h_values[i] << ',' << mrct::format_double(trace.objective[i]) << ',';
        if (i > 0) f << mrct::format_double(trace.cov_shift[i - 1]);
        f << '\n';
    }
    nlohmann::ordered_json j;
    j["alpha"] = alpha;
    j["h_min"] = lo;
    j["h_max"] = hi;
    j["h_step"] = h_step;
    std::ofstream sj(std::filesystem::path(o.out) / "scan.json");
    sj << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_evaluate(const CommonOpts& o, int true_model) {
    const LoadedData data = load(o);
    if (!data.dense || data.dense->labels.empty())
        throw mrct::DomainError("evaluate needs dense input with a label column");
    const FitOutput fit = run_fit(data, o);
    write_fit_report(fit, data, o);

    const mrct::ConfusionRates rates =
        mrct::confusion_rates(fit.result->flags, data.dense->labels);
    nlohmann::ordered_json j;
    if (rates.tpr) j["tpr"] = *rates.tpr;
    if (rates.fpr) j["fpr"] = *rates.fpr;
    if (rates.fnr) j["fnr"] = *rates.fnr;
    if (rates.tnr) j["tnr"] = *rates.tnr;
    if (rates.tpr && rates.fpr) j["f_score"] = mrct::f_score(rates);

    if (true_model > 0) {
        // ISE of the covariance of the identified non-outliers against the
        // model's noise kernel.
        const mrct::FunctionalSample& sample = *data.dense;
        std::vector<int> keep;
        for (std::size_t i = 0; i < fit.result->flags.size(); ++i)
            if (!fit.result->flags[i]) keep.push_back(static_cast<int>(i));
        const Eigen::MatrixXd truth =
            mrct::kernel_matrix(mrct::model_kernel(true_model), sample.grid);
        if (static_cast<int>(keep.size()) >= mrct::min_subset_size(data.n())) {
            mrct::SubsetH h(keep, data.n());
            j["ise_non_outliers"] = mrct::ise(truth, mrct::trimmed_cov_matrix(sample, h));
        }
        std::vector<int> all(data.n());
        for (int i = 0; i < data.n(); ++i) all[i] = i;
        j["ise_full_sample"] =
            mrct::ise(truth, mrct::trimmed_cov_matrix(sample, mrct::SubsetH(all, data.n())));
    }
    std::ofstream f(std::filesystem::path(o.out) / "evaluation.json");
    f << j.dump(2) << '\n';
    return fit.result->converged ? kExitOk : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust functional covariance estimation and outlier detection"};
    app.set_help_flag("--help", "print usage");  // short -h is taken by the subset-size flag
    app.require_subcommand(1);

    // simulate
    int sim_model = 1, sim_n = 200, sim_p = 100;
    double sim_c = 0.0;
    std::uint64_t sim_seed = 0;
    std::string sim_out;
    CLI::App* sim = app.add_subcommand("simulate", "generate a benchmark dataset");
    sim->add_option("--model", sim_model, "model id (1, 2 or 3)")->check(CLI::Range(1, 3));
    sim->add_option("--n", sim_n, "number of curves");
    sim->add_option("--p", sim_p, "grid points");
    sim->add_option("--c", sim_c, "contamination rate in [0,1)");
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--out", sim_out, "output directory (default: stdout)");

    CommonOpts fit_o;
    CLI::App* fit = app.add_subcommand("fit", "run the estimator and flag outliers");
    add_common_flags(fit, fit_o);

    CommonOpts sel_o;
    double alpha0_flag = -1.0;
    CLI::App* sel = app.add_subcommand("select-alpha", "choose the regularization parameter");
    add_common_flags(sel, sel_o, /*with_alpha=*/false);
    sel->add_option("--alpha0", alpha0_flag, "initial alpha (default: 0.01 if dim<n else 1)");

    CommonOpts scan_o;
    int h_min = 0, h_max = 0, h_step = 1;
    CLI::App* scan = app.add_subcommand("scan-h", "trace the objective over subset sizes");
    add_common_flags(scan, scan_o);
    scan->add_option("--h-min", h_min, "smallest subset size (default ceil(n/2))");
    scan->add_option("--h-max", h_max, "largest subset size (default n)");
    scan->add_option("--h-step", h_step, "step between subset sizes")->check(CLI::PositiveNumber);

    CommonOpts eval_o;
    int true_model = 0;
    CLI::App* eval = app.add_subcommand("evaluate", "fit and score against ground-truth labels");
    add_common_flags(eval, eval_o);
    eval->add_option("--model", true_model,
                     "model id whose kernel serves as the ISE reference (optional)")
        ->check(CLI::Range(1, 3));

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return cmd_simulate(sim_model, sim_n, sim_p, sim_c, sim_seed, sim_out);
        if (fit->parsed()) return cmd_fit(fit_o);
        if (sel->parsed()) return cmd_select_alpha(sel_o, alpha0_flag);
        if (scan->parsed()) return cmd_scan_h(scan_o, h_min, h_max, h_step);
        if (eval->parsed()) return cmd_evaluate(eval_o, true_model);
        return kExitParse;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitParse;
    } catch (const mrct::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const mrct::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    }
}
