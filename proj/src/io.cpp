#include "mrct/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mrct {

namespace {

std::string trim(std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_double(const std::string& cell, long line) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ParseError("expected a number, got '" + cell + "'", line);
    return v;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open input file '" + path + "'");
    return in;
}

}  // namespace

FunctionalSample ingest_dense(std::istream& in) {
    std::string line;
    long lineno = 0;
    std::optional<Eigen::VectorXd> grid_points;
    std::vector<std::vector<double>> rows;
    std::vector<bool> labels;
    bool has_labels = false;
    Eigen::Index p = -1;

    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        if (line.rfind("#grid", 0) == 0) {
            if (lineno != 1) throw ParseError("#grid header must be the first line", lineno);
            const auto cells = split_csv(line);
            if (cells.size() < 3) throw ParseError("#grid header needs at least 2 points", lineno);
            Eigen::VectorXd pts(cells.size() - 1);
            for (std::size_t j = 1; j < cells.size(); ++j)
                pts[j - 1] = parse_double(cells[j], lineno);
            grid_points = std::move(pts);
            p = grid_points->size();
            continue;
        }
        if (line[0] == '#') continue;  // other comments are skipped

        const auto cells = split_csv(line);
        if (p < 0) p = static_cast<Eigen::Index>(cells.size());
        if (rows.empty() && grid_points &&
            static_cast<Eigen::Index>(cells.size()) == p + 1)
            has_labels = true;
        const Eigen::Index expected = p + (has_labels ? 1 : 0);
        if (static_cast<Eigen::Index>(cells.size()) != expected)
            throw ParseError("row has " + std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(expected),
                             lineno);
        std::vector<double> row(p);
        for (Eigen::Index j = 0; j < p; ++j) row[j] = parse_double(cells[j], lineno);
        rows.push_back(std::move(row));
        if (has_labels) {
            const std::string& cell = cells[p];
            if (cell == "0")
                labels.push_back(false);
            else if (cell == "1")
                labels.push_back(true);
            else
                throw ParseError("label column must be 0 or 1, got '" + cell + "'", lineno);
        }
    }
    if (rows.size() < 2) throw ParseError("need at least 2 curves", lineno);

    Eigen::MatrixXd values(rows.size(), p);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Eigen::Index j = 0; j < p; ++j) values(i, j) = rows[i][j];

    try {
        Grid grid = grid_points ? Grid(*grid_points) : Grid::equidistant(static_cast<int>(p));
        return FunctionalSample(std::move(grid), std::move(values), std::move(labels));
    } catch (const DomainError& e) {
        throw ParseError(e.what(), 1);
    } catch (const DimensionError& e) {
        throw ParseError(e.what(), 1);
    }
}

FunctionalSample ingest_dense_file(const std::string& path) {
    auto in = open_input(path);
    return ingest_dense(in);
}

SparseCurves ingest_sparse(std::istream& in) {
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty sparse file", 1);
    ++lineno;
    {
        const auto header = split_csv(trim(line));
        if (header.size() != 3 || header[0] != "curve_id" || header[1] != "t" ||
            header[2] != "value")
            throw ParseError("sparse header must be 'curve_id,t,value'", 1);
    }

    SparseCurves out;
    std::map<std::string, std::size_t> index_of;
    std::vector<std::vector<std::pair<double, double>>> obs;
    std::map<std::string, std::set<double>> seen_times;

    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_csv(line);
        if (cells.size() != 3) throw ParseError("expected 3 cells", lineno);
        const std::string& id = cells[0];
        const double t = parse_double(cells[1], lineno);
        const double v = parse_double(cells[2], lineno);
        if (!std::isfinite(t) || !std::isfinite(v))
            throw ParseError("non-finite observation", lineno);
        if (!seen_times[id].insert(t).second)
            throw ParseError("duplicate (curve_id, t) pair for curve '" + id + "'", lineno);
        auto [it, inserted] = index_of.try_emplace(id, out.ids.size());
        if (inserted) {
            out.ids.push_back(id);
            obs.emplace_back();
        }
        obs[it->second].emplace_back(t, v);
    }
    if (out.ids.empty()) throw ParseError("sparse file has no observations", lineno);

    out.times.resize(out.ids.size());
    out.values.resize(out.ids.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        std::sort(obs[i].begin(), obs[i].end());
        Eigen::VectorXd t(obs[i].size()), v(obs[i].size());
        for (std::size_t j = 0; j < obs[i].size(); ++j) {
            t[j] = obs[i][j].first;
            v[j] = obs[i][j].second;
        }
        out.times[i] = std::move(t);
        out.values[i] = std::move(v);
    }
    return out;
}

SparseCurves ingest_sparse_file(const std::string& path) {
    auto in = open_input(path);
    return ingest_sparse(in);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_dense(std::ostream& out, const FunctionalSample& sample) {
    out << "#grid";
    for (Eigen::Index j = 0; j < sample.p(); ++j)
        out << ',' << format_double(sample.grid.points()[j]);
    out << '\n';
    const bool with_labels = !sample.labels.empty();
    for (Eigen::Index i = 0; i < sample.n(); ++i) {
        for (Eigen::Index j = 0; j < sample.p(); ++j) {
            if (j > 0) out << ',';
            out << format_double(sample.values(i, j));
        }
        if (with_labels) out << ',' << (sample.labels[i] ? '1' : '0');
        out << '\n';
    }
}

namespace {

const char* selection_name(Selection s) {
    switch (s) {
        case Selection::Trace: return "trace";
        case Selection::TraceQ: return "trace-q";
        case Selection::Kurtosis: return "kurtosis";
    }
    return "trace";
}

std::ofstream open_output(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw Error("cannot write output file '" + p.string() + "'");
    return out;
}

}  // namespace

void emit_report(const ReportBundle& bundle, const std::string& out_dir) {
    const MrctResult& res = *bundle.result;
    const MrctConfig& cfg = *bundle.cfg;
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    nlohmann::ordered_json j;
    j["alpha"] = res.alpha;
    j["k"] = res.k;
    j["h"] = res.subset.size();
    j["subset"] = res.subset.indices();
    j["cutoff"] = res.cutoff;
    j["trace_objective"] = res.trace_objective;
    j["converged"] = res.converged;
    j["n_outer_iters"] = res.n_outer_iters;
    j["n_starts_converged"] = res.n_starts_converged;
    j["n_flagged"] = static_cast<long>(std::count(res.flags.begin(), res.flags.end(), true));

    nlohmann::ordered_json cfg_echo;
    cfg_echo["alpha"] = bundle.alpha_auto ? nlohmann::ordered_json("auto")
                                          : nlohmann::ordered_json(cfg.alpha);
    cfg_echo["h"] = cfg.h;
    cfg_echo["n_starts"] = cfg.n_starts;
    cfg_echo["eps_k"] = cfg.eps_k;
    cfg_echo["max_k_iters"] = cfg.max_k_iters;
    cfg_echo["max_outer_iters"] = cfg.max_outer_iters;
    cfg_echo["cutoff_q"] = cfg.cutoff_q;
    cfg_echo["mc_n"] = cfg.mc_n;
    cfg_echo["selection"] = selection_name(cfg.selection);
    if (cfg.selection == Selection::TraceQ) cfg_echo["selection_q"] = cfg.selection_q;
    cfg_echo["rank_tol"] = cfg.rank_tol;
    cfg_echo["seed"] = cfg.seed;
    cfg_echo["format"] = bundle.data_format;
    if (bundle.basis_m) cfg_echo["basis_m"] = *bundle.basis_m;
    if (bundle.basis_degree) cfg_echo["basis_degree"] = *bundle.basis_degree;
    j["config"] = std::move(cfg_echo);

    if (bundle.alpha_trace) {
        j["alpha_selection"] = {{"chosen_alpha", bundle.alpha_trace->chosen_alpha},
                                {"converged", bundle.alpha_trace->converged},
                                {"history", bundle.alpha_trace->history}};
    }

    nlohmann::ordered_json curves = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < res.distances.size(); ++i)
        curves.push_back({{"index", i},
                          {"distance", res.distances[i]},
                          {"flagged", static_cast<bool>(res.flags[i])}});
    j["curves"] = std::move(curves);

    open_output(dir / "report.json") << j.dump(2) << '\n';

    {
        auto out = open_output(dir / "distances.csv");
        out << "index,distance,flag\n";
        for (Eigen::Index i = 0; i < res.distances.size(); ++i)
            out << i << ',' << format_double(res.distances[i]) << ',' << (res.flags[i] ? 1 : 0)
                << '\n';
    }
    {
        auto out = open_output(dir / "scree.csv");
        out << "i,robust_eigval,standardized_eigval\n";
        const Eigen::VectorXd robust = res.k * res.eig.eigvals;
        const Eigen::VectorXd st = standardized_eigvals(robust, res.alpha);
        for (Eigen::Index i = 0; i < robust.size(); ++i)
            out << (i + 1) << ',' << format_double(robust[i]) << ',' << format_double(st[i])
                << '\n';
    }
    if (bundle.alpha_trace) {
        auto out = open_output(dir / "alpha_objective.csv");
        out << "alpha,g\n";
        for (Eigen::Index i = 0; i < bundle.alpha_trace->grid.size(); ++i)
            out << format_double(bundle.alpha_trace->grid[i]) << ','
                << format_double(bundle.alpha_trace->g_values[i]) << '\n';
    }
    if (bundle.h_trace) {
        auto out = open_output(dir / "h_scan.csv");
        out << "h,objective,cov_shift\n";
        for (std::size_t i = 0; i < bundle.h_trace->h_values.size(); ++i) {
            out << bundle.h_trace->h_values[i] << ','
                << format_double(bundle.h_trace->objective[i]) << ',';
            if (i > 0) out << format_double(bundle.h_trace->cov_shift[i - 1]);
            out << '\n';
        }
    }
}

}  // namespace mrct
