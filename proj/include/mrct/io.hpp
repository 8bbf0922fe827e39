#ifndef MRCT_IO_HPP
#define MRCT_IO_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "mrct/alpha_select.hpp"
#include "mrct/coeff.hpp"
#include "mrct/mrct.hpp"

namespace mrct {

/// Dense CSV: optional first row "#grid,t1,...,tp" (otherwise an equidistant
/// grid on [0,1] is assumed), then one curve per row. With a grid header, rows
/// may carry one trailing 0/1 label column.
FunctionalSample ingest_dense(std::istream& in);
FunctionalSample ingest_dense_file(const std::string& path);

/// Long-format CSV with header "curve_id,t,value"; curves keep first-appearance
/// order and observations are sorted by time within each curve.
SparseCurves ingest_sparse(std::istream& in);
SparseCurves ingest_sparse_file(const std::string& path);

/// Writes the dense CSV form read back by ingest_dense (grid header, labels
/// when present), floats with 17 significant digits.
void write_dense(std::ostream& out, const FunctionalSample& sample);

/// 17-significant-digit decimal form; round-trips to the same double.
std::string format_double(double v);

struct ReportBundle {
    const MrctResult* result = nullptr;
    const MrctConfig* cfg = nullptr;
    std::string data_format = "dense";
    bool alpha_auto = false;
    const AlphaSelectionTrace* alpha_trace = nullptr;
    const HScanTrace* h_trace = nullptr;
    std::optional<int> basis_m;
    std::optional<int> basis_degree;
};

/// Writes report.json, distances.csv and scree.csv into `out_dir`, plus
/// alpha_objective.csv / h_scan.csv when the corresponding traces are present.
void emit_report(const ReportBundle& bundle, const std::string& out_dir);

}  // namespace mrct

#endif
