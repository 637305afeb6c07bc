#pragma once

#include <string>
#include <vector>

#include "varint/numcore.hpp"

namespace varint {

/// Column-labelled numeric table backing the trajectory CSV files. The first
/// column is always the time (or an index for spectral eigendata).
struct SeriesTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int ncols() const { return static_cast<int>(columns.size()); }
  int nrows() const { return static_cast<int>(rows.size()); }
};

/// Writes the table with a header row, 17 significant digits per value.
void write_csv(const std::string& path, const SeriesTable& table);

/// Reads a table written by write_csv. Throws std::runtime_error on an empty
/// file, a missing header, or ragged rows.
SeriesTable read_csv(const std::string& path);

/// Drift statistics of one conserved column: deviations from the first value.
struct DriftStats {
  std::string column;
  double first = 0.0;
  double max_drift = 0.0;   // max |value - first|
  double slope = 0.0;       // least-squares slope of (value - first) vs t
};

/// Conservation summary of a trajectory table. Columns named "energy",
/// "norm", or starting with "momentum" are treated as conserved quantities;
/// everything is reproducible from the CSV alone.
struct DiagnosticsSummary {
  int rows = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<DriftStats> conserved;
};

DiagnosticsSummary diagnose_table(const SeriesTable& table);

/// Serializes the summary as a JSON document.
std::string summary_to_json(const DiagnosticsSummary& summary);

/// Least-squares slope of y against x. Returns 0 for fewer than two points.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace varint
