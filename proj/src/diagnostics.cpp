#include "varint/diagnostics.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace varint {

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_csv(const std::string& path, const SeriesTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (int c = 0; c < table.ncols(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (static_cast<int>(row.size()) != table.ncols()) {
      throw std::runtime_error("write_csv: ragged row");
    }
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_value(row[c]);
    }
    out << '\n';
  }
  if (!out.good()) throw std::runtime_error("write_csv: write failed for " + path);
}

SeriesTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw std::runtime_error("read_csv: empty file " + path);
  }
  SeriesTable table;
  table.columns = split_commas(line);
  for (const auto& name : table.columns) {
    if (name.empty()) throw std::runtime_error("read_csv: empty column name in header");
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != table.columns.size()) {
      throw std::runtime_error("read_csv: line " + std::to_string(lineno) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(table.columns.size()));
    }
    std::vector<double> row(fields.size());
    for (size_t c = 0; c < fields.size(); ++c) {
      const char* begin = fields[c].data();
      const char* end = begin + fields[c].size();
      const auto res = std::from_chars(begin, end, row[c]);
      if (res.ec != std::errc() || res.ptr != end) {
        throw std::runtime_error("read_csv: bad number '" + fields[c] + "' on line " +
                                 std::to_string(lineno));
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw std::runtime_error("read_csv: no data rows in " + path);
  return table;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n) return 0.0;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

DiagnosticsSummary diagnose_table(const SeriesTable& table) {
  if (table.ncols() < 1 || table.nrows() < 1) {
    throw std::runtime_error("diagnose_table: empty table");
  }
  DiagnosticsSummary summary;
  summary.rows = table.nrows();
  std::vector<double> t(table.nrows());
  for (int r = 0; r < table.nrows(); ++r) t[r] = table.rows[r][0];
  summary.t_begin = t.front();
  summary.t_end = t.back();

  for (int c = 1; c < table.ncols(); ++c) {
    const std::string& name = table.columns[c];
    const bool conserved =
        name == "energy" || name == "norm" || name.rfind("momentum", 0) == 0;
    if (!conserved) continue;
    DriftStats stats;
    stats.column = name;
    stats.first = table.rows[0][c];
    std::vector<double> drift(table.nrows());
    for (int r = 0; r < table.nrows(); ++r) {
      drift[r] = table.rows[r][c] - stats.first;
      stats.max_drift = std::max(stats.max_drift, std::abs(drift[r]));
    }
    stats.slope = fit_slope(t, drift);
    summary.conserved.push_back(std::move(stats));
  }
  return summary;
}

std::string summary_to_json(const DiagnosticsSummary& summary) {
  nlohmann::json doc;
  doc["rows"] = summary.rows;
  doc["t_begin"] = summary.t_begin;
  doc["t_end"] = summary.t_end;
  doc["conserved"] = nlohmann::json::array();
  for (const auto& s : summary.conserved) {
    doc["conserved"].push_back({{"column", s.column},
                                {"first", s.first},
                                {"max_drift", s.max_drift},
                                {"slope", s.slope}});
  }
  return doc.dump(2);
}

}  // namespace varint
