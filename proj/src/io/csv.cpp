#include <charconv>
#include <fstream>
#include <sstream>

#include "ppd/io.hpp"

namespace ppd::io {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("'" + path + "' is empty (header required)");
  t.header = split_row(line);
  if (t.header.empty()) throw ConfigError("'" + path + "' has an empty header");
  std::vector<long> bad_rows;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    if (cells.size() != t.header.size())
      throw ConfigError("'" + path + "' row " + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " cells, found " +
                        std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    bool ok = true;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") {
        ok = false;
        break;
      }
      double v;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || p != cell.data() + cell.size()) {
        throw ConfigError("'" + path + "' row " + std::to_string(lineno) + ", column '" +
                          t.header[c] + "': non-numeric cell '" + cell + "'");
      }
      row[c] = v;
    }
    if (!ok) {
      bad_rows.push_back(lineno);
      continue;
    }
    t.rows.push_back(std::move(row));
  }
  if (!bad_rows.empty()) {
    std::string rows;
    for (std::size_t i = 0; i < bad_rows.size(); ++i)
      rows += (i ? ", " : "") + std::to_string(bad_rows[i]);
    throw ConfigError("'" + path + "' has missing values in rows " + rows +
                      " (no imputation is performed)");
  }
  return t;
}

long find_column(const Table& t, const std::string& name) {
  for (std::size_t c = 0; c < t.header.size(); ++c)
    if (t.header[c] == name) return static_cast<long>(c);
  return -1;
}

}  // namespace

GlmData ingest_csv_glm(const std::string& path, bool expect_treatment) {
  Table t = read_table(path);
  long ycol = find_column(t, "y");
  if (ycol < 0) throw ConfigError("'" + path + "': required column 'y' missing");
  long tcol = find_column(t, "n_trials");
  std::vector<long> covariate_cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (static_cast<long>(c) == ycol || static_cast<long>(c) == tcol) continue;
    covariate_cols.push_back(static_cast<long>(c));
  }
  if (expect_treatment) {
    if (covariate_cols.empty() || t.header[covariate_cols[0]] != "treat")
      throw ConfigError("'" + path +
                        "': current data needs 'treat' as the first covariate column");
  }
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  GlmData d;
  d.y.resize(n);
  d.X.resize(n, static_cast<Eigen::Index>(covariate_cols.size()));
  if (tcol >= 0) d.trials = Eigen::VectorXd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.y[i] = t.rows[i][static_cast<std::size_t>(ycol)];
    if (tcol >= 0) (*d.trials)[i] = t.rows[i][static_cast<std::size_t>(tcol)];
    for (std::size_t c = 0; c < covariate_cols.size(); ++c)
      d.X(i, static_cast<Eigen::Index>(c)) = t.rows[i][static_cast<std::size_t>(covariate_cols[c])];
  }
  return d;
}

std::vector<HistoricalSet> ingest_csv_two_group(const std::string& path, Family family) {
  Table t = read_table(path);
  long ycol = find_column(t, "y_sum");
  long ncol = find_column(t, "n");
  if (ycol < 0 || ncol < 0)
    throw ConfigError("'" + path + "': columns 'y_sum' and 'n' are required");
  long vcol = find_column(t, "v");
  long acol = find_column(t, "a0");
  std::vector<HistoricalSet> out;
  ValidationReport report;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    TwoGroupSummary s;
    s.y_sum = t.rows[i][static_cast<std::size_t>(ycol)];
    s.n = static_cast<long>(t.rows[i][static_cast<std::size_t>(ncol)]);
    if (vcol >= 0) s.v = t.rows[i][static_cast<std::size_t>(vcol)];
    HistoricalSet h;
    h.payload = s;
    if (acol >= 0) h.a0 = t.rows[i][static_cast<std::size_t>(acol)];
    validate_summary(family, s, "'" + path + "' row " + std::to_string(i + 2), report);
    out.push_back(std::move(h));
  }
  if (!report.empty()) throw ConfigError(format_report(report));
  return out;
}

}  // namespace ppd::io
