#include "netdid/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace netdid {

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || end != begin + s.size())
    throw SchemaError("bad numeric value '" + s + "' in " + context);
  return v;
}

long parse_int(const std::string& s, const std::string& context) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw SchemaError("bad integer value '" + s + "' in " + context);
  return v;
}

// Table of rows keyed by lower-cased header names.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return int(c);
    return -1;
  }
  int require(const std::string& name, const std::string& path) const {
    const int c = column(name);
    if (c < 0) throw SchemaError("missing column '" + name + "' in " + path);
    return c;
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open input file: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty file: " + path);
  for (auto& name : split_line(line)) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    table.header.push_back(lower);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != table.header.size())
      throw SchemaError("row with " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(table.header.size()) +
                        " in " + path);
    table.rows.push_back(std::move(fields));
  }
  return table;
}

// Permutation check plus row order by id: returns row index for each id.
std::vector<int> order_by_id(const CsvTable& table, int id_col,
                             const std::string& path) {
  const int n = int(table.rows.size());
  std::vector<int> row_of(std::size_t(n), -1);
  for (int r = 0; r < n; ++r) {
    const long id = parse_int(table.rows[std::size_t(r)][std::size_t(id_col)],
                              "column id of " + path);
    if (id < 0 || id >= n)
      throw SchemaError("id " + std::to_string(id) + " outside 0.." +
                        std::to_string(n - 1) + " in " + path);
    if (row_of[std::size_t(id)] != -1)
      throw SchemaError("duplicate id " + std::to_string(id) + " in " + path);
    row_of[std::size_t(id)] = r;
  }
  return row_of;
}

bool is_z_column(const std::string& name) {
  if (name.empty() || name[0] != 'z') return false;
  if (name.size() == 1) return true;
  return std::all_of(name.begin() + 1, name.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

const char* kernel_name(KernelKind k) {
  return k == KernelKind::Bartlett ? "bartlett" : "parzen";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void write_panel_csv(const std::string& path, const SimulatedPanel& sim) {
  const PanelData& panel = sim.panel;
  if (!panel.network.has_points())
    throw InvalidInput("write_panel_csv: panel has no coordinates");
  auto out = open_out(path);
  out << "id,x,y,z,d,y1,y2,s\n";
  for (int i = 0; i < panel.n(); ++i) {
    out << i << ',' << format_double(panel.network.points[std::size_t(i)][0]) << ','
        << format_double(panel.network.points[std::size_t(i)][1]) << ','
        << format_double(panel.z(i, 0)) << ',' << int(panel.d[i]) << ','
        << format_double(panel.y1[i]) << ',' << format_double(panel.y2[i]) << ','
        << sim.s_count[std::size_t(i)] << '\n';
  }
}

LoadedPanel read_panel_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const int id_col = table.require("id", path);
  const int d_col = table.require("d", path);
  const int y1_col = table.require("y1", path);
  const int y2_col = table.require("y2", path);
  std::vector<int> z_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (is_z_column(table.header[c])) z_cols.push_back(int(c));
  if (z_cols.empty())
    throw SchemaError("no covariate column (z, z1, ...) in " + path);
  if (table.rows.empty()) throw SchemaError("no data rows in " + path);

  const int n = int(table.rows.size());
  const std::vector<int> row_of = order_by_id(table, id_col, path);

  LoadedPanel panel;
  panel.z.resize(n, int(z_cols.size()));
  panel.d.resize(n);
  panel.y1.resize(n);
  panel.y2.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& row = table.rows[std::size_t(row_of[std::size_t(i)])];
    for (std::size_t q = 0; q < z_cols.size(); ++q)
      panel.z(i, int(q)) =
          parse_double(row[std::size_t(z_cols[q])], "covariates of " + path);
    const double d = parse_double(row[std::size_t(d_col)], "column d of " + path);
    if (d != 0.0 && d != 1.0)
      throw SchemaError("treatment must be 0/1 in " + path);
    panel.d[i] = d;
    panel.y1[i] = parse_double(row[std::size_t(y1_col)], "column y1 of " + path);
    panel.y2[i] = parse_double(row[std::size_t(y2_col)], "column y2 of " + path);
  }
  return panel;
}

std::vector<std::array<double, 2>> read_points_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const int id_col = table.require("id", path);
  const int x_col = table.require("x", path);
  const int y_col = table.require("y", path);
  if (table.rows.empty()) throw SchemaError("no data rows in " + path);
  const int n = int(table.rows.size());
  const std::vector<int> row_of = order_by_id(table, id_col, path);
  std::vector<std::array<double, 2>> points(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& row = table.rows[std::size_t(row_of[std::size_t(i)])];
    points[std::size_t(i)] = {
        parse_double(row[std::size_t(x_col)], "column x of " + path),
        parse_double(row[std::size_t(y_col)], "column y of " + path)};
  }
  return points;
}

std::vector<std::pair<int, int>> read_edges_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const int src_col = table.require("src", path);
  const int dst_col = table.require("dst", path);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    const long a = parse_int(row[std::size_t(src_col)], "column src of " + path);
    const long b = parse_int(row[std::size_t(dst_col)], "column dst of " + path);
    if (a < 0 || b < 0) throw SchemaError("negative unit id in " + path);
    edges.emplace_back(int(a), int(b));
  }
  return edges;
}

void write_records_csv(const std::string& path, const SimResult& result) {
  auto out = open_out(path);
  out << "rep,estimator,point,se,ci_lo,ci_hi,truth,covered,ok,error\n";
  for (const auto& rec : result.records) {
    out << rec.rep << ',' << rec.estimator << ',';
    if (rec.ok)
      out << format_double(rec.point) << ',' << format_double(rec.se) << ','
          << format_double(rec.ci_lo) << ',' << format_double(rec.ci_hi);
    else
      out << "nan,nan,nan,nan";
    out << ',' << format_double(rec.truth) << ',' << (rec.covered ? 1 : 0) << ','
        << (rec.ok ? 1 : 0) << ',' << csv_escape(rec.error) << '\n';
  }
}

namespace {

void write_agg_row(std::ofstream& out, const AggRecord& agg) {
  out << agg.estimator << ',' << agg.reps_ok << ',' << format_double(agg.truth_mean)
      << ',' << format_double(agg.bias) << ',' << format_double(agg.rmse) << ','
      << format_double(agg.coverage) << ',' << format_double(agg.mean_se) << '\n';
}

bool selected(const std::string& name, const std::vector<std::string>& only) {
  return only.empty() ||
         std::find(only.begin(), only.end(), name) != only.end();
}

}  // namespace

void write_summary_csv(const std::string& path, const SimResult& result,
                       const std::vector<std::string>& only) {
  auto out = open_out(path);
  out << "estimator,reps,truth_mean,bias,rmse,coverage,mean_se\n";
  if (only.empty()) {
    for (const auto& agg : result.aggregates) write_agg_row(out, agg);
    return;
  }
  // Preserve the caller's row order.
  for (const auto& name : only)
    for (const auto& agg : result.aggregates)
      if (agg.estimator == name) write_agg_row(out, agg);
}

void write_sweep_csv(const std::string& path, const std::string& param_name,
                     const std::vector<std::pair<double, SimResult>>& runs,
                     const std::vector<std::string>& only) {
  auto out = open_out(path);
  out << param_name << ",estimator,reps,truth_mean,bias,rmse,coverage,mean_se\n";
  for (const auto& [value, result] : runs)
    for (const auto& agg : result.aggregates) {
      if (!selected(agg.estimator, only)) continue;
      out << format_double(value) << ',';
      write_agg_row(out, agg);
    }
}

void write_estimates_json(const std::string& path,
                          const std::vector<EstimatorOutcome>& outcomes,
                          const EstimateRunMeta& meta) {
  nlohmann::json root;
  root["alpha"] = meta.alpha;
  root["kernel"] = kernel_name(meta.kernel);
  root["bandwidth"] = meta.bandwidth;
  root["L"] = meta.L;
  root["K"] = meta.K;
  root["seed"] = meta.seed;
  root["n"] = meta.n;
  root["assumption3_violations"] = meta.assumption3_violations;

  nlohmann::json estimates = nlohmann::json::array();
  for (const auto& out : outcomes) {
    nlohmann::json entry;
    entry["estimator"] = out.name;
    if (out.report) {
      const EstimateReport& rep = *out.report;
      entry["ok"] = true;
      entry["estimand"] = rep.estimand == Estimand::ADTT ? "ADTT" : "AITT";
      entry["method"] = rep.method == Method::IPW   ? "IPW"
                        : rep.method == Method::DR ? "DR"
                                                   : "OLS";
      entry["point"] = rep.point;
      entry["n"] = rep.n;
      entry["n_used"] = int(rep.unit_ids.size());
      if (rep.variance) {
        entry["se"] = rep.variance->se;
        entry["v_hat"] = rep.variance->v_hat;
        entry["ci"] = {rep.variance->ci.first, rep.variance->ci.second};
        entry["variance_floored"] = rep.variance->floored;
      }
      nlohmann::json diag;
      diag["trimmed_pi"] = rep.diagnostics.nuisance.trimmed_pi;
      diag["trimmed_e"] = rep.diagnostics.nuisance.trimmed_e;
      diag["trimmed_e_pair"] = rep.diagnostics.nuisance.trimmed_e_pair;
      diag["pi_converged"] = rep.diagnostics.nuisance.pi_converged;
      diag["e_converged"] = rep.diagnostics.nuisance.e_converged;
      diag["e_pair_converged"] = rep.diagnostics.nuisance.e_pair_converged;
      diag["excluded_units"] = rep.diagnostics.excluded_units;
      diag["assumption3_violations"] = rep.diagnostics.assumption3_violations;
      diag["merged_strata"] = rep.diagnostics.merged_strata;
      diag["dropped_exposure_column"] = rep.diagnostics.dropped_exposure_column;
      entry["diagnostics"] = std::move(diag);
    } else {
      entry["ok"] = false;
      entry["error"] = out.error;
    }
    estimates.push_back(std::move(entry));
  }
  root["estimates"] = std::move(estimates);

  auto out = open_out(path);
  out << root.dump(2) << '\n';
}

}  // namespace netdid
