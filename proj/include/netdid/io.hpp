// File formats: panel/points/edges CSV readers for user data, panel export,
// Monte Carlo results/summary tables, sweep tables, and the estimates.json
// report of a single estimation run. All numeric output uses the shortest
// representation that round-trips, so files are byte-stable across runs.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "netdid/dgp.hpp"
#include "netdid/simulation.hpp"

namespace netdid {

std::string format_double(double v);

// Exported simulation panel: header id,x,y,z,d,y1,y2,s.
void write_panel_csv(const std::string& path, const SimulatedPanel& sim);

// User panel: required columns id, d, y1, y2 and at least one covariate
// column named z / z1 / z2 / ...; other columns are ignored. Rows are
// reordered by id, which must be a permutation of 0..n-1.
struct LoadedPanel {
  Eigen::MatrixXd z;
  Eigen::VectorXd d, y1, y2;
  int n() const { return int(d.size()); }
};
LoadedPanel read_panel_csv(const std::string& path);

// Coordinates: header id,x,y with id a permutation of 0..n-1.
std::vector<std::array<double, 2>> read_points_csv(const std::string& path);

// Edge list: header src,dst with zero-based ids; bounds are checked by the
// network builder against the panel size.
std::vector<std::pair<int, int>> read_edges_csv(const std::string& path);

// Per-replication records and per-estimator aggregates.
void write_records_csv(const std::string& path, const SimResult& result);
void write_summary_csv(const std::string& path, const SimResult& result,
                       const std::vector<std::string>& only = {});

// One row per (parameter value, estimator) pair from a sweep.
void write_sweep_csv(const std::string& path, const std::string& param_name,
                     const std::vector<std::pair<double, SimResult>>& runs,
                     const std::vector<std::string>& only = {});

struct EstimateRunMeta {
  double alpha = 0.05;
  KernelKind kernel = KernelKind::Bartlett;
  double bandwidth = 2.0;
  int L = 10;
  int K = 1;
  std::uint64_t seed = 0;
  int n = 0;
  int assumption3_violations = 0;
};

void write_estimates_json(const std::string& path,
                          const std::vector<EstimatorOutcome>& outcomes,
                          const EstimateRunMeta& meta);

}  // namespace netdid
