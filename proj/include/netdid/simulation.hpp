// Monte Carlo harness: runs replications of the data-generating process on
// independent RNG streams across a worker pool, applies the requested
// estimators with HAC intervals, and aggregates bias / RMSE / coverage.
// Results are slotted by replication index, so output is identical for any
// thread count.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netdid/benchmarks.hpp"
#include "netdid/dgp.hpp"
#include "netdid/estimators.hpp"
#include "netdid/variance.hpp"

namespace netdid {

// Canonical estimator names accepted by the harness and the CLI.
const std::vector<std::string>& all_estimator_names();
const std::vector<std::string>& proposed_estimator_names();

struct RunOptions {
  std::vector<std::string> estimators;  // empty -> all
  HacConfig hac;
  double alpha = 0.05;
  int replications = 100;
  int threads = 1;
  EstimationConfig estimation;
};

// One estimator applied to one panel; `report` is absent when it failed.
struct EstimatorOutcome {
  std::string name;
  std::optional<EstimateReport> report;
  std::string error;
};

// Runs every requested estimator on the panel and attaches HAC variance.
// Nuisances are fitted once and shared by the four proposed estimators.
// Failures are captured per estimator, not thrown. `exposure_seed` feeds the
// MO exposure reassignment.
std::vector<EstimatorOutcome> run_estimators(const PanelData& panel,
                                             const std::vector<int>& s_count,
                                             const std::vector<std::string>& names,
                                             const HacConfig& hac, double alpha,
                                             const EstimationConfig& est_cfg,
                                             std::uint64_t exposure_seed);

struct RepRecord {
  int rep = 0;
  std::string estimator;
  double point = 0.0, se = 0.0, ci_lo = 0.0, ci_hi = 0.0, truth = 0.0;
  bool covered = false;
  bool ok = false;
  std::string error;
};

struct AggRecord {
  std::string estimator;
  int reps_ok = 0;
  double truth_mean = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;
  double mean_se = 0.0;
};

struct SimResult {
  std::vector<RepRecord> records;     // ordered by (rep, estimator order)
  std::vector<AggRecord> aggregates;  // estimator order
};

// Per replication r the RNG streams are for_stream(cfg.seed, 4r + k) with
// k = 0 panel draws, 1 neighborhood sampling, 2 exposure reassignment.
SimResult run_simulation(const SimConfig& cfg, const RunOptions& opt);

}  // namespace netdid
