// IPW and doubly robust estimators of the average direct effect on the
// treated (ADTT) and the average outward-spillover effect on the treated's
// neighbors (AITT), identified by conditional parallel trends given the
// neighborhood treatment vector. Includes feature construction and the
// logistic / OLS nuisance fits the estimators plug in.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netdid/numerics.hpp"
#include "netdid/panel.hpp"
#include "netdid/variance.hpp"

namespace netdid {

enum class Estimand { ADTT, AITT };
enum class Method { IPW, DR, OLS };

struct TrimBounds {
  double lo = 0.01;
  double hi = 0.99;
};

struct EstimationConfig {
  TrimBounds trim;
  double ridge = 1e-6;
  double tol = 1e-8;
  int max_iter = 100;
  // Deliberate misspecification switches for double-robustness experiments:
  // dropping z from the propensity models or from the outcome regressions.
  bool propensity_use_z = true;
  bool outcome_use_z = true;
};

// All (i, j) pairs with j in N_i, flattened and indexed CSR-style by i.
struct PairIndex {
  std::vector<int> src;     // pair -> i
  std::vector<int> dst;     // pair -> j
  std::vector<int> offset;  // unit -> first pair of that unit; size n+1
  int count() const { return int(src.size()); }
};

struct NuisanceDiagnostics {
  int trimmed_pi = 0;
  int trimmed_e = 0;
  int trimmed_e_pair = 0;
  bool pi_converged = true;
  bool e_converged = true;
  bool e_pair_converged = true;
};

struct NuisanceSet {
  Eigen::VectorXd pi_hat;      // P(D_i = 1 | z_i)
  Eigen::VectorXd e_hat;       // P(D_i = 1 | z_i, D_{N_i})
  Eigen::VectorXd mu1, mu0;    // outcome-trend predictions at D_i = 1 / 0
  PairIndex pairs;
  Eigen::VectorXd e_pair_hat;  // per pair: P(D_i = 1 | z_i, z_j, D_j, D_{N_j}^{-i})
  Eigen::VectorXd mu1_pair, mu0_pair;
  TrimBounds trim_bounds;
  NuisanceDiagnostics diagnostics;
};

struct ReportDiagnostics {
  NuisanceDiagnostics nuisance;
  int excluded_units = 0;           // AITT: units without neighbors
  int assumption3_violations = 0;   // from the neighborhood index
  bool merged_strata = false;       // exposure-mapping benchmark
  bool dropped_exposure_column = false;  // modified TWFE collinearity
};

struct EstimateReport {
  std::string estimator;
  Estimand estimand = Estimand::ADTT;
  Method method = Method::IPW;
  double point = 0.0;
  Eigen::VectorXd influence;  // phi aligned to unit_ids
  std::vector<int> unit_ids;  // units entering the average
  int n = 0;                  // panel size
  std::optional<VarianceReport> variance;
  ReportDiagnostics diagnostics;
};

// Design matrix with rows [1, z_i, D_(1), ..., D_(L)]; padded slots are zero.
Eigen::MatrixXd build_adtt_features(const PanelData& data);

// Feature row for the pair (i, j), j in N_i:
// [1, z_i, z_j, D_j, treatments of j's other neighbors padded to L-1].
// D_i itself never appears. Throws InvalidInput when j is not in N_i.
Eigen::RowVectorXd build_aitt_features(const PanelData& data, int i, int j);

PairIndex build_pair_index(const PanelData& data);

// Fits pi, e, the pooled pair propensity e', and the unit- and pair-level
// outcome-trend regressions; probabilities are trimmed into cfg.trim.
NuisanceSet fit_nuisances(const PanelData& data, const EstimationConfig& cfg = {});

EstimateReport ipw_adtt(const PanelData& data, const NuisanceSet& nuis);
EstimateReport ipw_aitt(const PanelData& data, const NuisanceSet& nuis);
EstimateReport dr_adtt(const PanelData& data, const NuisanceSet& nuis);
EstimateReport dr_aitt(const PanelData& data, const NuisanceSet& nuis);

}  // namespace netdid
