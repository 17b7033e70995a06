// Network-HAC variance for influence-function estimators: kernel-weighted
// sums of distance-shell autocovariances, Wald confidence intervals, and the
// Monte Carlo coverage indicator.
#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "netdid/graph.hpp"

namespace netdid {

enum class KernelKind { Bartlett, Parzen };

struct HacConfig {
  KernelKind kernel = KernelKind::Bartlett;
  std::optional<double> bandwidth;    // explicit b_n when set
  double bandwidth_multiplier = 2.0;  // else b_n = multiplier * K

  double resolve_bandwidth(int K) const {
    const double b = bandwidth ? *bandwidth : bandwidth_multiplier * double(K);
    if (b < 0) throw InvalidInput("HacConfig: bandwidth must be >= 0");
    return b;
  }
};

struct VarianceReport {
  double v_hat = 0.0;
  std::map<int, double> autocovariances;  // s -> Omega_hat(s)
  int s_max_used = 0;
  double se = 0.0;
  double alpha = 0.05;
  std::pair<double, double> ci{0.0, 0.0};
  bool floored = false;  // negative v_hat floored at autocovariances[0] * 1e-6
};

// Kernel weight w(u) for u >= 0. Bartlett: max(0, 1-u). Parzen:
// 1 - 6u^2 + 6u^3 on [0, 1/2], 2(1-u)^3 on (1/2, 1], 0 beyond.
double kernel_weight(KernelKind kind, double u);

// V_hat = sum_{s=0..floor(b)} w(s/b) * Omega_hat(s) with
// Omega_hat(s) = (1/m) sum_i sum_{j in shell s of i} (phi_i - mean)(phi_j - mean),
// sums running over the m included units. cfg.bandwidth must be set (resolve
// the c*K rule via resolve_bandwidth before calling). `unit_ids`, when given,
// lists the units the influence vector refers to (AITT excludes isolated
// units); otherwise influence must cover every unit of the network behind
// `shells`. CI = point +/- z_{alpha/2} * sqrt(V_hat / m).
VarianceReport hac_variance(const Eigen::VectorXd& influence,
                            const DistanceShell& shells, const HacConfig& cfg,
                            double alpha, double point,
                            const std::vector<int>* unit_ids = nullptr);

// True iff truth lies in the closed interval report.ci.
bool coverage_indicator(const VarianceReport& report, double truth);

}  // namespace netdid
