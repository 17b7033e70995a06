// Synthetic data-generating process for the simulation study: units placed
// uniformly on a square, Chebyshev radius-1 adjacency, a network-correlated
// latent confounder, confounded treatment assignment, and outcomes with a
// step-wise spillover in the number of treated K-neighbors. Also computes the
// exact per-panel AITT via the additive structure of the outcome equation.
#pragma once

#include <cstdint>
#include <vector>

#include "netdid/panel.hpp"
#include "netdid/rng.hpp"

namespace netdid {

struct SimConfig {
  int n = 500;
  double area_side = 20.0;
  double adjacency_radius = 1.0;
  Metric metric = Metric::Chebyshev;
  int K = 1;   // interference range
  int L = 10;  // neighborhood feature count
  double rho0 = 0.5;  // confounder correlation decay base
  double tau = 0.8;   // direct effect
  std::vector<double> spillover_steps{0.8, 1.6, 2.4};
  double treat_z = 0.3, treat_zu = 0.8;     // treatment logit loadings
  double y1_z = 1.2, y1_zu = 0.5;           // period-1 outcome loadings
  double y2_intercept = 1.0, y2_carry = 1.0, y2_z = 0.2, y2_zu = 0.1;
  double noise_sd = 1.0;
  std::uint64_t seed = 20240502;

  void validate() const {
    if (n < 2) throw InvalidInput("SimConfig: n must be >= 2");
    if (!(rho0 >= 0.0 && rho0 < 1.0))
      throw InvalidInput("SimConfig: rho0 must lie in [0, 1)");
    if (area_side <= 0) throw InvalidInput("SimConfig: area_side must be > 0");
    if (adjacency_radius <= 0)
      throw InvalidInput("SimConfig: adjacency_radius must be > 0");
    if (K < 1 || L < 1) throw InvalidInput("SimConfig: K and L must be >= 1");
    if (noise_sd < 0) throw InvalidInput("SimConfig: noise_sd must be >= 0");
  }
};

struct SimulatedPanel {
  PanelData panel;
  std::vector<int> s_count;  // treated units within hop distance K, self excluded
  Eigen::VectorXd z_u;       // latent confounder
  SimConfig config;          // parameters the panel was generated with
  double true_adtt = 0.0;
  double true_aitt = 0.0;
};

// 0 when S = 0, otherwise steps[min(S, len(steps)) - 1]; the default steps
// encode 0.8*I(S=1) + 1.6*I(S=2) + 2.4*I(S>=3).
double spillover_f(int S, const std::vector<double>& steps);

// Draw order is frozen for reproducibility: locations, z, z_u, treatment
// uniforms, period-1 noise, period-2 noise; neighborhood sampling uses the
// separate index_rng so an exported panel can be re-indexed from its seed
// alone. The single-argument overload derives both streams from cfg.seed
// (streams 0 and 1).
SimulatedPanel generate_panel(const SimConfig& cfg, Rng& rng, Rng& index_rng);
SimulatedPanel generate_panel(const SimConfig& cfg);

// Exact AITT for the realized panel: for each treated i with a non-empty
// neighborhood, average f(S_j) - f(S_j - 1) over j in N_i within hop distance
// K (zero beyond K), then average over those treated units.
double true_aitt_oracle(const SimulatedPanel& sim);

}  // namespace netdid
