#include "netdid/dgp.hpp"

#include <cmath>

#include "netdid/numerics.hpp"

namespace netdid {

double spillover_f(int S, const std::vector<double>& steps) {
  if (S < 0) throw InvalidInput("spillover_f: S must be >= 0");
  if (S == 0 || steps.empty()) return 0.0;
  const int idx = std::min<int>(S, int(steps.size())) - 1;
  return steps[std::size_t(idx)];
}

SimulatedPanel generate_panel(const SimConfig& cfg, Rng& rng, Rng& index_rng) {
  cfg.validate();
  const int n = cfg.n;
  SimulatedPanel sim;

  std::vector<std::array<double, 2>> points(static_cast<std::size_t>(n));
  for (auto& pt : points) {
    pt[0] = rng.uniform() * cfg.area_side;
    pt[1] = rng.uniform() * cfg.area_side;
  }
  sim.panel.network =
      build_network_from_points(points, cfg.adjacency_radius, cfg.metric);
  const Network& net = sim.panel.network;

  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = rng.normal();

  // Latent confounder with covariance rho0^{hop distance} (0 when
  // disconnected, 1 on the diagonal).
  Eigen::MatrixXd sigma(n, n);
  for (int i = 0; i < n; ++i) {
    sigma(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const auto dist = net.dist(i, j);
      const double cov =
          dist == Network::kInfinite ? 0.0 : std::pow(cfg.rho0, double(dist));
      sigma(i, j) = cov;
      sigma(j, i) = cov;
    }
  }
  // rho0^hop is indefinite on graphs with cycles, so a plain Cholesky cannot
  // factor it; take the spectral square root with eigenvalues clipped away
  // from zero instead.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success)
    throw NumericalError("generate_panel: eigendecomposition failed");
  const Eigen::MatrixXd factor =
      eig.eigenvectors() *
      eig.eigenvalues().cwiseMax(1e-10).cwiseSqrt().asDiagonal();
  Eigen::VectorXd draws(n);
  for (int i = 0; i < n; ++i) draws[i] = rng.normal();
  sim.z_u = factor * draws;  // full factor: not triangular like a Cholesky

  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) {
    const double score = cfg.treat_z * z[i] + cfg.treat_zu * sim.z_u[i];
    const double prob = 1.0 / (1.0 + std::exp(-score));
    d[i] = rng.uniform() < prob ? 1.0 : 0.0;
  }

  std::vector<int> d_int(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d_int[std::size_t(i)] = int(d[i]);
  sim.s_count = count_treated_within(net, d_int, cfg.K);

  Eigen::VectorXd y1(n), y2(n);
  for (int i = 0; i < n; ++i)
    y1[i] = cfg.y1_z * z[i] + cfg.y1_zu * sim.z_u[i] + cfg.noise_sd * rng.normal();
  for (int i = 0; i < n; ++i)
    y2[i] = cfg.y2_intercept + cfg.y2_carry * y1[i] + cfg.tau * d[i] +
            spillover_f(sim.s_count[std::size_t(i)], cfg.spillover_steps) +
            cfg.y2_zu * sim.z_u[i] + cfg.y2_z * z[i] + cfg.noise_sd * rng.normal();

  sim.panel.z = z;
  sim.panel.d = d;
  sim.panel.y1 = y1;
  sim.panel.y2 = y2;
  sim.panel.index = build_neighborhood_index(net, d_int, cfg.L, cfg.K, &index_rng,
                                             /*cap_to_interference_range=*/true);
  sim.config = cfg;
  sim.true_adtt = cfg.tau;
  sim.true_aitt = true_aitt_oracle(sim);
  return sim;
}

SimulatedPanel generate_panel(const SimConfig& cfg) {
  Rng rng = Rng::for_stream(cfg.seed, 0);
  Rng index_rng = Rng::for_stream(cfg.seed, 1);
  return generate_panel(cfg, rng, index_rng);
}

double true_aitt_oracle(const SimulatedPanel& sim) {
  const PanelData& panel = sim.panel;
  const Network& net = panel.network;
  const auto& steps = sim.config.spillover_steps;
  const int K = sim.config.K;
  const int n = panel.n();
  if (int(sim.s_count.size()) != n)
    throw InvalidInput("true_aitt_oracle: s_count length != n");

  // Removing treated i's treatment lowers each in-range neighbor's count from
  // S_j to S_j - 1; because Y2 is additive in f(S), the effect on j is exactly
  // f(S_j) - f(S_j - 1), with no effect beyond the interference range.
  double total = 0.0;
  int contributing = 0;
  bool any_treated = false;
  for (int i = 0; i < n; ++i) {
    if (panel.d[i] != 1.0) continue;
    any_treated = true;
    const auto& nbrs = panel.index.neighbors[std::size_t(i)];
    if (nbrs.empty()) continue;
    double acc = 0.0;
    for (int j : nbrs) {
      const auto dist = net.dist(i, j);
      if (dist == Network::kInfinite || dist > K) continue;
      const int sj = sim.s_count[std::size_t(j)];
      if (sj < 1)
        throw InvalidInput("true_aitt_oracle: s_count inconsistent with treatments");
      acc += spillover_f(sj, steps) - spillover_f(sj - 1, steps);
    }
    total += acc / double(nbrs.size());
    ++contributing;
  }
  if (!any_treated)
    throw EstimationError("true_aitt_oracle: no treated units");
  if (contributing == 0)
    throw EstimationError("true_aitt_oracle: every treated unit is isolated");
  return total / double(contributing);
}

}  // namespace netdid
