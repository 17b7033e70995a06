#include "netdid/variance.hpp"

#include <cmath>

#include "netdid/numerics.hpp"

namespace netdid {

double kernel_weight(KernelKind kind, double u) {
  if (u < 0) throw InvalidInput("kernel_weight: u must be >= 0");
  switch (kind) {
    case KernelKind::Bartlett:
      return u < 1.0 ? 1.0 - u : 0.0;
    case KernelKind::Parzen:
      if (u <= 0.5) return 1.0 - 6.0 * u * u + 6.0 * u * u * u;
      if (u <= 1.0) {
        const double v = 1.0 - u;
        return 2.0 * v * v * v;
      }
      return 0.0;
  }
  throw InvalidInput("kernel_weight: unknown kernel");
}

VarianceReport hac_variance(const Eigen::VectorXd& influence,
                            const DistanceShell& shells, const HacConfig& cfg,
                            double alpha, double point,
                            const std::vector<int>* unit_ids) {
  const int net_n = int(shells.shells.empty() ? 0 : shells.shells[0].size());
  const int m = int(influence.size());
  if (m == 0) throw InvalidInput("hac_variance: empty influence vector");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidInput("hac_variance: alpha must lie in (0, 1)");
  if (unit_ids == nullptr) {
    if (m != net_n)
      throw InvalidInput("hac_variance: influence length != network size");
  } else if (int(unit_ids->size()) != m) {
    throw InvalidInput("hac_variance: unit_ids length != influence length");
  }

  if (!cfg.bandwidth)
    throw InvalidInput(
        "hac_variance: bandwidth unresolved; call resolve_bandwidth(K) first");
  const double bn = *cfg.bandwidth;
  if (bn < 0) throw InvalidInput("hac_variance: bandwidth must be >= 0");
  const int s_max = int(std::floor(bn));
  if (s_max > shells.s_max)
    throw InvalidInput("hac_variance: shells do not cover floor(bandwidth)");

  // Map unit id -> position in the influence vector; -1 marks excluded units.
  std::vector<int> pos(std::size_t(net_n), -1);
  if (unit_ids == nullptr) {
    for (int i = 0; i < net_n; ++i) pos[std::size_t(i)] = i;
  } else {
    for (int k = 0; k < m; ++k) {
      const int id = (*unit_ids)[std::size_t(k)];
      if (id < 0 || id >= net_n)
        throw InvalidInput("hac_variance: unit id out of range");
      pos[std::size_t(id)] = k;
    }
  }

  const double mean = influence.mean();
  VarianceReport report;
  report.alpha = alpha;
  report.s_max_used = s_max;

  double v = 0.0;
  for (int s = 0; s <= s_max; ++s) {
    double omega = 0.0;
    for (int i = 0; i < net_n; ++i) {
      const int pi = pos[std::size_t(i)];
      if (pi < 0) continue;
      const double ci = influence[pi] - mean;
      for (int j : shells.shells[std::size_t(s)][std::size_t(i)]) {
        const int pj = pos[std::size_t(j)];
        if (pj < 0) continue;
        omega += ci * (influence[pj] - mean);
      }
    }
    omega /= double(m);
    report.autocovariances[s] = omega;
    const double w = bn > 0 ? kernel_weight(cfg.kernel, double(s) / bn)
                            : (s == 0 ? 1.0 : 0.0);
    v += w * omega;
  }

  const double floor_value = report.autocovariances[0] * 1e-6;
  if (v < floor_value) {
    v = floor_value;
    report.floored = true;
  }
  report.v_hat = v;
  report.se = std::sqrt(v / double(m));
  const double z = inverse_normal_cdf(1.0 - alpha / 2.0);
  report.ci = {point - z * report.se, point + z * report.se};
  return report;
}

bool coverage_indicator(const VarianceReport& report, double truth) {
  return truth >= report.ci.first && truth <= report.ci.second;
}

}  // namespace netdid
