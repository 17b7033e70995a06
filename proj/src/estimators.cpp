#include "netdid/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace netdid {

namespace {

// Clamp probabilities into the trim bounds, counting how many moved.
int trim_probs(Eigen::VectorXd& p, const TrimBounds& tb) {
  int trimmed = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double clamped = std::clamp(p[i], tb.lo, tb.hi);
    if (clamped != p[i]) ++trimmed;
    p[i] = clamped;
  }
  return trimmed;
}

// Pair-level outcome design [1, D_i, D_j, z_i, z_j, D_{N_j}^{-i}]; the first
// slot after the intercept is D_i so predictions can toggle it.
Eigen::MatrixXd pair_outcome_design(const PanelData& data, const PairIndex& pairs,
                                    bool use_z) {
  const int p = int(data.z.cols());
  const int tail = data.index.L - 1;
  const int width = 1 + 2 + (use_z ? 2 * p : 0) + tail;
  Eigen::MatrixXd X(pairs.count(), width);
  for (int k = 0; k < pairs.count(); ++k) {
    const int i = pairs.src[std::size_t(k)];
    const int j = pairs.dst[std::size_t(k)];
    int c = 0;
    X(k, c++) = 1.0;
    X(k, c++) = data.d[i];
    X(k, c++) = data.d[j];
    if (use_z) {
      for (int q = 0; q < p; ++q) X(k, c++) = data.z(i, q);
      for (int q = 0; q < p; ++q) X(k, c++) = data.z(j, q);
    }
    int filled = 0;
    for (int other : data.index.neighbors[std::size_t(j)]) {
      if (other == i) continue;
      if (filled == tail) break;
      X(k, c + filled) = data.d[other];
      ++filled;
    }
    for (; filled < tail; ++filled) X(k, c + filled) = 0.0;
  }
  return X;
}

// Pair propensity design [1, z_i, z_j, D_j, D_{N_j}^{-i}] with response D_i.
Eigen::MatrixXd pair_propensity_design(const PanelData& data, const PairIndex& pairs,
                                       bool use_z) {
  const int p = int(data.z.cols());
  const int tail = data.index.L - 1;
  const int width = 1 + (use_z ? 2 * p : 0) + 1 + tail;
  Eigen::MatrixXd X(pairs.count(), width);
  for (int k = 0; k < pairs.count(); ++k) {
    const int i = pairs.src[std::size_t(k)];
    const int j = pairs.dst[std::size_t(k)];
    int c = 0;
    X(k, c++) = 1.0;
    if (use_z) {
      for (int q = 0; q < p; ++q) X(k, c++) = data.z(i, q);
      for (int q = 0; q < p; ++q) X(k, c++) = data.z(j, q);
    }
    X(k, c++) = data.d[j];
    int filled = 0;
    for (int other : data.index.neighbors[std::size_t(j)]) {
      if (other == i) continue;
      if (filled == tail) break;
      X(k, c + filled) = data.d[other];
      ++filled;
    }
    for (; filled < tail; ++filled) X(k, c + filled) = 0.0;
  }
  return X;
}

EstimateReport make_report(std::string name, Estimand estimand, Method method,
                           const PanelData& data, const NuisanceSet& nuis,
                           Eigen::VectorXd influence, std::vector<int> unit_ids) {
  EstimateReport report;
  report.estimator = std::move(name);
  report.estimand = estimand;
  report.method = method;
  report.influence = std::move(influence);
  report.unit_ids = std::move(unit_ids);
  report.n = data.n();
  report.point = report.influence.mean();
  report.diagnostics.nuisance = nuis.diagnostics;
  report.diagnostics.excluded_units = data.n() - int(report.unit_ids.size());
  report.diagnostics.assumption3_violations = data.index.assumption3_violations;
  return report;
}

std::vector<int> all_units(int n) {
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ids[std::size_t(i)] = i;
  return ids;
}

// Units owning at least one (i, j) pair, i.e. units with a neighbor.
std::vector<int> pair_owners(const PairIndex& pairs, int n) {
  std::vector<int> ids;
  for (int i = 0; i < n; ++i)
    if (pairs.offset[std::size_t(i) + 1] > pairs.offset[std::size_t(i)])
      ids.push_back(i);
  return ids;
}

}  // namespace

Eigen::MatrixXd build_adtt_features(const PanelData& data) {
  const int n = data.n();
  const int p = int(data.z.cols());
  const int L = data.index.L;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 1 + p + L);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int q = 0; q < p; ++q) X(i, 1 + q) = data.z(i, q);
    for (int k = 0; k < L; ++k)
      X(i, 1 + p + k) = data.index.treatment_vector[std::size_t(i)][std::size_t(k)];
  }
  return X;
}

Eigen::RowVectorXd build_aitt_features(const PanelData& data, int i, int j) {
  if (i < 0 || i >= data.n() || j < 0 || j >= data.n())
    throw InvalidInput("build_aitt_features: unit id out of range");
  const auto& nbrs = data.index.neighbors[std::size_t(i)];
  if (std::find(nbrs.begin(), nbrs.end(), j) == nbrs.end())
    throw InvalidInput("build_aitt_features: j is not a neighbor of i");
  const int p = int(data.z.cols());
  const int tail = data.index.L - 1;
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(1 + 2 * p + 1 + tail);
  int c = 0;
  row[c++] = 1.0;
  for (int q = 0; q < p; ++q) row[c++] = data.z(i, q);
  for (int q = 0; q < p; ++q) row[c++] = data.z(j, q);
  row[c++] = data.d[j];
  int filled = 0;
  for (int other : data.index.neighbors[std::size_t(j)]) {
    if (other == i) continue;
    if (filled == tail) break;
    row[c + filled] = data.d[other];
    ++filled;
  }
  return row;
}

PairIndex build_pair_index(const PanelData& data) {
  PairIndex pairs;
  const int n = data.n();
  pairs.offset.assign(std::size_t(n) + 1, 0);
  for (int i = 0; i < n; ++i) {
    pairs.offset[std::size_t(i)] = pairs.count();
    for (int j : data.index.neighbors[std::size_t(i)]) {
      pairs.src.push_back(i);
      pairs.dst.push_back(j);
    }
  }
  pairs.offset[std::size_t(n)] = pairs.count();
  return pairs;
}

NuisanceSet fit_nuisances(const PanelData& data, const EstimationConfig& cfg) {
  data.validate();
  const int n = data.n();
  const double treated = data.d.sum();
  if (treated == 0.0 || treated == double(n))
    throw EstimationError("fit_nuisances: no overlap (all units share one treatment arm)");

  NuisanceSet nuis;
  nuis.trim_bounds = cfg.trim;
  const Eigen::VectorXd dy = data.delta_y();
  const int p = int(data.z.cols());

  // pi: logistic of D on [1, z].
  Eigen::MatrixXd x_pi(n, 1 + (cfg.propensity_use_z ? p : 0));
  x_pi.col(0).setOnes();
  if (cfg.propensity_use_z) x_pi.rightCols(p) = data.z;
  const FitResult fit_pi =
      fit_logistic(x_pi, data.d, cfg.ridge, cfg.tol, cfg.max_iter);
  nuis.pi_hat = predict_proba(fit_pi, x_pi);
  nuis.diagnostics.pi_converged = fit_pi.converged;
  nuis.diagnostics.trimmed_pi = trim_probs(nuis.pi_hat, cfg.trim);

  // e: logistic of D on [1, z, D_{N_i}].
  Eigen::MatrixXd x_e = build_adtt_features(data);
  if (!cfg.propensity_use_z) {
    // Drop the z block, keep intercept and neighborhood treatments.
    Eigen::MatrixXd reduced(n, 1 + data.index.L);
    reduced.col(0) = x_e.col(0);
    reduced.rightCols(data.index.L) = x_e.rightCols(data.index.L);
    x_e = reduced;
  }
  const FitResult fit_e = fit_logistic(x_e, data.d, cfg.ridge, cfg.tol, cfg.max_iter);
  nuis.e_hat = predict_proba(fit_e, x_e);
  nuis.diagnostics.e_converged = fit_e.converged;
  nuis.diagnostics.trimmed_e = trim_probs(nuis.e_hat, cfg.trim);

  // Outcome trend: OLS of dY on [1, D, z, D_{N_i}], predicted at D = 1 / 0.
  {
    const int width = 2 + (cfg.outcome_use_z ? p : 0) + data.index.L;
    Eigen::MatrixXd x_o(n, width);
    x_o.col(0).setOnes();
    x_o.col(1) = data.d;
    int c = 2;
    if (cfg.outcome_use_z) {
      x_o.middleCols(c, p) = data.z;
      c += p;
    }
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < data.index.L; ++k)
        x_o(i, c + k) = data.index.treatment_vector[std::size_t(i)][std::size_t(k)];
    const FitResult fit_o = fit_ols(x_o, dy);
    Eigen::MatrixXd x1 = x_o, x0 = x_o;
    x1.col(1).setOnes();
    x0.col(1).setZero();
    nuis.mu1 = x1 * fit_o.coefficients;
    nuis.mu0 = x0 * fit_o.coefficients;
  }

  // Pairwise nuisances for the AITT path.
  nuis.pairs = build_pair_index(data);
  if (nuis.pairs.count() > 0) {
    const Eigen::MatrixXd x_ep =
        pair_propensity_design(data, nuis.pairs, cfg.propensity_use_z);
    Eigen::VectorXd d_src(nuis.pairs.count());
    Eigen::VectorXd dy_dst(nuis.pairs.count());
    for (int k = 0; k < nuis.pairs.count(); ++k) {
      d_src[k] = data.d[nuis.pairs.src[std::size_t(k)]];
      dy_dst[k] = dy[nuis.pairs.dst[std::size_t(k)]];
    }
    const double src_treated = d_src.sum();
    if (src_treated == 0.0 || src_treated == double(nuis.pairs.count()))
      throw EstimationError(
          "fit_nuisances: no overlap among units with neighbors");
    const FitResult fit_ep =
        fit_logistic(x_ep, d_src, cfg.ridge, cfg.tol, cfg.max_iter);
    nuis.e_pair_hat = predict_proba(fit_ep, x_ep);
    nuis.diagnostics.e_pair_converged = fit_ep.converged;
    nuis.diagnostics.trimmed_e_pair = trim_probs(nuis.e_pair_hat, cfg.trim);

    Eigen::MatrixXd x_op = pair_outcome_design(data, nuis.pairs, cfg.outcome_use_z);
    const FitResult fit_op = fit_ols(x_op, dy_dst);
    Eigen::MatrixXd x1 = x_op, x0 = x_op;
    x1.col(1).setOnes();
    x0.col(1).setZero();
    nuis.mu1_pair = x1 * fit_op.coefficients;
    nuis.mu0_pair = x0 * fit_op.coefficients;
  }
  return nuis;
}

EstimateReport ipw_adtt(const PanelData& data, const NuisanceSet& nuis) {
  const int n = data.n();
  const Eigen::VectorXd dy = data.delta_y();
  Eigen::VectorXd phi(n);
  for (int i = 0; i < n; ++i)
    phi[i] = (data.d[i] - nuis.e_hat[i]) * dy[i] /
             (nuis.pi_hat[i] * (1.0 - nuis.e_hat[i]));
  return make_report("ipw_adtt", Estimand::ADTT, Method::IPW, data, nuis,
                     std::move(phi), all_units(n));
}

EstimateReport dr_adtt(const PanelData& data, const NuisanceSet& nuis) {
  const int n = data.n();
  const Eigen::VectorXd dy = data.delta_y();
  Eigen::VectorXd phi(n);
  for (int i = 0; i < n; ++i) {
    const double pi = nuis.pi_hat[i];
    const double e = nuis.e_hat[i];
    phi[i] = data.d[i] / pi * (dy[i] - nuis.mu1[i]) -
             (1.0 - data.d[i]) * e / (pi * (1.0 - e)) * (dy[i] - nuis.mu0[i]) +
             e / pi * (nuis.mu1[i] - nuis.mu0[i]);
  }
  return make_report("dr_adtt", Estimand::ADTT, Method::DR, data, nuis,
                     std::move(phi), all_units(n));
}

EstimateReport ipw_aitt(const PanelData& data, const NuisanceSet& nuis) {
  const int n = data.n();
  const Eigen::VectorXd dy = data.delta_y();
  const PairIndex& pairs = nuis.pairs;
  const std::vector<int> owners = pair_owners(pairs, n);
  if (owners.empty())
    throw EstimationError("ipw_aitt: every unit is isolated");
  Eigen::VectorXd phi(Eigen::Index(owners.size()));
  for (std::size_t k = 0; k < owners.size(); ++k) {
    const int i = owners[k];
    double acc = 0.0;
    for (int t = pairs.offset[std::size_t(i)]; t < pairs.offset[std::size_t(i) + 1]; ++t) {
      const int j = pairs.dst[std::size_t(t)];
      const double ep = nuis.e_pair_hat[t];
      acc += (data.d[i] - ep) * dy[j] / (nuis.pi_hat[i] * (1.0 - ep));
    }
    phi[Eigen::Index(k)] =
        acc / double(pairs.offset[std::size_t(i) + 1] - pairs.offset[std::size_t(i)]);
  }
  return make_report("ipw_aitt", Estimand::AITT, Method::IPW, data, nuis,
                     std::move(phi), owners);
}

EstimateReport dr_aitt(const PanelData& data, const NuisanceSet& nuis) {
  const int n = data.n();
  const Eigen::VectorXd dy = data.delta_y();
  const PairIndex& pairs = nuis.pairs;
  const std::vector<int> owners = pair_owners(pairs, n);
  if (owners.empty())
    throw EstimationError("dr_aitt: every unit is isolated");
  Eigen::VectorXd phi(Eigen::Index(owners.size()));
  for (std::size_t k = 0; k < owners.size(); ++k) {
    const int i = owners[k];
    const double pi = nuis.pi_hat[i];
    double acc = 0.0;
    for (int t = pairs.offset[std::size_t(i)]; t < pairs.offset[std::size_t(i) + 1]; ++t) {
      const int j = pairs.dst[std::size_t(t)];
      const double ep = nuis.e_pair_hat[t];
      acc += data.d[i] / pi * (dy[j] - nuis.mu1_pair[t]) -
             (1.0 - data.d[i]) * ep / (pi * (1.0 - ep)) * (dy[j] - nuis.mu0_pair[t]) +
             ep / pi * (nuis.mu1_pair[t] - nuis.mu0_pair[t]);
    }
    phi[Eigen::Index(k)] =
        acc / double(pairs.offset[std::size_t(i) + 1] - pairs.offset[std::size_t(i)]);
  }
  return make_report("dr_aitt", Estimand::AITT, Method::DR, data, nuis,
                     std::move(phi), owners);
}

}  // namespace netdid
