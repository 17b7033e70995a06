#include "netdid/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace netdid {

namespace {

void require_overlap(const PanelData& data, const char* who) {
  const double treated = data.d.sum();
  if (treated == 0.0 || treated == double(data.n()))
    throw EstimationError(std::string(who) + ": no overlap");
}

int trim_count(Eigen::VectorXd& p, const TrimBounds& tb) {
  int trimmed = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double c = std::clamp(p[i], tb.lo, tb.hi);
    if (c != p[i]) ++trimmed;
    p[i] = c;
  }
  return trimmed;
}

// OLS influence for one coefficient: beta_k + n * [(X'X)^{-1} x_i r_i]_k.
// Its mean is beta_k exactly because X'r = 0 at the solution.
Eigen::VectorXd ols_coef_influence(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& beta, int coef) {
  const int n = int(X.rows());
  const Eigen::VectorXd resid = y - X * beta;
  const Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));
  Eigen::VectorXd infl(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd contrib = xtx_inv * (X.row(i).transpose() * resid[i]);
    infl[i] = beta[coef] + double(n) * contrib[coef];
  }
  return infl;
}

std::vector<int> all_units(int n) {
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ids[std::size_t(i)] = i;
  return ids;
}

EstimateReport basic_report(std::string name, Method method, const PanelData& data,
                            Eigen::VectorXd influence) {
  EstimateReport report;
  report.estimator = std::move(name);
  report.estimand = Estimand::ADTT;
  report.method = method;
  report.influence = std::move(influence);
  report.unit_ids = all_units(data.n());
  report.n = data.n();
  report.point = report.influence.mean();
  return report;
}

}  // namespace

ExposureMapping build_exposure(ExposureKind kind, const std::vector<int>& s_count,
                               std::uint64_t seed, double flip_rate) {
  for (int s : s_count)
    if (s < 0) throw InvalidInput("build_exposure: S must be nonnegative");
  const int n = int(s_count.size());
  ExposureMapping mapping;
  mapping.kind = kind;
  mapping.mo_flip_rate = flip_rate;
  mapping.rng_seed = seed;
  mapping.levels.resize(std::size_t(n));
  switch (kind) {
    case ExposureKind::FM:
      for (int i = 0; i < n; ++i)
        mapping.levels[std::size_t(i)] = s_count[std::size_t(i)] > 1 ? 1 : 0;
      return mapping;
    case ExposureKind::Oracle:
    case ExposureKind::MO:
      for (int i = 0; i < n; ++i)
        mapping.levels[std::size_t(i)] = std::min(s_count[std::size_t(i)], 3);
      break;
    case ExposureKind::Custom:
      throw InvalidInput("build_exposure: custom mappings are caller-supplied");
  }
  if (kind == ExposureKind::MO && flip_rate > 0.0) {
    if (flip_rate > 1.0) throw InvalidInput("build_exposure: flip rate > 1");
    Rng rng(seed);
    const int flips = int(std::lround(flip_rate * n));
    const std::vector<int> picked =
        rng.sample_without_replacement(all_units(n), flips);
    for (int u : picked) {
      // New level drawn uniformly from the other three.
      const int cur = mapping.levels[std::size_t(u)];
      int draw = rng.uniform_int(3);
      if (draw >= cur) ++draw;
      mapping.levels[std::size_t(u)] = draw;
    }
  }
  return mapping;
}

EstimateReport xu_estimator(const PanelData& data, const ExposureMapping& mapping,
                            Method method, const EstimationConfig& cfg) {
  data.validate();
  require_overlap(data, "xu_estimator");
  const int n = data.n();
  if (int(mapping.levels.size()) != n)
    throw InvalidInput("xu_estimator: mapping length != n");
  if (method == Method::OLS)
    throw InvalidInput("xu_estimator: method must be IPW or DR");

  // Merge degenerate strata (no treated or no control member) into the
  // nearest surviving level until all remaining strata have both arms.
  std::vector<int> levels = mapping.levels;
  bool merged = false;
  while (true) {
    std::set<int> present(levels.begin(), levels.end());
    if (present.size() <= 1) break;
    int degenerate = 0;
    bool found = false;
    for (int lv : present) {
      int treated = 0, total = 0;
      for (int i = 0; i < n; ++i)
        if (levels[std::size_t(i)] == lv) {
          ++total;
          treated += int(data.d[i]);
        }
      if (treated == 0 || treated == total) {
        degenerate = lv;
        found = true;
        break;
      }
    }
    if (!found) break;
    int nearest = 0;
    int best = std::numeric_limits<int>::max();
    for (int lv : present) {
      if (lv == degenerate) continue;
      const int gap = std::abs(lv - degenerate);
      if (gap < best || (gap == best && lv < nearest)) {
        best = gap;
        nearest = lv;
      }
    }
    for (auto& lv : levels)
      if (lv == degenerate) lv = nearest;
    merged = true;
  }

  std::vector<int> distinct(levels.begin(), levels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const int extra = int(distinct.size()) - 1;  // dummies, first level is reference

  const int p = int(data.z.cols());
  const Eigen::VectorXd dy = data.delta_y();
  const double pbar = data.d.mean();

  Eigen::MatrixXd x_q(n, 1 + p + extra);
  x_q.col(0).setOnes();
  x_q.middleCols(1, p) = data.z;
  for (int k = 0; k < extra; ++k)
    for (int i = 0; i < n; ++i)
      x_q(i, 1 + p + k) =
          levels[std::size_t(i)] == distinct[std::size_t(k) + 1] ? 1.0 : 0.0;
  const FitResult fit_q = fit_logistic(x_q, data.d, cfg.ridge, cfg.tol, cfg.max_iter);
  Eigen::VectorXd q = predict_proba(fit_q, x_q);
  const int trimmed = trim_count(q, cfg.trim);

  Eigen::VectorXd phi(n);
  if (method == Method::IPW) {
    for (int i = 0; i < n; ++i)
      phi[i] = (data.d[i] - q[i]) * dy[i] / (pbar * (1.0 - q[i]));
  } else {
    Eigen::MatrixXd x_o(n, 2 + p + extra);
    x_o.col(0).setOnes();
    x_o.col(1) = data.d;
    x_o.middleCols(2, p) = data.z;
    x_o.rightCols(extra) = x_q.rightCols(extra);
    const FitResult fit_o = fit_ols(x_o, dy);
    Eigen::MatrixXd x1 = x_o, x0 = x_o;
    x1.col(1).setOnes();
    x0.col(1).setZero();
    const Eigen::VectorXd mu1 = x1 * fit_o.coefficients;
    const Eigen::VectorXd mu0 = x0 * fit_o.coefficients;
    for (int i = 0; i < n; ++i)
      phi[i] = data.d[i] / pbar * (dy[i] - mu1[i]) -
               (1.0 - data.d[i]) * q[i] / (pbar * (1.0 - q[i])) * (dy[i] - mu0[i]) +
               q[i] / pbar * (mu1[i] - mu0[i]);
  }

  std::string name = "xu_";
  switch (mapping.kind) {
    case ExposureKind::Oracle: name += "oracle"; break;
    case ExposureKind::MO: name += "mo"; break;
    case ExposureKind::FM: name += "fm"; break;
    case ExposureKind::Custom: name += "custom"; break;
  }
  name += method == Method::IPW ? "_ipw" : "_dr";
  EstimateReport report = basic_report(std::move(name), method, data, std::move(phi));
  report.diagnostics.merged_strata = merged;
  report.diagnostics.nuisance.trimmed_e = trimmed;
  report.diagnostics.nuisance.e_converged = fit_q.converged;
  return report;
}

EstimateReport canonical_ipw_did(const PanelData& data, const EstimationConfig& cfg) {
  data.validate();
  require_overlap(data, "canonical_ipw_did");
  const int n = data.n();
  const int p = int(data.z.cols());
  const Eigen::VectorXd dy = data.delta_y();
  const double pbar = data.d.mean();

  Eigen::MatrixXd x(n, 1 + p);
  x.col(0).setOnes();
  x.rightCols(p) = data.z;
  const FitResult fit = fit_logistic(x, data.d, cfg.ridge, cfg.tol, cfg.max_iter);
  Eigen::VectorXd prob = predict_proba(fit, x);
  const int trimmed = trim_count(prob, cfg.trim);

  Eigen::VectorXd phi(n);
  for (int i = 0; i < n; ++i)
    phi[i] = (data.d[i] - prob[i]) * dy[i] / (pbar * (1.0 - prob[i]));
  EstimateReport report = basic_report("canonical_ipw", Method::IPW, data, std::move(phi));
  report.diagnostics.nuisance.trimmed_pi = trimmed;
  report.diagnostics.nuisance.pi_converged = fit.converged;
  return report;
}

EstimateReport canonical_twfe(const PanelData& data) {
  data.validate();
  const int n = data.n();
  Eigen::MatrixXd x(n, 2);
  x.col(0).setOnes();
  x.col(1) = data.d;
  const Eigen::VectorXd dy = data.delta_y();
  const FitResult fit = fit_ols(x, dy);
  Eigen::VectorXd infl = ols_coef_influence(x, dy, fit.coefficients, 1);
  EstimateReport report = basic_report("canonical_twfe", Method::OLS, data, std::move(infl));
  report.point = fit.coefficients[1];
  return report;
}

EstimateReport dr_did_benchmark(const PanelData& data, const EstimationConfig& cfg) {
  data.validate();
  require_overlap(data, "dr_did_benchmark");
  const int n = data.n();
  const int p = int(data.z.cols());
  const Eigen::VectorXd dy = data.delta_y();
  const double pbar = data.d.mean();

  Eigen::MatrixXd x(n, 1 + p);
  x.col(0).setOnes();
  x.rightCols(p) = data.z;
  const FitResult fit_p = fit_logistic(x, data.d, cfg.ridge, cfg.tol, cfg.max_iter);
  Eigen::VectorXd prob = predict_proba(fit_p, x);
  const int trimmed = trim_count(prob, cfg.trim);

  Eigen::MatrixXd x_o(n, 2 + p);
  x_o.col(0).setOnes();
  x_o.col(1) = data.d;
  x_o.rightCols(p) = data.z;
  const FitResult fit_o = fit_ols(x_o, dy);
  Eigen::MatrixXd x1 = x_o, x0 = x_o;
  x1.col(1).setOnes();
  x0.col(1).setZero();
  const Eigen::VectorXd mu1 = x1 * fit_o.coefficients;
  const Eigen::VectorXd mu0 = x0 * fit_o.coefficients;

  Eigen::VectorXd phi(n);
  for (int i = 0; i < n; ++i)
    phi[i] = data.d[i] / pbar * (dy[i] - mu1[i]) -
             (1.0 - data.d[i]) * prob[i] / (pbar * (1.0 - prob[i])) * (dy[i] - mu0[i]) +
             prob[i] / pbar * (mu1[i] - mu0[i]);
  EstimateReport report = basic_report("dr_did", Method::DR, data, std::move(phi));
  report.diagnostics.nuisance.trimmed_pi = trimmed;
  report.diagnostics.nuisance.pi_converged = fit_p.converged;
  return report;
}

EstimateReport modified_twfe(const PanelData& data, const std::vector<int>& s_count) {
  data.validate();
  const int n = data.n();
  if (int(s_count.size()) != n)
    throw InvalidInput("modified_twfe: s_count length != n");
  Eigen::VectorXd exposed(n);
  for (int i = 0; i < n; ++i) exposed[i] = s_count[std::size_t(i)] >= 1 ? 1.0 : 0.0;

  // Drop the exposure column when it cannot add rank: constant, or identical
  // to the treatment column (up to sign of the residual from [1, D]).
  bool drop = false;
  const double var = (exposed.array() - exposed.mean()).matrix().squaredNorm();
  if (var <= 1e-12) {
    drop = true;
  } else {
    Eigen::MatrixXd base(n, 2);
    base.col(0).setOnes();
    base.col(1) = data.d;
    const FitResult fit_base = fit_ols(base, exposed);
    const double ssr = (exposed - base * fit_base.coefficients).squaredNorm();
    if (ssr <= 1e-10 * double(n)) drop = true;
  }

  const Eigen::VectorXd dy = data.delta_y();
  Eigen::MatrixXd x(n, drop ? 2 : 3);
  x.col(0).setOnes();
  x.col(1) = data.d;
  if (!drop) x.col(2) = exposed;
  const FitResult fit = fit_ols(x, dy);
  Eigen::VectorXd infl = ols_coef_influence(x, dy, fit.coefficients, 1);
  EstimateReport report = basic_report("modified_twfe", Method::OLS, data, std::move(infl));
  report.point = fit.coefficients[1];
  report.diagnostics.dropped_exposure_column = drop;
  return report;
}

}  // namespace netdid
