#include "netdid/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace netdid {

namespace {

constexpr double kProbClip = 1e-12;

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
double log1pexp(double t) {
  if (t > 0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double penalized_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& beta, double ridge) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    ll += y[i] * eta[i] - log1pexp(eta[i]);
  return ll - 0.5 * ridge * beta.squaredNorm();
}

}  // namespace

Eigen::MatrixXd cholesky(const Eigen::MatrixXd& matrix, double jitter) {
  if (matrix.rows() != matrix.cols())
    throw InvalidInput("cholesky: matrix must be square");
  if (jitter < 0) throw InvalidInput("cholesky: jitter must be >= 0");
  const Eigen::Index n = matrix.rows();
  double j = jitter;
  while (true) {
    Eigen::MatrixXd shifted = matrix;
    if (j > 0) shifted.diagonal().array() += j;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd L = llt.matrixL();
      if (L.allFinite()) return L;
    }
    if (j >= 1e-4)
      throw NumericalError("cholesky: factorization failed at max jitter 1e-4");
    j = (j == 0.0) ? 1e-10 : j * 10.0;
    j = std::min(j, 1e-4);
    (void)n;
  }
}

Eigen::VectorXd sample_mvn(const Eigen::MatrixXd& chol, Rng& rng) {
  if (chol.rows() != chol.cols()) throw InvalidInput("sample_mvn: factor must be square");
  Eigen::VectorXd draws(chol.rows());
  for (Eigen::Index i = 0; i < draws.size(); ++i) draws[i] = rng.normal();
  return chol.triangularView<Eigen::Lower>() * draws;
}

FitResult fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       double ridge, double tol, int max_iter) {
  if (X.rows() != y.size())
    throw InvalidInput("fit_logistic: rows(X) != len(y)");
  if (X.rows() == 0) throw InvalidInput("fit_logistic: empty design");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 0.0 && y[i] != 1.0)
      throw InvalidInput("fit_logistic: response must be binary");

  const Eigen::Index p = X.cols();
  FitResult fit;
  fit.coefficients = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd beta = fit.coefficients;
  double ll = penalized_loglik(X, y, beta, ridge);

  for (int it = 1; it <= max_iter; ++it) {
    fit.iterations = it;
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd prob(eta.size()), w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob[i] = sigmoid(eta[i]);
      w[i] = prob[i] * (1.0 - prob[i]);
    }
    const Eigen::VectorXd grad = X.transpose() * (y - prob) - ridge * beta;
    fit.final_gradient_norm = grad.norm();
    if (fit.final_gradient_norm <= tol) {
      fit.converged = true;
      fit.coefficients = beta;
      return fit;
    }

    Eigen::MatrixXd hess = X.transpose() * w.asDiagonal() * X;
    hess.diagonal().array() += ridge;
    // Escalate the Hessian ridge until the Newton step is usable.
    Eigen::VectorXd step;
    double extra = 0.0;
    while (true) {
      Eigen::MatrixXd h = hess;
      if (extra > 0) h.diagonal().array() += extra;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      if (ldlt.info() == Eigen::Success) {
        step = ldlt.solve(grad);
        if (step.allFinite()) break;
      }
      extra = (extra == 0.0) ? 1e-8 : extra * 10.0;
      if (extra > 1e-2)
        throw NumericalError("fit_logistic: singular Hessian after ridge escalation");
    }

    // Halve the step until the penalized objective stops decreasing.
    double t = 1.0;
    while (t > 1e-10) {
      const Eigen::VectorXd trial = beta + t * step;
      const double ll_trial = penalized_loglik(X, y, trial, ridge);
      if (ll_trial >= ll - 1e-12) {
        beta = trial;
        ll = ll_trial;
        break;
      }
      t *= 0.5;
    }
  }

  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd prob(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) prob[i] = sigmoid(eta[i]);
  fit.final_gradient_norm = (X.transpose() * (y - prob) - ridge * beta).norm();
  fit.converged = fit.final_gradient_norm <= tol;
  fit.coefficients = beta;
  return fit;
}

Eigen::VectorXd predict_proba(const FitResult& fit, const Eigen::MatrixXd& X) {
  if (X.cols() != fit.coefficients.size())
    throw InvalidInput("predict_proba: design width != coefficient count");
  const Eigen::VectorXd eta = X * fit.coefficients;
  Eigen::VectorXd prob(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    prob[i] = std::clamp(sigmoid(eta[i]), kProbClip, 1.0 - kProbClip);
  return prob;
}

FitResult fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw InvalidInput("fit_ols: rows(X) != len(y)");
  if (X.rows() == 0) throw InvalidInput("fit_ols: empty design");
  const Eigen::MatrixXd xtx = X.transpose() * X;
  const Eigen::VectorXd xty = X.transpose() * y;

  auto solve_ok = [&](const Eigen::MatrixXd& a, Eigen::VectorXd& out) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success) return false;
    out = ldlt.solve(xty);
    if (!out.allFinite()) return false;
    // Accept only if the normal equations are actually satisfied.
    const double resid = (a * out - xty).norm();
    const double scale = xty.norm() + a.norm() * out.norm() + 1.0;
    return resid <= 1e-8 * scale;
  };

  FitResult fit;
  Eigen::VectorXd beta;
  if (!solve_ok(xtx, beta)) {
    Eigen::MatrixXd ridged = xtx;
    ridged.diagonal().array() += 1e-10;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(ridged);
    beta = ldlt.solve(xty);
    if (!beta.allFinite())
      throw NumericalError("fit_ols: normal equations unsolvable even with ridge");
  }
  fit.coefficients = beta;
  fit.converged = true;
  fit.iterations = 1;
  fit.final_gradient_norm = (X.transpose() * (y - X * beta)).norm();
  return fit;
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InvalidInput("inverse_normal_cdf: p must lie in (0, 1)");
  // Acklam's rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement against the exact CDF.
  const double err = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = err * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

}  // namespace netdid
