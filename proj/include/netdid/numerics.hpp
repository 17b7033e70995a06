// Numerical kernels shared by the estimators: Cholesky factorization with
// jitter escalation, multivariate-normal sampling, ridge-penalized logistic
// regression by Newton's method, OLS via normal equations, and the standard
// normal quantile used for Wald intervals. Dense linear algebra is delegated
// to Eigen; these wrappers pin down the failure and fallback behavior.
#pragma once

#include <Eigen/Dense>

#include "netdid/errors.hpp"
#include "netdid/rng.hpp"

namespace netdid {

struct FitResult {
  Eigen::VectorXd coefficients;  // intercept first
  bool converged = false;
  int iterations = 0;
  double final_gradient_norm = 0.0;
};

// Lower-triangular L with L L^T = matrix + jitter*I. On factorization failure
// the jitter escalates by 10x (starting at 1e-10 if zero) up to 1e-4 before
// throwing NumericalError.
Eigen::MatrixXd cholesky(const Eigen::MatrixXd& matrix, double jitter = 0.0);

// chol * (vector of iid standard normals); deterministic given the rng state.
Eigen::VectorXd sample_mvn(const Eigen::MatrixXd& chol, Rng& rng);

// Ridge-penalized logistic regression: maximizes
//   sum_i [y_i x_i'b - log(1 + exp(x_i'b))] - (ridge/2) |b|^2
// by damped Newton steps; converged means the penalized gradient norm <= tol.
FitResult fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       double ridge = 1e-6, double tol = 1e-8, int max_iter = 100);

// sigmoid(X b), clipped into [1e-12, 1 - 1e-12].
Eigen::VectorXd predict_proba(const FitResult& fit, const Eigen::MatrixXd& X);

// Least squares via normal equations; falls back to ridge 1e-10 on rank
// deficiency, so it always returns coefficients.
FitResult fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Quantile of the standard normal distribution (Acklam's rational
// approximation polished with one Halley step through std::erfc).
double inverse_normal_cdf(double p);

}  // namespace netdid
