// Numerical kernels: Cholesky with jitter escalation, MVN sampling, logistic
// regression against closed forms and finite differences, OLS normal-equation
// properties, and the normal quantile.
#include <cmath>
#include <vector>

#include <doctest.h>

#include "netdid/numerics.hpp"
#include "netdid/rng.hpp"

using netdid::cholesky;
using netdid::fit_logistic;
using netdid::fit_ols;
using netdid::FitResult;
using netdid::inverse_normal_cdf;
using netdid::predict_proba;
using netdid::Rng;
using netdid::sample_mvn;

namespace {

Eigen::MatrixXd decay_cov(int n, double base) {
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = std::pow(base, std::abs(i - j));
  return s;
}

// Penalized log-likelihood the logistic fit maximizes.
double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta, double ridge) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    ll += y[i] * eta[i] - std::log1p(std::exp(eta[i]));
  return ll - 0.5 * ridge * beta.squaredNorm();
}

}  // namespace

TEST_CASE("cholesky closed forms") {
  SUBCASE("identity") {
    const Eigen::MatrixXd l = cholesky(Eigen::MatrixXd::Identity(3, 3));
    CHECK((l - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("2x2 hand factorization") {
    Eigen::MatrixXd m(2, 2);
    m << 4, 2, 2, 3;
    const Eigen::MatrixXd l = cholesky(m);
    CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(l(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(l(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("reconstruction of a decay covariance") {
    const Eigen::MatrixXd s = decay_cov(4, 0.5);
    const Eigen::MatrixXd l = cholesky(s);
    CHECK((l * l.transpose() - s).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("cholesky jitter and failure policy") {
  // Singular PSD matrix: plain LLT fails, jitter escalation recovers it.
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
  const Eigen::MatrixXd l = cholesky(ones);
  CHECK((l * l.transpose() - ones).cwiseAbs().maxCoeff() < 1e-3);

  // Indefinite matrix stays unfactorizable within the jitter budget.
  Eigen::MatrixXd indef(2, 2);
  indef << 1, 2, 2, 1;
  CHECK_THROWS_AS(cholesky(indef), netdid::NumericalError);
  CHECK_THROWS_AS(cholesky(Eigen::MatrixXd::Ones(2, 3)), netdid::InvalidInput);
  CHECK_THROWS_AS(cholesky(ones, -1.0), netdid::InvalidInput);
}

TEST_CASE("sample_mvn") {
  SUBCASE("identity factor returns the raw normal draws") {
    Rng a(31), b(31);
    const Eigen::VectorXd x = sample_mvn(Eigen::MatrixXd::Identity(4, 4), a);
    for (int i = 0; i < 4; ++i) CHECK(x[i] == b.normal());
  }
  SUBCASE("scaling the factor scales the sample") {
    Rng a(31), b(31);
    const Eigen::VectorXd x = sample_mvn(Eigen::MatrixXd::Identity(4, 4), a);
    const Eigen::VectorXd y = sample_mvn(2.0 * Eigen::MatrixXd::Identity(4, 4), b);
    CHECK((y - 2.0 * x).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("bit-reproducible for a fixed seed") {
    const Eigen::MatrixXd l = cholesky(decay_cov(3, 0.5));
    Rng a(55), b(55);
    CHECK((sample_mvn(l, a) - sample_mvn(l, b)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("empirical covariance approaches the target") {
    const Eigen::MatrixXd target = decay_cov(3, 0.5);
    const Eigen::MatrixXd l = cholesky(target);
    Rng rng(99);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, 3);
    const int draws = 50000;
    for (int k = 0; k < draws; ++k) {
      const Eigen::VectorXd x = sample_mvn(l, rng);
      acc += x * x.transpose();
    }
    acc /= double(draws);
    CHECK((acc - target).cwiseAbs().maxCoeff() < 0.05);
  }
}

TEST_CASE("logistic intercept-only matches the closed form") {
  const int n = 100;
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(n, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < 25; ++i) y[i] = 1.0;
  const FitResult fit = fit_logistic(x, y);
  CHECK(fit.converged);
  CHECK(fit.coefficients[0] ==
        doctest::Approx(std::log(0.25 / 0.75)).epsilon(1e-6));
}

TEST_CASE("logistic symmetry pins the intercept at zero") {
  // y flips under x -> -x, so the penalized optimum has intercept 0.
  Eigen::MatrixXd x(6, 2);
  Eigen::VectorXd y(6);
  x << 1, 2, 1, -2, 1, 1, 1, -1, 1, 0.5, 1, -0.5;
  y << 1, 0, 1, 0, 0, 1;
  const FitResult fit = fit_logistic(x, y);
  CHECK(fit.converged);
  CHECK(std::abs(fit.coefficients[0]) < 1e-6);
}

TEST_CASE("logistic separable data converges under ridge") {
  Eigen::MatrixXd x(4, 2);
  Eigen::VectorXd y(4);
  x << 1, -2, 1, -1, 1, 1, 1, 2;
  y << 0, 0, 1, 1;
  const FitResult fit = fit_logistic(x, y, 1e-6);
  CHECK(fit.converged);
  CHECK(fit.final_gradient_norm <= 1e-8);
  CHECK(std::isfinite(fit.coefficients[0]));
  CHECK(std::isfinite(fit.coefficients[1]));
}

TEST_CASE("logistic gradient vanishes at the reported optimum") {
  Rng rng(17);
  const int n = 200;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.normal();
    x(i, 2) = rng.normal();
    const double p = 1.0 / (1.0 + std::exp(-(0.3 + 0.8 * x(i, 1) - 0.5 * x(i, 2))));
    y[i] = rng.bernoulli(p) ? 1.0 : 0.0;
  }
  const double ridge = 1e-6;
  const FitResult fit = fit_logistic(x, y, ridge);
  CHECK(fit.converged);

  // Analytic gradient recomputed here.
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i)
    p[i] = 1.0 / (1.0 + std::exp(-x.row(i).dot(fit.coefficients)));
  const Eigen::VectorXd grad =
      x.transpose() * (y - p) - ridge * fit.coefficients;
  CHECK(grad.norm() <= 1e-8);

  // Central finite differences of the penalized objective.
  const double h = 1e-5;
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd up = fit.coefficients, dn = fit.coefficients;
    up[k] += h;
    dn[k] -= h;
    const double fd = (logistic_objective(x, y, up, ridge) -
                       logistic_objective(x, y, dn, ridge)) /
                      (2.0 * h);
    CHECK(std::abs(fd - grad[k]) < 1e-5);
  }
}

TEST_CASE("logistic input validation") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 1);
  Eigen::VectorXd bad(3);
  bad << 0, 1, 2;
  CHECK_THROWS_AS(fit_logistic(x, bad), netdid::InvalidInput);
  Eigen::VectorXd y2(2);
  y2 << 0, 1;
  CHECK_THROWS_AS(fit_logistic(x, y2), netdid::InvalidInput);
}

TEST_CASE("predict_proba") {
  FitResult fit;
  fit.coefficients = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd x(3, 2);
  x << 1, 5, 1, -3, 1, 0;
  CHECK((predict_proba(fit, x).array() == 0.5).all());

  FitResult inter;
  inter.coefficients = Eigen::VectorXd::Constant(1, 2.0);
  const Eigen::VectorXd p =
      predict_proba(inter, Eigen::MatrixXd::Ones(2, 1));
  CHECK(p[0] == doctest::Approx(0.8807970779778823).epsilon(1e-10));

  FitResult low;
  low.coefficients = Eigen::VectorXd::Constant(1, -100.0);
  CHECK(predict_proba(low, Eigen::MatrixXd::Ones(1, 1))[0] == 1e-12);
  FitResult high;
  high.coefficients = Eigen::VectorXd::Constant(1, 100.0);
  CHECK(predict_proba(high, Eigen::MatrixXd::Ones(1, 1))[0] == 1.0 - 1e-12);

  CHECK_THROWS_AS(predict_proba(fit, Eigen::MatrixXd::Ones(2, 3)),
                  netdid::InvalidInput);
}

TEST_CASE("OLS closed forms") {
  SUBCASE("exact linear data") {
    Eigen::MatrixXd x(4, 2);
    Eigen::VectorXd y(4);
    for (int i = 0; i < 4; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = double(i);
      y[i] = 3.0 + 2.0 * double(i);
    }
    const FitResult fit = fit_ols(x, y);
    CHECK(fit.coefficients[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(fit.coefficients[1] == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("constant response") {
    Eigen::MatrixXd x(5, 2);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 7.25);
    for (int i = 0; i < 5; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = double(i) - 2.0;
    }
    const FitResult fit = fit_ols(x, y);
    CHECK(fit.coefficients[0] == doctest::Approx(7.25).epsilon(1e-9));
    CHECK(std::abs(fit.coefficients[1]) < 1e-9);
  }
}

TEST_CASE("OLS residuals are orthogonal to the design") {
  Rng rng(23);
  const int n = 100;
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int k = 1; k < 4; ++k) x(i, k) = rng.normal();
    y[i] = 1.0 + 0.5 * x(i, 1) - x(i, 2) + rng.normal();
  }
  const FitResult fit = fit_ols(x, y);
  const Eigen::VectorXd r = y - x * fit.coefficients;
  for (int k = 0; k < 4; ++k)
    CHECK(std::abs(x.col(k).dot(r)) <= 1e-8 * x.col(k).norm() * (r.norm() + 1.0));
}

TEST_CASE("OLS rank-deficient fallback keeps predictions sane") {
  Rng rng(29);
  const int n = 50;
  Eigen::MatrixXd x(n, 3);  // third column duplicates the second
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.normal();
    x(i, 2) = x(i, 1);
    y[i] = 2.0 + 3.0 * x(i, 1);
  }
  const FitResult fit = fit_ols(x, y);
  CHECK(fit.coefficients.allFinite());
  CHECK((x * fit.coefficients - y).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("inverse normal cdf") {
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1).scale(1e-12));
  for (double p : {0.001, 0.025, 0.1, 0.31, 0.77}) {
    CHECK(inverse_normal_cdf(p) ==
          doctest::Approx(-inverse_normal_cdf(1.0 - p)).epsilon(1e-10));
    // Round-trip through the erfc-based CDF.
    const double x = inverse_normal_cdf(p);
    const double back = 0.5 * std::erfc(-x / std::sqrt(2.0));
    CHECK(back == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), netdid::InvalidInput);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), netdid::InvalidInput);
}
