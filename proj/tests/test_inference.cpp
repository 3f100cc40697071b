#include "doctest.h"

#include "satett/error.hpp"
#include "satett/estimators.hpp"
#include "satett/inference.hpp"
#include "satett/rng.hpp"

#include <cmath>

using namespace satett;
using namespace satett::inference;

TEST_CASE("se from EIF contributions") {
  EifContributions c;
  c.values = Eigen::VectorXd::Constant(7, 3.2);
  CHECK(se_from_eif(c) == 0.0);
  c.values = Eigen::VectorXd(2);
  c.values << -1.0, 1.0;
  CHECK(se_from_eif(c) == doctest::Approx(1.0).epsilon(1e-15));
  c.values = Eigen::VectorXd(1);
  c.values << 2.0;
  CHECK_THROWS_AS(se_from_eif(c), InsufficientDataError);
}

TEST_CASE("wald summary examples") {
  const auto w = wald_summary(1.96, 1.0);
  CHECK(std::abs(w.p_value - 0.05) <= 5e-4);
  const auto z = wald_summary(0.0, 0.7);
  CHECK(z.p_value == 1.0);
  CHECK(z.ci_low == doctest::Approx(-z.ci_high));
  const auto cs = wald_summary(1.15, 0.81);
  CHECK(std::abs(cs.ci_low - (-0.44)) < 0.01);
  CHECK(std::abs(cs.ci_high - 2.74) < 0.01);
  CHECK(wald_summary(0.3, 0.0).p_value == 0.0);
  CHECK(wald_summary(0.0, 0.0).p_value == 1.0);
  CHECK_THROWS(wald_summary(1.0, 1.0, 0.9));
}

TEST_CASE("normal cdf reference values") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(kZ975) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145705).epsilon(1e-12));
}

TEST_CASE("coverage indicator matches the distance rule and p is monotone") {
  Philox rng(17);
  for (int i = 0; i < 2000; ++i) {
    const double est = 3.0 * rng.normal(), se = std::abs(rng.normal()) + 1e-3, truth = rng.normal();
    const auto w = wald_summary(est, se);
    const bool inside = w.ci_low <= truth && truth <= w.ci_high;
    const bool near = std::abs(est - truth) <= kZ975 * se;
    // equality only differs by rounding at the boundary
    if (std::abs(std::abs(est - truth) - kZ975 * se) > 1e-12) CHECK(inside == near);
  }
  double prev = 2.0;
  for (double t = 0.0; t < 8.0; t += 0.05) {
    const double p = wald_summary(t, 1.0).p_value;
    CHECK(p <= prev);
    prev = p;
  }
}

TEST_CASE("naive EIF reduces to the pooled-moment SE formula") {
  Philox rng(5);
  const int n = 60;
  Eigen::VectorXd y(n);
  Eigen::VectorXi a(n), s(n), v(n);
  Eigen::MatrixXd x(n, 1);
  for (int i = 0; i < n; ++i) {
    a[i] = i % 3 == 0;
    s[i] = 1;
    v[i] = i % 4 != 0;
    x(i, 0) = rng.normal();
    y[i] = rng.normal() + 2.0 * a[i];
  }
  const data::TrialDataset d(y, a, s, v, x);
  const data::SubgroupTarget target{1, ""};
  double s1 = 0, s0 = 0, n1 = 0, n0 = 0;
  for (int i = 0; i < n; ++i) {
    if (v[i] != 1) continue;
    (a[i] ? s1 : s0) += y[i];
    (a[i] ? n1 : n0) += 1;
  }
  const double mu1 = s1 / n1, mu0 = s0 / n0;
  double ss1 = 0, ss0 = 0;
  for (int i = 0; i < n; ++i) {
    if (v[i] != 1) continue;
    (a[i] ? ss1 : ss0) += (y[i] - (a[i] ? mu1 : mu0)) * (y[i] - (a[i] ? mu1 : mu0));
  }
  const double pi = n1 / (n1 + n0);
  const auto r = estimators::augmented_estimate(d, target, Eigen::VectorXd::Constant(n, mu1),
                                                Eigen::VectorXd::Constant(n, mu0), Eigen::VectorXd::Constant(n, 1 / pi),
                                                Eigen::VectorXd::Constant(n, 1 / (1 - pi)));
  CHECK(std::abs(r.estimate - (mu1 - mu0)) < 1e-12);
  CHECK(std::abs(r.eif.values.mean()) < 1e-12);
  const double closed = std::sqrt(n / (n - 1.0) * (ss1 / (n1 * n1) + ss0 / (n0 * n0)));
  CHECK(std::abs(se_from_eif(r.eif) - closed) < 1e-10);
  const double two_sample = std::sqrt(ss1 / (n1 - 1) / n1 + ss0 / (n0 - 1) / n0);
  CHECK(std::abs(estimators::estimate_naive(d, target).se - two_sample) < 1e-12);
}
