#include "doctest.h"

#include "discrete_fixture.hpp"
#include "satett/cdml.hpp"
#include "satett/linear.hpp"

#include <cmath>

using namespace satett;
using namespace satett::estimators;

namespace {

CdmlRawPredictions raw_from(const NuisanceFits& f) { return {f.m1, f.m0, f.pi, f.eta}; }

}  // namespace

TEST_CASE("calibration is a fixed point on cell-frequency predictions") {
  const auto d = fixture::discrete_data(31, 900);
  const auto f = fixture::empirical_fits(d);
  const auto raw = raw_from(f);
  const auto cal = calibrate_cdml(d, raw);
  CHECK((cal.pi - f.pi).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cal.one_minus_pi - (VectorXd::Ones(900) - f.pi)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cal.eta - f.eta).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cal.m1 - f.m1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cal.m0 - f.m0).cwiseAbs().maxCoeff() < 1e-12);
  for (int v : {0, 1}) {
    const auto cdml = cdml_from_raw(d, {v, ""}, raw);
    const auto dr = estimate_dr(d, {v, ""}, f);
    CHECK(std::abs(cdml.estimate - dr.estimate) < 1e-10);
  }
}

TEST_CASE("calibrated probabilities are clipped and monotone in the raw score") {
  const auto d = fixture::discrete_data(32, 400);
  auto f = fixture::empirical_fits(d);
  // reversed pi forces pooling to a constant
  f.pi = VectorXd::Ones(400) - f.pi;
  const auto cal = calibrate_cdml(d, raw_from(f));
  CHECK(cal.pi.minCoeff() >= 1e-6);
  CHECK(cal.pi.maxCoeff() <= 1 - 1e-6);
  for (Eigen::Index i = 0; i < 400; ++i)
    for (Eigen::Index j = 0; j < 400; j += 37)
      if (f.pi[i] < f.pi[j]) CHECK(cal.pi[i] <= cal.pi[j] + 1e-15);
}

TEST_CASE("zero calibrated residuals leave the plug-in term") {
  const int n = 8;
  Eigen::VectorXd y(n);
  y << 2, 2, 1, 1, 2, 1, 2, 1;
  Eigen::VectorXi a(n), s(n), v(n);
  a << 1, 1, 0, 0, 1, 0, 1, 0;
  s << 1, 1, 1, 1, 0, 0, 1, 1;
  v << 1, 1, 1, 1, 1, 1, 1, 1;
  Eigen::MatrixXd x(n, 1);
  x << 0, 1, 2, 3, 4, 5, 6, 7;
  const data::TrialDataset d(y, a, s, v, x);
  CdmlRawPredictions raw{VectorXd::Constant(n, 2.0), VectorXd::Constant(n, 1.0), VectorXd::LinSpaced(n, 0.2, 0.8),
                         VectorXd::LinSpaced(n, 0.5, 0.9)};
  CHECK(cdml_from_raw(d, {1, ""}, raw).estimate == doctest::Approx(1.0).epsilon(1e-14));

  SUBCASE("every resample gives the same estimate so the bootstrap se is zero") {
    CHECK(bootstrap_cdml_se(d, {1, ""}, raw, {50, 3}) < 1e-12);
  }
}

TEST_CASE("bootstrap is deterministic and never refits learners") {
  const auto d = fixture::discrete_data(33, 300);
  LearnerSettings settings;
  settings.forest.n_trees = 25;
  const auto raw = fit_cdml_raw(d, settings, {}, 5);
  const auto before = learners::fit_counters();
  const double se1 = bootstrap_cdml_se(d, {1, ""}, raw, {200, 77});
  const auto after = learners::fit_counters();
  CHECK(after.forest == before.forest);
  CHECK(after.logistic == before.logistic);
  CHECK(after.ols == before.ols);
  CHECK(after.gp == before.gp);
  CHECK(se1 > 0.0);
  CHECK(bootstrap_cdml_se(d, {1, ""}, raw, {200, 77}) == se1);
  CHECK(bootstrap_cdml_se(d, {1, ""}, raw, {200, 78}) != se1);
  CHECK_THROWS(bootstrap_cdml_se(d, {1, ""}, raw, {1, 77}));
}

TEST_CASE("full pipeline returns a finite Wald report") {
  const auto d = fixture::discrete_data(34, 400);
  LearnerSettings settings;
  settings.forest.n_trees = 25;
  const auto r = estimate_cdml(d, {1, ""}, settings, {}, 9, {50, 1});
  CHECK(r.method_id == "cdml");
  CHECK(std::isfinite(r.estimate));
  CHECK(r.se > 0.0);
  CHECK(r.ci_low < r.estimate);
  CHECK(r.ci_high > r.estimate);
}

TEST_CASE("bootstrap se tracks the sampling spread under positivity violations") {
  const int runs = 100;
  std::vector<double> estimates, ses;
  LearnerSettings settings;
  settings.forest.n_trees = 50;
  for (int r = 0; r < runs; ++r) {
    const auto seed = simulation::replication_seed(404, r);
    const auto g = simulation::gen_scenario2_ppv(seed);
    const auto rep = estimate_cdml(g.dataset, {1, ""}, settings, {}, seed, {100, seed});
    estimates.push_back(rep.estimate);
    ses.push_back(rep.se);
  }
  double mean = 0, mean_se = 0;
  for (int r = 0; r < runs; ++r) {
    mean += estimates[r] / runs;
    mean_se += ses[r] / runs;
  }
  double ss = 0;
  for (double e : estimates) ss += (e - mean) * (e - mean);
  const double sd = std::sqrt(ss / (runs - 1));
  INFO("mean bootstrap se=", mean_se, " replication sd=", sd);
  CHECK(std::abs(mean_se - sd) <= 0.5 * sd);
}
