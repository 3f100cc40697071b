#include "satett/cdml.hpp"

#include "satett/error.hpp"
#include "satett/forest.hpp"
#include "satett/isotonic.hpp"
#include "satett/logistic.hpp"
#include "satett/rng.hpp"

#include <cmath>

namespace satett::estimators {

namespace {

VectorXd select_rows(const VectorXd& v, const std::vector<std::size_t>& rows) {
  VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[static_cast<Eigen::Index>(rows[k])];
  return out;
}

// Calibrate `raw` against `labels` using only rows where `use` holds, then map every row.
VectorXd calibrate_on(const VectorXd& raw, const VectorXd& labels, const std::vector<bool>& use) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < raw.size(); ++i)
    if (use[static_cast<std::size_t>(i)]) rows.push_back(i);
  if (rows.empty()) return raw;
  return learners::fit_isotonic(take_rows(raw, rows), take_rows(labels, rows)).predict(raw);
}

}  // namespace

CdmlRawPredictions CdmlRawPredictions::select(const std::vector<std::size_t>& rows) const {
  return {select_rows(m1, rows), select_rows(m0, rows), select_rows(pi, rows), select_rows(eta, rows)};
}

CdmlRawPredictions fit_cdml_raw(const data::TrialDataset& data, const LearnerSettings& settings,
                                const FeatureViews& views, std::uint64_t seed) {
  const MatrixXd xo = views.outcome_design(data);
  CdmlRawPredictions raw;
  for (int arm : {1, 0}) {
    const auto rows = arm_rows(data, arm, false);
    if (rows.empty()) throw InsufficientDataError("cdml: no units in arm " + std::to_string(arm));
    const auto forest = learners::fit_forest(take_rows(xo, rows), take_rows(data.y(), rows),
                                             learners::ForestMode::regression, settings.forest,
                                             derive_seed(seed, static_cast<std::uint64_t>(arm)));
    (arm == 1 ? raw.m1 : raw.m0) = forest.predict(xo);
  }
  const auto glm = fit_glm_nuisances(data, settings, views, true);
  raw.pi = glm.pi;
  raw.eta = glm.eta;
  return raw;
}

CdmlCalibrated calibrate_cdml(const data::TrialDataset& data, const CdmlRawPredictions& raw) {
  const auto n = static_cast<Eigen::Index>(data.n());
  if (raw.m1.size() != n || raw.m0.size() != n || raw.pi.size() != n || raw.eta.size() != n)
    throw DomainError("cdml: raw predictions must have one entry per unit");
  const VectorXd a = data.a().cast<double>();
  const VectorXd s = data.s().cast<double>();
  const std::vector<bool> all(static_cast<std::size_t>(n), true);
  std::vector<bool> treated(static_cast<std::size_t>(n)), control(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    treated[static_cast<std::size_t>(i)] = data.a()[i] == 1;
    control[static_cast<std::size_t>(i)] = data.a()[i] == 0;
  }
  CdmlCalibrated cal;
  cal.pi = learners::clip_probabilities(calibrate_on(raw.pi, a, all));
  cal.one_minus_pi =
      learners::clip_probabilities(calibrate_on(VectorXd::Ones(n) - raw.pi, VectorXd::Ones(n) - a, all));
  cal.eta = learners::clip_probabilities(calibrate_on(raw.eta, s, all));
  cal.m1 = calibrate_on(raw.m1, data.y(), treated);
  cal.m0 = calibrate_on(raw.m0, data.y(), control);
  return cal;
}

AugmentedResult cdml_from_raw(const data::TrialDataset& data, const data::SubgroupTarget& target,
                              const CdmlRawPredictions& raw) {
  const auto cal = calibrate_cdml(data, raw);
  const VectorXd w1 = cal.eta.cwiseQuotient(cal.pi);
  const VectorXd w0 = cal.eta.cwiseQuotient(cal.one_minus_pi);
  return augmented_estimate(data, target, cal.m1, cal.m0, w1, w0);
}

double bootstrap_cdml_se(const data::TrialDataset& data, const data::SubgroupTarget& target,
                         const CdmlRawPredictions& raw, const inference::BootstrapConfig& cfg) {
  if (cfg.B < 2) throw ConfigError("bootstrap B must be >= 2");
  const std::size_t n = data.n();
  std::vector<double> estimates;
  estimates.reserve(static_cast<std::size_t>(cfg.B));
  const long max_draws = 10L * cfg.B;
  long draws = 0;
  std::vector<std::size_t> rows(n);
  while (static_cast<int>(estimates.size()) < cfg.B) {
    if (draws >= max_draws)
      throw InsufficientDataError("cdml bootstrap: too many resamples without both arms in the trial subgroup");
    Philox rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(draws)));
    ++draws;
    bool has[2] = {false, false};
    for (auto& r : rows) {
      r = static_cast<std::size_t>(rng.below(n));
      const auto i = static_cast<Eigen::Index>(r);
      if (data.v()[i] == target.v && data.s()[i] == 1) has[data.a()[i]] = true;
    }
    if (!has[0] || !has[1]) continue;
    const auto boot = data.select(rows);
    estimates.push_back(cdml_from_raw(boot, target, raw.select(rows)).estimate);
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= static_cast<double>(estimates.size());
  double ss = 0.0;
  for (double e : estimates) ss += (e - mean) * (e - mean);
  return std::sqrt(ss / static_cast<double>(estimates.size() - 1));
}

EstimateReport estimate_cdml(const data::TrialDataset& data, const data::SubgroupTarget& target,
                             const LearnerSettings& settings, const FeatureViews& views, std::uint64_t seed,
                             const inference::BootstrapConfig& bootstrap) {
  const auto raw = fit_cdml_raw(data, settings, views, seed);
  const auto point = cdml_from_raw(data, target, raw);
  const double se = bootstrap_cdml_se(data, target, raw, bootstrap);
  return make_report(point.estimate, se, point.alpha_hat, point.max_weight, "cdml");
}

}  // namespace satett::estimators
