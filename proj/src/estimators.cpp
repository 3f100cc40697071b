#include "satett/estimators.hpp"

#include "satett/error.hpp"
#include "satett/logistic.hpp"
#include "satett/riesz.hpp"

#include <algorithm>
#include <cmath>

namespace satett::estimators {

namespace {

void check_lengths(const data::TrialDataset& data, const VectorXd& m1, const VectorXd& m0, const VectorXd& w1,
                   const VectorXd& w0) {
  const auto n = static_cast<Eigen::Index>(data.n());
  if (m1.size() != n || m0.size() != n || w1.size() != n || w0.size() != n)
    throw DomainError("nuisance vectors must have one entry per unit");
}

}  // namespace

AugmentedResult augmented_estimate(const data::TrialDataset& data, const data::SubgroupTarget& target,
                                   const VectorXd& m1, const VectorXd& m0, const VectorXd& w1, const VectorXd& w0) {
  check_lengths(data, m1, m0, w1, w0);
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto& y = data.y();
  const auto& a = data.a();
  const auto& s = data.s();
  const auto& v = data.v();

  const std::size_t n_target = data::subgroup_masks(data, target).trial_subgroup.size();
  if (n_target == 0) throw InsufficientDataError("no trial units with V = " + std::to_string(target.v));

  AugmentedResult out;
  out.alpha_hat = static_cast<double>(n_target) / static_cast<double>(n);
  VectorXd terms = VectorXd::Zero(n);
  double max_weight = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (v[i] != target.v) continue;
    double t = 0.0;
    if (a[i] == 1) {
      t += w1[i] * (y[i] - m1[i]);
      max_weight = std::max(max_weight, std::abs(w1[i]));
    } else {
      t -= w0[i] * (y[i] - m0[i]);
      max_weight = std::max(max_weight, std::abs(w0[i]));
    }
    if (s[i] == 1) t += m1[i] - m0[i];
    terms[i] = t;
  }
  out.max_weight = max_weight;
  out.estimate = terms.sum() / (out.alpha_hat * static_cast<double>(n));
  if (!std::isfinite(out.estimate)) throw DomainError("non-finite estimate");

  out.eif.values = terms;
  for (Eigen::Index i = 0; i < n; ++i)
    if (v[i] == target.v && s[i] == 1) out.eif.values[i] -= out.estimate;
  out.eif.values /= out.alpha_hat;
  return out;
}

EstimateReport make_report(double estimate, double se, double alpha_hat, double max_weight,
                           const std::string& method_id) {
  EstimateReport r;
  r.estimate = estimate;
  r.se = se;
  const auto w = inference::wald_summary(estimate, se);
  r.ci_low = w.ci_low;
  r.ci_high = w.ci_high;
  r.p_value = w.p_value;
  r.alpha_hat = alpha_hat;
  r.max_weight = max_weight;
  r.method_id = method_id;
  return r;
}

EstimateReport report_from_eif(const AugmentedResult& result, const std::string& method_id) {
  return make_report(result.estimate, inference::se_from_eif(result.eif), result.alpha_hat, result.max_weight,
                     method_id);
}

EstimateReport estimate_naive(const data::TrialDataset& data, const data::SubgroupTarget& target) {
  data::subgroup_masks(data, target);  // absent code is a lookup error
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  std::size_t n_target = 0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(data.n()); ++i) {
    if (data.v()[i] != target.v || data.s()[i] != 1) continue;
    ++n_target;
    const int arm = data.a()[i];
    sum[arm] += data.y()[i];
    ++count[arm];
  }
  if (count[0] == 0 || count[1] == 0)
    throw InsufficientDataError("naive estimator needs both arms in the trial subgroup V = " +
                                std::to_string(target.v));
  const double mean[2] = {sum[0] / static_cast<double>(count[0]), sum[1] / static_cast<double>(count[1])};
  double ss[2] = {0.0, 0.0};
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(data.n()); ++i) {
    if (data.v()[i] != target.v || data.s()[i] != 1) continue;
    const int arm = data.a()[i];
    ss[arm] += (data.y()[i] - mean[arm]) * (data.y()[i] - mean[arm]);
  }
  // an arm with a single unit contributes no variance estimate
  double var = 0.0;
  for (int arm : {0, 1})
    if (count[arm] > 1)
      var += ss[arm] / static_cast<double>(count[arm] - 1) / static_cast<double>(count[arm]);
  const double alpha = static_cast<double>(n_target) / static_cast<double>(data.n());
  return make_report(mean[1] - mean[0], std::sqrt(var), alpha, 1.0, "naive");
}

EstimateReport estimate_cov_adj(const data::TrialDataset& data, const data::SubgroupTarget& target,
                                const NuisanceFits& fits) {
  const auto n = static_cast<Eigen::Index>(data.n());
  if (fits.pi.size() != n) throw DomainError("pi must have one entry per unit");
  const VectorXd pi = learners::clip_probabilities(fits.pi);
  VectorXd w1(n), w0(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = data.s()[i] == 1 ? 1.0 : 0.0;
    w1[i] = s / pi[i];
    w0[i] = s / (1.0 - pi[i]);
  }
  return report_from_eif(augmented_estimate(data, target, fits.m1, fits.m0, w1, w0), "cov-adj");
}

EstimateReport estimate_cov_adj(const data::TrialDataset& data, const data::SubgroupTarget& target,
                                const LearnerSettings& settings, const FeatureViews& views) {
  return estimate_cov_adj(data, target, fit_glm_nuisances(data, settings, views, false));
}

EstimateReport estimate_dr(const data::TrialDataset& data, const data::SubgroupTarget& target,
                           const NuisanceFits& fits, const std::string& method_id) {
  const auto n = static_cast<Eigen::Index>(data.n());
  if (fits.pi.size() != n || fits.eta.size() != n) throw DomainError("pi and eta must have one entry per unit");
  VectorXd w1(n), w0(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pi = learners::clip_probability(fits.pi[i]);
    const double eta = std::clamp(fits.eta[i], learners::kProbabilityClip, 1.0);
    w1[i] = eta / pi;
    w0[i] = eta / (1.0 - pi);
  }
  return report_from_eif(augmented_estimate(data, target, fits.m1, fits.m0, w1, w0), method_id);
}

EstimateReport estimate_covbal(const data::TrialDataset& data, const data::SubgroupTarget& target,
                               const BalanceWeights& weights, const NuisanceFits& fits) {
  if (weights.gamma.size() != static_cast<Eigen::Index>(data.n()))
    throw DomainError("balance weights must have one entry per unit");
  auto report = report_from_eif(augmented_estimate(data, target, fits.m1, fits.m0, weights.gamma, weights.gamma),
                                "covbal");
  report.converged = weights.converged;
  return report;
}

EstimateReport estimate_autodml(const data::TrialDataset& data, const data::SubgroupTarget& target,
                                const RieszFit& riesz, const NuisanceFits& fits) {
  if (riesz.gamma_star.size() != static_cast<Eigen::Index>(data.n()))
    throw DomainError("representer must have one entry per unit");
  const VectorXd neg = -riesz.gamma_star;
  return report_from_eif(augmented_estimate(data, target, fits.m1, fits.m0, riesz.gamma_star, neg), "riesz");
}

}  // namespace satett::estimators
