#include "satett/inference.hpp"

#include "satett/error.hpp"

#include <cmath>

namespace satett::inference {

double se_from_eif(const EifContributions& contrib) {
  const auto n = contrib.values.size();
  if (n < 2) throw InsufficientDataError("se_from_eif needs n >= 2");
  if (!contrib.values.allFinite()) throw DomainError("non-finite EIF contribution");
  const double mean = contrib.values.mean();
  const double ss = (contrib.values.array() - mean).square().sum();
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

WaldSummary wald_summary(double estimate, double se, double level) {
  if (std::abs(level - 0.95) > 1e-12) throw ConfigError("only 95% Wald intervals are supported");
  if (!(se >= 0.0)) throw DomainError("standard error must be >= 0");
  WaldSummary out;
  out.ci_low = estimate - kZ975 * se;
  out.ci_high = estimate + kZ975 * se;
  if (se == 0.0) {
    out.p_value = estimate == 0.0 ? 1.0 : 0.0;
  } else {
    // 2 (1 - Phi(|z|)) without cancellation
    out.p_value = std::erfc(std::abs(estimate / se) / std::sqrt(2.0));
  }
  return out;
}

}  // namespace satett::inference
