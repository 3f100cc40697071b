#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace satett::inference {

inline constexpr double kZ975 = 1.959963984540054;

struct EifContributions {
  Eigen::VectorXd values;
  std::size_t n() const { return static_cast<std::size_t>(values.size()); }
};

/// sqrt(sample variance / n).
double se_from_eif(const EifContributions& contrib);

struct WaldSummary {
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
};

/// Two-sided Wald interval and p-value. Only level 0.95 is supported.
WaldSummary wald_summary(double estimate, double se, double level = 0.95);

/// Standard normal CDF.
double normal_cdf(double x);

struct BootstrapConfig {
  int B = 500;
  std::uint64_t seed = 0;
};

}  // namespace satett::inference
