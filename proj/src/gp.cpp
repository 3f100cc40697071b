#include "satett/gp.hpp"

#include "satett/error.hpp"
#include "satett/linear.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace satett::learners {

namespace {

constexpr double kMaxJitter = 1e-4;

struct Standardization {
  VectorXd mean;
  VectorXd scale;
};

Standardization standardization(const MatrixXd& x) {
  Standardization st{x.colwise().mean().transpose(), VectorXd::Ones(x.cols())};
  if (x.rows() < 2) return st;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - st.mean[j]).square().sum() / static_cast<double>(x.rows() - 1);
    if (var > 0.0) st.scale[j] = std::sqrt(var);
  }
  return st;
}

MatrixXd apply_standardization(const MatrixXd& x, const VectorXd& mean, const VectorXd& scale) {
  MatrixXd z(x.rows(), x.cols() + 1);
  for (Eigen::Index j = 0; j < x.cols(); ++j) z.col(j) = (x.col(j).array() - mean[j]) / scale[j];
  z.col(x.cols()).setOnes();
  return z;
}

// Returns log-likelihood and optionally the weight vector (M^{-1} Phi' y).
double evaluate(const MatrixXd& phi, const VectorXd& y, const KernelConfig& cfg, VectorXd* weights) {
  const auto n = phi.rows();
  const auto d = phi.cols();
  constexpr double log2pi = 1.8378770664093453;
  for (double jitter = cfg.jitter;; jitter *= 10.0) {
    const double noise = cfg.sigma2 + jitter;
    if (d < n) {
      MatrixXd m = phi.transpose() * phi;
      m.diagonal().array() += noise / cfg.C;
      Eigen::LLT<MatrixXd> llt(m);
      if (llt.info() == Eigen::Success) {
        const VectorXd b = phi.transpose() * y;
        const VectorXd w = llt.solve(b);
        const double quad = (y.squaredNorm() - b.dot(w)) / noise;
        const double logdet_m = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        const double logdet = static_cast<double>(n) * std::log(noise) + logdet_m +
                              static_cast<double>(d) * std::log(cfg.C / noise);
        if (weights) *weights = w;
        return -0.5 * quad - 0.5 * logdet - 0.5 * static_cast<double>(n) * log2pi;
      }
    } else {
      MatrixXd k = cfg.C * (phi * phi.transpose());
      k.diagonal().array() += noise;
      Eigen::LLT<MatrixXd> llt(k);
      if (llt.info() == Eigen::Success) {
        const VectorXd alpha = llt.solve(y);
        const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        if (weights) *weights = cfg.C * (phi.transpose() * alpha);
        return -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * static_cast<double>(n) * log2pi;
      }
    }
    if (jitter * 10.0 > kMaxJitter * (1.0 + 1e-9)) {
      throw ConditioningError("GP kernel matrix is not positive definite even with jitter 1e-4");
    }
  }
}

}  // namespace

void KernelConfig::check() const {
  if (!(C > 0.0)) throw DomainError("kernel constant C must be positive");
  if (!(sigma2 > 0.0)) throw DomainError("kernel noise variance must be positive");
  if (d1 < 1) throw DomainError("kernel degree must be >= 1");
  if (jitter < 0.0) throw DomainError("kernel jitter must be nonnegative");
}

MatrixXd polynomial_features(const MatrixXd& z, int degree) {
  MatrixXd out = z;
  for (int k = 1; k < degree; ++k) {
    MatrixXd next(z.rows(), out.cols() * z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      for (Eigen::Index a = 0; a < out.cols(); ++a)
        for (Eigen::Index b = 0; b < z.cols(); ++b) next(i, a * z.cols() + b) = out(i, a) * z(i, b);
    out = std::move(next);
  }
  return out;
}

GpPolyModel::GpPolyModel(KernelConfig config, VectorXd mean, VectorXd scale, VectorXd weights,
                         double log_marginal_likelihood)
    : config_(config), mean_(std::move(mean)), scale_(std::move(scale)), weights_(std::move(weights)),
      lml_(log_marginal_likelihood) {}

MatrixXd GpPolyModel::standardize(const MatrixXd& features) const {
  return apply_standardization(features, mean_, scale_);
}

MatrixXd GpPolyModel::feature_map(const MatrixXd& features) const {
  return polynomial_features(standardize(features), config_.d1);
}

VectorXd GpPolyModel::predict(const MatrixXd& features) const { return feature_map(features) * weights_; }

double gp_log_marginal_likelihood(const MatrixXd& phi, const VectorXd& targets, const KernelConfig& config) {
  config.check();
  return evaluate(phi, targets, config, nullptr);
}

GpPolyModel gp_poly_condition(const MatrixXd& features, const VectorXd& targets, const KernelConfig& config) {
  config.check();
  if (features.rows() != targets.size()) throw DomainError("gp: length mismatch");
  if (targets.size() < 2) throw InsufficientDataError("gp_poly_fit needs n >= 2");
  const auto st = standardization(features);
  const MatrixXd phi = polynomial_features(apply_standardization(features, st.mean, st.scale), config.d1);
  VectorXd w;
  const double lml = evaluate(phi, targets, config, &w);
  return GpPolyModel(config, st.mean, st.scale, std::move(w), lml);
}

GpPolyModel gp_poly_fit(const MatrixXd& features, const VectorXd& targets, const KernelConfig& init) {
  init.check();
  if (features.rows() != targets.size()) throw DomainError("gp: length mismatch");
  if (targets.size() < 2) throw InsufficientDataError("gp_poly_fit needs n >= 2");
  ++fit_counters().gp;
  const auto st = standardization(features);
  const MatrixXd phi = polynomial_features(apply_standardization(features, st.mean, st.scale), init.d1);

  // Grid coordinates are in quarter decades: C = 10^(i/4), sigma2 = 10^(j/4).
  KernelConfig cfg = init;
  std::map<std::pair<int, int>, double> seen;
  auto value_at = [&](int i, int j) {
    auto [it, inserted] = seen.try_emplace({i, j}, 0.0);
    if (inserted) {
      cfg.C = std::pow(10.0, 0.25 * i);
      cfg.sigma2 = std::pow(10.0, 0.25 * j);
      it->second = evaluate(phi, targets, cfg, nullptr);
    }
    return it->second;
  };
  int bi = 0, bj = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = -8; i <= 8; i += 2) {
    for (int j = -12; j <= 4; j += 2) {
      const double value = value_at(i, j);
      if (value > best) {
        best = value;
        bi = i;
        bj = j;
      }
    }
  }
  // Half-spacing refinement: climb until no quarter-decade neighbor improves.
  for (bool moved = true; moved;) {
    moved = false;
    const int ci = bi, cj = bj;
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const double value = value_at(ci + di, cj + dj);
        if (value > best) {
          best = value;
          bi = ci + di;
          bj = cj + dj;
          moved = true;
        }
      }
    }
  }
  const double best_lc = 0.25 * bi, best_ls = 0.25 * bj;

  cfg.C = std::pow(10.0, best_lc);
  cfg.sigma2 = std::pow(10.0, best_ls);
  VectorXd w;
  const double lml = evaluate(phi, targets, cfg, &w);
  return GpPolyModel(cfg, st.mean, st.scale, std::move(w), lml);
}

}  // namespace satett::learners
