#include "satett/balance.hpp"

#include "satett/error.hpp"

#include <algorithm>
#include <cmath>

namespace satett::estimators {

Eigen::Index QuadraticForm::size() const {
  if (dense.size() > 0) return dense.rows();
  if (factor.size() > 0) return factor.rows();
  return diag.size();
}

VectorXd QuadraticForm::apply(const VectorXd& x) const {
  VectorXd out = VectorXd::Zero(x.size());
  if (dense.size() > 0) out.noalias() += dense * x;
  if (factor.size() > 0) out.noalias() += factor * (factor.transpose() * x);
  if (diag.size() > 0) out.array() += diag.array() * x.array();
  return out;
}

MatrixXd QuadraticForm::to_dense() const {
  const Eigen::Index m = size();
  MatrixXd out = MatrixXd::Zero(m, m);
  if (dense.size() > 0) out += dense;
  if (factor.size() > 0) out.noalias() += factor * factor.transpose();
  if (diag.size() > 0) out.diagonal() += diag;
  return out;
}

VectorXd QuadraticForm::solve_subset(const std::vector<Eigen::Index>& subset, const VectorXd& rhs) const {
  const auto k = static_cast<Eigen::Index>(subset.size());
  const bool diag_positive = diag.size() > 0 && std::all_of(subset.begin(), subset.end(),
                                                            [&](Eigen::Index i) { return diag[i] > 0.0; });
  if (dense.size() == 0 && factor.size() > 0 && diag_positive) {
    // Woodbury: (D + U U')^-1 = D^-1 - D^-1 U (I + U' D^-1 U)^-1 U' D^-1
    MatrixXd u(k, factor.cols());
    VectorXd dinv(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      u.row(r) = factor.row(subset[static_cast<std::size_t>(r)]);
      dinv[r] = 1.0 / diag[subset[static_cast<std::size_t>(r)]];
    }
    const MatrixXd du = dinv.asDiagonal() * u;
    MatrixXd inner = u.transpose() * du;
    inner.diagonal().array() += 1.0;
    const VectorXd base = dinv.cwiseProduct(rhs);
    return base - du * inner.ldlt().solve(u.transpose() * base);
  }
  MatrixXd sub(k, k);
  const MatrixXd full = to_dense();
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c)
      sub(r, c) = full(subset[static_cast<std::size_t>(r)], subset[static_cast<std::size_t>(c)]);
  return sub.ldlt().solve(rhs);
}

namespace {

double kkt_from_gradient(const VectorXd& x, const VectorXd& g) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x[i] > 0.0 ? std::abs(g[i]) : std::max(0.0, -g[i]);
    worst = std::max(worst, v);
  }
  return worst;
}

double largest_eigenvalue(const QuadraticForm& q, Eigen::Index m) {
  VectorXd v = VectorXd::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  // deterministic but not aligned with any eigenvector in typical cases
  for (Eigen::Index i = 0; i < m; ++i) v[i] *= 1.0 + 0.01 * static_cast<double>(i % 7);
  double lambda = 0.0;
  for (int it = 0; it < 30; ++it) {
    const VectorXd w = q.apply(v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = v.dot(w) / v.squaredNorm();
    v = w / norm;
  }
  return std::max(lambda, q.apply(v).norm());
}

}  // namespace

double kkt_residual(const QuadraticForm& q, const VectorXd& c, const VectorXd& x) {
  return kkt_from_gradient(x, q.apply(x) - c);
}

QpResult solve_nonneg_qp(const QuadraticForm& q, const VectorXd& c, double tol, int max_iter) {
  const Eigen::Index m = c.size();
  if (q.size() != m) throw DomainError("qp: dimension mismatch");
  QpResult result;
  result.x = VectorXd::Zero(m);
  if (m == 0) {
    result.converged = true;
    return result;
  }
  auto objective = [&](const VectorXd& x, const VectorXd& qx) { return x.dot(qx) - 2.0 * c.dot(x); };

  const double lmax = largest_eigenvalue(q, m);
  if (!(lmax > 0.0)) {
    // Q = 0: bounded only when c <= 0, in which case x = 0 is optimal.
    result.kkt_residual = kkt_from_gradient(result.x, -c);
    result.converged = result.kkt_residual <= tol;
    return result;
  }
  const double step = 1.0 / (1.05 * lmax);

  VectorXd x = VectorXd::Zero(m);
  VectorXd qx = VectorXd::Zero(m);
  double fx = 0.0;
  VectorXd y = x;
  double t = 1.0;

  auto try_polish = [&](const VectorXd& current) -> bool {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < m; ++i)
      if (current[i] > 0.0) support.push_back(i);
    if (support.empty()) return false;
    VectorXd rhs(static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) rhs[static_cast<Eigen::Index>(k)] = c[support[k]];
    const VectorXd z = q.solve_subset(support, rhs);
    if (!z.allFinite() || (z.array() <= 0.0).any()) return false;
    VectorXd cand = VectorXd::Zero(m);
    for (std::size_t k = 0; k < support.size(); ++k) cand[support[k]] = z[static_cast<Eigen::Index>(k)];
    const VectorXd qc = q.apply(cand);
    const double kkt = kkt_from_gradient(cand, qc - c);
    if (kkt > tol) return false;
    x = cand;
    qx = qc;
    fx = objective(x, qx);
    result.kkt_residual = kkt;
    return true;
  };

  int it = 0;
  for (; it < max_iter; ++it) {
    const VectorXd gy = q.apply(y) - c;
    // the gradient is 2(Qy - c) with Lipschitz constant 2L, so the step is gy / L
    VectorXd xn = (y - step * gy).cwiseMax(0.0);
    const VectorXd qxn = q.apply(xn);
    const double fn = objective(xn, qxn);
    // restart momentum on an increase; a plain step from x (t == 1) is always
    // taken, since near the optimum its decrease can be lost to rounding
    if (fn > fx && it > 0 && t > 1.0) {
      y = x;
      t = 1.0;
      continue;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = xn + ((t - 1.0) / tn) * (xn - x);
    x = std::move(xn);
    qx = qxn;
    fx = fn;
    t = tn;

    const double kkt = kkt_from_gradient(x, qx - c);
    result.kkt_residual = kkt;
    if (kkt <= tol) {
      result.converged = true;
      break;
    }
    if ((it + 1) % 25 == 0 && try_polish(x)) {
      result.converged = true;
      break;
    }
  }
  result.iterations = std::min(it + 1, max_iter);
  result.x = x;
  result.objective = fx;
  if (!result.converged) result.kkt_residual = kkt_from_gradient(x, qx - c);
  return result;
}

BalanceProblem build_balance_problem(const data::TrialDataset& data, const data::SubgroupTarget& target,
                                     const MatrixXd& design, const learners::GpPolyModel& gp1,
                                     const learners::GpPolyModel& gp0, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("balance penalty lambda must be > 0");
  if (design.rows() != static_cast<Eigen::Index>(data.n())) throw DomainError("balance: design row mismatch");
  const auto masks = data::subgroup_masks(data, target);
  BalanceProblem problem;
  problem.lambda = lambda;
  problem.active = masks.treated;
  problem.n_treated = masks.treated.size();
  problem.active.insert(problem.active.end(), masks.control.begin(), masks.control.end());

  const MatrixXd phi1 = gp1.feature_map(design);
  const MatrixXd phi0 = gp0.feature_map(design);
  const auto& k1 = gp1.config();
  const auto& k0 = gp0.config();

  VectorXd e = VectorXd::Zero(static_cast<Eigen::Index>(data.n()));
  for (auto i : masks.trial_subgroup) e[static_cast<Eigen::Index>(i)] = 1.0;
  const Eigen::RowVectorXd sum1 = e.transpose() * phi1;
  const Eigen::RowVectorXd sum0 = e.transpose() * phi0;

  const auto m = static_cast<Eigen::Index>(problem.active.size());
  const Eigen::Index d1 = phi1.cols();
  const Eigen::Index d0 = phi0.cols();
  problem.q.factor = MatrixXd::Zero(m, d1 + d0);
  problem.q.diag.resize(m);
  problem.penalty.resize(m);
  problem.c.resize(m);
  const double s1 = std::sqrt(k1.C);
  const double s0 = std::sqrt(k0.C);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto i = static_cast<Eigen::Index>(problem.active[static_cast<std::size_t>(r)]);
    if (static_cast<std::size_t>(r) < problem.n_treated) {
      problem.q.factor.block(r, 0, 1, d1) = s1 * phi1.row(i);
      problem.penalty[r] = lambda * k1.sigma2;
      problem.q.diag[r] = k1.jitter + problem.penalty[r];
      problem.c[r] = k1.C * sum1.dot(phi1.row(i)) + k1.jitter * e[i];
    } else {
      problem.q.factor.block(r, d1, 1, d0) = s0 * phi0.row(i);
      problem.penalty[r] = lambda * k0.sigma2;
      problem.q.diag[r] = k0.jitter + problem.penalty[r];
      problem.c[r] = k0.C * sum0.dot(phi0.row(i)) + k0.jitter * e[i];
    }
  }
  const double n_e = e.sum();
  problem.imbalance_offset = k1.C * sum1.squaredNorm() + k1.jitter * n_e + k0.C * sum0.squaredNorm() + k0.jitter * n_e;
  if (!problem.q.factor.allFinite() || !problem.c.allFinite())
    throw ConditioningError("balance: non-finite kernel entries");
  return problem;
}

double balance_imbalance(const BalanceProblem& problem, const VectorXd& x) {
  const VectorXd qx = problem.q.apply(x);
  return x.dot(qx) - x.dot(problem.penalty.cwiseProduct(x)) - 2.0 * problem.c.dot(x) + problem.imbalance_offset;
}

BalanceWeights solve_balance_weights(const BalanceProblem& problem, std::size_t n, double tol, int max_iter) {
  const auto qp = solve_nonneg_qp(problem.q, problem.c, tol, max_iter);
  BalanceWeights out;
  out.gamma = VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < problem.active.size(); ++r) {
    if (problem.active[r] >= n) throw DomainError("balance: active index out of range");
    out.gamma[static_cast<Eigen::Index>(problem.active[r])] = qp.x[static_cast<Eigen::Index>(r)];
  }
  out.objective = qp.objective;
  out.imbalance = balance_imbalance(problem, qp.x);
  out.kkt_residual = qp.kkt_residual;
  out.iterations = qp.iterations;
  out.converged = qp.converged;
  return out;
}

}  // namespace satett::estimators
