#include "satett/riesz.hpp"

#include "satett/error.hpp"

#include <map>
#include <memory>
#include <vector>

namespace satett::estimators {

RieszBasis linear_sieve_basis() {
  RieszBasis basis;
  basis.id = "linear";
  basis.map = [](int a, const MatrixXd& x, const Eigen::VectorXi& v) {
    const Eigen::Index p = x.cols();
    const double ad = a;
    MatrixXd phi(x.rows(), 2 * p + 4);
    phi.col(0).setOnes();
    phi.middleCols(1, p) = x;
    phi.col(p + 1) = v.cast<double>();
    phi.col(p + 2).setConstant(ad);
    phi.middleCols(p + 3, p) = ad * x;
    phi.col(2 * p + 3) = ad * v.cast<double>();
    return phi;
  };
  return basis;
}

RieszBasis saturated_basis(const data::TrialDataset& data) {
  using Key = std::vector<double>;
  auto make_key = [](int a, const Eigen::RowVectorXd& x, int v) {
    Key key{static_cast<double>(a), static_cast<double>(v)};
    key.insert(key.end(), x.data(), x.data() + x.size());
    return key;
  };
  auto cells = std::make_shared<std::map<Key, Eigen::Index>>();
  const MatrixXd& x = data.xtilde();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::RowVectorXd row = x.row(i);
    const auto key = make_key(data.a()[i], row, data.v()[i]);
    if (!cells->count(key)) {
      const auto next = static_cast<Eigen::Index>(cells->size());
      cells->emplace(key, next);
    }
  }
  RieszBasis basis;
  basis.id = "saturated";
  basis.map = [cells, make_key](int a, const MatrixXd& xm, const Eigen::VectorXi& v) {
    MatrixXd phi = MatrixXd::Zero(xm.rows(), static_cast<Eigen::Index>(cells->size()));
    for (Eigen::Index i = 0; i < xm.rows(); ++i) {
      const Eigen::RowVectorXd row = xm.row(i);
      const auto it = cells->find(make_key(a, row, v[i]));
      if (it != cells->end()) phi(i, it->second) = 1.0;
    }
    return phi;
  };
  return basis;
}

RieszFit fit_riesz(const data::TrialDataset& data, const data::SubgroupTarget& target, const RieszBasis& basis,
                   double ridge) {
  if (!(ridge >= 0.0)) throw ConfigError("riesz ridge must be >= 0");
  const auto n = static_cast<Eigen::Index>(data.n());
  if (n == 0) throw EmptyInputError("riesz: empty dataset");
  const MatrixXd& x = data.xtilde();
  const MatrixXd phi1 = basis.map(1, x, data.v());
  const MatrixXd phi0 = basis.map(0, x, data.v());
  MatrixXd phi(n, phi1.cols());
  for (Eigen::Index i = 0; i < n; ++i) phi.row(i) = data.a()[i] == 1 ? phi1.row(i) : phi0.row(i);

  const double dn = static_cast<double>(n);
  const MatrixXd g = phi.transpose() * phi / dn;
  VectorXd h = VectorXd::Zero(phi.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    if (data.s()[i] == 1 && data.v()[i] == target.v) h += (phi1.row(i) - phi0.row(i)).transpose();
  h /= dn;

  MatrixXd lhs = g;
  lhs.diagonal().array() += ridge;
  Eigen::FullPivLU<MatrixXd> lu(lhs);
  if (lu.rank() < lhs.rows())
    throw RankDeficiencyError("riesz Gram matrix is singular; use a positive ridge");

  RieszFit fit;
  fit.basis_id = basis.id;
  fit.ridge = ridge;
  fit.beta = lu.solve(h);
  fit.gamma_star = phi * fit.beta;
  fit.gamma1 = phi1 * fit.beta;
  fit.gamma0 = phi0 * fit.beta;
  fit.loss = fit.beta.dot(g * fit.beta) - 2.0 * fit.beta.dot(h);
  if (!fit.gamma_star.allFinite()) throw ConditioningError("riesz: non-finite representer");
  return fit;
}

}  // namespace satett::estimators
