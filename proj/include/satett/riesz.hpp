#pragma once

#include "satett/data.hpp"

#include <functional>
#include <string>

namespace satett::estimators {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Feature map phi(a, x~, v) evaluated row-wise.
struct RieszBasis {
  std::string id;
  std::function<MatrixXd(int a, const MatrixXd& x, const Eigen::VectorXi& v)> map;
};

/// phi = (1, x~, v, a, a x~, a v).
RieszBasis linear_sieve_basis();

/// One indicator per observed (a, x~, v) cell of `data`; rows matching no
/// observed cell map to zeros.
RieszBasis saturated_basis(const data::TrialDataset& data);

struct RieszFit {
  std::string basis_id;
  VectorXd beta;
  double ridge = 0.0;
  VectorXd gamma_star;  ///< gamma(A_i, X~_i, V_i); signed
  VectorXd gamma1;      ///< gamma(1, X~_i, V_i)
  VectorXd gamma0;      ///< gamma(0, X~_i, V_i)
  double loss = 0.0;    ///< (1/n) sum [gamma^2 - 2 q], q = 1(S=1,V=v)(gamma(1) - gamma(0))
};

/// Closed-form minimizer of the empirical Riesz loss over the linear span of
/// the basis: beta = (G + ridge I)^-1 h.
RieszFit fit_riesz(const data::TrialDataset& data, const data::SubgroupTarget& target, const RieszBasis& basis,
                   double ridge = 1e-4);

}  // namespace satett::estimators
