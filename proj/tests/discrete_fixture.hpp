#pragma once

#include "satett/data.hpp"
#include "satett/estimators.hpp"
#include "satett/rng.hpp"
#include "satett/simulation.hpp"

#include <array>
#include <map>

// Fully discrete test data: x~ in {0, 1, 2}, v in {0, 1}. Every (x~, v) cell
// has units in both sources and both arms for n in the hundreds.
namespace fixture {

inline satett::data::TrialDataset discrete_data(std::uint64_t seed, int n) {
  satett::Philox rng(seed);
  Eigen::VectorXd y(n);
  Eigen::VectorXi a(n), s(n), v(n);
  Eigen::MatrixXd x(n, 1);
  for (int i = 0; i < n; ++i) {
    const int xi = static_cast<int>(rng.below(3));
    v[i] = rng.bernoulli(0.5);
    x(i, 0) = xi;
    s[i] = rng.bernoulli(0.25 + 0.1 * xi + 0.1 * v[i]);
    a[i] = rng.bernoulli(s[i] ? 0.5 : 0.2 + 0.2 * xi);
    y[i] = 0.8 * xi + 0.5 * v[i] + a[i] * (v[i] - 0.5) + rng.normal();
  }
  return {y, a, s, v, x};
}

inline int cell_of(const satett::data::TrialDataset& d, Eigen::Index i) {
  return static_cast<int>(d.xtilde()(i, 0)) + 3 * d.v()[i];
}

struct CellCounts {
  std::array<double, 6> total{}, trial{}, treated{}, control{}, y1{}, y0{};
  std::array<std::array<double, 2>, 6> treated_by_s{}, by_s{};
};

inline CellCounts count_cells(const satett::data::TrialDataset& d) {
  CellCounts c;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d.n()); ++i) {
    const int k = cell_of(d, i);
    c.total[k] += 1;
    c.trial[k] += d.s()[i];
    c.by_s[k][d.s()[i]] += 1;
    if (d.a()[i] == 1) {
      c.treated[k] += 1;
      c.y1[k] += d.y()[i];
      c.treated_by_s[k][d.s()[i]] += 1;
    } else {
      c.control[k] += 1;
      c.y0[k] += d.y()[i];
    }
  }
  return c;
}

// Empirical cell-frequency nuisances: pi = #(A=1)/#, eta = #(S=1)/#, m = cell arm means.
inline satett::estimators::NuisanceFits empirical_fits(const satett::data::TrialDataset& d) {
  const auto c = count_cells(d);
  const auto n = static_cast<Eigen::Index>(d.n());
  satett::estimators::NuisanceFits f;
  f.m1.resize(n);
  f.m0.resize(n);
  f.pi.resize(n);
  f.eta.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = cell_of(d, i);
    f.m1[i] = c.y1[k] / c.treated[k];
    f.m0[i] = c.y0[k] / c.control[k];
    f.pi[i] = c.treated[k] / c.total[k];
    f.eta[i] = c.trial[k] / c.total[k];
  }
  f.learner_id = "empirical";
  return f;
}

// The empirical distribution of `d` written as a discrete DGP whose potential
// outcome means are the observed cell arm means.
inline satett::simulation::DiscreteDgp empirical_dgp(const satett::data::TrialDataset& d) {
  const auto c = count_cells(d);
  satett::simulation::DiscreteDgp g;
  const double n = static_cast<double>(d.n());
  for (int k = 0; k < 6; ++k) {
    g.v.push_back(k / 3);
    g.p_x.push_back(c.total[k] / n);
    g.p_s1.push_back(c.trial[k] / c.total[k]);
    for (int s = 0; s < 2; ++s)
      g.p_a1[s].push_back(c.by_s[k][s] > 0 ? c.treated_by_s[k][s] / c.by_s[k][s] : 0.5);
    for (int s = 0; s < 2; ++s)
      for (int ar = 0; ar < 2; ++ar) {
        g.mu[1][s][ar].push_back(c.y1[k] / c.treated[k]);
        g.mu[0][s][ar].push_back(c.y0[k] / c.control[k]);
      }
  }
  return g;
}

}  // namespace fixture
