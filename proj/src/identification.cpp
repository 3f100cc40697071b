#include "satett/error.hpp"
#include "satett/simulation.hpp"

namespace satett::simulation {

IdentificationResult discrete_identification_oracle(const DiscreteDgp& dgp, int v) {
  const std::size_t k = dgp.p_x.size();
  auto sized = [k](const std::vector<double>& xs) { return xs.size() == k; };
  if (dgp.v.size() != k || !sized(dgp.p_s1) || !sized(dgp.p_a1[0]) || !sized(dgp.p_a1[1]))
    throw DomainError("discrete DGP: inconsistent cell counts");
  for (int a = 0; a < 2; ++a)
    for (int s = 0; s < 2; ++s)
      for (int ar = 0; ar < 2; ++ar)
        if (!sized(dgp.mu[a][s][ar])) throw DomainError("discrete DGP: inconsistent outcome table");

  auto p_s = [&](std::size_t x, int s) { return s == 1 ? dgp.p_s1[x] : 1.0 - dgp.p_s1[x]; };
  auto p_a = [&](std::size_t x, int s, int a) {
    const double p1 = dgp.p_a1[s][x];
    return a == 1 ? p1 : 1.0 - p1;
  };

  double mass = 0.0;  // P(V = v, S = 1)
  for (std::size_t x = 0; x < k; ++x)
    if (dgp.v[x] == v) mass += dgp.p_x[x] * dgp.p_s1[x];
  if (!(mass > 0.0)) throw DomainError("P(V = " + std::to_string(v) + ", S = 1) is zero");

  IdentificationResult out;
  for (std::size_t x = 0; x < k; ++x) {
    if (dgp.v[x] != v) continue;
    const double weight = dgp.p_x[x] * dgp.p_s1[x] / mass;
    if (weight == 0.0) continue;

    double effect = 0.0;
    for (int ar = 0; ar < 2; ++ar) effect += p_a(x, 1, ar) * (dgp.mu[1][1][ar][x] - dgp.mu[0][1][ar][x]);
    out.truth += weight * effect;

    double regression[2];
    for (int a = 0; a < 2; ++a) {
      const double joint0 = p_s(x, 0) * p_a(x, 0, a);
      const double joint1 = p_s(x, 1) * p_a(x, 1, a);
      const double total = joint0 + joint1;
      if (!(total > 0.0))
        throw DomainError("positivity violation: P(A = " + std::to_string(a) + " | X = cell " + std::to_string(x) +
                          ") is zero");
      regression[a] = (joint0 * dgp.mu[a][0][a][x] + joint1 * dgp.mu[a][1][a][x]) / total;
    }
    out.identification += weight * (regression[1] - regression[0]);
  }
  return out;
}

}  // namespace satett::simulation
