#include "satett/simulation.hpp"

#include "satett/error.hpp"
#include "satett/logistic.hpp"
#include "satett/rng.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace satett::simulation {

namespace {

double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Draws {
  VectorXd w;
  Eigen::VectorXi v, s, a;
  VectorXd y0, y1;
};

// Steps shared by every scenario once W, V and the enrollment probabilities are known.
void draw_assignment_and_outcomes(Philox& rng, Draws& d, const VectorXd& eta, double pi_w, double pi_v) {
  const auto n = d.w.size();
  d.s.resize(n);
  d.a.resize(n);
  d.y0.resize(n);
  d.y1.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) d.s[i] = rng.bernoulli(eta[i]) ? 1 : 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = d.s[i] == 1 ? 0.5 : 1.0 / (1.0 + std::exp(-0.045 + pi_w * d.w[i] + pi_v * d.v[i]));
    d.a[i] = rng.bernoulli(p) ? 1 : 0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    d.y0[i] = 1.5 * d.w[i] + 0.5 * d.v[i] + rng.normal();
    d.y1[i] = d.y0[i] + d.v[i] - 0.5;
  }
}

GeneratedData package(Draws d, const std::string& covariate, estimators::FeatureViews views) {
  const auto n = d.w.size();
  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = d.a[i] == 1 ? d.y1[i] : d.y0[i];
  GeneratedData out{data::TrialDataset(y, d.a, d.s, d.v, d.w, {covariate}), d.y0, d.y1, {{0, -0.5}, {1, 0.5}},
                    {}, std::move(views), 1};
  return out;
}

// Logistic eta-hat and pi-hat on (W, V), as used for the positivity check.
data::PositivityDiagnostics fitted_diagnostics(const data::TrialDataset& ds) {
  const MatrixXd x = ds.covariates_with_subgroup();
  const VectorXd pi = learners::fit_logistic_irls(x, ds.a().cast<double>(), 1e-6).predict(x);
  VectorXd eta;
  if (ds.count_trial() == ds.n() || ds.count_trial() == 0) {
    eta = VectorXd::Constant(static_cast<Eigen::Index>(ds.n()), ds.count_trial() == 0 ? 0.0 : 1.0);
  } else {
    eta = learners::fit_logistic_irls(x, ds.s().cast<double>(), 1e-6).predict(x);
  }
  return data::positivity_diagnostics(ds, pi, eta);
}

}  // namespace

std::string Misspecification::label() const {
  if (data_treatment && outcome) return "all-miss";
  if (data_treatment) return "data-treatment-miss";
  if (outcome) return "outcome-miss";
  return "all-correct";
}

void ScenarioConfig::check() const {
  if (scenario < 1 || scenario > 3) throw ConfigError("scenario must be 1, 2 or 3");
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (scenario == 1 && (n_trial < 1 || n_ext < 1)) throw ConfigError("n_trial and n_ext must be >= 1");
  if (scenario != 3 && (misspec.data_treatment || misspec.outcome))
    throw ConfigError("misspecification flags apply to scenario 3 only");
  if (scenario == 2 && !(ppv_threshold > 0.0)) throw ConfigError("ppv_threshold must be > 0");
}

std::string ScenarioConfig::cell() const {
  if (scenario == 1) return "n_ext=" + std::to_string(n_ext);
  if (scenario == 2) return "ppv";
  return misspec.label();
}

double solve_intercept_C(const VectorXd& xtilde, const VectorXd& v, double target_prop) {
  if (!(target_prop > 0.0 && target_prop < 1.0)) throw DomainError("target proportion must lie in (0, 1)");
  if (xtilde.size() != v.size() || xtilde.size() == 0) throw DomainError("solve_intercept_C: bad input lengths");
  auto mean_eta = [&](double c) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < xtilde.size(); ++i) sum += expit(c - 0.5 * xtilde[i] - 1.2 * v[i]);
    return sum / static_cast<double>(xtilde.size());
  };
  double lo = -50.0, hi = 50.0;
  if (mean_eta(lo) > target_prop || mean_eta(hi) < target_prop)
    throw GenerationError("intercept target outside the bisection bracket");
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (mean_eta(mid) < target_prop ? lo : hi) = mid;
  }
  const double flo = std::abs(mean_eta(lo) - target_prop);
  const double fhi = std::abs(mean_eta(hi) - target_prop);
  return flo <= fhi ? lo : hi;
}

double sine_transform(double w) { return std::sin(w / (w + 1.0) + 2.0); }

GeneratedData gen_scenario1(int n_ext, std::uint64_t seed, int n_trial) {
  if (n_ext < 1 || n_trial < 1) throw ConfigError("scenario 1 sizes must be >= 1");
  Philox rng(seed);
  const int n = n_trial + n_ext;
  Draws d;
  d.w.resize(n);
  d.v.resize(n);
  for (int i = 0; i < n; ++i) d.w[i] = rng.normal();
  for (int i = 0; i < n; ++i) d.v[i] = rng.bernoulli(0.5) ? 1 : 0;
  const double c = solve_intercept_C(d.w, d.v.cast<double>(), static_cast<double>(n_trial) / n);
  VectorXd eta(n);
  for (int i = 0; i < n; ++i) eta[i] = expit(c - 0.5 * d.w[i] - 1.2 * d.v[i]);
  draw_assignment_and_outcomes(rng, d, eta, 0.09, 0.09);
  auto out = package(std::move(d), "x", {});
  out.diagnostics = fitted_diagnostics(out.dataset);
  return out;
}

GeneratedData gen_scenario2_ppv(std::uint64_t seed, double threshold, int max_attempts) {
  constexpr int n = 550;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Philox rng(seed, static_cast<std::uint64_t>(attempt));
    Draws d;
    d.w.resize(n);
    d.v.resize(n);
    for (int i = 0; i < n; ++i) d.w[i] = rng.normal();
    for (int i = 0; i < n; ++i) d.v[i] = rng.bernoulli(0.5) ? 1 : 0;
    const VectorXd eta = VectorXd::Constant(n, 0.0909);
    draw_assignment_and_outcomes(rng, d, eta, 9.0, 9.0);
    auto out = package(std::move(d), "w", {});
    const auto& s = out.dataset.s();
    if (s.sum() == 0 || s.sum() == n) continue;
    try {
      out.diagnostics = fitted_diagnostics(out.dataset);
    } catch (const Error&) {
      continue;
    }
    if (out.diagnostics.max_ratio > threshold) {
      out.attempts = attempt + 1;
      return out;
    }
  }
  throw GenerationError("scenario 2: no dataset met the positivity-violation threshold within " +
                        std::to_string(max_attempts) + " attempts");
}

GeneratedData gen_scenario3_misspec(std::uint64_t seed, Misspecification flags) {
  constexpr int n = 500;
  Philox rng(seed);
  Draws d;
  d.w.resize(n);
  d.v.resize(n);
  for (int i = 0; i < n; ++i) {
    do {
      d.w[i] = rng.normal();
    } while (d.w[i] == -1.0);
  }
  for (int i = 0; i < n; ++i) d.v[i] = rng.bernoulli(0.5) ? 1 : 0;
  VectorXd z(n), eta(n);
  for (int i = 0; i < n; ++i) {
    z[i] = sine_transform(d.w[i]);
    eta[i] = 1.0 / (1.0 + std::exp(-1.0 + 0.5 * d.w[i] + 1.2 * d.v[i]));
  }
  draw_assignment_and_outcomes(rng, d, eta, 0.09, 0.09);
  estimators::FeatureViews views;
  if (flags.outcome) views.outcome = MatrixXd(z);
  if (flags.data_treatment) views.propensity = MatrixXd(z);
  auto out = package(std::move(d), "w", std::move(views));
  out.diagnostics = fitted_diagnostics(out.dataset);
  return out;
}

GeneratedData generate(const ScenarioConfig& cfg, std::uint64_t seed) {
  switch (cfg.scenario) {
    case 1:
      return gen_scenario1(cfg.n_ext, seed, cfg.n_trial);
    case 2:
      return gen_scenario2_ppv(seed, cfg.ppv_threshold);
    case 3:
      return gen_scenario3_misspec(seed, cfg.misspec);
    default:
      throw ConfigError("scenario must be 1, 2 or 3");
  }
}

std::uint64_t replication_seed(std::uint64_t base, int r) { return derive_seed(base, static_cast<std::uint64_t>(r)); }

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("SATETT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) hw = static_cast<int>(std::min<long>(hw, cap));
  }
  return hw;
}

ScenarioResult run_replications(const ScenarioConfig& cfg, const std::vector<estimators::Method>& methods,
                                const estimators::MethodSettings& settings) {
  cfg.check();
  std::vector<std::vector<ReplicationRow>> per_rep(static_cast<std::size_t>(cfg.reps));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.reps));

  auto run_one = [&](int r) {
    const auto seed = replication_seed(cfg.seed, r);
    auto& rows = per_rep[static_cast<std::size_t>(r)];
    try {
      const auto gen = generate(cfg, seed);
      const auto& ds = gen.dataset;
      const int n_trial = static_cast<int>(ds.count_trial());
      const int n_ext = static_cast<int>(ds.n()) - n_trial;
      const auto outcomes = estimators::run_methods(ds, methods, {0, 1}, gen.views, settings, seed);
      for (const auto& o : outcomes) {
        ReplicationRow row;
        row.scenario = cfg.scenario;
        row.cell = cfg.cell();
        row.method = estimators::method_id(o.method);
        row.subgroup = o.v;
        row.replication = r;
        row.truth = gen.truth.at(o.v);
        row.n_trial = n_trial;
        row.n_ext = n_ext;
        row.seed = seed;
        if (o.report) {
          const auto& rep = *o.report;
          row.estimate = rep.estimate;
          row.se = rep.se;
          row.ci_low = rep.ci_low;
          row.ci_high = rep.ci_high;
          row.p_value = rep.p_value;
          row.covered = rep.ci_low <= row.truth && row.truth <= rep.ci_high;
          row.max_weight = rep.max_weight;
        } else {
          row.failed = true;
          row.error = o.error;
        }
        rows.push_back(std::move(row));
      }
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  };

  const int workers = std::min(worker_count(), cfg.reps);
  if (workers <= 1) {
    for (int r = 0; r < cfg.reps; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (int r = next++; r < cfg.reps; r = next++) run_one(r);
      });
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ScenarioResult result;
  for (auto& rows : per_rep)
    for (auto& row : rows) result.rows.push_back(std::move(row));
  return result;
}

}  // namespace satett::simulation
