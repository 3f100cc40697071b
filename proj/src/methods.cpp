#include "satett/methods.hpp"

#include "satett/error.hpp"
#include "satett/rng.hpp"

#include <functional>
#include <memory>

namespace satett::estimators {

const std::vector<std::string>& method_ids() {
  static const std::vector<std::string> ids{"naive", "cov-adj", "dr-glm", "dr-ranger", "covbal", "riesz", "cdml"};
  return ids;
}

Method parse_method(const std::string& id) {
  const auto& ids = method_ids();
  for (std::size_t k = 0; k < ids.size(); ++k)
    if (ids[k] == id) return static_cast<Method>(k);
  if (id == "dr-bart" || id == "dr-bayglm")
    throw OutOfScopeError("method '" + id + "' is out of scope (its Bayesian learners are not implemented)");
  std::string valid;
  for (const auto& s : ids) valid += (valid.empty() ? "" : ", ") + s;
  throw ConfigError("unknown method '" + id + "'; valid ids: " + valid);
}

std::string method_id(Method m) { return method_ids().at(static_cast<std::size_t>(m)); }

namespace {

// Lazily computed value; an exception thrown while computing is replayed on every access.
template <class T>
class Lazy {
public:
  explicit Lazy(std::function<T()> make) : make_(std::move(make)) {}
  const T& get() {
    if (!done_) {
      done_ = true;
      try {
        value_ = make_();
      } catch (...) {
        error_ = std::current_exception();
      }
    }
    if (error_) std::rethrow_exception(error_);
    return *value_;
  }

private:
  std::function<T()> make_;
  bool done_ = false;
  std::optional<T> value_;
  std::exception_ptr error_;
};

struct CovbalFits {
  NuisanceFits fits;
  GpOutcomeModels gp;
  MatrixXd design;
};

}  // namespace

std::vector<MethodOutcome> run_methods(const data::TrialDataset& data, const std::vector<Method>& methods,
                                       const std::vector<int>& subgroups, const FeatureViews& views,
                                       const MethodSettings& settings, std::uint64_t seed) {
  const auto& ls = settings.learners;
  Lazy<NuisanceFits> glm_trial([&] { return fit_glm_nuisances(data, ls, views, false); });
  Lazy<NuisanceFits> glm([&] { return fit_glm_nuisances(data, ls, views, true); });
  Lazy<NuisanceFits> forest([&] { return fit_forest_nuisances(data, ls, views, derive_seed(seed, 1001)); });
  Lazy<CovbalFits> covbal([&] {
    CovbalFits out{NuisanceFits{}, fit_gp_outcomes(data, ls, views), views.outcome_design(data)};
    out.fits.m1 = out.gp.arm1.predict(out.design);
    out.fits.m0 = out.gp.arm0.predict(out.design);
    out.fits.learner_id = "gp";
    return out;
  });
  Lazy<data::TrialDataset> riesz_data([&] {
    return views.propensity ? data.with_covariates(*views.propensity) : data;
  });
  Lazy<CdmlRawPredictions> cdml_raw([&] { return fit_cdml_raw(data, ls, views, derive_seed(seed, 1002)); });

  std::vector<MethodOutcome> out;
  for (Method m : methods) {
    for (int v : subgroups) {
      MethodOutcome cell{m, v, std::nullopt, {}};
      const data::SubgroupTarget target{v, {}};
      try {
        switch (m) {
          case Method::naive:
            cell.report = estimate_naive(data, target);
            break;
          case Method::cov_adj:
            cell.report = estimate_cov_adj(data, target, glm_trial.get());
            break;
          case Method::dr_glm:
            cell.report = estimate_dr(data, target, glm.get(), "dr-glm");
            break;
          case Method::dr_ranger:
            cell.report = estimate_dr(data, target, forest.get(), "dr-ranger");
            break;
          case Method::covbal: {
            const auto& cb = covbal.get();
            const auto problem = build_balance_problem(data, target, cb.design, cb.gp.arm1, cb.gp.arm0, settings.lambda);
            const auto weights = solve_balance_weights(problem, data.n(), settings.qp_tol, settings.qp_max_iter);
            cell.report = estimate_covbal(data, target, weights, cb.fits);
            break;
          }
          case Method::riesz: {
            const auto& rd = riesz_data.get();
            RieszBasis basis;
            if (settings.riesz_basis == "linear") basis = linear_sieve_basis();
            else if (settings.riesz_basis == "saturated") basis = saturated_basis(rd);
            else throw ConfigError("unknown riesz basis '" + settings.riesz_basis + "'");
            const auto fit = fit_riesz(rd, target, basis, settings.riesz_ridge);
            cell.report = estimate_autodml(data, target, fit, glm.get());
            break;
          }
          case Method::cdml: {
            const auto& raw = cdml_raw.get();
            const auto point = cdml_from_raw(data, target, raw);
            const inference::BootstrapConfig boot{settings.bootstrap_B,
                                                  derive_seed(seed, 2000 + static_cast<std::uint64_t>(v))};
            const double se = bootstrap_cdml_se(data, target, raw, boot);
            cell.report = make_report(point.estimate, se, point.alpha_hat, point.max_weight, "cdml");
            break;
          }
        }
      } catch (const std::exception& e) {
        cell.report.reset();
        cell.error = e.what();
      }
      out.push_back(std::move(cell));
    }
  }
  return out;
}

}  // namespace satett::estimators
