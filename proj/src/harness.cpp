#include "satett/harness.hpp"

#include "satett/embedded_schemas.hpp"
#include "satett/error.hpp"
#include "satett/logistic.hpp"
#include "satett/rng.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace satett::harness {

namespace fs = std::filesystem;

const json& schema(const std::string& name) {
  static const std::map<std::string, json> parsed = [] {
    std::map<std::string, json> out;
    for (const auto& [file, text] : embedded_schemas()) out.emplace(file, json::parse(text));
    return out;
  }();
  const auto it = parsed.find(name);
  if (it == parsed.end()) throw NotFoundError("no bundled schema named " + name);
  return it->second;
}

namespace {

bool has_type(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "integer") return value.is_number_integer() || (value.is_number_float() && std::floor(value.get<double>()) == value.get<double>());
  if (type == "number") return value.is_number();
  return false;
}

void validate_at(const json& value, const json& sch, const std::string& where, std::vector<std::string>& errors) {
  if (sch.contains("$ref")) {
    validate_at(value, schema(sch["$ref"].get<std::string>()), where, errors);
    return;
  }
  const std::string at = where.empty() ? "/" : where;
  if (sch.contains("type")) {
    const auto& t = sch["type"];
    bool ok = false;
    if (t.is_string()) ok = has_type(value, t.get<std::string>());
    else
      for (const auto& alt : t) ok = ok || has_type(value, alt.get<std::string>());
    if (!ok) {
      errors.push_back(at + ": expected type " + t.dump());
      return;
    }
  }
  if (sch.contains("enum")) {
    bool found = false;
    for (const auto& option : sch["enum"]) found = found || option == value;
    if (!found) errors.push_back(at + ": value " + value.dump() + " not in " + sch["enum"].dump());
  }
  if (value.is_number()) {
    const double x = value.get<double>();
    if (sch.contains("minimum") && x < sch["minimum"].get<double>())
      errors.push_back(at + ": must be >= " + sch["minimum"].dump());
    if (sch.contains("maximum") && x > sch["maximum"].get<double>())
      errors.push_back(at + ": must be <= " + sch["maximum"].dump());
    if (sch.contains("exclusiveMinimum") && x <= sch["exclusiveMinimum"].get<double>())
      errors.push_back(at + ": must be > " + sch["exclusiveMinimum"].dump());
  }
  if (value.is_object()) {
    if (sch.contains("required"))
      for (const auto& key : sch["required"])
        if (!value.contains(key.get<std::string>()))
          errors.push_back(at + ": missing required key '" + key.get<std::string>() + "'");
    const json props = sch.value("properties", json::object());
    const bool closed = sch.contains("additionalProperties") && sch["additionalProperties"] == false;
    for (const auto& [key, child] : value.items()) {
      if (props.contains(key)) validate_at(child, props[key], where + "/" + key, errors);
      else if (closed) errors.push_back(at + ": unknown key '" + key + "'");
    }
  }
  if (value.is_array()) {
    if (sch.contains("minItems") && value.size() < sch["minItems"].get<std::size_t>())
      errors.push_back(at + ": needs at least " + sch["minItems"].dump() + " items");
    if (sch.contains("items"))
      for (std::size_t i = 0; i < value.size(); ++i)
        validate_at(value[i], sch["items"], where + "/" + std::to_string(i), errors);
  }
}

void require_valid(const json& config, const std::string& schema_name) {
  const auto errors = validate_json(config, schema(schema_name));
  if (errors.empty()) return;
  std::string msg = "configuration does not match " + schema_name + ":";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ConfigError(msg);
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + " is not valid JSON: " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string subgroup_label(const data::TrialDataset& ds, int code) {
  const auto& labels = ds.subgroup_labels();
  const auto it = labels.find(code);
  return it == labels.end() ? std::to_string(code) : it->second;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::vector<std::string> validate_json(const json& instance, const json& schema_doc) {
  std::vector<std::string> errors;
  validate_at(instance, schema_doc, "", errors);
  return errors;
}

estimators::MethodSettings method_settings_from_json(const json& config) {
  estimators::MethodSettings s;
  if (config.contains("estimators")) {
    const auto& e = config["estimators"];
    require_valid(e, "estimators.schema.json");
    s.lambda = e.value("lambda", s.lambda);
    s.riesz_ridge = e.value("ridge", s.riesz_ridge);
    s.riesz_basis = e.value("basis", s.riesz_basis);
    s.qp_tol = e.value("qp_tol", s.qp_tol);
    s.qp_max_iter = e.value("qp_max_iter", s.qp_max_iter);
  }
  if (config.contains("learners")) {
    const auto& l = config["learners"];
    require_valid(l, "learners.schema.json");
    s.learners.ols_ridge = l.value("ols_ridge", s.learners.ols_ridge);
    s.learners.logistic_ridge = l.value("logistic_ridge", s.learners.logistic_ridge);
    s.learners.gp_init.d1 = l.value("gp_degree", s.learners.gp_init.d1);
    if (l.contains("forest")) {
      const auto& f = l["forest"];
      auto& fo = s.learners.forest;
      fo.n_trees = f.value("n_trees", fo.n_trees);
      fo.max_depth = f.value("max_depth", fo.max_depth);
      fo.min_leaf = f.value("min_leaf", fo.min_leaf);
      fo.mtry = f.value("mtry", fo.mtry);
      fo.bootstrap = f.value("bootstrap", fo.bootstrap);
    }
  }
  if (config.contains("inference")) {
    const auto& i = config["inference"];
    require_valid(i, "inference.schema.json");
    s.bootstrap_B = i.value("bootstrap_B", s.bootstrap_B);
  }
  return s;
}

std::vector<estimators::Method> methods_from_json(const json& list) {
  std::vector<estimators::Method> out;
  for (const auto& id : list) {
    const auto m = estimators::parse_method(id.get<std::string>());
    for (auto seen : out)
      if (seen == m) throw ConfigError("method '" + id.get<std::string>() + "' listed twice");
    out.push_back(m);
  }
  return out;
}

SimulatePlan simulate_plan(const json& config, const SimulateOverrides& overrides, const fs::path& base_dir) {
  require_valid(config, "simulate.schema.json");
  SimulatePlan plan;
  plan.methods = methods_from_json(config["methods"]);
  plan.settings = method_settings_from_json(config);
  const int scenario = config["scenario"].get<int>();
  const int reps = overrides.reps ? *overrides.reps : config.value("reps", 100);
  const std::uint64_t seed = overrides.seed ? *overrides.seed : config.value("seed", std::uint64_t{0});
  if (reps < 1) throw ConfigError("reps must be >= 1");

  if (scenario != 1 && (config.contains("n_ext") || config.contains("n_trial")))
    throw ConfigError("n_trial and n_ext apply to scenario 1 only");
  if (scenario != 3 && config.contains("misspec")) throw ConfigError("misspec applies to scenario 3 only");
  if (scenario != 2 && config.contains("ppv_threshold")) throw ConfigError("ppv_threshold applies to scenario 2 only");

  simulation::ScenarioConfig base;
  base.scenario = scenario;
  base.reps = reps;
  base.ppv_threshold = config.value("ppv_threshold", 50.0);
  if (scenario == 1) {
    base.n_trial = config.value("n_trial", 100);
    const std::vector<int> grid =
        config.value("n_ext", std::vector<int>{100, 200, 300, 400, 500, 600, 700, 800, 900});
    for (int n_ext : grid) {
      auto cell = base;
      cell.n_ext = n_ext;
      plan.cells.push_back(cell);
    }
  } else if (scenario == 2) {
    base.n_trial = 50;
    base.n_ext = 500;
    plan.cells.push_back(base);
  } else {
    base.n_trial = 250;
    base.n_ext = 250;
    const std::vector<std::string> labels = config.value(
        "misspec", std::vector<std::string>{"all-correct", "data-treatment-miss", "outcome-miss", "all-miss"});
    for (const auto& label : labels) {
      auto cell = base;
      cell.misspec.data_treatment = label == "data-treatment-miss" || label == "all-miss";
      cell.misspec.outcome = label == "outcome-miss" || label == "all-miss";
      plan.cells.push_back(cell);
    }
  }
  for (std::size_t k = 0; k < plan.cells.size(); ++k) {
    plan.cells[k].seed = derive_seed(seed, k);
    plan.cells[k].check();
  }
  const fs::path dir = overrides.out_dir ? *overrides.out_dir : fs::path(config.value("out_dir", std::string("out")));
  plan.out_dir = dir.is_absolute() || overrides.out_dir ? dir : base_dir / dir;
  return plan;
}

SimulateOutput run_simulate(const SimulatePlan& plan) {
  SimulateOutput out;
  for (const auto& cell : plan.cells) {
    auto result = simulation::run_replications(cell, plan.methods, plan.settings);
    for (auto& row : result.rows) out.rows.push_back(std::move(row));
  }
  out.metrics = aggregate_metrics(out.rows);
  return out;
}

void write_simulate_outputs(const SimulatePlan& plan, const SimulateOutput& output) {
  std::error_code ec;
  fs::create_directories(plan.out_dir, ec);
  if (ec) throw ConfigError("cannot create " + plan.out_dir.string() + ": " + ec.message());
  write_file(plan.out_dir / "replications.csv", replications_csv(output.rows));
  write_file(plan.out_dir / "metrics.csv", metrics_csv(output.metrics));
  write_file(plan.out_dir / "metrics.json", metrics_json(output.metrics));
}

json analyze(const json& config, const fs::path& base_dir) {
  require_valid(config, "analyze.schema.json");
  const auto methods = methods_from_json(config["methods"]);
  const auto settings = method_settings_from_json(config);
  const std::uint64_t seed = config.value("seed", std::uint64_t{0});

  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  data::Schema schema_cols;
  if (config.contains("schema")) {
    const auto schema_path = resolve(config["schema"].get<std::string>());
    require_valid(read_json_file(schema_path), "data.schema.json");
    schema_cols = data::Schema::from_json_file(schema_path);
  }
  const auto ds = data::load_csv(resolve(config["data"].get<std::string>()), schema_cols);
  const auto violations = data::validate(ds);
  if (!violations.empty()) {
    std::string msg = "data violates " + std::to_string(violations.size()) + " invariant(s):";
    for (const auto& v : violations) msg += "\n  " + v.invariant + ": " + v.detail;
    throw SchemaError(msg);
  }

  std::vector<int> codes;
  if (config.contains("subgroups")) {
    for (const auto& label : config["subgroups"]) {
      const auto want = label.get<std::string>();
      bool found = false;
      for (int code : data::trial_subgroups(ds))
        if (subgroup_label(ds, code) == want) {
          codes.push_back(code);
          found = true;
        }
      if (!found) throw ConfigError("subgroup '" + want + "' has no trial units");
    }
  } else {
    codes = data::trial_subgroups(ds);
  }

  json report;
  report["n"] = ds.n();
  report["n_trial"] = ds.count_trial();
  report["n_external"] = ds.n() - ds.count_trial();
  report["covariates"] = ds.covariate_names();
  try {
    const auto glm = estimators::fit_glm_nuisances(ds, settings.learners, {}, true);
    const auto diag = data::positivity_diagnostics(ds, glm.pi, glm.eta);
    report["positivity"] = {{"min_pi", diag.min_pi},
                            {"max_ratio", diag.max_ratio},
                            {"max_control_ratio", diag.max_control_ratio},
                            {"pi_below_0.05", diag.count_below(0.05)},
                            {"pi_below_0.01", diag.count_below(0.01)}};
  } catch (const std::exception& e) {
    report["positivity"] = {{"error", e.what()}};
  }

  std::map<int, double> naive_se;
  for (int code : codes) {
    try {
      naive_se[code] = estimators::estimate_naive(ds, {code, {}}).se;
    } catch (const std::exception&) {
    }
  }

  json rows = json::array();
  for (const auto& o : estimators::run_methods(ds, methods, codes, {}, settings, seed)) {
    json row{{"method", estimators::method_id(o.method)}, {"subgroup", subgroup_label(ds, o.v)}};
    if (o.report) {
      const auto& r = *o.report;
      row["estimate"] = number_or_null(r.estimate);
      row["se"] = number_or_null(r.se);
      row["ci_low"] = number_or_null(r.ci_low);
      row["ci_high"] = number_or_null(r.ci_high);
      row["p_value"] = number_or_null(r.p_value);
      row["alpha_hat"] = r.alpha_hat;
      row["max_weight"] = number_or_null(r.max_weight);
      row["converged"] = r.converged;
      const auto it = naive_se.find(o.v);
      if (o.method == estimators::Method::naive) row["se_ratio"] = 1.0;
      else if (it != naive_se.end() && r.se > 0.0) row["se_ratio"] = number_or_null(it->second / r.se);
      else row["se_ratio"] = nullptr;
    } else {
      row["error"] = o.error;
    }
    rows.push_back(row);
  }
  report["results"] = rows;
  return report;
}

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const GenerationError& e) {
    err << "generation error: " << e.what() << '\n';
    return kGenerationError;
  } catch (const OutOfScopeError& e) {
    err << "out of scope: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace

int cmd_simulate(const fs::path& config, const SimulateOverrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto plan = simulate_plan(read_json_file(config), overrides, config.parent_path());
    const auto output = run_simulate(plan);
    write_simulate_outputs(plan, output);
    std::size_t failed = 0;
    for (const auto& r : output.rows) failed += r.failed ? 1 : 0;
    out << "wrote " << output.rows.size() << " replication rows (" << failed << " failed) and "
        << output.metrics.rows.size() << " metric rows to " << plan.out_dir.string() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_analyze(const fs::path& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = read_json_file(config);
    const auto report = analyze(cfg, config.parent_path());
    const std::string text = report.dump(2) + "\n";
    if (cfg.contains("output")) {
      const fs::path p(cfg["output"].get<std::string>());
      write_file(p.is_absolute() ? p : config.parent_path() / p, text);
    } else {
      out << text;
    }
    return static_cast<int>(kOk);
  });
}

int cmd_validate(const fs::path& data_path, const fs::path& schema_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_valid(read_json_file(schema_path), "data.schema.json");
    const auto ds = data::load_csv(data_path, data::Schema::from_json_file(schema_path));
    const auto violations = data::validate(ds);
    if (violations.empty()) {
      out << "ok: " << ds.n() << " rows, " << ds.count_trial() << " in the trial, " << ds.p() << " covariates\n";
      return static_cast<int>(kOk);
    }
    for (const auto& v : violations) {
      err << v.invariant << ": " << v.detail;
      if (!v.rows.empty()) {
        err << " (rows";
        for (std::size_t k = 0; k < v.rows.size() && k < 10; ++k) err << ' ' << v.rows[k] + 1;
        if (v.rows.size() > 10) err << " ...";
        err << ')';
      }
      err << '\n';
    }
    return static_cast<int>(kConfigError);
  });
}

}  // namespace satett::harness
