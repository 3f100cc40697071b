#include "satett/metrics.hpp"

#include "satett/error.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace satett::harness {

std::string format_number(double x) {
  if (!std::isfinite(x)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string format_optional(const std::optional<double>& x) { return x ? format_number(*x) : "NA"; }

nlohmann::json json_optional(const std::optional<double>& x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

}  // namespace

const MetricsRow* MetricsTable::find(const std::string& cell, const std::string& method, int subgroup) const {
  for (const auto& r : rows)
    if (r.cell == cell && r.method == method && r.subgroup == subgroup) return &r;
  return nullptr;
}

MetricsTable aggregate_metrics(const std::vector<simulation::ReplicationRow>& rows) {
  if (rows.empty()) throw EmptyInputError("aggregate_metrics: no rows");
  using Key = std::tuple<int, std::string, std::string, int>;
  std::map<Key, std::size_t> index;
  std::vector<std::vector<const simulation::ReplicationRow*>> groups;
  MetricsTable table;
  for (const auto& r : rows) {
    const Key key{r.scenario, r.cell, r.method, r.subgroup};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.emplace_back();
      MetricsRow m;
      m.scenario = r.scenario;
      m.cell = r.cell;
      m.method = r.method;
      m.subgroup = r.subgroup;
      m.truth = r.truth;
      table.rows.push_back(m);
    }
    groups[it->second].push_back(&r);
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& m = table.rows[g];
    std::vector<const simulation::ReplicationRow*> ok;
    for (const auto* r : groups[g]) {
      if (r->failed || !std::isfinite(r->estimate) || !std::isfinite(r->se)) ++m.failures;
      else ok.push_back(r);
    }
    m.reps_used = static_cast<int>(ok.size());
    if (ok.empty()) continue;
    const double k = static_cast<double>(ok.size());
    double sum = 0.0, abs_bias = 0.0, se = 0.0, reject = 0.0, cover = 0.0;
    for (const auto* r : ok) {
      sum += r->estimate;
      abs_bias += std::abs(r->estimate - m.truth);
      se += r->se;
      reject += r->p_value < 0.05 ? 1.0 : 0.0;
      cover += r->covered ? 1.0 : 0.0;
    }
    const double mean = sum / k;
    m.mean_estimate = mean;
    m.mean_abs_bias = abs_bias / k;
    m.mean_se = se / k;
    m.power = reject / k;
    m.coverage = cover / k;
    if (ok.size() >= 2) {
      double ss = 0.0;
      for (const auto* r : ok) ss += (r->estimate - mean) * (r->estimate - mean);
      m.variance = ss / (k - 1.0);
      m.mse = *m.variance + (mean - m.truth) * (mean - m.truth);
    }
  }
  return table;
}

std::string replications_csv(const std::vector<simulation::ReplicationRow>& rows) {
  std::ostringstream out;
  out << "scenario,cell,method,subgroup,replication,estimate,se,ci_low,ci_high,p_value,covered,truth,max_weight,"
         "n_trial,n_ext,seed,error\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.cell << ',' << r.method << ',' << r.subgroup << ',' << r.replication << ',';
    if (r.failed) {
      out << "NA,NA,NA,NA,NA,NA,";
    } else {
      out << format_number(r.estimate) << ',' << format_number(r.se) << ',' << format_number(r.ci_low) << ','
          << format_number(r.ci_high) << ',' << format_number(r.p_value) << ',' << (r.covered ? 1 : 0) << ',';
    }
    out << format_number(r.truth) << ',' << (r.failed ? "NA" : format_number(r.max_weight)) << ',' << r.n_trial
        << ',' << r.n_ext << ',' << r.seed << ',';
    std::string err = r.error;
    for (auto& c : err)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    out << err << '\n';
  }
  return out.str();
}

std::string metrics_csv(const MetricsTable& table) {
  std::ostringstream out;
  out << "scenario,cell,method,subgroup,truth,power,mean_abs_bias,variance,mse,coverage,mean_se,mean_estimate,"
         "reps_used,failures\n";
  for (const auto& m : table.rows) {
    out << m.scenario << ',' << m.cell << ',' << m.method << ',' << m.subgroup << ',' << format_number(m.truth) << ','
        << format_optional(m.power) << ',' << format_optional(m.mean_abs_bias) << ',' << format_optional(m.variance)
        << ',' << format_optional(m.mse) << ',' << format_optional(m.coverage) << ',' << format_optional(m.mean_se)
        << ',' << format_optional(m.mean_estimate) << ',' << m.reps_used << ',' << m.failures << '\n';
  }
  return out.str();
}

std::string metrics_json(const MetricsTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& m : table.rows) {
    rows.push_back({{"scenario", m.scenario},
                    {"cell", m.cell},
                    {"method", m.method},
                    {"subgroup", m.subgroup},
                    {"truth", m.truth},
                    {"power", json_optional(m.power)},
                    {"mean_abs_bias", json_optional(m.mean_abs_bias)},
                    {"variance", json_optional(m.variance)},
                    {"mse", json_optional(m.mse)},
                    {"coverage", json_optional(m.coverage)},
                    {"mean_se", json_optional(m.mean_se)},
                    {"mean_estimate", json_optional(m.mean_estimate)},
                    {"reps_used", m.reps_used},
                    {"failures", m.failures}});
  }
  return nlohmann::json{{"rows", rows}}.dump(2) + "\n";
}

}  // namespace satett::harness
