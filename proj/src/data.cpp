#include "satett/data.hpp"

#include "satett/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace satett::data {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(trim(field));
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    // from_chars rejects "inf"/"nan" spellings on some libraries; fall back.
    char* stop = nullptr;
    value = std::strtod(s.c_str(), &stop);
    if (stop != s.c_str() + s.size()) return std::nullopt;
  }
  return value;
}

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

Schema Schema::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("schema config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("schema config must be a JSON object");
  Schema schema;
  auto read = [&](const char* key, std::string& slot) {
    if (!j.contains(key)) throw SchemaError(std::string("schema config missing key '") + key + "'");
    if (!j[key].is_string()) throw SchemaError(std::string("schema key '") + key + "' must be a string");
    slot = j[key].get<std::string>();
  };
  read("outcome", schema.outcome);
  read("treatment", schema.treatment);
  read("source", schema.source);
  read("subgroup", schema.subgroup);
  if (j.contains("covariates")) {
    if (!j["covariates"].is_array()) throw SchemaError("schema key 'covariates' must be an array");
    for (const auto& c : j["covariates"]) {
      if (!c.is_string()) throw SchemaError("schema covariate names must be strings");
      schema.covariates.push_back(c.get<std::string>());
    }
  }
  return schema;
}

Schema Schema::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

TrialDataset::TrialDataset(VectorXd y, VectorXi a, VectorXi s, VectorXi v, MatrixXd xtilde,
                           std::vector<std::string> covariate_names, std::map<int, std::string> subgroup_labels)
    : y_(std::move(y)),
      a_(std::move(a)),
      s_(std::move(s)),
      v_(std::move(v)),
      xtilde_(std::move(xtilde)),
      covariate_names_(std::move(covariate_names)),
      subgroup_labels_(std::move(subgroup_labels)) {
  const auto n = y_.size();
  if (a_.size() != n || s_.size() != n || v_.size() != n || xtilde_.rows() != n) {
    throw DomainError("all columns must have length n = " + std::to_string(n));
  }
  if (covariate_names_.empty()) {
    for (Eigen::Index j = 0; j < xtilde_.cols(); ++j) covariate_names_.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(covariate_names_.size()) != xtilde_.cols()) {
    throw DomainError("covariate name count does not match covariate columns");
  }
}

TrialDataset TrialDataset::with_covariates(MatrixXd xtilde) const {
  std::vector<std::string> names;
  if (xtilde.cols() == xtilde_.cols()) names = covariate_names_;
  return TrialDataset(y_, a_, s_, v_, std::move(xtilde), std::move(names), subgroup_labels_);
}

TrialDataset TrialDataset::select(const std::vector<std::size_t>& rows) const {
  const auto m = static_cast<Eigen::Index>(rows.size());
  VectorXd y(m);
  VectorXi a(m), s(m), v(m);
  MatrixXd x(m, xtilde_.cols());
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(k)]);
    y[k] = y_[i];
    a[k] = a_[i];
    s[k] = s_[i];
    v[k] = v_[i];
    x.row(k) = xtilde_.row(i);
  }
  return TrialDataset(std::move(y), std::move(a), std::move(s), std::move(v), std::move(x), covariate_names_,
                      subgroup_labels_);
}

MatrixXd TrialDataset::covariates_with_subgroup() const {
  MatrixXd out(xtilde_.rows(), xtilde_.cols() + 1);
  out.leftCols(xtilde_.cols()) = xtilde_;
  out.col(xtilde_.cols()) = v_.cast<double>();
  return out;
}

std::size_t TrialDataset::count_trial() const {
  return static_cast<std::size_t>((s_.array() == 1).count());
}

std::vector<Violation> validate(const TrialDataset& data) {
  std::vector<Violation> out;
  const auto n = data.n();
  auto collect = [&](auto&& bad, const std::string& invariant, const std::string& detail) {
    Violation vio{invariant, {}, detail};
    for (std::size_t i = 0; i < n; ++i)
      if (bad(static_cast<Eigen::Index>(i))) vio.rows.push_back(i);
    if (!vio.rows.empty()) out.push_back(std::move(vio));
  };
  collect([&](Eigen::Index i) { return !std::isfinite(data.y()[i]); }, "finite-outcome", "outcome is missing or non-finite");
  collect([&](Eigen::Index i) { return !data.xtilde().row(i).allFinite(); }, "finite-covariates",
          "covariate is missing or non-finite");
  collect([&](Eigen::Index i) { return data.a()[i] != 0 && data.a()[i] != 1; }, "binary-treatment",
          "treatment must be 0 or 1");
  collect([&](Eigen::Index i) { return data.s()[i] != 0 && data.s()[i] != 1; }, "binary-source",
          "source must be 0 or 1");

  for (int v : trial_subgroups(data)) {
    for (int arm : {1, 0}) {
      bool found = false;
      for (std::size_t i = 0; i < n && !found; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        found = data.s()[k] == 1 && data.v()[k] == v && data.a()[k] == arm;
      }
      if (!found) {
        Violation vio{"trial-cell-nonempty", {}, ""};
        vio.detail = "cell (a=" + std::to_string(arm) + ", v=" + std::to_string(v) + ", s=1) has no units";
        for (std::size_t i = 0; i < n; ++i) {
          const auto k = static_cast<Eigen::Index>(i);
          if (data.s()[k] == 1 && data.v()[k] == v) vio.rows.push_back(i);
        }
        out.push_back(std::move(vio));
      }
    }
  }
  return out;
}

TrialDataset parse_csv(const std::string& text, const Schema& schema) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw EmptyInputError("CSV input is empty (no header row)");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // UTF-8 BOM
  const auto header = split_row(line);

  auto find = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto iy = find(schema.outcome);
  const auto ia = find(schema.treatment);
  const auto is = find(schema.source);
  const auto iv = find(schema.subgroup);
  std::vector<std::size_t> ix;
  std::vector<std::string> names;
  if (schema.covariates.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == iy || c == ia || c == is || c == iv) continue;
      ix.push_back(c);
      names.push_back(header[c]);
    }
  } else {
    for (const auto& name : schema.covariates) {
      ix.push_back(find(name));
      names.push_back(name);
    }
  }

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_row(line);
    if (fields.size() != header.size()) {
      throw SchemaError("row " + std::to_string(rows.size() + 1) + " has " + std::to_string(fields.size()) +
                        " fields, header has " + std::to_string(header.size()));
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw EmptyInputError("CSV input has a header but no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  VectorXd y(n);
  VectorXi a(n), s(n), v(n);
  MatrixXd x(n, static_cast<Eigen::Index>(ix.size()));

  auto number = [&](Eigen::Index r, std::size_t c) {
    auto value = parse_double(rows[static_cast<std::size_t>(r)][c]);
    if (!value) {
      throw DomainError("row " + std::to_string(r + 1) + ", column '" + header[c] + "': cannot parse '" +
                        rows[static_cast<std::size_t>(r)][c] + "' as a number");
    }
    return *value;
  };
  auto binary = [&](Eigen::Index r, std::size_t c) {
    const double value = number(r, c);
    if (value != 0.0 && value != 1.0) {
      throw DomainError("row " + std::to_string(r + 1) + ", column '" + header[c] + "': value " +
                        rows[static_cast<std::size_t>(r)][c] + " is not in {0,1}");
    }
    return static_cast<int>(value);
  };

  // Subgroup codes: integers when every entry is integral, otherwise sorted labels mapped to 0..k-1.
  bool integral = true;
  for (Eigen::Index r = 0; r < n && integral; ++r) {
    auto value = parse_double(rows[static_cast<std::size_t>(r)][iv]);
    integral = value && std::isfinite(*value) && std::floor(*value) == *value;
  }
  std::map<int, std::string> labels;
  std::map<std::string, int> codes;
  if (!integral) {
    std::set<std::string> distinct;
    for (const auto& row : rows) distinct.insert(row[iv]);
    int next = 0;
    for (const auto& label : distinct) {
      codes[label] = next;
      labels[next] = label;
      ++next;
    }
  }

  for (Eigen::Index r = 0; r < n; ++r) {
    y[r] = number(r, iy);
    a[r] = binary(r, ia);
    s[r] = binary(r, is);
    v[r] = integral ? static_cast<int>(number(r, iv)) : codes.at(rows[static_cast<std::size_t>(r)][iv]);
    for (std::size_t k = 0; k < ix.size(); ++k) x(r, static_cast<Eigen::Index>(k)) = number(r, ix[k]);
  }
  return TrialDataset(std::move(y), std::move(a), std::move(s), std::move(v), std::move(x), std::move(names),
                      std::move(labels));
}

TrialDataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open data file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), schema);
}

std::string to_csv(const TrialDataset& data) {
  std::ostringstream out;
  out << "y,a,s,v";
  for (const auto& name : data.covariate_names()) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(data.n()); ++i) {
    out << format17(data.y()[i]) << ',' << data.a()[i] << ',' << data.s()[i] << ',' << data.v()[i];
    for (Eigen::Index j = 0; j < data.xtilde().cols(); ++j) out << ',' << format17(data.xtilde()(i, j));
    out << '\n';
  }
  return out.str();
}

void write_csv(const TrialDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_csv(data);
}

Schema default_schema(const TrialDataset& data) {
  Schema schema;
  schema.covariates = data.covariate_names();
  return schema;
}

SubgroupMasks subgroup_masks(const TrialDataset& data, const SubgroupTarget& target) {
  SubgroupMasks masks;
  bool present = false;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (data.v()[k] != target.v) continue;
    present = true;
    if (data.s()[k] == 1) masks.trial_subgroup.push_back(i);
    if (data.a()[k] == 1) masks.treated.push_back(i);
    if (data.a()[k] == 0) masks.control.push_back(i);
  }
  if (!present) throw NotFoundError("subgroup code " + std::to_string(target.v) + " does not occur in the data");
  return masks;
}

std::vector<int> trial_subgroups(const TrialDataset& data) {
  std::set<int> codes;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(data.n()); ++i)
    if (data.s()[i] == 1) codes.insert(data.v()[i]);
  return {codes.begin(), codes.end()};
}

std::size_t PositivityDiagnostics::count_below(double threshold) const {
  return static_cast<std::size_t>(std::count_if(pi.begin(), pi.end(), [&](double p) { return p < threshold; }));
}

PositivityDiagnostics positivity_diagnostics(const TrialDataset& data, const VectorXd& pi, const VectorXd& eta) {
  PositivityDiagnostics diag;
  const bool has_external = data.count_trial() < data.n();
  diag.pi.assign(pi.data(), pi.data() + pi.size());
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    if (!has_external || data.s()[i] == 0) diag.min_pi = std::min(diag.min_pi, pi[i]);
    diag.max_ratio = std::max(diag.max_ratio, eta[i] / pi[i]);
    diag.max_control_ratio = std::max(diag.max_control_ratio, eta[i] / (1.0 - pi[i]));
  }
  return diag;
}

}  // namespace satett::data
