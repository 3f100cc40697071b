#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace satett::data {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

/// Column mapping from a CSV header onto the observed-data vector.
/// An empty covariate list means "every column not otherwise mapped".
struct Schema {
  std::string outcome = "y";
  std::string treatment = "a";
  std::string source = "s";
  std::string subgroup = "v";
  std::vector<std::string> covariates;

  static Schema from_json_file(const std::filesystem::path& path);
  static Schema from_json_text(const std::string& text);
};

/// Observed rows (Y, A, S, V, X~). Immutable after construction.
class TrialDataset {
public:
  TrialDataset(VectorXd y, VectorXi a, VectorXi s, VectorXi v, MatrixXd xtilde,
               std::vector<std::string> covariate_names = {},
               std::map<int, std::string> subgroup_labels = {});

  const VectorXd& y() const { return y_; }
  const VectorXi& a() const { return a_; }
  const VectorXi& s() const { return s_; }
  const VectorXi& v() const { return v_; }
  const MatrixXd& xtilde() const { return xtilde_; }
  std::size_t n() const { return static_cast<std::size_t>(y_.size()); }
  std::size_t p() const { return static_cast<std::size_t>(xtilde_.cols()); }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  /// Display labels for subgroup codes that were mapped from strings.
  const std::map<int, std::string>& subgroup_labels() const { return subgroup_labels_; }

  /// Same rows with the covariate matrix replaced (used for misspecified designs).
  TrialDataset with_covariates(MatrixXd xtilde) const;
  /// Rows selected by index, in the given order (duplicates allowed).
  TrialDataset select(const std::vector<std::size_t>& rows) const;

  /// [X~, V] as a design matrix without intercept.
  MatrixXd covariates_with_subgroup() const;

  std::size_t count_trial() const;

private:
  VectorXd y_;
  VectorXi a_;
  VectorXi s_;
  VectorXi v_;
  MatrixXd xtilde_;
  std::vector<std::string> covariate_names_;
  std::map<int, std::string> subgroup_labels_;
};

struct SubgroupTarget {
  int v = 1;
  std::string label;
};

struct Violation {
  std::string invariant;
  std::vector<std::size_t> rows;
  std::string detail;
};

/// Testable consequences of the identification assumptions; empty when valid.
std::vector<Violation> validate(const TrialDataset& data);

TrialDataset load_csv(const std::filesystem::path& path, const Schema& schema);
TrialDataset parse_csv(const std::string& text, const Schema& schema);
/// Writes columns y,a,s,v,<covariates> with 17 significant digits.
void write_csv(const TrialDataset& data, const std::filesystem::path& path);
std::string to_csv(const TrialDataset& data);
/// Schema matching the layout produced by write_csv.
Schema default_schema(const TrialDataset& data);

struct SubgroupMasks {
  std::vector<std::size_t> trial_subgroup;  ///< V = v and S = 1
  std::vector<std::size_t> treated;         ///< A = 1 and V = v
  std::vector<std::size_t> control;         ///< A = 0 and V = v
};

SubgroupMasks subgroup_masks(const TrialDataset& data, const SubgroupTarget& target);

/// Trial subgroup codes in ascending order.
std::vector<int> trial_subgroups(const TrialDataset& data);

struct PositivityDiagnostics {
  double min_pi = 1.0;
  double max_ratio = 0.0;          ///< max eta/pi
  double max_control_ratio = 0.0;  ///< max eta/(1 - pi)
  std::vector<double> pi;

  std::size_t count_below(double threshold) const;
};

PositivityDiagnostics positivity_diagnostics(const TrialDataset& data, const VectorXd& pi, const VectorXd& eta);

}  // namespace satett::data
