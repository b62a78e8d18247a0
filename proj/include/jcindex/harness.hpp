#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "jcindex/serialize.hpp"

namespace jcindex {

// Plain key=value settings. Lines starting with '#' and blank lines are
// ignored; later assignments win, so flags applied after a file override it.
class RunConfig {
 public:
  static RunConfig parse(std::istream& in);
  static RunConfig parse_file(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  double get_double(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

// Known commands and their keys with defaults.
const std::vector<std::string>& command_names();
const std::vector<std::pair<std::string, std::string>>& command_defaults(const std::string& command);

// Fills defaults; unknown keys and a missing required `data` are usage errors.
RunConfig resolve_config(const std::string& command, const RunConfig& given);

// Runs a command on an already-resolved config and returns its artifact:
// {"command", "config", "result"}. `simulate` also writes the CSV to `output`.
json run_command(const std::string& command, const RunConfig& resolved);

// Aligned text table for the table-producing commands, empty otherwise.
std::string render_table(const json& artifact);

// --- studies ---------------------------------------------------------------

struct EfficiencyRow {
  std::string model = "EXP";
  double censoring = 0.0;  // target censored fraction
  double beta0 = 0.0;
  std::size_t n = 0;
  double lambda0 = 0.0;
  double horizon = 0.0;
  double true_jc = 0.0;
  std::size_t replicates = 0;
  std::size_t used = 0;
  std::vector<std::pair<std::string, std::size_t>> failures;
  double mean_estimate = 0.0;
  // Moments over the R' successful replicates, all divided by R':
  // bias = mean - truth, se = sqrt(mean (e - mean)^2), rmse = sqrt(mean (e - truth)^2).
  double bias = 0.0;
  double se = 0.0;
  double rmse = 0.0;
  double median_abs_error = 0.0;
  std::vector<double> estimates;
};

struct EfficiencyReport {
  std::vector<EfficiencyRow> rows;
};

struct EfficiencyOptions {
  std::vector<double> censoring = {0.5, 0.75};
  std::vector<std::size_t> sizes = {1000, 5000};
  std::size_t replicates = 100;
  double beta0 = 0.0;
  double quantile = 0.75;
  std::uint64_t seed = 1;
  MetricOptions metric;
};

// Weighted JC of the EXP model over replicate datasets per (censoring, n).
// Truth: population integral at the population time quantile. lambda0 is
// calibrated once per censoring level. Replicate r of configuration c uses
// seed derive_seed(derive_seed(seed, c), r), c counting censoring-major.
EfficiencyReport efficiency_study(const EfficiencyOptions& options);

struct ComparisonRow {
  std::string model;
  MetricReport report;
};

struct ComparisonOptions {
  std::size_t n = 100000;
  double quantile = 0.75;
  std::uint64_t seed = 1;
  FitOptions fit;
};

struct ComparisonTable {
  double horizon = 0.0;
  std::vector<ComparisonRow> rows;  // EXP, CSC
  std::optional<CauseSpecificPH> csc;
};

// Uncensored cohort; horizon = sample quantile of its times; CSC fit in-sample.
ComparisonTable model_comparison(const ComparisonOptions& options);

json to_json(const EfficiencyReport& r);
json to_json(const ComparisonTable& t);

}  // namespace jcindex
