#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jcindex/censoring.hpp"
#include "jcindex/core.hpp"

namespace jcindex {

struct MetricOptions {
  // Ties in risk score earn half credit instead of none.
  bool tie_credit = false;
  // Literal reading of B_ij(d) = I(T_i > T_j, D_j != d): censored subjects
  // that left before i also act as comparators. Off by default; see README.
  bool censored_comparators = false;
};

// Risk scores M(X_i, t, d) and predicted types M_c(X_i, t) for every subject
// at one horizon.
class ScoreTable {
 public:
  ScoreTable(const Dataset& ds, const RiskModel& model, double horizon);
  // Rows are subject-major: scores[i * K + (d - 1)].
  ScoreTable(double horizon, int n_event_types, std::vector<double> scores, std::vector<EventCode> predicted);

  double horizon() const noexcept { return horizon_; }
  int n_event_types() const noexcept { return n_types_; }
  std::size_t size() const noexcept { return predicted_.size(); }

  double score(std::size_t i, EventCode d) const {
    return scores_[i * static_cast<std::size_t>(n_types_) + static_cast<std::size_t>(d - 1)];
  }
  EventCode predicted(std::size_t i) const { return predicted_[i]; }

  ScoreTable subset(std::span<const std::size_t> rows) const;

 private:
  double horizon_;
  int n_types_;
  std::vector<double> scores_;
  std::vector<EventCode> predicted_;
};

// Indicator values for one ordered pair (i, j) and event d.
struct PairIndicators {
  bool a = false;  // T_i < T_j
  bool b = false;  // T_i > T_j and D_j != d
  bool n = false;  // T_i <= t and D_i == d
  bool c = false;  // T_i < T_j or D_j != d
  bool q = false;  // M(X_i,t,d) > M(X_j,t,d) and M_c(X_i,t) == d
  // Comparator arm used by the weighted estimator: T_i >= T_j, j had an
  // observed event of a type other than d.
  bool competing = false;
};

PairIndicators pair_indicators(const Dataset& ds, const ScoreTable& scores, std::size_t i, std::size_t j,
                               EventCode d);

struct Tally {
  double numerator = 0.0;
  double denominator = 0.0;

  std::optional<double> value() const {
    if (denominator > 0.0) return numerator / denominator;
    return std::nullopt;
  }
  friend bool operator==(const Tally&, const Tally&) = default;
};

struct PairCounts {
  std::vector<Tally> concordance;  // one per event type
  Tally accuracy;
  Tally joint_concordance;
  Tally conditional_concordance;
  Tally accuracy_star;

  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

struct Interval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  std::size_t replicates = 0;  // requested
  std::size_t used = 0;
  std::size_t skipped = 0;
  std::vector<std::pair<std::string, std::size_t>> skip_reasons;
};

// Metric name -> percentile interval, in report field order.
using BootstrapSummary = std::vector<std::pair<std::string, Interval>>;

// Undefined ratios (zero denominator) are empty; JC itself is always defined.
struct MetricReport {
  double horizon = 0.0;
  std::vector<std::optional<double>> concordance_per_event;
  std::optional<double> accuracy;
  double joint_concordance = 0.0;
  std::optional<double> conditional_concordance;
  double accuracy_star = 0.0;
  PairCounts pair_counts;
  std::optional<BootstrapSummary> bootstrap_ci;
};

// Uncensored estimators (every record must have an event). O(n log n) per type.
MetricReport evaluate_uncensored(const Dataset& ds, const ScoreTable& scores, const MetricOptions& options = {});
// Censoring-weighted estimators. O(n^2); sums are exact, so results do not
// depend on how the pair scan is partitioned.
MetricReport evaluate_weighted(const Dataset& ds, const ScoreTable& scores, const CensoringModel& g,
                               const MetricOptions& options = {});

double concordance(const Dataset& ds, const RiskModel& model, double t, EventCode k,
                   const MetricOptions& options = {});
double accuracy(const Dataset& ds, const RiskModel& model, double t);
MetricReport joint_concordance(const Dataset& ds, const RiskModel& model, double t,
                               const MetricOptions& options = {});

MetricReport weighted_joint_concordance(const Dataset& ds, const RiskModel& model, const CensoringModel& g,
                                        double t, const MetricOptions& options = {});
double weighted_concordance(const Dataset& ds, const RiskModel& model, const CensoringModel& g, double t,
                            EventCode k, const MetricOptions& options = {});
double weighted_accuracy(const Dataset& ds, const RiskModel& model, const CensoringModel& g, double t);

// Which number to pull out of a report.
struct MetricSelector {
  enum class Kind { concordance, accuracy, joint_concordance, conditional_concordance, accuracy_star };
  Kind kind = Kind::joint_concordance;
  EventCode event = 1;  // used by Kind::concordance

  std::string name() const;
  std::optional<double> extract(const MetricReport& report) const;
};

std::vector<MetricSelector> all_metric_selectors(int n_event_types);

struct BootstrapOptions {
  std::size_t replicates = 200;
  double level = 0.95;
  std::uint64_t seed = 1;
  // Weighted estimator with the censoring model refit on each resample;
  // otherwise the uncensored estimator.
  bool weighted = true;
  MetricOptions metric;
};

// Percentile bootstrap over subjects. Model scores are fixed; the censoring
// model is refit per resample. Resamples on which a metric is undefined or
// fails (e.g. NoComparablePairs) are skipped and counted.
Interval bootstrap_ci(const Dataset& ds, const RiskModel& model, double t, const MetricSelector& selector,
                      const BootstrapOptions& options);
BootstrapSummary bootstrap_all(const Dataset& ds, const ScoreTable& scores, const BootstrapOptions& options);

}  // namespace jcindex
