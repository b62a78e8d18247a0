#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jcindex {

// Event codes: 0 is censoring, 1..K are competing event types.
using EventCode = int;
inline constexpr EventCode kCensored = 0;

struct SurvivalRecord {
  std::string id;
  std::vector<double> covariates;
  double time = 0.0;   // observed time min(T, C)
  EventCode event = kCensored;

  bool censored() const noexcept { return event == kCensored; }
};

// A row as it arrives from an external source, before validation.
// Missing covariate values are represented by std::nullopt.
struct RawRecord {
  std::string id;
  double time = 0.0;
  long long event = 0;
  std::vector<std::optional<double>> covariates;
};

struct ValidateOptions {
  // When set, K is fixed instead of being inferred as the largest observed code.
  std::optional<int> n_event_types;
};

class Dataset;

Dataset validate_dataset(std::vector<SurvivalRecord> records, std::vector<std::string> covariate_names,
                         const ValidateOptions& options = {});

class Dataset {
 public:
  const std::vector<SurvivalRecord>& records() const noexcept { return records_; }
  const SurvivalRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<std::string>& covariate_names() const noexcept { return names_; }

  std::size_t size() const noexcept { return records_.size(); }
  std::size_t dimension() const noexcept { return names_.size(); }
  int n_event_types() const noexcept { return n_types_; }

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<EventCode>& events() const noexcept { return events_; }
  std::span<const double> covariates(std::size_t i) const { return records_[i].covariates; }

  bool has_censoring() const noexcept { return n_censored_ > 0; }
  std::size_t n_censored() const noexcept { return n_censored_; }
  std::size_t count_of(EventCode k) const;

  // Covariate column j over all records.
  std::vector<double> column(std::size_t j) const;

  // Rows in the given order (duplicates allowed). K is kept.
  Dataset subset(std::span<const std::size_t> rows) const;
  // Keeps only the listed covariate columns, in the listed order.
  Dataset select_covariates(std::span<const std::size_t> columns) const;
  // Recodes every event type to 1 (censoring stays 0); K becomes 1.
  Dataset lumped() const;

  friend Dataset validate_dataset(std::vector<SurvivalRecord>, std::vector<std::string>,
                                  const ValidateOptions&);

 private:
  Dataset() = default;

  std::vector<SurvivalRecord> records_;
  std::vector<std::string> names_;
  int n_types_ = 0;
  std::vector<double> times_;
  std::vector<EventCode> events_;
  std::size_t n_censored_ = 0;
};

// Validates parsed rows. Records keep input order.
// Throws Error with NegativeTime, MissingCovariate, InconsistentDimension,
// NoEventsOfType or EmptyDataset.
Dataset validate_dataset(const std::vector<RawRecord>& rows, std::vector<std::string> covariate_names,
                         const ValidateOptions& options = {});

// Empirical quantile of the observed times, linear interpolation between
// order statistics (Hyndman-Fan type 7): h = (n - 1) q, x[floor h] + frac(h) * gap.
double evaluation_horizon(const Dataset& ds, double quantile);
double empirical_quantile(std::vector<double> values, double quantile);

// Risk model interface: M(x, t, d) and the event-type prediction M_c(x, t).
// Implementations must be deterministic and safe for concurrent calls.
class RiskModel {
 public:
  virtual ~RiskModel() = default;

  virtual int n_event_types() const = 0;
  virtual double risk(std::span<const double> x, double t, EventCode d) const = 0;

  // Default: argmax of risk over d = 1..K, ties toward the smallest code.
  virtual EventCode predict_type(std::span<const double> x, double t) const;

  // Writes risk(x, t, d) for d = 1..K into `out` and returns predict_type(x, t).
  // Models whose risks share work (e.g. one CIF pass) override this.
  virtual EventCode score_all(std::span<const double> x, double t, std::span<double> out) const;

  // score_all for records [begin, end) of ds: scores are subject-major with K
  // entries per subject, predicted has one entry per subject.
  virtual void score_rows(const Dataset& ds, std::size_t begin, std::size_t end, double t, std::span<double> scores,
                          std::span<EventCode> predicted) const;
};

}  // namespace jcindex
