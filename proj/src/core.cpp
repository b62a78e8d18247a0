#include "jcindex/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jcindex/error.hpp"

namespace jcindex {

std::size_t Dataset::count_of(EventCode k) const {
  return static_cast<std::size_t>(std::count(events_.begin(), events_.end(), k));
}

std::vector<double> Dataset::column(std::size_t j) const {
  if (j >= dimension()) throw Error(ErrorCode::InvalidArgument, "covariate column out of range");
  std::vector<double> out;
  out.reserve(size());
  for (const auto& r : records_) out.push_back(r.covariates[j]);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<SurvivalRecord> picked;
  picked.reserve(rows.size());
  for (std::size_t i : rows) {
    if (i >= size()) throw Error(ErrorCode::InvalidArgument, "row index out of range");
    picked.push_back(records_[i]);
  }
  return validate_dataset(std::move(picked), names_, ValidateOptions{n_types_});
}

Dataset Dataset::select_covariates(std::span<const std::size_t> columns) const {
  std::vector<std::string> names;
  for (std::size_t j : columns) {
    if (j >= dimension()) throw Error(ErrorCode::InvalidArgument, "covariate column out of range");
    names.push_back(names_[j]);
  }
  std::vector<SurvivalRecord> out = records_;
  for (auto& r : out) {
    std::vector<double> x;
    x.reserve(columns.size());
    for (std::size_t j : columns) x.push_back(r.covariates[j]);
    r.covariates = std::move(x);
  }
  return validate_dataset(std::move(out), std::move(names), ValidateOptions{n_types_});
}

Dataset Dataset::lumped() const {
  std::vector<SurvivalRecord> out = records_;
  for (auto& r : out) {
    if (r.event != kCensored) r.event = 1;
  }
  return validate_dataset(std::move(out), names_, ValidateOptions{1});
}

Dataset validate_dataset(std::vector<SurvivalRecord> records, std::vector<std::string> covariate_names,
                         const ValidateOptions& options) {
  if (records.size() < 2) {
    throw Error(ErrorCode::EmptyDataset,
                "a dataset needs at least two records, got " + std::to_string(records.size()));
  }
  const std::size_t d = covariate_names.size();
  int max_code = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!std::isfinite(r.time) || r.time < 0.0) {
      throw Error(ErrorCode::NegativeTime,
                  "record " + std::to_string(i) + " (" + r.id + ") has time " + std::to_string(r.time));
    }
    if (r.covariates.size() != d) {
      throw Error(ErrorCode::InconsistentDimension,
                  "record " + std::to_string(i) + " has " + std::to_string(r.covariates.size()) +
                      " covariates, expected " + std::to_string(d));
    }
    for (double v : r.covariates) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::MissingCovariate, "record " + std::to_string(i) + " has a non-finite covariate");
      }
    }
    if (r.event < 0) {
      throw Error(ErrorCode::ParseError, "record " + std::to_string(i) + " has a negative event code");
    }
    max_code = std::max(max_code, r.event);
  }

  const int k_types = options.n_event_types.value_or(max_code);
  if (k_types < 1 || max_code > k_types) {
    if (max_code > k_types) {
      throw Error(ErrorCode::InvalidArgument, "event code " + std::to_string(max_code) +
                                                  " exceeds the declared number of event types");
    }
    throw Error(ErrorCode::NoEventsOfType, "no events of type 1 (every record is censored)");
  }

  Dataset ds;
  ds.n_types_ = k_types;
  ds.times_.reserve(records.size());
  ds.events_.reserve(records.size());
  for (const auto& r : records) {
    ds.times_.push_back(r.time);
    ds.events_.push_back(r.event);
    if (r.event == kCensored) ++ds.n_censored_;
  }
  for (int k = 1; k <= k_types; ++k) {
    if (std::find(ds.events_.begin(), ds.events_.end(), k) == ds.events_.end()) {
      throw Error(ErrorCode::NoEventsOfType, "no records with event type " + std::to_string(k));
    }
  }
  ds.records_ = std::move(records);
  ds.names_ = std::move(covariate_names);
  return ds;
}

Dataset validate_dataset(const std::vector<RawRecord>& rows, std::vector<std::string> covariate_names,
                         const ValidateOptions& options) {
  if (rows.size() < 2) {
    throw Error(ErrorCode::EmptyDataset,
                "a dataset needs at least two records, got " + std::to_string(rows.size()));
  }
  const std::size_t d = covariate_names.size();
  std::vector<SurvivalRecord> records;
  records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.covariates.size() != d) {
      throw Error(ErrorCode::InconsistentDimension,
                  "row " + std::to_string(i) + " has " + std::to_string(row.covariates.size()) +
                      " covariates, expected " + std::to_string(d));
    }
    SurvivalRecord r;
    r.id = row.id;
    r.time = row.time;
    if (row.event < 0 || row.event > 1'000'000) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(i) + " has an invalid event code");
    }
    r.event = static_cast<EventCode>(row.event);
    r.covariates.reserve(d);
    for (const auto& v : row.covariates) {
      if (!v) throw Error(ErrorCode::MissingCovariate, "row " + std::to_string(i) + " has a missing covariate");
      r.covariates.push_back(*v);
    }
    records.push_back(std::move(r));
  }
  return validate_dataset(std::move(records), std::move(covariate_names), options);
}

double empirical_quantile(std::vector<double> values, double quantile) {
  if (values.empty()) throw Error(ErrorCode::EmptyDataset, "quantile of an empty sample");
  if (!(quantile > 0.0 && quantile <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "quantile must lie in (0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * quantile;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double evaluation_horizon(const Dataset& ds, double quantile) {
  return empirical_quantile(ds.times(), quantile);
}

EventCode RiskModel::predict_type(std::span<const double> x, double t) const {
  EventCode best = 1;
  double best_risk = risk(x, t, 1);
  for (EventCode d = 2; d <= n_event_types(); ++d) {
    const double r = risk(x, t, d);
    if (r > best_risk) {
      best = d;
      best_risk = r;
    }
  }
  return best;
}

EventCode RiskModel::score_all(std::span<const double> x, double t, std::span<double> out) const {
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = risk(x, t, static_cast<EventCode>(d + 1));
  return predict_type(x, t);
}

void RiskModel::score_rows(const Dataset& ds, std::size_t begin, std::size_t end, double t, std::span<double> scores,
                           std::span<EventCode> predicted) const {
  const auto k = static_cast<std::size_t>(n_event_types());
  for (std::size_t i = begin; i < end; ++i) {
    predicted[i - begin] = score_all(ds.covariates(i), t, scores.subspan((i - begin) * k, k));
  }
}

}  // namespace jcindex
