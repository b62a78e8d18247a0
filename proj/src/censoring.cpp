#include "jcindex/censoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jcindex/error.hpp"

namespace jcindex {

CensoringModel::CensoringModel(std::vector<double> jump_times, std::vector<double> survival_values)
    : jump_times_(std::move(jump_times)), survival_values_(std::move(survival_values)) {
  if (jump_times_.size() != survival_values_.size()) {
    throw Error(ErrorCode::InvalidArgument, "censoring model arrays differ in length");
  }
  double prev_t = 0.0;
  double prev_g = 1.0;
  for (std::size_t i = 0; i < jump_times_.size(); ++i) {
    const double t = jump_times_[i];
    const double g = survival_values_[i];
    if (!std::isfinite(t) || t < 0.0 || (i > 0 && t <= prev_t)) {
      throw Error(ErrorCode::InvalidArgument, "censoring jump times must be finite and increasing");
    }
    if (!(g >= 0.0 && g <= prev_g)) {
      throw Error(ErrorCode::InvalidArgument, "censoring survival must be non-increasing in [0, 1]");
    }
    prev_t = t;
    prev_g = g;
  }
}

double CensoringModel::survival_at(double t) const {
  const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  if (it == jump_times_.begin()) return 1.0;
  return survival_values_[static_cast<std::size_t>(it - jump_times_.begin()) - 1];
}

double CensoringModel::survival_before(double t) const {
  const auto it = std::lower_bound(jump_times_.begin(), jump_times_.end(), t);
  if (it == jump_times_.begin()) return 1.0;
  return survival_values_[static_cast<std::size_t>(it - jump_times_.begin()) - 1];
}

CensoringModel fit_km_censoring(std::span<const double> times, std::span<const EventCode> events) {
  if (times.empty()) throw Error(ErrorCode::EmptyDataset, "cannot fit a censoring model to no records");
  if (times.size() != events.size()) throw Error(ErrorCode::InvalidArgument, "times/events length mismatch");

  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  std::vector<double> jumps;
  std::vector<double> values;
  double g = 1.0;
  std::size_t at_risk = times.size();
  std::size_t pos = 0;
  while (pos < order.size()) {
    const double t = times[order[pos]];
    std::size_t tied = 0;
    std::size_t censored = 0;
    while (pos + tied < order.size() && times[order[pos + tied]] == t) {
      if (events[order[pos + tied]] == kCensored) ++censored;
      ++tied;
    }
    if (censored > 0) {
      g *= 1.0 - static_cast<double>(censored) / static_cast<double>(at_risk);
      jumps.push_back(t);
      values.push_back(g);
    }
    at_risk -= tied;
    pos += tied;
  }
  return CensoringModel(std::move(jumps), std::move(values));
}

CensoringModel fit_km_censoring(const Dataset& ds) {
  return fit_km_censoring(std::span<const double>(ds.times()), std::span<const EventCode>(ds.events()));
}

}  // namespace jcindex
