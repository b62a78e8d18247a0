#pragma once

#include <span>
#include <vector>

#include "jcindex/core.hpp"

namespace jcindex {

// Censoring survival G(t) = Pr(C > t) as a right-continuous step function
// with G(0) = 1. Immutable once built.
class CensoringModel {
 public:
  // G == 1 everywhere.
  CensoringModel() = default;
  // jump_times strictly increasing and positive; survival_values the value of G
  // at (and right after) each jump, non-increasing within [0, 1].
  CensoringModel(std::vector<double> jump_times, std::vector<double> survival_values);

  double survival_at(double t) const;      // G(t)
  double survival_before(double t) const;  // G(t-)

  const std::vector<double>& jump_times() const noexcept { return jump_times_; }
  const std::vector<double>& survival_values() const noexcept { return survival_values_; }

 private:
  std::vector<double> jump_times_;
  std::vector<double> survival_values_;
};

// Reverse Kaplan-Meier: censoring (event 0) is the event of interest. At a
// time with c censorings and r subjects still at risk (time >= t), the product
// is multiplied by 1 - c / r. Subjects with a true event at that same time are
// counted in r, i.e. events precede simultaneous censorings.
CensoringModel fit_km_censoring(const Dataset& ds);
CensoringModel fit_km_censoring(std::span<const double> times, std::span<const EventCode> events);

}  // namespace jcindex
