#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jcindex/core.hpp"
#include "jcindex/metrics.hpp"
#include "jcindex/models.hpp"

namespace jcindex {

enum class RankMethod { stepwise_cr, stepwise_lumped, standardized_coef };

const char* method_name(RankMethod m) noexcept;
RankMethod parse_method(const std::string& name);

// One covariate's row. For the stepwise methods `metric` is the evaluation
// metric after removing this covariate and `delta` the change it caused; the
// last survivor has neither. For standardized_coef `metric` holds |beta * sd|.
struct RankEntry {
  std::string covariate;
  int round = 0;  // elimination round, 1 = dropped first
  int rank = 0;   // 1 = most important
  std::optional<double> metric;
  std::optional<double> delta;
};

struct CandidateFailure {
  int round = 0;
  std::string covariate;  // the candidate whose removal failed
  std::string error;      // error name
  std::string message;
};

struct RankingResult {
  RankMethod method = RankMethod::stepwise_cr;
  double horizon = 0.0;
  std::optional<double> baseline_metric;  // all covariates kept
  std::vector<RankEntry> entries;         // elimination order
  std::vector<CandidateFailure> failures;
  std::vector<std::string> warnings;

  // Covariate names, most important first.
  std::vector<std::string> importance_order() const;
};

struct RankOptions {
  FitOptions fit;
  // 0 or 1: in-sample evaluation. k >= 2: k-fold, metric averaged over folds;
  // the censoring model is fit on each test fold.
  std::size_t folds = 0;
  std::uint64_t seed = 1;
  MetricOptions metric;
};

// Backward elimination under the censoring-weighted joint concordance of a
// cause-specific PH model: each round drops the covariate whose removal
// changes JC least in absolute value (ties by covariate order). Candidates
// whose refit fails are recorded and treated as the worst choice.
RankingResult stepwise_cr_rank(const Dataset& ds, double t, const RankOptions& options = {});
// Same elimination on the lumped data (all event types as one) under the
// weighted single-event concordance.
RankingResult stepwise_lumped_rank(const Dataset& ds, double t, const RankOptions& options = {});
// |beta_v * sd(X_v)| of the lumped PH model, descending; ties by covariate order.
RankingResult standardized_coef_rank(const Dataset& ds, double t, const RankOptions& options = {});

RankingResult rank_variables(RankMethod method, const Dataset& ds, double t, const RankOptions& options = {});

}  // namespace jcindex
