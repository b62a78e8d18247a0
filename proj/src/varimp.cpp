#include "jcindex/varimp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "jcindex/censoring.hpp"
#include "jcindex/error.hpp"
#include "jcindex/parallel.hpp"
#include "jcindex/rng.hpp"

namespace jcindex {

const char* method_name(RankMethod m) noexcept {
  switch (m) {
    case RankMethod::stepwise_cr:
      return "stepwise_cr";
    case RankMethod::stepwise_lumped:
      return "stepwise_lumped";
    case RankMethod::standardized_coef:
      return "standardized_coef";
  }
  return "unknown";
}

RankMethod parse_method(const std::string& name) {
  for (auto m : {RankMethod::stepwise_cr, RankMethod::stepwise_lumped, RankMethod::standardized_coef}) {
    if (name == method_name(m)) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown ranking method '" + name + "'");
}

std::vector<std::string> RankingResult::importance_order() const {
  std::vector<const RankEntry*> sorted;
  for (const auto& e : entries) sorted.push_back(&e);
  std::stable_sort(sorted.begin(), sorted.end(), [](const RankEntry* a, const RankEntry* b) { return a->rank < b->rank; });
  std::vector<std::string> out;
  for (const auto* e : sorted) out.push_back(e->covariate);
  return out;
}

namespace {

using Evaluator = std::function<double(const Dataset&)>;

// Fit on `train`, weighted metric on `test` with KM fit on `test`.
double fit_and_score(const Dataset& train, const Dataset& test, double t, const RankOptions& options, bool joint) {
  const CauseSpecificPH model = fit_cause_specific(train, options.fit);
  const ScoreTable scores(test, model, t);
  const MetricReport report = evaluate_weighted(test, scores, fit_km_censoring(test), options.metric);
  if (joint) return report.joint_concordance;
  if (!report.concordance_per_event.front()) throw Error(ErrorCode::NoComparablePairs, "concordance undefined");
  return *report.concordance_per_event.front();
}

std::vector<std::vector<std::size_t>> fold_rows(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0));
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.index(i))]);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(perm[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

double evaluate_subset(const Dataset& ds, double t, const RankOptions& options, bool joint) {
  if (options.folds < 2) return fit_and_score(ds, ds, t, options, joint);
  if (options.folds > ds.size()) throw Error(ErrorCode::InvalidArgument, "more folds than subjects");
  const auto folds = fold_rows(ds.size(), options.folds, options.seed);
  double sum = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train.begin(), train.end());
    sum += fit_and_score(ds.subset(train), ds.subset(folds[f]), t, options, joint);
  }
  return sum / static_cast<double>(folds.size());
}

RankingResult backward_elimination(RankMethod method, const Dataset& ds, double t, const RankOptions& options,
                                   bool joint) {
  RankingResult result;
  result.method = method;
  result.horizon = t;
  const std::size_t d = ds.dimension();
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "dataset has no covariates");

  auto metric_of = [&](const std::vector<std::size_t>& cols) {
    return evaluate_subset(ds.select_covariates(cols), t, options, joint);
  };

  std::vector<std::size_t> remaining(d);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  if (d == 1) {
    result.warnings.push_back("single covariate: ranked 1 without elimination");
    result.entries.push_back({ds.covariate_names()[0], 1, 1, std::nullopt, std::nullopt});
    return result;
  }

  std::optional<double> current;
  try {
    current = metric_of(remaining);
  } catch (const Error& e) {
    result.failures.push_back({0, "", e.name(), e.what()});
  }
  result.baseline_metric = current;

  for (int round = 1; remaining.size() > 1; ++round) {
    const std::size_t m = remaining.size();
    std::vector<std::optional<double>> values(m);
    std::vector<std::optional<CandidateFailure>> failed(m);
    parallel_chunks(m, 1, [&](std::size_t c, std::size_t, std::size_t) {
      std::vector<std::size_t> cols;
      for (std::size_t r = 0; r < m; ++r) {
        if (r != c) cols.push_back(remaining[r]);
      }
      try {
        values[c] = metric_of(cols);
      } catch (const Error& e) {
        failed[c] = CandidateFailure{round, ds.covariate_names()[remaining[c]], e.name(), e.what()};
      }
    });

    // Smallest |change|; candidates without a value lose to any with one.
    // Without a reference metric, the raw metric is compared instead.
    std::size_t best = m;
    double best_change = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      if (failed[c]) result.failures.push_back(*failed[c]);
      if (!values[c]) continue;
      const double change = current ? std::fabs(*values[c] - *current) : -*values[c];
      if (best == m || change < best_change) {
        best = c;
        best_change = change;
      }
    }
    RankEntry entry;
    entry.round = round;
    entry.rank = static_cast<int>(d) - round + 1;
    if (best == m) {
      best = 0;  // every refit failed: fall back to covariate order
    } else {
      entry.metric = values[best];
      if (current) entry.delta = *values[best] - *current;
    }
    entry.covariate = ds.covariate_names()[remaining[best]];
    current = entry.metric;
    result.entries.push_back(std::move(entry));
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  result.entries.push_back({ds.covariate_names()[remaining[0]], static_cast<int>(d), 1, std::nullopt, std::nullopt});
  return result;
}

}  // namespace

RankingResult stepwise_cr_rank(const Dataset& ds, double t, const RankOptions& options) {
  return backward_elimination(RankMethod::stepwise_cr, ds, t, options, true);
}

RankingResult stepwise_lumped_rank(const Dataset& ds, double t, const RankOptions& options) {
  return backward_elimination(RankMethod::stepwise_lumped, ds.lumped(), t, options, false);
}

RankingResult standardized_coef_rank(const Dataset& ds, double t, const RankOptions& options) {
  RankingResult result;
  result.method = RankMethod::standardized_coef;
  result.horizon = t;
  const std::size_t d = ds.dimension();
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "dataset has no covariates");
  const Dataset lumped = ds.lumped();
  std::optional<CauseSpecificPH> model;
  try {
    model.emplace(fit_cause_specific(lumped, options.fit));
  } catch (const Error& e) {
    throw Error(ErrorCode::FitFailure, std::string("lumped model fit failed: ") + e.what());
  }
  const auto& beta = model->causes().front().coefficients;
  std::vector<double> score(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = lumped.column(j);
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(col.size() - 1));
    score[j] = std::fabs(beta[j] * sd);
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  // Listed least important first, like an elimination sequence.
  for (std::size_t r = 0; r < d; ++r) {
    const std::size_t j = order[d - 1 - r];
    RankEntry e;
    e.covariate = ds.covariate_names()[j];
    e.round = static_cast<int>(r + 1);
    e.rank = static_cast<int>(d - r);
    e.metric = score[j];
    result.entries.push_back(std::move(e));
  }
  if (d == 1) result.warnings.push_back("single covariate: ranked 1 without elimination");
  return result;
}

RankingResult rank_variables(RankMethod method, const Dataset& ds, double t, const RankOptions& options) {
  switch (method) {
    case RankMethod::stepwise_cr:
      return stepwise_cr_rank(ds, t, options);
    case RankMethod::stepwise_lumped:
      return stepwise_lumped_rank(ds, t, options);
    case RankMethod::standardized_coef:
      return standardized_coef_rank(ds, t, options);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown ranking method");
}

}  // namespace jcindex
