#include <algorithm>
#include <limits>
#include <map>

#include "jcindex/error.hpp"
#include "jcindex/metrics.hpp"
#include "jcindex/parallel.hpp"
#include "jcindex/rng.hpp"

namespace jcindex {
namespace {

MetricReport evaluate(const Dataset& ds, const ScoreTable& scores, const BootstrapOptions& options) {
  if (options.weighted) return evaluate_weighted(ds, scores, fit_km_censoring(ds), options.metric);
  return evaluate_uncensored(ds, scores, options.metric);
}

struct Replicate {
  std::optional<MetricReport> report;
  std::string failure;
};

}  // namespace

BootstrapSummary bootstrap_all(const Dataset& ds, const ScoreTable& scores, const BootstrapOptions& options) {
  if (options.replicates < 100) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least 100 replicates");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence level must lie in (0, 1)");
  }
  const MetricReport point = evaluate(ds, scores, options);
  const std::size_t n = ds.size();

  std::vector<Replicate> reps(options.replicates);
  parallel_chunks(options.replicates, 1, [&](std::size_t b, std::size_t, std::size_t) {
    Rng rng(derive_seed(options.seed, b));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = static_cast<std::size_t>(rng.index(n));
    try {
      const Dataset resampled = ds.subset(rows);
      reps[b].report = evaluate(resampled, scores.subset(rows), options);
    } catch (const Error& e) {
      reps[b].failure = e.name();
    }
  });

  BootstrapSummary summary;
  for (const auto& selector : all_metric_selectors(ds.n_event_types())) {
    Interval iv;
    iv.level = options.level;
    iv.replicates = options.replicates;
    iv.estimate = selector.extract(point).value_or(std::numeric_limits<double>::quiet_NaN());
    std::map<std::string, std::size_t> reasons;
    std::vector<double> values;
    for (const auto& rep : reps) {
      if (!rep.report) {
        ++reasons[rep.failure];
        continue;
      }
      const auto v = selector.extract(*rep.report);
      if (!v) {
        ++reasons["Undefined"];
        continue;
      }
      values.push_back(*v);
    }
    iv.used = values.size();
    iv.skipped = options.replicates - values.size();
    iv.skip_reasons.assign(reasons.begin(), reasons.end());
    if (values.empty()) {
      iv.lower = iv.upper = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double alpha = (1.0 - options.level) / 2.0;
      iv.lower = empirical_quantile(values, alpha);
      iv.upper = empirical_quantile(values, 1.0 - alpha);
    }
    summary.emplace_back(selector.name(), std::move(iv));
  }
  return summary;
}

Interval bootstrap_ci(const Dataset& ds, const RiskModel& model, double t, const MetricSelector& selector,
                      const BootstrapOptions& options) {
  const ScoreTable scores(ds, model, t);
  auto summary = bootstrap_all(ds, scores, options);
  const std::string name = selector.name();
  for (auto& [metric, iv] : summary) {
    if (metric != name) continue;
    if (iv.used == 0) throw Error(ErrorCode::NoComparablePairs, "every bootstrap resample was skipped for " + name);
    return iv;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown metric " + name);
}

}  // namespace jcindex
