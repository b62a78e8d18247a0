#include "jcindex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jcindex/error.hpp"
#include "jcindex/exact_sum.hpp"
#include "jcindex/parallel.hpp"

namespace jcindex {
namespace {

constexpr std::size_t kScoreChunk = 256;
constexpr std::size_t kPairChunk = 64;

void check_compatible(const Dataset& ds, const ScoreTable& scores) {
  if (scores.size() != ds.size()) {
    throw Error(ErrorCode::DimensionMismatch, "score table and dataset differ in size");
  }
  if (scores.n_event_types() != ds.n_event_types()) {
    throw Error(ErrorCode::DimensionMismatch, "model has " + std::to_string(scores.n_event_types()) +
                                                  " event types, dataset has " +
                                                  std::to_string(ds.n_event_types()));
  }
}

// Fenwick tree over score ranks.
class RankCounter {
 public:
  explicit RankCounter(std::size_t n) : tree_(n + 1, 0) {}
  void insert(std::size_t rank) {
    for (std::size_t i = rank + 1; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // Number of inserted ranks < rank.
  std::int64_t below(std::size_t rank) const {
    std::int64_t s = 0;
    for (std::size_t i = rank; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::int64_t> tree_;
};

struct UncensoredTerms {
  std::int64_t den = 0;
  std::int64_t num2 = 0;  // numerator in half-credit units
};

// Per-subject comparable-pair and concordant-pair counts for the uncensored
// definitions. For i with D_i = d and T_i <= t, the comparators are all j != i
// except those with D_j = d and T_j <= T_i.
std::vector<UncensoredTerms> uncensored_terms(const Dataset& ds, const ScoreTable& scores,
                                              const MetricOptions& options) {
  const std::size_t n = ds.size();
  const double t = scores.horizon();
  const auto& times = ds.times();
  const auto& events = ds.events();
  std::vector<UncensoredTerms> terms(n);

  for (EventCode d = 1; d <= ds.n_event_types(); ++d) {
    std::vector<double> sorted(n);
    for (std::size_t j = 0; j < n; ++j) sorted[j] = scores.score(j, d);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> unique_scores = sorted;
    unique_scores.erase(std::unique(unique_scores.begin(), unique_scores.end()), unique_scores.end());
    auto rank_of = [&](double s) {
      return static_cast<std::size_t>(std::lower_bound(unique_scores.begin(), unique_scores.end(), s) -
                                      unique_scores.begin());
    };

    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (events[i] == d) members.push_back(i);
    }
    std::stable_sort(members.begin(), members.end(),
                     [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    RankCounter inserted(unique_scores.size());
    std::vector<std::int64_t> rank_count(unique_scores.size(), 0);
    std::int64_t n_inserted = 0;
    std::size_t pos = 0;
    while (pos < members.size()) {
      const double tg = times[members[pos]];
      if (tg > t) break;
      std::size_t end = pos;
      while (end < members.size() && times[members[end]] == tg) {
        const std::size_t r = rank_of(scores.score(members[end], d));
        inserted.insert(r);
        ++rank_count[r];
        ++n_inserted;
        ++end;
      }
      for (std::size_t m = pos; m < end; ++m) {
        const std::size_t i = members[m];
        const double s = scores.score(i, d);
        const std::size_t r = rank_of(s);
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), s);
        const auto hi = std::upper_bound(lo, sorted.end(), s);
        const std::int64_t less_all = lo - sorted.begin();
        const std::int64_t eq_all = hi - lo;  // includes i
        const std::int64_t less_sub = inserted.below(r);
        const std::int64_t eq_sub = rank_count[r];  // includes i

        UncensoredTerms& out = terms[i];
        out.den = static_cast<std::int64_t>(n) - n_inserted;
        out.num2 = 2 * (less_all - less_sub);
        if (options.tie_credit) out.num2 += eq_all - eq_sub;
      }
      pos = end;
    }
  }
  return terms;
}

std::optional<double> ratio(const Tally& t) { return t.value(); }

MetricReport finish_report(double horizon, PairCounts counts) {
  MetricReport report;
  report.horizon = horizon;
  if (!(counts.joint_concordance.denominator > 0.0)) {
    throw Error(ErrorCode::NoComparablePairs, "no comparable pairs before the horizon");
  }
  for (const auto& c : counts.concordance) report.concordance_per_event.push_back(ratio(c));
  report.accuracy = ratio(counts.accuracy);
  report.joint_concordance = counts.joint_concordance.numerator / counts.joint_concordance.denominator;
  report.conditional_concordance = ratio(counts.conditional_concordance);
  report.accuracy_star = counts.accuracy_star.numerator / counts.accuracy_star.denominator;
  report.pair_counts = std::move(counts);
  return report;
}

}  // namespace

ScoreTable::ScoreTable(const Dataset& ds, const RiskModel& model, double horizon)
    : horizon_(horizon), n_types_(model.n_event_types()) {
  if (!std::isfinite(horizon) || horizon < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "horizon must be finite and nonnegative");
  }
  if (n_types_ < 1) throw Error(ErrorCode::InvalidArgument, "model must have at least one event type");
  const std::size_t n = ds.size();
  const auto k = static_cast<std::size_t>(n_types_);
  scores_.assign(n * k, 0.0);
  predicted_.assign(n, 1);
  parallel_chunks(n, kScoreChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
    const std::span<double> block(scores_.data() + begin * k, (end - begin) * k);
    model.score_rows(ds, begin, end, horizon, block, std::span<EventCode>(predicted_.data() + begin, end - begin));
    for (double s : block) {
      if (!std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "model produced a non-finite risk");
    }
  });
}

ScoreTable::ScoreTable(double horizon, int n_event_types, std::vector<double> scores,
                       std::vector<EventCode> predicted)
    : horizon_(horizon), n_types_(n_event_types), scores_(std::move(scores)), predicted_(std::move(predicted)) {
  if (n_types_ < 1 || scores_.size() != predicted_.size() * static_cast<std::size_t>(n_types_)) {
    throw Error(ErrorCode::DimensionMismatch, "score table shape mismatch");
  }
}

ScoreTable ScoreTable::subset(std::span<const std::size_t> rows) const {
  const auto k = static_cast<std::size_t>(n_types_);
  std::vector<double> s;
  std::vector<EventCode> p;
  s.reserve(rows.size() * k);
  p.reserve(rows.size());
  for (std::size_t i : rows) {
    for (std::size_t d = 0; d < k; ++d) s.push_back(scores_[i * k + d]);
    p.push_back(predicted_[i]);
  }
  return ScoreTable(horizon_, n_types_, std::move(s), std::move(p));
}

PairIndicators pair_indicators(const Dataset& ds, const ScoreTable& scores, std::size_t i, std::size_t j,
                               EventCode d) {
  const double ti = ds.times()[i];
  const double tj = ds.times()[j];
  const EventCode di = ds.events()[i];
  const EventCode dj = ds.events()[j];
  PairIndicators out;
  out.a = ti < tj;
  out.b = ti > tj && dj != d;
  out.n = ti <= scores.horizon() && di == d;
  out.c = ti < tj || dj != d;
  out.q = scores.score(i, d) > scores.score(j, d) && scores.predicted(i) == d;
  out.competing = i != j && ti >= tj && dj != kCensored && dj != d;
  return out;
}

MetricReport evaluate_uncensored(const Dataset& ds, const ScoreTable& scores, const MetricOptions& options) {
  check_compatible(ds, scores);
  if (ds.has_censoring()) {
    throw Error(ErrorCode::CensoredRecordsPresent,
                "uncensored estimator requires every record to have an observed event");
  }
  const auto terms = uncensored_terms(ds, scores, options);
  const int k_types = ds.n_event_types();
  const double t = scores.horizon();

  std::vector<std::int64_t> c_num2(static_cast<std::size_t>(k_types), 0);
  std::vector<std::int64_t> c_den(static_cast<std::size_t>(k_types), 0);
  std::int64_t jc_num2 = 0;
  std::int64_t cc_den = 0;
  std::int64_t acc_num = 0;
  std::int64_t acc_den = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.times()[i] > t) continue;
    const EventCode d = ds.events()[i];
    const auto k = static_cast<std::size_t>(d - 1);
    const bool correct = scores.predicted(i) == d;
    c_num2[k] += terms[i].num2;
    c_den[k] += terms[i].den;
    ++acc_den;
    if (correct) {
      jc_num2 += terms[i].num2;
      cc_den += terms[i].den;
      ++acc_num;
    }
  }

  PairCounts counts;
  std::int64_t jc_den = 0;
  for (int k = 0; k < k_types; ++k) {
    counts.concordance.push_back(Tally{static_cast<double>(c_num2[static_cast<std::size_t>(k)]) / 2.0,
                                       static_cast<double>(c_den[static_cast<std::size_t>(k)])});
    jc_den += c_den[static_cast<std::size_t>(k)];
  }
  counts.accuracy = Tally{static_cast<double>(acc_num), static_cast<double>(acc_den)};
  counts.joint_concordance = Tally{static_cast<double>(jc_num2) / 2.0, static_cast<double>(jc_den)};
  counts.conditional_concordance = Tally{static_cast<double>(jc_num2) / 2.0, static_cast<double>(cc_den)};
  counts.accuracy_star = Tally{static_cast<double>(cc_den), static_cast<double>(jc_den)};
  return finish_report(t, std::move(counts));
}

MetricReport evaluate_weighted(const Dataset& ds, const ScoreTable& scores, const CensoringModel& g,
                               const MetricOptions& options) {
  check_compatible(ds, scores);
  const std::size_t n = ds.size();
  const int k_types = ds.n_event_types();
  const auto ku = static_cast<std::size_t>(k_types);
  const double t = scores.horizon();
  const auto& times = ds.times();
  const auto& events = ds.events();

  std::vector<double> g_at(n);
  std::vector<double> g_before(n);
  for (std::size_t i = 0; i < n; ++i) {
    g_at[i] = g.survival_at(times[i]);
    g_before[i] = g.survival_before(times[i]);
  }

  // Subjects in time order; block_end[p] is one past the last position tied
  // with position p.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  std::vector<std::size_t> block_begin(n);
  std::vector<std::size_t> block_end(n);
  for (std::size_t p = 0; p < n;) {
    std::size_t q = p;
    while (q < n && times[order[q]] == times[order[p]]) ++q;
    for (std::size_t r = p; r < q; ++r) {
      block_begin[r] = p;
      block_end[r] = q;
    }
    p = q;
  }
  std::vector<double> sorted_times(n);
  std::vector<EventCode> sorted_events(n);
  std::vector<double> sorted_g(n);
  std::vector<double> sorted_scores(n * ku);
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t j = order[p];
    sorted_times[p] = times[j];
    sorted_events[p] = events[j];
    sorted_g[p] = g_at[j];
    for (std::size_t k = 0; k < ku; ++k) sorted_scores[k * n + p] = scores.score(j, static_cast<EventCode>(k + 1));
  }

  struct Partial {
    std::vector<ExactSum> c_num, c_den;
    ExactSum jc_num, cc_den, acc_num, acc_den;
  };
  const std::size_t chunks = chunk_count(n, kPairChunk);
  std::vector<Partial> partials(chunks);

  parallel_chunks(n, kPairChunk, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Partial& acc = partials[chunk];
    acc.c_num.resize(ku);
    acc.c_den.resize(ku);
    ExactSum num_i;
    ExactSum den_i;
    for (std::size_t p = begin; p < end; ++p) {
      const EventCode d = sorted_events[p];
      if (d == kCensored || sorted_times[p] > t) continue;
      const std::size_t i = order[p];
      const double gm = g_before[i];
      if (!(gm > 0.0)) {
        throw Error(ErrorCode::ZeroCensoringSurvival,
                    "censoring survival is zero just before time " + std::to_string(times[i]));
      }
      const double* s = &sorted_scores[static_cast<std::size_t>(d - 1) * n];
      const double si = s[p];
      num_i.clear();
      den_i.clear();

      // Subjects still at risk after T_i: weight 1 / (G(T_i-) G(T_i)).
      double later = 0.0;
      double later_less = 0.0;
      double later_tied = 0.0;
      for (std::size_t q = block_end[p]; q < n; ++q) {
        later += 1.0;
        if (s[q] < si) {
          later_less += 1.0;
        } else if (s[q] == si) {
          later_tied += 1.0;
        }
      }
      if (later > 0.0) {
        if (!(g_at[i] > 0.0)) {
          throw Error(ErrorCode::ZeroCensoringSurvival,
                      "censoring survival is zero at time " + std::to_string(times[i]));
        }
        const double w1 = 1.0 / (gm * g_at[i]);
        den_i.add_product(later, w1);
        num_i.add_product(later_less, w1);
        if (options.tie_credit) num_i.add_product(later_tied, 0.5 * w1);
      }

      // Subjects that left no later than T_i with another event type (or, under
      // the literal option, censored strictly before T_i): 1 / (G(T_i-) G(T_j)).
      for (std::size_t q = 0; q < block_end[p]; ++q) {
        const EventCode dq = sorted_events[q];
        if (q == p || dq == d) continue;
        if (dq == kCensored && (!options.censored_comparators || q >= block_begin[p])) continue;
        if (!(sorted_g[q] > 0.0)) {
          throw Error(ErrorCode::ZeroCensoringSurvival,
                      "censoring survival is zero at comparator time " + std::to_string(sorted_times[q]));
        }
        const double w2 = 1.0 / (gm * sorted_g[q]);
        den_i.add(w2);
        if (s[q] < si) {
          num_i.add(w2);
        } else if (options.tie_credit && s[q] == si) {
          num_i.add(0.5 * w2);
        }
      }

      const auto k = static_cast<std::size_t>(d - 1);
      acc.c_num[k].merge(num_i);
      acc.c_den[k].merge(den_i);
      const double wa = 1.0 / gm;
      acc.acc_den.add(wa);
      if (scores.predicted(i) == d) {
        acc.jc_num.merge(num_i);
        acc.cc_den.merge(den_i);
        acc.acc_num.add(wa);
      }
    }
  });

  std::vector<ExactSum> c_num(ku), c_den(ku);
  ExactSum jc_num, jc_den, cc_den, acc_num, acc_den;
  for (const auto& part : partials) {
    for (std::size_t k = 0; k < part.c_num.size(); ++k) {
      c_num[k].merge(part.c_num[k]);
      c_den[k].merge(part.c_den[k]);
    }
    jc_num.merge(part.jc_num);
    cc_den.merge(part.cc_den);
    acc_num.merge(part.acc_num);
    acc_den.merge(part.acc_den);
  }

  PairCounts counts;
  for (std::size_t k = 0; k < ku; ++k) {
    counts.concordance.push_back(Tally{c_num[k].value(), c_den[k].value()});
    jc_den.merge(c_den[k]);
  }
  const double jc_num_v = jc_num.value();
  const double jc_den_v = jc_den.value();
  const double cc_den_v = cc_den.value();
  counts.accuracy = Tally{acc_num.value(), acc_den.value()};
  counts.joint_concordance = Tally{jc_num_v, jc_den_v};
  counts.conditional_concordance = Tally{jc_num_v, cc_den_v};
  counts.accuracy_star = Tally{cc_den_v, jc_den_v};
  return finish_report(t, std::move(counts));
}

double concordance(const Dataset& ds, const RiskModel& model, double t, EventCode k, const MetricOptions& options) {
  if (k < 1 || k > ds.n_event_types()) throw Error(ErrorCode::InvalidArgument, "event type out of range");
  const ScoreTable scores(ds, model, t);
  check_compatible(ds, scores);
  if (ds.has_censoring()) {
    throw Error(ErrorCode::CensoredRecordsPresent, "uncensored estimator requires uncensored data");
  }
  const auto terms = uncensored_terms(ds, scores, options);
  std::int64_t num2 = 0;
  std::int64_t den = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.events()[i] != k || ds.times()[i] > t) continue;
    num2 += terms[i].num2;
    den += terms[i].den;
  }
  if (den == 0) throw Error(ErrorCode::NoComparablePairs, "no comparable pairs for event " + std::to_string(k));
  return (static_cast<double>(num2) / 2.0) / static_cast<double>(den);
}

double accuracy(const Dataset& ds, const RiskModel& model, double t) {
  if (ds.has_censoring()) {
    throw Error(ErrorCode::CensoredRecordsPresent, "uncensored estimator requires uncensored data");
  }
  std::size_t hits = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.times()[i] > t) continue;
    ++total;
    if (model.predict_type(ds.covariates(i), t) == ds.events()[i]) ++hits;
  }
  if (total == 0) throw Error(ErrorCode::NoSubjectsBeforeHorizon, "no events at or before the horizon");
  return static_cast<double>(hits) / static_cast<double>(total);
}

MetricReport joint_concordance(const Dataset& ds, const RiskModel& model, double t, const MetricOptions& options) {
  return evaluate_uncensored(ds, ScoreTable(ds, model, t), options);
}

MetricReport weighted_joint_concordance(const Dataset& ds, const RiskModel& model, const CensoringModel& g,
                                        double t, const MetricOptions& options) {
  return evaluate_weighted(ds, ScoreTable(ds, model, t), g, options);
}

double weighted_concordance(const Dataset& ds, const RiskModel& model, const CensoringModel& g, double t,
                            EventCode k, const MetricOptions& options) {
  if (k < 1 || k > ds.n_event_types()) throw Error(ErrorCode::InvalidArgument, "event type out of range");
  const auto report = weighted_joint_concordance(ds, model, g, t, options);
  const auto& c = report.concordance_per_event[static_cast<std::size_t>(k - 1)];
  if (!c) throw Error(ErrorCode::NoComparablePairs, "no comparable pairs for event " + std::to_string(k));
  return *c;
}

double weighted_accuracy(const Dataset& ds, const RiskModel& model, const CensoringModel& g, double t) {
  const auto report = weighted_joint_concordance(ds, model, g, t);
  if (!report.accuracy) throw Error(ErrorCode::NoSubjectsBeforeHorizon, "no events at or before the horizon");
  return *report.accuracy;
}

std::string MetricSelector::name() const {
  switch (kind) {
    case Kind::concordance: return "concordance_" + std::to_string(event);
    case Kind::accuracy: return "accuracy";
    case Kind::joint_concordance: return "joint_concordance";
    case Kind::conditional_concordance: return "conditional_concordance";
    case Kind::accuracy_star: return "accuracy_star";
  }
  return "unknown";
}

std::optional<double> MetricSelector::extract(const MetricReport& report) const {
  switch (kind) {
    case Kind::concordance:
      if (event < 1 || static_cast<std::size_t>(event) > report.concordance_per_event.size()) return std::nullopt;
      return report.concordance_per_event[static_cast<std::size_t>(event - 1)];
    case Kind::accuracy: return report.accuracy;
    case Kind::joint_concordance: return report.joint_concordance;
    case Kind::conditional_concordance: return report.conditional_concordance;
    case Kind::accuracy_star: return report.accuracy_star;
  }
  return std::nullopt;
}

std::vector<MetricSelector> all_metric_selectors(int n_event_types) {
  std::vector<MetricSelector> out;
  for (EventCode k = 1; k <= n_event_types; ++k) out.push_back({MetricSelector::Kind::concordance, k});
  out.push_back({MetricSelector::Kind::accuracy, 1});
  out.push_back({MetricSelector::Kind::joint_concordance, 1});
  out.push_back({MetricSelector::Kind::conditional_concordance, 1});
  out.push_back({MetricSelector::Kind::accuracy_star, 1});
  return out;
}

}  // namespace jcindex
