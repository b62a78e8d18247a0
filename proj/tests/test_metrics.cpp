#include <doctest.h>

#include <functional>

#include <cmath>
#include <random>

#include "jcindex/censoring.hpp"
#include "jcindex/error.hpp"
#include "jcindex/metrics.hpp"
#include "jcindex/models.hpp"
#include "jcindex/parallel.hpp"
#include "jcindex/synth.hpp"
#include "oracles.hpp"

using namespace jcindex;

namespace {

// Scores given per record in a fixed table; the covariate is the row index.
struct TableModel final : RiskModel {
  TableModel(int k, std::vector<double> s) : k_(k), s_(std::move(s)) {}
  int n_event_types() const override { return k_; }
  double risk(std::span<const double> x, double, EventCode d) const override {
    return s_[static_cast<std::size_t>(x[0]) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(d - 1)];
  }
  int k_;
  std::vector<double> s_;
};

Dataset cohort(const std::vector<std::pair<double, EventCode>>& te, int k) {
  std::vector<SurvivalRecord> recs;
  for (std::size_t i = 0; i < te.size(); ++i) {
    recs.push_back(SurvivalRecord{std::to_string(i), {static_cast<double>(i)}, te[i].first, te[i].second});
  }
  return validate_dataset(std::move(recs), {"row"}, ValidateOptions{k});
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

void check_decomposition(const MetricReport& r) {
  const auto& c = r.pair_counts;
  CHECK(c.joint_concordance.numerator == c.conditional_concordance.numerator);
  CHECK(c.conditional_concordance.denominator == c.accuracy_star.numerator);
  CHECK(c.joint_concordance.denominator == c.accuracy_star.denominator);
  if (r.conditional_concordance) {
    CHECK(std::fabs(r.joint_concordance - *r.conditional_concordance * r.accuracy_star) <= 1e-12);
  }
  CHECK(r.joint_concordance <= r.accuracy_star);
}

}  // namespace

TEST_CASE("three-subject hand examples") {
  const auto ds = cohort({{1, 1}, {2, 2}, {3, 1}}, 2);
  {
    TableModel m(2, {0.9, 0.0, 0.1, 0.0, 0.5, 0.0});
    CHECK(concordance(ds, m, 10.0, 1) == 1.0);
  }
  TableModel m(2, {0.9, 0.2, 0.1, 0.8, 0.05, 0.3});
  const auto r = joint_concordance(ds, m, 10.0);
  CHECK(r.pair_counts.joint_concordance.denominator == 5.0);
  CHECK(r.pair_counts.joint_concordance.numerator == 4.0);
  CHECK(r.joint_concordance == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(*r.accuracy == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  check_decomposition(r);
}

TEST_CASE("accuracy by direct count") {
  const auto ds = cohort({{1, 1}, {2, 2}, {3, 1}, {4, 2}, {9, 1}}, 2);
  // predictions: 1, 2, 2, 2, (beyond t) 2
  TableModel m(2, {1, 0, 0, 1, 0, 1, 0, 1, 0, 1});
  CHECK(accuracy(ds, m, 5.0) == 0.75);
  CHECK(code_of([&] { accuracy(ds, m, 0.5); }) == ErrorCode::NoSubjectsBeforeHorizon);
}

TEST_CASE("weighted hand example") {
  // G jumps to 2/3 at 2 and to 0 at 4.
  const auto ds = cohort({{1, 1}, {2, kCensored}, {3, 2}, {4, kCensored}}, 2);
  const auto g = fit_km_censoring(ds);
  TableModel m(2, {0.9, 0.3, 0.5, 0.2, 0.65, 0.6, 0.1, 0.7});
  const auto r = weighted_joint_concordance(ds, m, g, 10.0);
  // d=1, i=1: later subjects 2,3,4 with weight 1, all concordant.
  // d=2, i=3: j=4 later (9/4, discordant), j=1 competing (3/2, concordant); 3 is mispredicted.
  CHECK(r.pair_counts.joint_concordance.denominator == doctest::Approx(6.75).epsilon(1e-15));
  CHECK(r.pair_counts.joint_concordance.numerator == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(r.joint_concordance == doctest::Approx(4.0 / 9.0).epsilon(1e-15));
  CHECK(*r.concordance_per_event[0] == 1.0);
  CHECK(*r.concordance_per_event[1] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(*r.accuracy == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(*r.conditional_concordance == 1.0);
  CHECK(weighted_concordance(ds, m, g, 10.0, 2) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(weighted_accuracy(ds, m, g, 10.0) == doctest::Approx(0.4).epsilon(1e-15));
  const ScoreTable table(ds, m, 10.0);
  CHECK(r.pair_counts == oracle::weighted_counts(ds, table));

  // Literal comparator reading: censored 2 precedes 3 and is compared too.
  MetricOptions literal;
  literal.censored_comparators = true;
  const auto rl = weighted_joint_concordance(ds, m, g, 10.0, literal);
  CHECK(rl.pair_counts.concordance[1].denominator == doctest::Approx(3.75 + 1.0 / (2.0 / 3.0 * 2.0 / 3.0)));
  CHECK(rl.pair_counts == oracle::weighted_counts(ds, table, literal));
}

TEST_CASE("pair indicators") {
  const auto ds = cohort({{1, 1}, {2, 2}, {2, 1}, {3, kCensored}}, 2);
  TableModel m(2, {0.9, 0.1, 0.2, 0.8, 0.3, 0.1, 0.0, 0.0});
  const ScoreTable s(ds, m, 2.5);
  const auto p = pair_indicators(ds, s, 0, 1, 1);
  CHECK(p.a);
  CHECK(!p.b);
  CHECK(p.n);
  CHECK(p.c);
  CHECK(p.q);
  const auto tied = pair_indicators(ds, s, 2, 1, 1);
  CHECK(!tied.a);
  CHECK(!tied.b);
  CHECK(tied.c);
  CHECK(tied.competing);
  const auto later = pair_indicators(ds, s, 3, 0, 2);
  CHECK(later.b);
  CHECK(!later.n);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      for (EventCode d = 1; d <= 2; ++d) {
        const auto q = pair_indicators(ds, s, i, j, d);
        CHECK(!(q.a && q.b));
        if (q.a) CHECK(q.c);
      }
    }
  }
}

TEST_CASE("brute-force equivalence on random instances") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 500; ++rep) {
    const int K = 1 + rep % 3;
    auto inst = oracle::random_instance(gen, 50, K, false);
    const auto expected = oracle::uncensored_counts(inst.ds, inst.scores);
    if (expected.joint_concordance.denominator == 0.0) {
      CHECK(code_of([&] { evaluate_uncensored(inst.ds, inst.scores); }) == ErrorCode::NoComparablePairs);
      continue;
    }
    const auto u = evaluate_uncensored(inst.ds, inst.scores);
    REQUIRE(u.pair_counts == expected);
    MetricOptions ties;
    ties.tie_credit = true;
    const auto ut = evaluate_uncensored(inst.ds, inst.scores, ties);
    REQUIRE(ut.pair_counts == oracle::uncensored_counts(inst.ds, inst.scores, true));
    // zero censoring: weights are all one
    const auto w = evaluate_weighted(inst.ds, inst.scores, fit_km_censoring(inst.ds));
    REQUIRE(w.pair_counts == u.pair_counts);
    CHECK(w.joint_concordance == u.joint_concordance);
  }
  for (int rep = 0; rep < 500; ++rep) {
    const int K = 1 + rep % 3;
    auto inst = oracle::random_instance(gen, 50, K, true);
    const auto g = fit_km_censoring(inst.ds);
    MetricOptions opt;
    opt.tie_credit = rep % 2 == 1;
    opt.censored_comparators = rep % 4 >= 2;
    try {
      const auto w = evaluate_weighted(inst.ds, inst.scores, g, opt);
      REQUIRE(w.pair_counts == oracle::weighted_counts(inst.ds, inst.scores, opt));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoComparablePairs);
      CHECK(oracle::weighted_counts(inst.ds, inst.scores, opt).joint_concordance.denominator == 0.0);
    }
  }
}

TEST_CASE("decomposition identity and JC bound") {
  std::mt19937_64 gen(12);
  for (int rep = 0; rep < 1000; ++rep) {
    auto inst = oracle::random_instance(gen, 30, 2, rep % 2 == 0);
    try {
      if (inst.ds.has_censoring()) {
        check_decomposition(evaluate_weighted(inst.ds, inst.scores, fit_km_censoring(inst.ds)));
      } else {
        check_decomposition(evaluate_uncensored(inst.ds, inst.scores));
      }
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoComparablePairs);
    }
  }
}

TEST_CASE("strictly increasing transforms leave concordance unchanged") {
  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 200; ++rep) {
    auto inst = oracle::random_instance(gen, 40, 2, rep % 2 == 0);
    const auto n = inst.ds.size();
    std::vector<double> moved(n * 2);
    std::vector<EventCode> pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (EventCode d = 1; d <= 2; ++d) moved[i * 2 + (d - 1)] = 3.0 * std::exp(inst.scores.score(i, d)) - 7.0;
      pred[i] = inst.scores.predicted(i);
    }
    const ScoreTable transformed(inst.scores.horizon(), 2, moved, pred);
    const auto g = fit_km_censoring(inst.ds);
    try {
      const auto a = evaluate_weighted(inst.ds, inst.scores, g);
      const auto b = evaluate_weighted(inst.ds, transformed, g);
      CHECK(a.pair_counts == b.pair_counts);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoComparablePairs);
    }
  }
}

TEST_CASE("single event type reduces JC to C") {
  std::mt19937_64 gen(14);
  for (int rep = 0; rep < 100; ++rep) {
    auto inst = oracle::random_instance(gen, 40, 1, false);
    if (oracle::uncensored_counts(inst.ds, inst.scores).joint_concordance.denominator == 0.0) continue;
    const auto r = evaluate_uncensored(inst.ds, inst.scores);
    CHECK(r.pair_counts.joint_concordance == r.pair_counts.concordance[0]);
    CHECK(r.accuracy_star == 1.0);
  }
}

TEST_CASE("weighted results are independent of the worker count") {
  auto ds = [] {
    SynthConfig cfg;
    cfg.n = 3000;
    cfg.seed = 5;
    cfg.lambda0 = calibrate_censoring_rate(0.5, cfg);
    return generate(cfg);
  }();
  ExpModel m;
  const double t = evaluation_horizon(ds, 0.75);
  const auto g = fit_km_censoring(ds);
  set_worker_count(1);
  const auto one = weighted_joint_concordance(ds, m, g, t);
  set_worker_count(3);
  const auto three = weighted_joint_concordance(ds, m, g, t);
  set_worker_count(8);
  const auto eight = weighted_joint_concordance(ds, m, g, t);
  set_worker_count(0);
  CHECK(one.pair_counts == three.pair_counts);
  CHECK(one.pair_counts == eight.pair_counts);
  CHECK(one.joint_concordance == eight.joint_concordance);
}

TEST_CASE("tie credit") {
  const auto ds = cohort({{1, 1}, {2, 1}, {3, 1}}, 1);
  TableModel flat(1, {0.5, 0.5, 0.5});
  CHECK(concordance(ds, flat, 10.0, 1) == 0.0);
  MetricOptions ties;
  ties.tie_credit = true;
  CHECK(concordance(ds, flat, 10.0, 1, ties) == 0.5);
}

TEST_CASE("error cases") {
  const auto ds = cohort({{1, 1}, {2, 2}, {3, kCensored}}, 2);
  TableModel m(2, {0.9, 0.2, 0.1, 0.8, 0.05, 0.3});
  CHECK(code_of([&] { joint_concordance(ds, m, 10.0); }) == ErrorCode::CensoredRecordsPresent);
  const auto g = fit_km_censoring(ds);
  CHECK(code_of([&] { weighted_joint_concordance(ds, m, g, 0.5); }) == ErrorCode::NoComparablePairs);
  const CensoringModel dead({0.5}, {0.0});
  CHECK(code_of([&] { weighted_joint_concordance(ds, m, dead, 10.0); }) == ErrorCode::ZeroCensoringSurvival);
  TableModel one_type(1, {0.1, 0.2, 0.3});
  CHECK(code_of([&] { weighted_joint_concordance(ds, one_type, g, 10.0); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { weighted_concordance(ds, m, g, 10.0, 3); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("selectors name every reported metric") {
  const auto sel = all_metric_selectors(2);
  std::vector<std::string> names;
  for (const auto& s : sel) names.push_back(s.name());
  CHECK(names == std::vector<std::string>{"concordance_1", "concordance_2", "accuracy", "joint_concordance",
                                          "conditional_concordance", "accuracy_star"});
}

TEST_CASE("bootstrap") {
  // Perfect ordering with a single event type: every resample gives C = 1.
  std::vector<std::pair<double, EventCode>> te;
  std::vector<double> s;
  for (int i = 0; i < 40; ++i) {
    te.emplace_back(1.0 + i, 1);
    s.push_back(-i);
  }
  const auto ds = cohort(te, 1);
  TableModel m(1, s);
  BootstrapOptions opt;
  opt.replicates = 100;
  opt.weighted = false;
  const auto iv = bootstrap_ci(ds, m, 100.0, MetricSelector{}, opt);
  CHECK(iv.lower == 1.0);
  CHECK(iv.upper == 1.0);
  CHECK(iv.used == 100);
  CHECK_THROWS_AS(bootstrap_ci(ds, m, 100.0, MetricSelector{}, BootstrapOptions{.replicates = 10}), Error);

  const auto cohort2 = generate_random_risk_cohort(2000, 3);
  RandomRiskModel2 m2;
  BootstrapOptions b;
  b.replicates = 200;
  b.seed = 99;
  const auto first = bootstrap_ci(cohort2, m2, 1e9, MetricSelector{}, b);
  const auto second = bootstrap_ci(cohort2, m2, 1e9, MetricSelector{}, b);
  CHECK(first.lower == second.lower);
  CHECK(first.upper == second.upper);
  CHECK(first.lower < 0.375);
  CHECK(first.upper > 0.375);
  CHECK(first.lower < first.estimate);
  CHECK(first.estimate < first.upper);
}
