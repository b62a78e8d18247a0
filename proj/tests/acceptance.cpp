// End-to-end acceptance run: one PASS/FAIL line per criterion, details below
// each line. Exit status is the number of failed criteria, not counting those
// named with `--allow N` (documented deviations; they still print FAIL).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "jcindex/censoring.hpp"
#include "jcindex/error.hpp"
#include "jcindex/harness.hpp"
#include "jcindex/metrics.hpp"
#include "jcindex/models.hpp"
#include "jcindex/rng.hpp"
#include "jcindex/synth.hpp"
#include "jcindex/varimp.hpp"
#include "oracles.hpp"

using namespace jcindex;

namespace {

struct Checks {
  bool ok = true;
  std::vector<std::string> lines;

  void near(const std::string& what, double value, double target, double tol) {
    const bool pass = std::fabs(value - target) <= tol;
    note(pass, what + " = " + fmt(value) + " (target " + fmt(target) + " +/- " + fmt(tol) + ")");
  }
  void within(const std::string& what, double value, double lo, double hi) {
    const bool pass = value >= lo && value <= hi;
    note(pass, what + " = " + fmt(value) + " (range [" + fmt(lo) + ", " + fmt(hi) + "])");
  }
  void that(const std::string& what, bool pass) { note(pass, what); }
  void note(bool pass, const std::string& text) {
    ok = ok && pass;
    lines.push_back(std::string(pass ? "    ok   " : "    FAIL ") + text);
  }
  static std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;
std::set<int> allowed;
std::vector<int> deviations;

void criterion(int number, const std::string& title, const std::function<void(Checks&)>& body) {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.note(false, std::string("exception: ") + e.what());
  }
  std::printf("%s %d: %s (%.1f s)\n", c.ok ? "PASS" : "FAIL", number, title.c_str(), seconds_since(t0));
  for (const auto& l : c.lines) std::printf("%s\n", l.c_str());
  std::fflush(stdout);
  if (!c.ok) {
    if (allowed.count(number)) {
      deviations.push_back(number);
    } else {
      ++failures;
    }
  }
}

const EfficiencyRow* find_row(const EfficiencyReport& r, double censoring, std::size_t n) {
  for (const auto& row : r.rows) {
    if (row.censoring == censoring && row.n == n) return &row;
  }
  return nullptr;
}

}  // namespace

int main(int argc, char** argv) {
  for (int a = 1; a + 1 < argc; a += 2) {
    if (std::string(argv[a]) == "--allow") allowed.insert(std::stoi(argv[a + 1]));
  }
  criterion(1, "random-risk models share V(t) but differ in JC", [](Checks& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ds = generate_random_risk_cohort(100000, 20240601);
    const double t = evaluation_horizon(ds, 0.75);
    const RandomRiskModel1 m1;
    const RandomRiskModel2 m2;
    const auto r1 = joint_concordance(ds, m1, t);
    const auto r2 = joint_concordance(ds, m2, t);
    for (const auto* r : {&r1, &r2}) {
      const std::string tag = r == &r1 ? "model 1 " : "model 2 ";
      c.near(tag + "C(t,1)", *r->concordance_per_event[0], 0.5, 0.01);
      c.near(tag + "C(t,2)", *r->concordance_per_event[1], 0.5, 0.01);
      c.near(tag + "A(t)", *r->accuracy, 0.5, 0.01);
    }
    c.near("model 1 JC", r1.joint_concordance, 1.0 / 3.0, 0.01);
    c.near("model 2 JC", r2.joint_concordance, 3.0 / 8.0, 0.01);
    c.within("runtime s", seconds_since(t0), 0.0, 60.0);
  });

  ComparisonTable table2;
  criterion(2, "EXP row of the model comparison", [&](Checks& c) {
    ComparisonOptions o;
    o.n = 100000;
    table2 = model_comparison(o);
    const auto& r = table2.rows[0].report;
    c.near("C(t,1)", *r.concordance_per_event[0], 0.75, 0.01);
    c.near("C(t,2)", *r.concordance_per_event[1], 0.60, 0.01);
    c.near("A(t)", *r.accuracy, 0.70, 0.01);
    c.near("JC(t)", r.joint_concordance, 0.52, 0.01);
    c.near("conditional concordance", *r.conditional_concordance, 0.74, 0.015);
    c.near("accuracy*", r.accuracy_star, 0.70, 0.015);
  });

  criterion(3, "CSC row of the model comparison", [&](Checks& c) {
    if (table2.rows.size() < 2) throw std::runtime_error("comparison table missing");
    const auto& r = table2.rows[1].report;
    c.near("C(t,1)", *r.concordance_per_event[0], 0.75, 0.02);
    c.near("C(t,2)", *r.concordance_per_event[1], 0.60, 0.02);
    c.near("A(t)", *r.accuracy, 0.78, 0.02);
    c.near("JC(t)", r.joint_concordance, 0.48, 0.02);
  });

  EfficiencyReport table1;
  criterion(4, "efficiency of the weighted estimator (EXP, R = 100)", [&](Checks& c) {
    EfficiencyOptions o;
    o.replicates = 100;
    const auto t0 = std::chrono::steady_clock::now();
    table1 = efficiency_study(o);
    c.lines.push_back("    (study time " + Checks::fmt(seconds_since(t0)) + " s)");
    for (const auto& row : table1.rows) {
      c.lines.push_back("    censoring " + Checks::fmt(row.censoring) + " n " + std::to_string(row.n) + ": truth " +
                        Checks::fmt(row.true_jc) + " mean " + Checks::fmt(row.mean_estimate) + " RMSE " +
                        Checks::fmt(row.rmse) + " SE " + Checks::fmt(row.se) + " bias " + Checks::fmt(row.bias) +
                        " median|err| " + Checks::fmt(row.median_abs_error) + " used " + std::to_string(row.used));
    }
    const auto* a = find_row(table1, 0.5, 1000);
    const auto* b = find_row(table1, 0.5, 5000);
    const auto* a75 = find_row(table1, 0.75, 1000);
    const auto* b75 = find_row(table1, 0.75, 5000);
    if (!a || !b || !a75 || !b75) throw std::runtime_error("missing study rows");
    c.within("RMSE (50%, 1000)", a->rmse, 0.0179 * 0.5, 0.0179 * 1.5);
    c.within("SE (50%, 1000)", a->se, 0.0160 * 0.5, 0.0160 * 1.5);
    c.within("bias (50%, 1000)", a->bias, 0.0081 * 0.5, 0.0081 * 1.5);
    c.within("RMSE (50%, 5000)", b->rmse, 0.0103 * 0.5, 0.0103 * 1.5);
    c.that("median |error| decreases with n at 50% (" + Checks::fmt(a->median_abs_error) + " -> " +
               Checks::fmt(b->median_abs_error) + ")",
           b->median_abs_error < a->median_abs_error);
    c.that("median |error| decreases with n at 75% (" + Checks::fmt(a75->median_abs_error) + " -> " +
               Checks::fmt(b75->median_abs_error) + ")",
           b75->median_abs_error < a75->median_abs_error);
  });

  criterion(5, "exact identities", [&](Checks& c) {
    std::mt19937_64 gen(20240601);
    int decomposition_bad = 0, checked = 0;
    for (int rep = 0; rep < 1000; ++rep) {
      auto inst = oracle::random_instance(gen, 30, 2, rep % 2 == 0);
      try {
        const auto r = inst.ds.has_censoring()
                           ? evaluate_weighted(inst.ds, inst.scores, fit_km_censoring(inst.ds))
                           : evaluate_uncensored(inst.ds, inst.scores);
        ++checked;
        const auto& p = r.pair_counts;
        const bool tallies = p.joint_concordance.numerator == p.conditional_concordance.numerator &&
                             p.conditional_concordance.denominator == p.accuracy_star.numerator &&
                             p.joint_concordance.denominator == p.accuracy_star.denominator;
        const bool product = !r.conditional_concordance ||
                             std::fabs(r.joint_concordance - *r.conditional_concordance * r.accuracy_star) <= 1e-12;
        if (!tallies || !product) ++decomposition_bad;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoComparablePairs) ++decomposition_bad;
      }
    }
    c.that("decomposition holds on " + std::to_string(checked) + " instances", decomposition_bad == 0);

    int zero_bad = 0, brute_bad = 0;
    for (int rep = 0; rep < 500; ++rep) {
      auto inst = oracle::random_instance(gen, 50, 2, false);
      try {
        const auto u = evaluate_uncensored(inst.ds, inst.scores);
        const auto w = evaluate_weighted(inst.ds, inst.scores, fit_km_censoring(inst.ds));
        if (!(u.pair_counts == w.pair_counts) || u.joint_concordance != w.joint_concordance) ++zero_bad;
        if (!(u.pair_counts == oracle::uncensored_counts(inst.ds, inst.scores))) ++brute_bad;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoComparablePairs ||
            oracle::uncensored_counts(inst.ds, inst.scores).joint_concordance.denominator != 0.0) {
          ++brute_bad;
        }
      }
      auto cens = oracle::random_instance(gen, 50, 2, true);
      try {
        const auto wc = evaluate_weighted(cens.ds, cens.scores, fit_km_censoring(cens.ds));
        if (!(wc.pair_counts == oracle::weighted_counts(cens.ds, cens.scores))) ++brute_bad;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoComparablePairs) ++brute_bad;
      }
    }
    c.that("zero-censoring weighted == unweighted on 500 instances", zero_bad == 0);
    c.that("brute-force oracle equality on 500 uncensored + 500 censored instances", brute_bad == 0);
    bool rmse_ok = !table1.rows.empty();
    for (const auto& row : table1.rows) {
      rmse_ok = rmse_ok && std::fabs(row.rmse * row.rmse - (row.se * row.se + row.bias * row.bias)) <= 1e-15;
    }
    c.that("RMSE^2 = SE^2 + bias^2 on every study row", rmse_ok);
  });

  criterion(6, "population integral vs Monte Carlo oracle", [](Checks& c) {
    SynthConfig cfg;
    const double t = population_time_quantile(cfg, 0.75);
    ExpModel m;
    const auto integral = true_jc_integral(m, cfg, t);
    McOracleOptions o;
    o.horizon = t;
    const auto mc = true_metrics_mc(m, cfg, o);
    c.near("JC integral vs MC", integral.joint_concordance, mc.report.joint_concordance, 0.005);
    c.lines.push_back("    integral C1 " + Checks::fmt(integral.concordance_per_event[0]) + " C2 " +
                      Checks::fmt(integral.concordance_per_event[1]) + " A " + Checks::fmt(integral.accuracy) +
                      " JC " + Checks::fmt(integral.joint_concordance));
  });

  criterion(7, "cause-specific PH fitting", [](Checks& c) {
    SynthConfig cfg;
    cfg.n = 5000;
    cfg.seed = 7;
    const auto model = fit_cause_specific(generate(cfg));
    c.near("beta1 hat", model.causes()[0].coefficients[0], 1.0, 0.1);

    std::mt19937_64 gen(70);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_int_distribution<int> tg(1, 15), st(0, 1);
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const std::size_t n = 25, p = 2;
      std::vector<double> times(n);
      std::vector<char> status(n);
      Eigen::MatrixXd x(n, p);
      for (std::size_t i = 0; i < n; ++i) {
        times[i] = tg(gen);
        status[i] = static_cast<char>(st(gen));
        for (std::size_t a = 0; a < p; ++a) x(i, a) = z(gen);
      }
      status[0] = 1;
      const PartialLikelihood pl(times, status, x);
      for (int b = 0; b < 10; ++b) {
        Eigen::VectorXd beta(p);
        for (std::size_t a = 0; a < p; ++a) beta[a] = 0.7 * z(gen);
        const auto g = pl.gradient(beta);
        for (std::size_t a = 0; a < p; ++a) {
          Eigen::VectorXd up = beta, down = beta;
          up[a] += 1e-5;
          down[a] -= 1e-5;
          const double fd = (pl.value(up) - pl.value(down)) / 2e-5;
          worst = std::max(worst, std::fabs(fd - g[a]) / std::max(1.0, std::fabs(g[a])));
        }
      }
    }
    c.within("gradient vs finite differences, max relative error", worst, 0.0, 1e-5);

    // 5-subject instances: ternary refinement of a grid search on the explicit likelihood.
    double grid_gap = 0.0;
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    int solved = 0;
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> times{1, 2, 3, 4, 5};
      std::vector<double> xs(5);
      for (auto& v : xs) v = u(gen);
      std::vector<char> status{1, 1, 0, 1, 1};
      auto ll = [&](double b) {
        double s = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
          if (!status[i]) continue;
          double risk = 0.0;
          for (std::size_t j = 0; j < 5; ++j) {
            if (times[j] >= times[i]) risk += std::exp(b * xs[j]);
          }
          s += b * xs[i] - std::log(risk);
        }
        return s;
      };
      double best = -5.0;
      for (double b = -5.0; b <= 5.0; b += 1e-3) {
        if (ll(b) > ll(best)) best = b;
      }
      if (std::fabs(best) > 4.9) continue;  // separated instance, maximiser at infinity
      double lo = best - 2e-3, hi = best + 2e-3;
      for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (ll(m1) < ll(m2)) {
          lo = m1;
        } else {
          hi = m2;
        }
      }
      Eigen::MatrixXd x(5, 1);
      for (std::size_t i = 0; i < 5; ++i) x(i, 0) = xs[i];
      const auto fit = fit_partial_likelihood(PartialLikelihood(times, status, x), FitOptions{});
      grid_gap = std::max(grid_gap, std::fabs(fit.coefficients[0] - 0.5 * (lo + hi)));
      ++solved;
    }
    c.that("grid-search instances solved: " + std::to_string(solved), solved >= 10);
    c.within("Newton vs grid search, max gap", grid_gap, 0.0, 1e-6);
  });

  criterion(8, "variable ranking on the event-specific design", [](Checks& c) {
    const int reps = 100;
    int noise_first = 0, top_two = 0, cr_not_worse = 0;
    for (int r = 0; r < reps; ++r) {
      const auto ds = generate_linear(event_specific_design(), 1000, derive_seed(8, static_cast<std::uint64_t>(r)));
      const double t = evaluation_horizon(ds, 0.75);
      const auto cr = stepwise_cr_rank(ds, t);
      const auto lumped = stepwise_lumped_rank(ds, t);
      const auto order = cr.importance_order();
      if (cr.entries.front().covariate == "x3") ++noise_first;
      if ((order[0] == "x1" && order[1] == "x2") || (order[0] == "x2" && order[1] == "x1")) ++top_two;
      auto rank_of = [](const RankingResult& rr, const std::string& name) {
        for (const auto& e : rr.entries) {
          if (e.covariate == name) return e.rank;
        }
        return 0;
      };
      if (rank_of(cr, "x2") <= rank_of(lumped, "x2")) ++cr_not_worse;
    }
    c.within("noise eliminated first (of 100)", noise_first, 90, reps);
    c.within("x1, x2 in the top two (of 100)", top_two, 90, reps);
    c.within("stepwise_cr ranks x2 at least as high as lumped (of 100)", cr_not_worse, reps / 2 + 1, reps);
  });

  criterion(9, "performance", [&](Checks& c) {
    SynthConfig cfg;
    cfg.n = 5000;
    cfg.seed = 9;
    cfg.lambda0 = calibrate_censoring_rate(0.5, cfg);
    const auto ds = generate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    ExpModel m;
    const double t = evaluation_horizon(ds, 0.75);
    const auto g = fit_km_censoring(ds);
    const auto report = weighted_joint_concordance(ds, m, g, t);
    const double metric_time = seconds_since(t0);
    c.within("weighted metric suite, n = 5000, s", metric_time, 0.0, 5.0);
    c.lines.push_back("    JC = " + Checks::fmt(report.joint_concordance));
    EfficiencyOptions o;
    o.censoring = {0.5};
    o.sizes = {5000};
    o.replicates = 100;
    const auto t1 = std::chrono::steady_clock::now();
    efficiency_study(o);
    c.within("efficiency study R = 100, n = 5000, s", seconds_since(t1), 0.0, 600.0);
  });

  std::printf("%d criteria failed", failures + static_cast<int>(deviations.size()));
  if (!deviations.empty()) {
    std::printf(" (documented deviations:");
    for (int d : deviations) std::printf(" %d", d);
    std::printf(")");
  }
  std::printf("\n");
  return failures;
}
