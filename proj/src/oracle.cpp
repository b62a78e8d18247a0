#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "jcindex/error.hpp"
#include "jcindex/quadrature.hpp"
#include "jcindex/synth.hpp"

namespace jcindex {

McOracleResult true_metrics_mc(const RiskModel& model, const SynthConfig& cfg, const McOracleOptions& options) {
  SynthConfig c = cfg;
  c.lambda0 = 0.0;
  c.n = options.n;
  c.seed = options.seed;
  const Dataset ds = generate(c);
  const double t = options.horizon ? *options.horizon : evaluation_horizon(ds, options.quantile);

  const ScoreTable scores(ds, model, t);
  McOracleResult out;
  out.report = evaluate_uncensored(ds, scores);

  const std::size_t half = ds.size() / 2;
  std::vector<std::size_t> first(half), second(ds.size() - half);
  std::iota(first.begin(), first.end(), std::size_t{0});
  std::iota(second.begin(), second.end(), half);
  std::optional<MetricReport> a, b;
  try {
    a = evaluate_uncensored(ds.subset(first), scores.subset(first));
    b = evaluate_uncensored(ds.subset(second), scores.subset(second));
  } catch (const Error&) {
    a.reset();
  }
  for (const auto& sel : all_metric_selectors(ds.n_event_types())) {
    double se = std::numeric_limits<double>::quiet_NaN();
    if (a && b) {
      const auto va = sel.extract(*a);
      const auto vb = sel.extract(*b);
      if (va && vb) se = std::fabs(*va - *vb) / 2.0;
    }
    out.standard_errors.emplace_back(sel.name(), se);
  }
  return out;
}

namespace {

constexpr double kRange = 8.5;  // N(0,1) mass outside [-8.5, 8.5] is ~2e-17

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

struct Point {
  double rate[2];
  double total;
  double score[2];
  EventCode predicted;
};

// Score comparisons make the integrands jump. Jumps are located on a uniform
// grid and refined by bisection so every quadrature piece is smooth.
constexpr std::size_t kBreakGrid = 4096;

template <typename Flag>
void refine_breaks(double a, double b, const Flag& flag, std::vector<double>& breaks) {
  const bool fa = flag(a);
  for (int it = 0; it < 80 && a < b; ++it) {
    const double mid = 0.5 * (a + b);
    if (!(mid > a && mid < b)) break;
    if (flag(mid) == fa) {
      a = mid;
    } else {
      b = mid;
    }
  }
  breaks.push_back(0.5 * (a + b));
}

AdaptiveResult integrate_pieces(const std::function<void(double, std::span<double>)>& f, std::size_t dim,
                                std::vector<double> breaks, double abs_tol, std::size_t max_intervals) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  AdaptiveResult total;
  total.values.assign(dim, 0.0);
  const double piece_tol = abs_tol / static_cast<double>(breaks.size() - 1);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (!(breaks[k + 1] > breaks[k])) continue;
    const auto r = integrate_adaptive(f, dim, breaks[k], breaks[k + 1], piece_tol, max_intervals);
    for (std::size_t c = 0; c < dim; ++c) total.values[c] += r.values[c];
    total.error += r.error;
    total.intervals += r.intervals;
  }
  return total;
}

}  // namespace

PopulationMetrics true_jc_integral(const RiskModel& model, const SynthConfig& cfg, double t, double abs_tol) {
  if (model.n_event_types() != 2) throw Error(ErrorCode::DimensionMismatch, "generator has two event types");
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");

  auto point = [&](double x) {
    Point p{};
    p.rate[0] = cause_rate(cfg, x, 1);
    p.rate[1] = cause_rate(cfg, x, 2);
    p.total = p.rate[0] + p.rate[1];
    const double xv[1] = {x};
    p.predicted = model.score_all(std::span<const double>(xv, 1), t, std::span<double>(p.score, 2));
    return p;
  };

  // Outer components: per d {den, concordant, den | M_c = d, concordant | M_c = d},
  // then accuracy numerator and denominator.
  constexpr std::size_t kOuter = 10;
  const double inner_tol = abs_tol / 10.0;

  std::vector<double> grid(kBreakGrid + 1);
  std::vector<Point> grid_points(kBreakGrid + 1);
  for (std::size_t g = 0; g <= kBreakGrid; ++g) {
    grid[g] = -kRange + 2.0 * kRange * static_cast<double>(g) / static_cast<double>(kBreakGrid);
    grid_points[g] = point(grid[g]);
  }

  auto outer = [&](double xi, std::span<double> out) {
    const Point pi = point(xi);
    const double w = phi(xi);
    const double surv_i = std::exp(-pi.total * t);

    auto inner = [&](double xj, std::span<double> v) {
      const Point pj = point(xj);
      const double wj = phi(xj);
      for (int d = 0; d < 2; ++d) {
        const double p = pj.rate[d] / pj.total;
        // int_0^t (1 - F_d(s|x_j)) dF_d(s|x_i)
        const double c = pi.rate[d] * ((1.0 - p) * -std::expm1(-pi.total * t) / pi.total +
                                       p * -std::expm1(-(pi.total + pj.total) * t) / (pi.total + pj.total));
        v[2 * d] = wj * c;
        v[2 * d + 1] = pi.score[d] > pj.score[d] ? wj * c : 0.0;
      }
    };
    std::vector<double> breaks{-kRange, kRange};
    for (int d = 0; d < 2; ++d) {
      auto beats = [&](double xj) { return pi.score[d] > point(xj).score[d]; };
      for (std::size_t g = 0; g < kBreakGrid; ++g) {
        const bool left = pi.score[d] > grid_points[g].score[d];
        const bool right = pi.score[d] > grid_points[g + 1].score[d];
        if (left != right) refine_breaks(grid[g], grid[g + 1], beats, breaks);
      }
    }
    const auto in = integrate_pieces(inner, 4, std::move(breaks), inner_tol, 20000);
    for (int d = 0; d < 2; ++d) {
      const bool hit = pi.predicted == d + 1;
      out[4 * d] = w * in.values[2 * d];
      out[4 * d + 1] = w * in.values[2 * d + 1];
      out[4 * d + 2] = hit ? out[4 * d] : 0.0;
      out[4 * d + 3] = hit ? out[4 * d + 1] : 0.0;
    }
    const double f_pred = pi.rate[pi.predicted - 1] / pi.total * (1.0 - surv_i);
    out[8] = w * f_pred;
    out[9] = w * (1.0 - surv_i);
  };

  std::vector<double> outer_breaks{-kRange, kRange};
  auto type_of = [&](double x) { return point(x).predicted; };
  for (std::size_t g = 0; g < kBreakGrid; ++g) {
    if (grid_points[g].predicted != grid_points[g + 1].predicted) {
      refine_breaks(grid[g], grid[g + 1], [&](double x) { return type_of(x) == grid_points[g].predicted; },
                    outer_breaks);
    }
  }
  const auto res = integrate_pieces(outer, kOuter, std::move(outer_breaks), abs_tol, 20000);
  const auto& v = res.values;
  PopulationMetrics m;
  m.horizon = t;
  m.error_bound = res.error + inner_tol;
  double den = 0.0, jc = 0.0, cc_den = 0.0;
  for (int d = 0; d < 2; ++d) {
    m.concordance_per_event.push_back(v[4 * d + 1] / v[4 * d]);
    den += v[4 * d];
    cc_den += v[4 * d + 2];
    jc += v[4 * d + 3];
  }
  m.joint_concordance = jc / den;
  m.conditional_concordance = cc_den > 0.0 ? jc / cc_den : std::numeric_limits<double>::quiet_NaN();
  m.accuracy_star = cc_den / den;
  m.accuracy = v[8] / v[9];
  return m;
}

}  // namespace jcindex
