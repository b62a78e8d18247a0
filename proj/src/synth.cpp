#include "jcindex/synth.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "jcindex/error.hpp"
#include "jcindex/quadrature.hpp"
#include "jcindex/rng.hpp"

namespace jcindex {

double cause_rate(const SynthConfig& cfg, double x, EventCode d) {
  switch (d) {
    case 0:
      return cfg.lambda0 * std::exp(cfg.beta0 * x);
    case 1:
      return cfg.lambda1 * std::exp(cfg.beta1 * x);
    case 2:
      return cfg.lambda2 * std::exp(cfg.beta2 * std::cos(x));
    default:
      throw Error(ErrorCode::InvalidArgument, "generator has causes 0, 1 and 2");
  }
}

double total_event_rate(const SynthConfig& cfg, double x) { return cause_rate(cfg, x, 1) + cause_rate(cfg, x, 2); }

double cause_cif(const SynthConfig& cfg, double x, double s, EventCode d) {
  const double r = total_event_rate(cfg, x);
  return cause_rate(cfg, x, d) / r * -std::expm1(-r * s);
}

namespace {

void check_config(const SynthConfig& cfg) {
  if (!(cfg.lambda1 > 0.0) || !(cfg.lambda2 > 0.0) || !(cfg.lambda0 >= 0.0) || !std::isfinite(cfg.lambda0)) {
    throw Error(ErrorCode::InvalidArgument, "generator rates must be positive (lambda0 >= 0)");
  }
  if (!std::isfinite(cfg.beta0) || !std::isfinite(cfg.beta1) || !std::isfinite(cfg.beta2)) {
    throw Error(ErrorCode::InvalidArgument, "generator effects must be finite");
  }
}

}  // namespace

std::vector<LatentDraw> draw_latent(const SynthConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);
  std::vector<LatentDraw> out(cfg.n);
  for (auto& s : out) {
    s.x = rng.normal();
    if (cfg.fixed_x) s.x = *cfg.fixed_x;
    s.t1 = rng.exponential(cause_rate(cfg, s.x, 1));
    s.t2 = rng.exponential(cause_rate(cfg, s.x, 2));
    s.t0 = rng.exponential(cause_rate(cfg, s.x, 0));
  }
  return out;
}

Dataset generate(const SynthConfig& cfg) {
  const auto latent = draw_latent(cfg);
  std::vector<SurvivalRecord> records(latent.size());
  for (std::size_t i = 0; i < latent.size(); ++i) {
    const auto& s = latent[i];
    auto& r = records[i];
    r.id = std::to_string(i + 1);
    r.covariates = {s.x};
    // Ties (probability zero) go to the smaller event code, then censoring.
    if (s.t1 <= s.t2 && s.t1 <= s.t0) {
      r.time = s.t1;
      r.event = 1;
    } else if (s.t2 <= s.t0) {
      r.time = s.t2;
      r.event = 2;
    } else {
      r.time = s.t0;
      r.event = kCensored;
    }
  }
  return validate_dataset(std::move(records), {"x"}, ValidateOptions{2});
}

double censoring_fraction(const SynthConfig& cfg, std::size_t nodes) {
  check_config(cfg);
  if (cfg.lambda0 == 0.0) return 0.0;
  return normal_expectation(
      [&](double x) {
        const double c = cause_rate(cfg, x, 0);
        return c / (c + total_event_rate(cfg, x));
      },
      nodes);
}

double calibrate_censoring_rate(double target, const SynthConfig& cfg, double precision) {
  if (!(target > 0.0 && target < 1.0)) throw Error(ErrorCode::InvalidArgument, "censoring target must lie in (0, 1)");
  if (!(precision > 0.0)) throw Error(ErrorCode::InvalidArgument, "precision must be positive");
  SynthConfig c = cfg;
  auto frac = [&](double lambda0) {
    c.lambda0 = lambda0;
    return censoring_fraction(c);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (frac(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) throw Error(ErrorCode::BracketingFailure, "no censoring rate reaches the target fraction");
  }
  // Bisect well past the requested precision; the map is smooth and monotone.
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double f = frac(mid);
    if (std::fabs(f - target) < precision * 1e-3 || !(mid > lo && mid < hi)) return mid;
    (f < target ? lo : hi) = mid;
  }
  const double mid = 0.5 * (lo + hi);
  if (std::fabs(frac(mid) - target) >= precision) {
    throw Error(ErrorCode::BracketingFailure, "bisection did not reach the requested precision");
  }
  return mid;
}

double population_time_quantile(const SynthConfig& cfg, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile must lie in (0, 1)");
  check_config(cfg);
  auto cdf = [&](double t) {
    return normal_expectation([&](double x) { return -std::expm1(-total_event_rate(cfg, x) * t); });
  };
  double lo = 0.0;
  double hi = 1.0;
  while (cdf(hi) < q) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) throw Error(ErrorCode::BracketingFailure, "event-time quantile not bracketed");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    (cdf(mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Dataset generate_random_risk_cohort(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SurvivalRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = records[i];
    r.id = std::to_string(i + 1);
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    r.covariates = {u1, u2};
    r.event = rng.uniform() < 0.5 ? 1 : 2;
    r.time = rng.exponential(1.0);
  }
  return validate_dataset(std::move(records), {"u1", "u2"}, ValidateOptions{2});
}

namespace {

void check_pair(std::span<const double> x, EventCode d) {
  if (x.size() != 2) throw Error(ErrorCode::DimensionMismatch, "random-risk models need two covariates");
  if (d != 1 && d != 2) throw Error(ErrorCode::InvalidArgument, "random-risk models have event types 1 and 2");
}

}  // namespace

double RandomRiskModel1::risk(std::span<const double> x, double, EventCode d) const {
  check_pair(x, d);
  return x[static_cast<std::size_t>(d - 1)];
}

double RandomRiskModel2::risk(std::span<const double> x, double, EventCode d) const {
  check_pair(x, d);
  return d == 1 ? x[0] : 1.0 - x[0];
}

LinearDesign event_specific_design() {
  LinearDesign design;
  design.rates = {1.0, 0.5};
  design.coefficients = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  design.censoring_rate = 0.5;
  return design;
}

Dataset generate_linear(const LinearDesign& design, std::size_t n, std::uint64_t seed) {
  const std::size_t k = design.rates.size();
  if (k == 0 || design.coefficients.size() != k) {
    throw Error(ErrorCode::InvalidArgument, "design needs one coefficient row per cause");
  }
  const std::size_t d = design.coefficients.front().size();
  for (const auto& row : design.coefficients) {
    if (row.size() != d) throw Error(ErrorCode::InconsistentDimension, "coefficient rows differ in length");
  }
  if (!(design.censoring_rate >= 0.0)) throw Error(ErrorCode::InvalidArgument, "censoring rate must be >= 0");

  Rng rng(seed);
  std::vector<SurvivalRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = records[i];
    r.id = std::to_string(i + 1);
    r.covariates.resize(d);
    for (auto& v : r.covariates) v = rng.normal();
    r.time = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double lp = 0.0;
      for (std::size_t j = 0; j < d; ++j) lp += design.coefficients[c][j] * r.covariates[j];
      const double t = rng.exponential(design.rates[c] * std::exp(lp));
      if (t < r.time) {
        r.time = t;
        r.event = static_cast<EventCode>(c + 1);
      }
    }
    const double cens = rng.exponential(design.censoring_rate);
    if (cens < r.time) {
      r.time = cens;
      r.event = kCensored;
    }
  }
  std::vector<std::string> names(d);
  for (std::size_t j = 0; j < d; ++j) names[j] = "x" + std::to_string(j + 1);
  return validate_dataset(std::move(records), std::move(names), ValidateOptions{static_cast<int>(k)});
}

}  // namespace jcindex
