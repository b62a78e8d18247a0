#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "jcindex/core.hpp"
#include "jcindex/metrics.hpp"

namespace jcindex {

// One scalar covariate X ~ N(0, 1) and three latent exponential times:
//   censoring T0 ~ Exp(lambda0 e^{beta0 X}), T1 ~ Exp(lambda1 e^{beta1 X}),
//   T2 ~ Exp(lambda2 e^{beta2 cos X}).
// The observed time is the minimum, the event its index (0 = censored).
struct SynthConfig {
  double lambda1 = 1.0;
  double lambda2 = 2.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  double beta0 = 0.0;
  double lambda0 = 0.0;  // 0 disables censoring
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  // When set, X is this value for every subject instead of a normal draw
  // (the normal is still consumed, keeping streams aligned).
  std::optional<double> fixed_x;
};

struct LatentDraw {
  double x = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
};

// Each subject consumes exactly one normal and three uniforms (in the order
// X, T1, T2, T0), so the censored and uncensored cohorts for one seed share
// their event times.
std::vector<LatentDraw> draw_latent(const SynthConfig& cfg);
Dataset generate(const SynthConfig& cfg);

double cause_rate(const SynthConfig& cfg, double x, EventCode d);
double total_event_rate(const SynthConfig& cfg, double x);
// Closed-form F_d(s | x) = rate_d(x) / r(x) (1 - e^{-r(x) s}), censoring excluded.
double cause_cif(const SynthConfig& cfg, double x, double s, EventCode d);

// E_X[lambda0 e^{beta0 X} / (lambda0 e^{beta0 X} + r(X))] by Gauss-Hermite quadrature.
double censoring_fraction(const SynthConfig& cfg, std::size_t nodes = 96);

// lambda0 giving the target censored fraction, by bisection; |achieved - target| < precision.
// Throws InvalidArgument for target outside (0, 1), BracketingFailure when no
// finite rate reaches the target.
double calibrate_censoring_rate(double target, const SynthConfig& cfg, double precision = 1e-4);

// Population q-quantile of the uncensored event time min(T1, T2).
double population_time_quantile(const SynthConfig& cfg, double q);

// Cohort for the two risk-only models: covariates (u1, u2) iid U(0, 1) act as
// the models' random risks, D uniform on {1, 2}, T ~ Exp(1), all independent.
Dataset generate_random_risk_cohort(std::size_t n, std::uint64_t seed);

// Model 1: risk(u, t, d) = u_d. Model 2: risk(u, t, 1) = u_1, risk(u, t, 2) = 1 - u_1.
class RandomRiskModel1 final : public RiskModel {
 public:
  int n_event_types() const override { return 2; }
  double risk(std::span<const double> x, double t, EventCode d) const override;
};

class RandomRiskModel2 final : public RiskModel {
 public:
  int n_event_types() const override { return 2; }
  double risk(std::span<const double> x, double t, EventCode d) const override;
};

// Multi-covariate design with event-specific effects: X ~ N(0, I_d);
// cause k has hazard rates[k] exp(coefficients[k]' X); censoring is
// Exp(censoring_rate) independent of X (0 disables it).
struct LinearDesign {
  std::vector<double> rates;
  std::vector<std::vector<double>> coefficients;
  double censoring_rate = 0.0;
};

// X1 drives event 1, X2 the rarer event 2, X3 is noise.
LinearDesign event_specific_design();
Dataset generate_linear(const LinearDesign& design, std::size_t n, std::uint64_t seed);

// --- ground-truth oracles ------------------------------------------------

struct McOracleOptions {
  std::size_t n = 100000;
  std::uint64_t seed = 20240601;
  double quantile = 0.75;
  // Fixed horizon; when unset the quantile of the generated cohort is used.
  std::optional<double> horizon;
};

struct McOracleResult {
  MetricReport report;
  // Split-half standard errors: |half_a - half_b| / 2 per reported metric, in
  // all_metric_selectors order.
  std::vector<std::pair<std::string, double>> standard_errors;
};

// Large uncensored cohort from `cfg` (lambda0 forced to 0), uncensored estimators.
McOracleResult true_metrics_mc(const RiskModel& model, const SynthConfig& cfg, const McOracleOptions& options = {});

struct PopulationMetrics {
  double horizon = 0.0;
  std::vector<double> concordance_per_event;
  double accuracy = 0.0;
  double joint_concordance = 0.0;
  double conditional_concordance = 0.0;
  double accuracy_star = 0.0;
  double error_bound = 0.0;  // quadrature error estimate on the ratio inputs
};

// Population metrics of a scalar-covariate model under the generator, from
//   JC(t) = sum_d E[ I(Q_ij) int_0^t (1 - F_d(s|X_j)) dF_d(s|X_i) ] / sum_d E[ same without Q ]
// with closed-form time integrals and adaptive Gauss-Kronrod over (X_i, X_j).
// Throws QuadratureNonConvergence.
PopulationMetrics true_jc_integral(const RiskModel& model, const SynthConfig& cfg, double t, double abs_tol = 1e-6);

}  // namespace jcindex
