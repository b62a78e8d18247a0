#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "jcindex/core.hpp"

namespace jcindex {

// Closed-form two-event model: M(x,t,1) = exp(x), M(x,t,2) = 2 exp(-|x|).
// Scalar covariate only; risks do not depend on t.
double exp_model_risk(double x, EventCode d);
EventCode exp_model_type(double x);

class ExpModel final : public RiskModel {
 public:
  int n_event_types() const override { return 2; }
  double risk(std::span<const double> x, double t, EventCode d) const override;
  EventCode predict_type(std::span<const double> x, double t) const override;
};

// Log partial likelihood of a proportional-hazards model with Breslow tie
// handling. `design` rows are subjects; callers centre the columns.
class PartialLikelihood {
 public:
  PartialLikelihood(std::vector<double> times, std::vector<char> status, Eigen::MatrixXd design);

  struct Evaluation {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
  };

  double value(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const;
  Evaluation evaluate(const Eigen::VectorXd& beta, bool with_hessian = true) const;

  // Breslow increments dN(t) / sum_{j at risk} exp(beta'x_j) at each distinct
  // event time, in increasing time order.
  void breslow(const Eigen::VectorXd& beta, std::vector<double>& event_times, std::vector<double>& increments) const;

  std::size_t size() const noexcept { return times_.size(); }
  std::size_t n_events() const noexcept { return n_events_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(design_.cols()); }
  const Eigen::MatrixXd& design() const noexcept { return design_; }

 private:
  std::vector<double> times_;
  std::vector<char> status_;
  Eigen::MatrixXd design_;
  std::vector<std::size_t> order_;  // decreasing time
  std::size_t n_events_ = 0;
};

struct FitOptions {
  int max_iter = 100;
  double tol = 1e-8;  // gradient max-norm
  // |beta_j| * sd(x_j) above this is reported as divergence of a monotone likelihood.
  double divergence_bound = 25.0;
};

struct CoxFit {
  Eigen::VectorXd coefficients;
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
};

// Damped Newton ascent with step halving; accepted steps never decrease the
// log partial likelihood.
CoxFit fit_partial_likelihood(const PartialLikelihood& pl, const FitOptions& options, EventCode event = 1);

struct CauseFit {
  EventCode event = 1;
  std::vector<double> coefficients;     // one per covariate; 0 for constant columns
  std::vector<double> baseline_times;   // distinct event times of this cause
  std::vector<double> baseline_cumhaz;  // Breslow cumulative baseline hazard after each time
  double log_likelihood = 0.0;
  int iterations = 0;
};

// Cause-specific proportional hazards: lambda_k(t | x) = dLambda_0k(t) exp(beta_k'(x - mean)).
// risk(x, t, k) is the cumulative incidence F_k(t | x) from the discrete
// product-integral over the pooled event times:
//   F_k(t|x) = sum_{s <= t} S(s- | x) exp(beta_k'(x - mean)) dLambda_0k(s).
// If the pooled hazard at a step exceeds one it is scaled down to one, which
// keeps S >= 0 and sum_k F_k + S = 1.
class CauseSpecificPH final : public RiskModel {
 public:
  CauseSpecificPH(std::vector<std::string> covariate_names, std::vector<double> means, std::vector<CauseFit> causes);

  int n_event_types() const override { return static_cast<int>(causes_.size()); }
  double risk(std::span<const double> x, double t, EventCode d) const override;
  EventCode predict_type(std::span<const double> x, double t) const override;
  EventCode score_all(std::span<const double> x, double t, std::span<double> out) const override;
  // Walks the grid once for a block of subjects at a time.
  void score_rows(const Dataset& ds, std::size_t begin, std::size_t end, double t, std::span<double> scores,
                  std::span<EventCode> predicted) const override;

  std::vector<double> cumulative_incidence(std::span<const double> x, double t) const;
  double survival(std::span<const double> x, double t) const;
  double linear_predictor(std::span<const double> x, EventCode k) const;

  const std::vector<std::string>& covariate_names() const noexcept { return names_; }
  const std::vector<double>& means() const noexcept { return means_; }
  const std::vector<CauseFit>& causes() const noexcept { return causes_; }

 private:
  // Fills cif[0..K) and returns S(t | x).
  double evaluate(std::span<const double> x, double t, std::span<double> cif) const;

  std::vector<std::string> names_;
  std::vector<double> means_;
  std::vector<CauseFit> causes_;
  // Pooled event times of all causes; grid_increments_[m * K + k] is the
  // baseline hazard increment of cause k + 1 at grid_times_[m] (often 0).
  std::vector<double> grid_times_;
  std::vector<double> grid_increments_;
  std::vector<double> prefix_max_increment_;  // same layout: max over grid points <= m
};

// Fits one proportional-hazards model per event type, treating other types and
// censoring as censored. Throws InsufficientEvents(k) when type k has fewer
// than d + 1 events, NonConvergence or MonotoneLikelihoodDivergence.
CauseSpecificPH fit_cause_specific(const Dataset& ds, const FitOptions& options = {});

double csc_risk(const CauseSpecificPH& model, std::span<const double> x, double t, EventCode k);

}  // namespace jcindex
