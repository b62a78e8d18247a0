#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "jcindex/error.hpp"
#include "jcindex/models.hpp"

namespace jcindex {

PartialLikelihood::PartialLikelihood(std::vector<double> times, std::vector<char> status, Eigen::MatrixXd design)
    : times_(std::move(times)), status_(std::move(status)), design_(std::move(design)) {
  if (times_.size() != status_.size() || static_cast<std::size_t>(design_.rows()) != times_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "partial likelihood inputs differ in length");
  }
  order_.resize(times_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return times_[a] > times_[b]; });
  n_events_ = static_cast<std::size_t>(std::count(status_.begin(), status_.end(), char{1}));
}

PartialLikelihood::Evaluation PartialLikelihood::evaluate(const Eigen::VectorXd& beta, bool with_hessian) const {
  const auto p = static_cast<std::size_t>(design_.cols());
  const std::size_t n = times_.size();
  if (static_cast<std::size_t>(beta.size()) != p) throw Error(ErrorCode::DimensionMismatch, "beta has wrong length");

  Eigen::VectorXd eta = design_ * beta;
  const double offset = n > 0 ? eta.maxCoeff() : 0.0;

  // Risk-set sums accumulate in long double; at n ~ 1e5 the double rounding
  // of S1/S0 is otherwise comparable to the gradient tolerance.
  long double s0 = 0.0L;
  std::vector<long double> s1(p, 0.0L);
  std::vector<long double> s2(with_hessian ? p * p : 0, 0.0L);
  long double loglik = 0.0L;
  std::vector<long double> grad(p, 0.0L);
  std::vector<long double> hess(with_hessian ? p * p : 0, 0.0L);

  std::size_t pos = 0;
  while (pos < n) {
    const double t = times_[order_[pos]];
    std::size_t end = pos;
    std::size_t deaths = 0;
    std::vector<long double> xsum_dead(p, 0.0L);
    long double eta_dead = 0.0L;
    while (end < n && times_[order_[end]] == t) {
      const std::size_t i = order_[end];
      const long double w = std::exp(static_cast<long double>(eta[static_cast<Eigen::Index>(i)] - offset));
      s0 += w;
      for (std::size_t a = 0; a < p; ++a) {
        const long double xa = design_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
        s1[a] += w * xa;
        if (with_hessian) {
          for (std::size_t b = 0; b <= a; ++b) {
            s2[a * p + b] += w * xa * design_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
          }
        }
        if (status_[i]) xsum_dead[a] += xa;
      }
      if (status_[i]) {
        ++deaths;
        eta_dead += eta[static_cast<Eigen::Index>(i)];
      }
      ++end;
    }
    if (deaths > 0) {
      const auto dd = static_cast<long double>(deaths);
      loglik += eta_dead - dd * (std::log(s0) + offset);
      for (std::size_t a = 0; a < p; ++a) {
        const long double mean_a = s1[a] / s0;
        grad[a] += xsum_dead[a] - dd * mean_a;
        if (with_hessian) {
          for (std::size_t b = 0; b <= a; ++b) {
            hess[a * p + b] -= dd * (s2[a * p + b] / s0 - mean_a * (s1[b] / s0));
          }
        }
      }
    }
    pos = end;
  }

  Evaluation out;
  out.value = static_cast<double>(loglik);
  out.gradient.resize(static_cast<Eigen::Index>(p));
  for (std::size_t a = 0; a < p; ++a) out.gradient[static_cast<Eigen::Index>(a)] = static_cast<double>(grad[a]);
  if (with_hessian) {
    out.hessian.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b <= a; ++b) {
        const auto v = static_cast<double>(hess[a * p + b]);
        out.hessian(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
        out.hessian(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
      }
    }
  }
  return out;
}

double PartialLikelihood::value(const Eigen::VectorXd& beta) const { return evaluate(beta, false).value; }

Eigen::VectorXd PartialLikelihood::gradient(const Eigen::VectorXd& beta) const {
  return evaluate(beta, false).gradient;
}

void PartialLikelihood::breslow(const Eigen::VectorXd& beta, std::vector<double>& event_times,
                                std::vector<double>& increments) const {
  const std::size_t n = times_.size();
  const Eigen::VectorXd eta = design_ * beta;
  event_times.clear();
  increments.clear();
  long double s0 = 0.0L;
  std::size_t pos = 0;
  while (pos < n) {
    const double t = times_[order_[pos]];
    std::size_t end = pos;
    std::size_t deaths = 0;
    while (end < n && times_[order_[end]] == t) {
      const std::size_t i = order_[end];
      s0 += std::exp(static_cast<long double>(eta[static_cast<Eigen::Index>(i)]));
      if (status_[i]) ++deaths;
      ++end;
    }
    if (deaths > 0) {
      event_times.push_back(t);
      increments.push_back(static_cast<double>(static_cast<long double>(deaths) / s0));
    }
    pos = end;
  }
  std::reverse(event_times.begin(), event_times.end());
  std::reverse(increments.begin(), increments.end());
}

CoxFit fit_partial_likelihood(const PartialLikelihood& pl, const FitOptions& options, EventCode event) {
  const auto p = static_cast<Eigen::Index>(pl.dimension());
  const std::string label = "event " + std::to_string(event);

  Eigen::VectorXd scale(p);
  for (Eigen::Index a = 0; a < p; ++a) {
    const auto col = pl.design().col(a);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / std::max<double>(1.0, static_cast<double>(col.size() - 1)));
    scale[a] = sd;
  }

  CoxFit fit;
  fit.coefficients = Eigen::VectorXd::Zero(p);
  if (p == 0) {
    fit.log_likelihood = pl.value(fit.coefficients);
    return fit;
  }

  auto current = pl.evaluate(fit.coefficients);
  for (int iter = 0;; ++iter) {
    fit.iterations = iter;
    fit.log_likelihood = current.value;
    fit.gradient_norm = current.gradient.cwiseAbs().maxCoeff();
    if (fit.gradient_norm < options.tol) return fit;
    if (iter >= options.max_iter) {
      throw Error(ErrorCode::NonConvergence, label + ": no convergence after " + std::to_string(options.max_iter) +
                                                 " iterations (gradient " + std::to_string(fit.gradient_norm) + ")");
    }

    const Eigen::MatrixXd information = -current.hessian;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(information);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || (ldlt.vectorD().array() <= 0.0).any()) {
      throw Error(ErrorCode::NonConvergence, label + ": information matrix is not positive definite");
    }
    const Eigen::VectorXd direction = ldlt.solve(current.gradient);

    double step = 1.0;
    bool accepted = false;
    PartialLikelihood::Evaluation candidate;
    Eigen::VectorXd beta;
    for (int halving = 0; halving < 40; ++halving) {
      beta = fit.coefficients + step * direction;
      candidate = pl.evaluate(beta);
      if (std::isfinite(candidate.value) && candidate.value >= current.value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No representable ascent left; accept the point when the Newton
      // decrement says it is stationary to working precision.
      const double decrement = current.gradient.dot(direction);
      if (decrement < 1e-12 * (1.0 + std::fabs(current.value))) return fit;
      throw Error(ErrorCode::NonConvergence, label + ": step halving failed to increase the likelihood");
    }
    fit.coefficients = beta;
    current = std::move(candidate);

    for (Eigen::Index a = 0; a < p; ++a) {
      if (std::fabs(fit.coefficients[a]) * scale[a] > options.divergence_bound) {
        throw Error(ErrorCode::MonotoneLikelihoodDivergence,
                    label + ": coefficient " + std::to_string(a) + " diverges (" +
                        std::to_string(fit.coefficients[a]) + ")");
      }
    }
  }
}

}  // namespace jcindex
