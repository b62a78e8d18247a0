#include <algorithm>
#include <cmath>
#include <string>

#include "jcindex/error.hpp"
#include "jcindex/models.hpp"
#include "jcindex/parallel.hpp"

namespace jcindex {

double exp_model_risk(double x, EventCode d) {
  switch (d) {
    case 1:
      return std::exp(x);
    case 2:
      return 2.0 * std::exp(-std::fabs(x));
    default:
      throw Error(ErrorCode::InvalidArgument, "EXP model has event types 1 and 2 only");
  }
}

EventCode exp_model_type(double x) { return exp_model_risk(x, 2) > exp_model_risk(x, 1) ? 2 : 1; }

namespace {

double scalar_of(std::span<const double> x) {
  if (x.size() != 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "EXP model needs one covariate, got " + std::to_string(x.size()));
  }
  return x[0];
}

}  // namespace

double ExpModel::risk(std::span<const double> x, double, EventCode d) const { return exp_model_risk(scalar_of(x), d); }

EventCode ExpModel::predict_type(std::span<const double> x, double) const { return exp_model_type(scalar_of(x)); }

// --- cause-specific proportional hazards -------------------------------

CauseSpecificPH::CauseSpecificPH(std::vector<std::string> covariate_names, std::vector<double> means,
                                 std::vector<CauseFit> causes)
    : names_(std::move(covariate_names)), means_(std::move(means)), causes_(std::move(causes)) {
  if (means_.size() != names_.size()) throw Error(ErrorCode::DimensionMismatch, "means/names length differ");
  if (causes_.empty()) throw Error(ErrorCode::InvalidArgument, "model needs at least one cause");
  const std::size_t k = causes_.size();
  for (std::size_t c = 0; c < k; ++c) {
    const auto& f = causes_[c];
    if (f.coefficients.size() != names_.size()) {
      throw Error(ErrorCode::DimensionMismatch, "cause " + std::to_string(c + 1) + " has wrong coefficient count");
    }
    if (f.baseline_times.size() != f.baseline_cumhaz.size()) {
      throw Error(ErrorCode::DimensionMismatch, "baseline time/value arrays differ in length");
    }
    for (std::size_t m = 0; m < f.baseline_times.size(); ++m) {
      const double prev_t = m == 0 ? 0.0 : f.baseline_times[m - 1];
      const double prev_h = m == 0 ? 0.0 : f.baseline_cumhaz[m - 1];
      if (!(f.baseline_times[m] >= prev_t) || (m > 0 && f.baseline_times[m] == prev_t) ||
          !(f.baseline_cumhaz[m] >= prev_h) || !std::isfinite(f.baseline_cumhaz[m])) {
        throw Error(ErrorCode::InvalidArgument, "baseline hazard must be a non-decreasing step function");
      }
    }
    grid_times_.insert(grid_times_.end(), f.baseline_times.begin(), f.baseline_times.end());
  }
  std::sort(grid_times_.begin(), grid_times_.end());
  grid_times_.erase(std::unique(grid_times_.begin(), grid_times_.end()), grid_times_.end());
  grid_increments_.assign(grid_times_.size() * k, 0.0);

  for (std::size_t c = 0; c < k; ++c) {
    const auto& f = causes_[c];
    std::size_t m = 0;
    for (std::size_t e = 0; e < f.baseline_times.size(); ++e) {
      while (grid_times_[m] < f.baseline_times[e]) ++m;
      grid_increments_[m * k + c] = f.baseline_cumhaz[e] - (e == 0 ? 0.0 : f.baseline_cumhaz[e - 1]);
    }
  }
  // Running maximum of each cause's increments, for the no-capping test.
  prefix_max_increment_ = grid_increments_;
  for (std::size_t m = 1; m < grid_times_.size(); ++m) {
    for (std::size_t c = 0; c < k; ++c) {
      prefix_max_increment_[m * k + c] = std::max(prefix_max_increment_[m * k + c], prefix_max_increment_[(m - 1) * k + c]);
    }
  }
}

double CauseSpecificPH::linear_predictor(std::span<const double> x, EventCode k) const {
  if (x.size() != names_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(names_.size()) + " covariates, got " +
                                                  std::to_string(x.size()));
  }
  if (k < 1 || k > n_event_types()) throw Error(ErrorCode::InvalidArgument, "event type out of range");
  const auto& beta = causes_[static_cast<std::size_t>(k - 1)].coefficients;
  double lp = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) lp += beta[j] * (x[j] - means_[j]);
  return lp;
}

double CauseSpecificPH::evaluate(std::span<const double> x, double t, std::span<double> cif) const {
  const std::size_t k = causes_.size();
  double rel[16];
  std::vector<double> rel_heap;
  double* r = rel;
  if (k > 16) {
    rel_heap.resize(k);
    r = rel_heap.data();
  }
  for (std::size_t c = 0; c < k; ++c) {
    r[c] = std::exp(linear_predictor(x, static_cast<EventCode>(c + 1)));
    cif[c] = 0.0;
  }
  double surv = 1.0;
  const double* inc = grid_increments_.data();
  for (std::size_t m = 0; m < grid_times_.size() && grid_times_[m] <= t; ++m, inc += k) {
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) total += r[c] * inc[c];
    if (total <= 0.0) continue;
    const double scale = total > 1.0 ? 1.0 / total : 1.0;
    for (std::size_t c = 0; c < k; ++c) cif[c] += surv * r[c] * inc[c] * scale;
    surv = total >= 1.0 ? 0.0 : surv * (1.0 - total);
  }
  return surv;
}

double CauseSpecificPH::risk(std::span<const double> x, double t, EventCode d) const {
  if (d < 1 || d > n_event_types()) throw Error(ErrorCode::InvalidArgument, "event type out of range");
  std::vector<double> cif(causes_.size());
  evaluate(x, t, cif);
  return cif[static_cast<std::size_t>(d - 1)];
}

EventCode CauseSpecificPH::score_all(std::span<const double> x, double t, std::span<double> out) const {
  if (out.size() != causes_.size()) throw Error(ErrorCode::DimensionMismatch, "score buffer has wrong length");
  evaluate(x, t, out);
  EventCode best = 1;
  for (std::size_t c = 1; c < out.size(); ++c) {
    if (out[c] > out[static_cast<std::size_t>(best - 1)]) best = static_cast<EventCode>(c + 1);
  }
  return best;
}

namespace {

// Same arithmetic, in the same order, as CauseSpecificPH::evaluate, for kBlock
// subjects side by side; independent chains let the loop pipeline.
constexpr std::size_t kBlock = 16;

template <std::size_t K>
void cif_block(const double* grid_times, std::size_t grid_size, const double* increments, std::size_t k_runtime,
               double t, std::size_t count, const double* rel, bool uncapped, double* cif, double* surv) {
  const std::size_t k = K == 0 ? k_runtime : K;
  for (std::size_t b = 0; b < count; ++b) surv[b] = 1.0;
  const double* inc = increments;
  if constexpr (K == 2) {
    if (uncapped && count == kBlock) {
      // No step can reach total hazard 1, so scale == 1 and the zero-hazard
      // skip is a no-op; dropping both leaves every result bit-identical.
      // Structure-of-arrays so the subject loop vectorises.
      double r1[kBlock], r2[kBlock], f1[kBlock], f2[kBlock], s[kBlock];
      for (std::size_t b = 0; b < kBlock; ++b) {
        r1[b] = rel[2 * b];
        r2[b] = rel[2 * b + 1];
        f1[b] = f2[b] = 0.0;
        s[b] = 1.0;
      }
      for (std::size_t m = 0; m < grid_size && grid_times[m] <= t; ++m, inc += 2) {
        const double a1 = inc[0];
        const double a2 = inc[1];
        for (std::size_t b = 0; b < kBlock; ++b) {
          const double total = r1[b] * a1 + r2[b] * a2;
          f1[b] += s[b] * r1[b] * a1;
          f2[b] += s[b] * r2[b] * a2;
          s[b] = s[b] * (1.0 - total);
        }
      }
      for (std::size_t b = 0; b < kBlock; ++b) {
        cif[2 * b] = f1[b];
        cif[2 * b + 1] = f2[b];
        surv[b] = s[b];
      }
      return;
    }
  }
  for (std::size_t m = 0; m < grid_size && grid_times[m] <= t; ++m, inc += k) {
    for (std::size_t b = 0; b < count; ++b) {
      const double* r = rel + b * k;
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) total += r[c] * inc[c];
      if (total <= 0.0) continue;
      const double scale = total > 1.0 ? 1.0 / total : 1.0;
      for (std::size_t c = 0; c < k; ++c) cif[b * k + c] += surv[b] * r[c] * inc[c] * scale;
      surv[b] = total >= 1.0 ? 0.0 : surv[b] * (1.0 - total);
    }
  }
}

}  // namespace

void CauseSpecificPH::score_rows(const Dataset& ds, std::size_t begin, std::size_t end, double t,
                                 std::span<double> scores, std::span<EventCode> predicted) const {
  const std::size_t k = causes_.size();
  if (scores.size() != (end - begin) * k || predicted.size() != end - begin) {
    throw Error(ErrorCode::DimensionMismatch, "score buffer has wrong length");
  }
  std::vector<double> rel(kBlock * k);
  const auto steps = static_cast<std::size_t>(std::upper_bound(grid_times_.begin(), grid_times_.end(), t) -
                                              grid_times_.begin());
  const double* max_inc = steps > 0 ? prefix_max_increment_.data() + (steps - 1) * k : nullptr;
  double surv[kBlock];
  for (std::size_t base = begin; base < end; base += kBlock) {
    const std::size_t count = std::min(kBlock, end - base);
    for (std::size_t b = 0; b < count; ++b) {
      for (std::size_t c = 0; c < k; ++c) {
        rel[b * k + c] = std::exp(linear_predictor(ds.covariates(base + b), static_cast<EventCode>(c + 1)));
      }
    }
    bool uncapped = true;
    for (std::size_t b = 0; b < count && uncapped; ++b) {
      double bound = 0.0;
      for (std::size_t c = 0; c < k && max_inc; ++c) bound += rel[b * k + c] * max_inc[c];
      // Margin covers rounding in the per-step sums.
      uncapped = bound < 0.5 && std::isfinite(bound);
    }
    double* cif = scores.data() + (base - begin) * k;
    std::fill(cif, cif + count * k, 0.0);
    if (k == 2) {
      cif_block<2>(grid_times_.data(), grid_times_.size(), grid_increments_.data(), k, t, count, rel.data(), uncapped, cif, surv);
    } else {
      cif_block<0>(grid_times_.data(), grid_times_.size(), grid_increments_.data(), k, t, count, rel.data(), uncapped, cif, surv);
    }
    for (std::size_t b = 0; b < count; ++b) {
      EventCode best = 1;
      for (std::size_t c = 1; c < k; ++c) {
        if (cif[b * k + c] > cif[b * k + static_cast<std::size_t>(best - 1)]) best = static_cast<EventCode>(c + 1);
      }
      predicted[base - begin + b] = best;
    }
  }
}

EventCode CauseSpecificPH::predict_type(std::span<const double> x, double t) const {
  std::vector<double> cif(causes_.size());
  return score_all(x, t, cif);
}

std::vector<double> CauseSpecificPH::cumulative_incidence(std::span<const double> x, double t) const {
  std::vector<double> cif(causes_.size());
  evaluate(x, t, cif);
  return cif;
}

double CauseSpecificPH::survival(std::span<const double> x, double t) const {
  std::vector<double> cif(causes_.size());
  return evaluate(x, t, cif);
}

double csc_risk(const CauseSpecificPH& model, std::span<const double> x, double t, EventCode k) {
  return model.risk(x, t, k);
}

CauseSpecificPH fit_cause_specific(const Dataset& ds, const FitOptions& options) {
  const std::size_t n = ds.size();
  const std::size_t d = ds.dimension();
  const int n_types = ds.n_event_types();
  if (n_types < 1) throw Error(ErrorCode::InvalidArgument, "dataset has no event types");
  if (options.max_iter < 1 || !(options.tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "max_iter must be positive and tol > 0");
  }

  for (EventCode k = 1; k <= n_types; ++k) {
    const std::size_t events = ds.count_of(k);
    if (events < d + 1) {
      throw Error(ErrorCode::InsufficientEvents, "event " + std::to_string(k) + " has " + std::to_string(events) +
                                                     " events; at least " + std::to_string(d + 1) + " needed");
    }
  }

  // Columns with a single value carry no information; they are left out of the
  // optimisation and keep coefficient 0.
  std::vector<double> means(d, 0.0);
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = ds.column(j);
    long double sum = 0.0L;
    for (double v : col) sum += v;
    means[j] = static_cast<double>(sum / static_cast<long double>(n));
    if (std::any_of(col.begin(), col.end(), [&](double v) { return v != col.front(); })) active.push_back(j);
  }

  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(active.size()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = ds.covariates(i);
    for (std::size_t a = 0; a < active.size(); ++a) {
      design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = x[active[a]] - means[active[a]];
    }
  }

  std::vector<CauseFit> causes(static_cast<std::size_t>(n_types));
  parallel_chunks(causes.size(), 1, [&](std::size_t c, std::size_t, std::size_t) {
    const auto k = static_cast<EventCode>(c + 1);
    std::vector<char> status(n);
    for (std::size_t i = 0; i < n; ++i) status[i] = ds.events()[i] == k ? 1 : 0;
    const PartialLikelihood pl(ds.times(), std::move(status), design);
    const CoxFit fit = fit_partial_likelihood(pl, options, k);

    CauseFit& out = causes[c];
    out.event = k;
    out.coefficients.assign(d, 0.0);
    for (std::size_t a = 0; a < active.size(); ++a) {
      out.coefficients[active[a]] = fit.coefficients[static_cast<Eigen::Index>(a)];
    }
    out.log_likelihood = fit.log_likelihood;
    out.iterations = fit.iterations;
    std::vector<double> increments;
    pl.breslow(fit.coefficients, out.baseline_times, increments);
    out.baseline_cumhaz.resize(increments.size());
    double cum = 0.0;
    for (std::size_t m = 0; m < increments.size(); ++m) out.baseline_cumhaz[m] = cum += increments[m];
  });

  CauseSpecificPH model(ds.covariate_names(), std::move(means), std::move(causes));

  // Sub-distribution check on a sample of training points at the last event time.
  const std::size_t probes = std::min<std::size_t>(n, 64);
  const double t_max = *std::max_element(ds.times().begin(), ds.times().end());
  for (std::size_t p = 0; p < probes; ++p) {
    const std::size_t i = p * n / probes;
    const auto cif = model.cumulative_incidence(ds.covariates(i), t_max);
    double s = 0.0;
    for (double f : cif) s += f;
    if (!(s >= 0.0 && s <= 1.0 + 1e-12)) {
      throw Error(ErrorCode::FitFailure, "cumulative incidences exceed one for subject " + ds[i].id);
    }
  }
  return model;
}

}  // namespace jcindex
