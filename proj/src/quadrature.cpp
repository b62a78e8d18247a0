#include "jcindex/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <queue>

#include "jcindex/error.hpp"

namespace jcindex {

GaussRule gauss_hermite(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "quadrature needs at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k < n; ++k) {
    const double off = std::sqrt(static_cast<double>(k) / 2.0);
    jacobi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = off;
    jacobi(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mu0 = std::sqrt(std::numbers::pi);
  for (std::size_t k = 0; k < n; ++k) {
    rule.nodes[k] = eig.eigenvalues()[static_cast<Eigen::Index>(k)];
    const double v = eig.eigenvectors()(0, static_cast<Eigen::Index>(k));
    rule.weights[k] = mu0 * v * v;
  }
  // Symmetrise: the rule is exactly symmetric, the eigensolver only nearly.
  for (std::size_t k = 0; k < n / 2; ++k) {
    const std::size_t m = n - 1 - k;
    const double x = 0.5 * (rule.nodes[m] - rule.nodes[k]);
    const double w = 0.5 * (rule.weights[m] + rule.weights[k]);
    rule.nodes[k] = -x;
    rule.nodes[m] = x;
    rule.weights[k] = rule.weights[m] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double normal_expectation(const std::function<double(double)>& f, std::size_t n) {
  static thread_local std::size_t cached_n = 0;
  static thread_local GaussRule cached;
  if (cached_n != n) {
    cached = gauss_hermite(n);
    cached_n = n;
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += cached.weights[k] * f(std::numbers::sqrt2 * cached.nodes[k]);
  return sum / std::sqrt(std::numbers::pi);
}

namespace {

struct Segment {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> value;
  std::vector<double> error;
  double worst = 0.0;
};

struct ByWorst {
  bool operator()(const Segment& x, const Segment& y) const { return x.worst < y.worst; }
};

Segment gk15(const std::function<void(double, std::span<double>)>& f, std::size_t dim, double a, double b) {
  using kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  using gauss = boost::math::quadrature::gauss<double, 7>;
  const auto& x = kronrod::abscissa();
  const auto& wk = kronrod::weights();
  const auto& wg = gauss::weights();

  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::vector<double> k(dim, 0.0), g(dim, 0.0), buf(dim), buf2(dim);

  f(mid, buf);
  for (std::size_t c = 0; c < dim; ++c) {
    k[c] = wk[0] * buf[c];
    g[c] = wg[0] * buf[c];
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    f(mid - half * x[i], buf);
    f(mid + half * x[i], buf2);
    for (std::size_t c = 0; c < dim; ++c) {
      const double s = buf[c] + buf2[c];
      k[c] += wk[i] * s;
      if (i % 2 == 0) g[c] += wg[i / 2] * s;
    }
  }
  Segment seg{a, b, std::vector<double>(dim), std::vector<double>(dim), 0.0};
  for (std::size_t c = 0; c < dim; ++c) {
    seg.value[c] = half * k[c];
    seg.error[c] = std::fabs(half * (k[c] - g[c]));
    seg.worst = std::max(seg.worst, seg.error[c]);
  }
  return seg;
}

}  // namespace

AdaptiveResult integrate_adaptive(const std::function<void(double, std::span<double>)>& f, std::size_t dim,
                                  double a, double b, double abs_tol, std::size_t max_intervals) {
  if (!(b > a) || !(abs_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad integration interval or tolerance");
  std::priority_queue<Segment, std::vector<Segment>, ByWorst> heap;
  std::vector<double> total_err(dim, 0.0);
  auto seg = gk15(f, dim, a, b);
  for (std::size_t c = 0; c < dim; ++c) total_err[c] = seg.error[c];
  heap.push(std::move(seg));

  auto converged = [&] {
    return std::all_of(total_err.begin(), total_err.end(), [&](double e) { return e <= abs_tol; });
  };
  while (!converged()) {
    if (heap.size() >= max_intervals) {
      throw Error(ErrorCode::QuadratureNonConvergence,
                  "adaptive quadrature did not reach tolerance within " + std::to_string(max_intervals) + " intervals");
    }
    Segment top = heap.top();
    heap.pop();
    const double mid = 0.5 * (top.a + top.b);
    if (!(mid > top.a && mid < top.b)) {
      throw Error(ErrorCode::QuadratureNonConvergence, "adaptive quadrature interval underflow");
    }
    auto left = gk15(f, dim, top.a, mid);
    auto right = gk15(f, dim, mid, top.b);
    for (std::size_t c = 0; c < dim; ++c) total_err[c] += left.error[c] + right.error[c] - top.error[c];
    heap.push(std::move(left));
    heap.push(std::move(right));
  }

  // Sum the final segments in position order so the result does not depend on
  // heap internals.
  std::vector<Segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  AdaptiveResult out;
  out.values.assign(dim, 0.0);
  std::vector<double> err(dim, 0.0);
  for (const auto& s : segs) {
    for (std::size_t c = 0; c < dim; ++c) {
      out.values[c] += s.value[c];
      err[c] += s.error[c];
    }
  }
  out.error = *std::max_element(err.begin(), err.end());
  out.intervals = segs.size();
  return out;
}

}  // namespace jcindex
