#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace jcindex {

// n-point Gauss-Hermite rule for the weight exp(-x^2) (Golub-Welsch).
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_hermite(std::size_t n);

// E[f(Z)], Z ~ N(0, 1), with an n-point Gauss-Hermite rule.
double normal_expectation(const std::function<double(double)>& f, std::size_t n = 96);

struct AdaptiveResult {
  std::vector<double> values;
  double error = 0.0;  // max over components of the summed Kronrod-Gauss differences
  std::size_t intervals = 0;
};

// Globally adaptive 15-point Gauss-Kronrod for vector-valued integrands on
// [a, b]. f(x, out) writes `dim` values. The interval with the largest error
// is bisected until the total error estimate drops below abs_tol for every
// component. Throws QuadratureNonConvergence past max_intervals.
AdaptiveResult integrate_adaptive(const std::function<void(double, std::span<double>)>& f, std::size_t dim,
                                  double a, double b, double abs_tol, std::size_t max_intervals = 4000);

}  // namespace jcindex
