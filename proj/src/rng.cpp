#include "jcindex/rng.hpp"

#include <cmath>
#include <numbers>

namespace jcindex {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double Rng::exponential(double rate) {
  const double u = uniform();
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(u) / rate;
}

std::uint64_t Rng::index(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  for (;;) {
    const std::uint64_t v = engine_();
    if (v < limit) return v % n;
  }
}

}  // namespace jcindex
