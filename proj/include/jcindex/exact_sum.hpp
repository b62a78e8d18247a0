#pragma once

#include <vector>

namespace jcindex {

// Order-independent floating-point summation. Keeps the running sum as a list
// of non-overlapping partials (Shewchuk's grow-expansion) and rounds once in
// value(), so any permutation or partition of the same terms yields the same
// double. Overflow to infinity is not handled.
class ExactSum {
 public:
  void add(double x);
  // Adds count * x without rounding the product.
  void add_product(double count, double x);
  void merge(const ExactSum& other);
  void clear() noexcept { partials_.clear(); }

  double value() const;

 private:
  std::vector<double> partials_;
};

}  // namespace jcindex
