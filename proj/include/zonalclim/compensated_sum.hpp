#pragma once

#include <cmath>

namespace zonalclim {

/// Neumaier's variant of Kahan summation. The rounding error of each
/// addition is recovered exactly and accumulated separately; the result
/// depends only on the order of add() calls.
template <typename Scalar>
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(Scalar init) : sum_(init) {}

  void add(Scalar x) {
    const Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      error_ += (sum_ - t) + x;
    else
      error_ += (x - t) + sum_;
    sum_ = t;
  }

  CompensatedSum& operator+=(Scalar x) {
    add(x);
    return *this;
  }

  Scalar value() const { return sum_ + error_; }

 private:
  Scalar sum_ = 0;
  Scalar error_ = 0;
};

}  // namespace zonalclim
