#ifndef CARLEMAN_SUMMATION_HPP
#define CARLEMAN_SUMMATION_HPP

#include <cmath>

namespace carleman {

// Neumaier's variant of Kahan summation. The running error term is kept
// separately so a partial sum can be resumed without losing it.
class CompensatedSum {
 public:
  constexpr CompensatedSum() noexcept = default;
  constexpr explicit CompensatedSum(double start) noexcept : sum_(start) {}

  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  [[nodiscard]] constexpr double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace carleman

#endif  // CARLEMAN_SUMMATION_HPP
