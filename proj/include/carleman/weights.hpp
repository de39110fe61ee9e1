#ifndef CARLEMAN_WEIGHTS_HPP
#define CARLEMAN_WEIGHTS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "carleman/errors.hpp"
#include "carleman/summation.hpp"

namespace carleman {

enum class WeightFamily { unit, power, explicit_list };

class WeightSequence;

/// Forward-only reader over the pairs (lambda_k, Lambda_k), k = 1, 2, ...
///
/// Reads from the owning sequence's cache while it can and computes the
/// remaining terms on the fly, continuing the same compensated sum, so the
/// values it yields do not depend on how far the cache has been extended.
/// A cursor must not be used while the owning sequence is being extended.
class WeightCursor {
 public:
  [[nodiscard]] std::size_t index() const noexcept { return k_; }
  [[nodiscard]] double lambda() const noexcept { return lambda_; }
  [[nodiscard]] double prefix() const noexcept { return prefix_; }

  /// False only for explicit sequences positioned at their last weight.
  [[nodiscard]] bool has_next() const noexcept;

  /// Moves to k + 1. Throws WeightError past the end of an explicit list.
  void advance();

 private:
  friend class WeightSequence;
  explicit WeightCursor(const WeightSequence& seq);

  const WeightSequence* seq_;
  std::size_t k_ = 1;
  double lambda_ = 0.0;
  double prefix_ = 0.0;
  CompensatedSum running_;
};

/// A positive weight sequence lambda_1, lambda_2, ... with a growable cache
/// of the weights and their prefix sums Lambda_k.
///
/// Mutating members (`ensure`, `lambda`, `prefix_sum`) extend the cache and
/// need a single owner; everything reached through `cursor()` or the const
/// accessors is safe for concurrent readers once the cache is large enough.
class WeightSequence {
 public:
  static WeightSequence unit() { return WeightSequence(WeightFamily::unit, 0.0, {}); }

  static WeightSequence power(double alpha) {
    if (!(alpha >= 1.0) || !std::isfinite(alpha))
      throw PreconditionError("power weights need a finite alpha >= 1, got " + std::to_string(alpha));
    return WeightSequence(WeightFamily::power, alpha, {});
  }

  static WeightSequence from_values(std::vector<double> values) {
    if (values.empty()) throw WeightError("explicit weight list is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
        std::ostringstream os;
        os << "weight " << (i + 1) << " is not a positive finite number (" << values[i] << ")";
        throw WeightError(os.str());
      }
    }
    WeightSequence seq(WeightFamily::explicit_list, 0.0, std::move(values));
    seq.ensure(seq.values_.size());
    return seq;
  }

  [[nodiscard]] WeightFamily family() const noexcept { return family_; }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }

  /// Number of weights for an explicit list; empty for the infinite families.
  [[nodiscard]] std::optional<std::size_t> length() const noexcept {
    if (family_ == WeightFamily::explicit_list) return values_.size();
    return std::nullopt;
  }

  /// `k` clamped to the available length.
  [[nodiscard]] std::size_t clamp_index(std::size_t k) const noexcept {
    if (auto n = length()) return std::min(k, *n);
    return k;
  }

  [[nodiscard]] std::string describe() const {
    switch (family_) {
      case WeightFamily::unit:
        return "unit";
      case WeightFamily::power: {
        std::ostringstream os;
        os.precision(17);
        os << "power:alpha=" << alpha_;
        return os.str();
      }
      case WeightFamily::explicit_list:
        return "explicit[" + std::to_string(values_.size()) + "]";
    }
    return "?";
  }

  [[nodiscard]] std::size_t cached() const noexcept { return lambdas_.size(); }

  /// Extends the cache through index k.
  void ensure(std::size_t k) {
    if (k <= lambdas_.size()) return;
    check_index(k);
    lambdas_.reserve(k);
    prefixes_.reserve(k);
    for (std::size_t j = lambdas_.size() + 1; j <= k; ++j) {
      const double lam = compute_lambda(j);
      running_.add(lam);
      lambdas_.push_back(lam);
      prefixes_.push_back(running_.value());
    }
  }

  /// Weight lambda_k, k >= 1.
  double lambda(std::size_t k) {
    check_index(k);
    ensure(k);
    return lambdas_[k - 1];
  }

  /// Prefix sum Lambda_k = lambda_1 + ... + lambda_k.
  double prefix_sum(std::size_t k) {
    check_index(k);
    ensure(k);
    return prefixes_[k - 1];
  }

  /// Cached weight; k must already be covered by `ensure`.
  [[nodiscard]] double cached_lambda(std::size_t k) const { return lambdas_.at(k - 1); }
  [[nodiscard]] double cached_prefix(std::size_t k) const { return prefixes_.at(k - 1); }

  [[nodiscard]] WeightCursor cursor() const { return WeightCursor(*this); }

 private:
  friend class WeightCursor;

  WeightSequence(WeightFamily family, double alpha, std::vector<double> values)
      : family_(family), alpha_(alpha), values_(std::move(values)) {}

  void check_index(std::size_t k) const {
    if (k == 0) throw WeightError("weight index must be >= 1");
    if (family_ == WeightFamily::explicit_list && k > values_.size()) {
      throw WeightError("weight index " + std::to_string(k) + " is past the end of the explicit list (length " +
                        std::to_string(values_.size()) + ")");
    }
  }

  [[nodiscard]] double compute_lambda(std::size_t k) const {
    switch (family_) {
      case WeightFamily::unit:
        return 1.0;
      case WeightFamily::power:
        return std::pow(static_cast<double>(k), alpha_);
      case WeightFamily::explicit_list:
        check_index(k);
        return values_[k - 1];
    }
    return 0.0;
  }

  WeightFamily family_;
  double alpha_;
  std::vector<double> values_;
  std::vector<double> lambdas_;
  std::vector<double> prefixes_;
  CompensatedSum running_;  // state after the last cached term
};

inline WeightCursor::WeightCursor(const WeightSequence& seq) : seq_(&seq) {
  if (seq.cached() >= 1) {
    lambda_ = seq.lambdas_[0];
    prefix_ = seq.prefixes_[0];
  } else {
    lambda_ = seq.compute_lambda(1);
    running_ = CompensatedSum();
    running_.add(lambda_);
    prefix_ = running_.value();
  }
}

inline bool WeightCursor::has_next() const noexcept {
  if (auto n = seq_->length()) return k_ < *n;
  return true;
}

inline void WeightCursor::advance() {
  const std::size_t next = k_ + 1;
  const std::size_t cached = seq_->cached();
  if (next <= cached) {
    lambda_ = seq_->lambdas_[next - 1];
    prefix_ = seq_->prefixes_[next - 1];
  } else {
    if (next == cached + 1) running_ = seq_->running_;
    lambda_ = seq_->compute_lambda(next);
    running_.add(lambda_);
    prefix_ = running_.value();
  }
  k_ = next;
}

namespace detail {

// Lambda_{k+1}/lambda_{k+1} - Lambda_k/lambda_k, rewritten so that equal
// consecutive weights give exactly 1.
inline double ratio_gap(double lam_k, double lam_next, double prefix_k) noexcept {
  return 1.0 - prefix_k * ((lam_next - lam_k) / (lam_k * lam_next));
}

// (Lambda_k/lambda_k) * log((Lambda_{k+1}/lambda_{k+1}) / (Lambda_k/lambda_k))
inline double ratio_term(double lam_k, double lam_next, double prefix_k) noexcept {
  const double q = prefix_k / lam_k;
  return q * std::log1p(ratio_gap(lam_k, lam_next, prefix_k) / q);
}

// log(lambda_{k+1}/lambda_k)
inline double log_weight_ratio(double lam_k, double lam_next) noexcept {
  return std::log1p((lam_next - lam_k) / lam_k);
}

}  // namespace detail

/// n-th term of the supremum defining M:
/// (Lambda_n/lambda_n) * log((Lambda_{n+1}/lambda_{n+1}) / (Lambda_n/lambda_n)).
inline double ratio_term(WeightSequence& seq, std::size_t n) {
  if (n == 0) throw PreconditionError("ratio_term needs n >= 1");
  seq.ensure(n + 1);
  return detail::ratio_term(seq.cached_lambda(n), seq.cached_lambda(n + 1), seq.cached_prefix(n));
}

enum class ConstantSource { closed_form, estimated };

/// The constants M (governing the infinite-series constant e^M) and C
/// (lambda_k/Lambda_k ~ C/k) of a weight sequence.
struct WeightConstants {
  double M = 0.0;
  ConstantSource M_source = ConstantSource::closed_form;
  std::size_t M_argmax = 0;   // index attaining the running sup; 0 when the sup is a limit
  bool M_tail_limit = false;  // the sup is reached only as n -> infinity
  double C = 0.0;
  ConstantSource C_source = ConstantSource::closed_form;
  double C_error_estimate = 0.0;

  [[nodiscard]] double exp_M() const { return std::exp(M); }

  static WeightConstants closed_form(double M, double C) {
    if (!(M > 0.0) || !(C > 0.0)) throw PreconditionError("weight constants must satisfy M > 0 and C > 0");
    WeightConstants c;
    c.M = M;
    c.M_tail_limit = true;
    c.C = C;
    return c;
  }
};

enum class EstimateMode {
  prefer_closed_form,  // unit and power families return their exact constants
  always_estimate,
};

/// Determines M and C. Closed forms are used for the unit (M = C = 1) and
/// power (M = 1/(alpha+1), C = alpha+1) families unless estimation is forced.
///
/// Estimated M is the running sup of `ratio_term` over n <= k_max. When the
/// last decade of terms is increasing, the sup is taken to be a limit and is
/// extrapolated from the terms at k_max/4, k_max/2, k_max (Aitken); if those
/// increments do not shrink geometrically the sup is treated as divergent.
/// Estimated C is one Richardson step on C_k = k lambda_k / Lambda_k.
inline WeightConstants estimate_constants(WeightSequence& seq, std::size_t k_max,
                                          EstimateMode mode = EstimateMode::prefer_closed_form) {
  if (k_max < 100 && !seq.length()) throw PreconditionError("estimate_constants needs k_max >= 100");

  if (mode == EstimateMode::prefer_closed_form) {
    if (seq.family() == WeightFamily::unit) return WeightConstants::closed_form(1.0, 1.0);
    if (seq.family() == WeightFamily::power) {
      const double c = seq.alpha() + 1.0;
      return WeightConstants::closed_form(1.0 / c, c);
    }
  }

  // Explicit lists only provide ratio terms up to length - 1.
  if (auto n = seq.length()) {
    if (*n < 2) throw PreconditionError("estimating constants needs at least two weights");
    k_max = std::min(k_max, *n - 1);
  }
  seq.ensure(k_max + 1);

  std::vector<double> terms(k_max + 1);
  WeightConstants out;
  out.M_source = ConstantSource::estimated;
  out.C_source = ConstantSource::estimated;
  double sup = -INFINITY;
  for (std::size_t n = 1; n <= k_max; ++n) {
    terms[n] = detail::ratio_term(seq.cached_lambda(n), seq.cached_lambda(n + 1), seq.cached_prefix(n));
    if (terms[n] > sup) {
      sup = terms[n];
      out.M_argmax = n;
    }
  }
  out.M = sup;

  // Monotone tail test on 11 samples across the last decade. Neighbouring
  // terms differ by O(k^-2), which at large k is below the rounding noise of
  // ratio_term itself, so comparing every consecutive pair is too strict.
  const std::size_t decade = std::max<std::size_t>(1, k_max / 10);
  bool increasing_tail = k_max >= 8;
  std::size_t prev_n = k_max - decade;
  for (int j = 1; increasing_tail && j <= 10; ++j) {
    const std::size_t n = k_max - decade + (decade * static_cast<std::size_t>(j)) / 10;
    if (n == prev_n) continue;
    increasing_tail = terms[n] > terms[prev_n];
    prev_n = n;
  }
  if (increasing_tail) {
    const double d1 = terms[k_max / 2] - terms[k_max / 4];
    const double d2 = terms[k_max] - terms[k_max / 2];
    if (!(d1 > 0.0) || d2 >= 0.9 * d1) {
      std::ostringstream os;
      os.precision(17);
      os << "sup of the ratio terms is still growing at k_max = " << k_max << " (last term " << terms[k_max]
         << "); the constant M may be infinite";
      throw NonConvergenceError(os.str());
    }
    const double ratio = d2 / d1;
    const double limit = terms[k_max] + d2 * ratio / (1.0 - ratio);
    out.M = std::max(sup, limit);
    out.M_tail_limit = true;
    out.M_argmax = 0;
  }

  auto c_at = [&](std::size_t k) {
    return static_cast<double>(k) * seq.cached_lambda(k) / seq.cached_prefix(k);
  };
  const std::size_t half = std::max<std::size_t>(1, k_max / 2);
  const double c_full = c_at(2 * half);
  const double c_half = c_at(half);
  out.C = 2.0 * c_full - c_half;
  out.C_error_estimate = std::abs(c_full - c_half);

  if (!(out.M > 0.0) || !std::isfinite(out.M))
    throw NonConvergenceError("estimated M is not positive and finite");
  if (!(out.C > 0.0) || !std::isfinite(out.C))
    throw NonConvergenceError("estimated C is not positive and finite");
  return out;
}

}  // namespace carleman

#endif  // CARLEMAN_WEIGHTS_HPP
