#ifndef CARLEMAN_RECURSION_HPP
#define CARLEMAN_RECURSION_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "carleman/errors.hpp"
#include "carleman/weights.hpp"

namespace carleman {

// The recurrence for h_k(mu):
//
//   h_1 = 0,
//   h_{k+1} = (Lambda_k/Lambda_{k+1}) * (h_k - log(lambda_{k+1}/lambda_k - lambda_{k+1} e^{h_k} / (Lambda_k mu)))
//
// It breaks down at the first k with h_k >= log(mu Lambda_k / lambda_k),
// where the logarithm's argument stops being positive.
//
// With t_k = h_k - log(mu Lambda_k / lambda_k) the argument factors as
// (lambda_{k+1}/lambda_k) * (-expm1(t_k)), which stays accurate as t_k -> 0-.

namespace detail {

/// Distance of h below the breakdown threshold at index k; >= 0 means breakdown.
inline double breakdown_gap(double h, double log_mu, double lam_k, double prefix_k) noexcept {
  return h - (log_mu + std::log(prefix_k / lam_k));
}

/// One step of the recurrence given t = breakdown_gap(...) < 0.
inline double advance_h(double h, double t, double lam_k, double lam_next, double prefix_k,
                        double prefix_next) noexcept {
  const double log_arg = log_weight_ratio(lam_k, lam_next) + std::log(-std::expm1(t));
  return (prefix_k / prefix_next) * (h - log_arg);
}

inline void require_mu(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw PreconditionError("mu must be positive and finite");
}

/// Runs the recurrence for k = 1..last, calling visit(k, h_k, t_k) at every
/// index it reaches. Returns the breakdown index, or nothing when all of
/// 1..last were clear.
template <class Visitor>
std::optional<std::size_t> walk_recurrence(const WeightSequence& seq, double mu, std::size_t last, Visitor&& visit) {
  const double log_mu = std::log(mu);
  WeightCursor cur = seq.cursor();
  double h = 0.0;
  for (std::size_t k = 1;; ++k) {
    const double lam = cur.lambda();
    const double pre = cur.prefix();
    const double t = breakdown_gap(h, log_mu, lam, pre);
    visit(k, h, t);
    if (t >= 0.0) return k;
    if (k >= last) return std::nullopt;
    cur.advance();
    h = advance_h(h, t, lam, cur.lambda(), pre, cur.prefix());
  }
}

}  // namespace detail

/// Single step of the recurrence: h_{k+1} from h_k, or nothing when the
/// recurrence breaks down at k.
inline std::optional<double> h_step(WeightSequence& seq, std::size_t k, double h_k, double mu) {
  if (k == 0) throw PreconditionError("h_step needs k >= 1");
  detail::require_mu(mu);
  if (!std::isfinite(h_k)) throw PreconditionError("h_step got a non-finite h_k");
  const double lam = seq.lambda(k);
  const double pre = seq.prefix_sum(k);
  const double t = detail::breakdown_gap(h_k, std::log(mu), lam, pre);
  if (t >= 0.0) return std::nullopt;
  const double lam_next = seq.lambda(k + 1);
  const double pre_next = seq.prefix_sum(k + 1);
  return detail::advance_h(h_k, t, lam, lam_next, pre, pre_next);
}

/// h_1..h_m at a fixed mu.
struct HTrace {
  double mu = 0.0;
  std::vector<double> values;               // values[j] = h_{j+1}; ends at the breakdown index if any
  std::optional<std::size_t> breakdown_at;  // first k <= m with h_k >= log(mu Lambda_k / lambda_k)
  bool cap_reached = false;                 // no breakdown in 1..m

  [[nodiscard]] double h(std::size_t k) const { return values.at(k - 1); }
};

inline HTrace h_trace(const WeightSequence& seq, double mu, std::size_t m) {
  if (m == 0) throw PreconditionError("h_trace needs m >= 1");
  detail::require_mu(mu);
  m = seq.clamp_index(m);
  HTrace out;
  out.mu = mu;
  out.values.reserve(m);
  out.breakdown_at = detail::walk_recurrence(seq, mu, m, [&](std::size_t, double h, double) { out.values.push_back(h); });
  out.cap_reached = !out.breakdown_at.has_value();
  return out;
}

struct BreakdownResult {
  double mu = 0.0;
  std::optional<std::size_t> index;  // empty: no breakdown up to cap
  std::size_t cap = 0;               // last index examined

  [[nodiscard]] bool infinite() const noexcept { return !index.has_value(); }
};

/// Breakdown index N_mu: the first k <= cap where the recurrence breaks down.
/// For explicit sequences the cap is clamped to the list length.
inline BreakdownResult breakdown_index(const WeightSequence& seq, double mu, std::size_t cap) {
  if (cap == 0) throw PreconditionError("breakdown_index needs cap >= 1");
  detail::require_mu(mu);
  BreakdownResult out;
  out.mu = mu;
  out.cap = seq.clamp_index(cap);
  if (mu <= 1.0) {
    out.index = 1;
    return out;
  }
  out.index = detail::walk_recurrence(seq, mu, out.cap, [](std::size_t, double, double) {});
  return out;
}

/// s(mu) = h_N(mu) - log(mu Lambda_N / lambda_N); +infinity when the
/// recurrence breaks down before N. Strictly decreasing in mu.
inline double section_sign(const WeightSequence& seq, double mu, std::size_t N) {
  double s = std::numeric_limits<double>::infinity();
  const auto bd = detail::walk_recurrence(seq, mu, N, [&](std::size_t k, double, double t) {
    if (k == N) s = t;
  });
  if (bd && *bd < N) return std::numeric_limits<double>::infinity();
  return s;
}

struct SectionOptions {
  // Bracket width relative to e^M at which bisection stops. Zero bisects
  // down to adjacent doubles; s(mu) is steep for large N (slope ~ 1e6 at
  // N = 1e5), so anything coarser leaves a visibly non-zero residual.
  double rel_tol = 0.0;
  int max_iterations = 200;
};

/// Best constant mu_N of the N-term section.
struct SectionConstant {
  std::size_t N = 0;
  double mu_N = 0.0;
  double residual = 0.0;  // s(mu_N)
  double bracket_width = 0.0;
  int iterations = 0;
};

/// mu_N by bisection of s on (lower, e^M (1 - 2^-40)). `lower` defaults to 1
/// and may be raised to mu_{N-1} when that value is known.
inline SectionConstant section_constant(WeightSequence& seq, const WeightConstants& consts, std::size_t N,
                                        double lower = 1.0, const SectionOptions& opt = {}) {
  if (N == 0) throw PreconditionError("section_constant needs N >= 1");
  if (auto n = seq.length(); n && N > *n)
    throw WeightError("N = " + std::to_string(N) + " exceeds the explicit weight list length");
  SectionConstant out;
  out.N = N;
  if (N == 1) {
    out.mu_N = 1.0;
    return out;
  }
  seq.ensure(N);

  const double e_m = consts.exp_M();
  double lo = std::max(lower, 1.0);
  double hi = e_m * (1.0 - std::ldexp(1.0, -40));
  const double tol = opt.rel_tol * e_m;

  double s_hi = section_sign(seq, hi, N);
  if (!(s_hi < 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "no sign change for N = " << N << ": s(e^M (1 - 2^-40)) = " << s_hi
       << " is not negative; the weights may violate the growth hypotheses or M is too small";
    throw BracketError(os.str());
  }
  double s_lo = section_sign(seq, lo, N);
  if (!(s_lo > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "no sign change for N = " << N << ": s(" << lo << ") = " << s_lo << " is not positive";
    throw BracketError(os.str());
  }

  int it = 0;
  while (hi - lo > tol && it < opt.max_iterations) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double s = section_sign(seq, mid, N);
    ++it;
    if (s > 0.0) {
      lo = mid;
      s_lo = s;
    } else {
      hi = mid;
      s_hi = s;
      if (s == 0.0) {
        lo = mid;
        break;
      }
    }
  }

  // Return the endpoint with the smaller finite residual.
  if (std::isfinite(s_lo) && std::abs(s_lo) < std::abs(s_hi)) {
    out.mu_N = lo;
    out.residual = s_lo;
  } else {
    out.mu_N = hi;
    out.residual = s_hi;
  }
  out.bracket_width = hi - lo;
  out.iterations = it;
  return out;
}

/// mu_1 < mu_2 < ... < mu_K, each bracketed from below by its predecessor.
inline std::vector<SectionConstant> critical_sequence(WeightSequence& seq, const WeightConstants& consts,
                                                      std::size_t K, const SectionOptions& opt = {}) {
  if (K == 0) throw PreconditionError("critical_sequence needs K >= 1");
  seq.ensure(seq.clamp_index(K));
  std::vector<SectionConstant> out;
  out.reserve(K);
  double lower = 1.0;
  for (std::size_t n = 1; n <= K; ++n) {
    out.push_back(section_constant(seq, consts, n, lower, opt));
    // mu_n may come back a hair above the true root; stay strictly below it.
    lower = out.back().mu_N * (1.0 - 1e-15) - opt.rel_tol * consts.exp_M();
  }
  return out;
}

}  // namespace carleman

#endif  // CARLEMAN_RECURSION_HPP
