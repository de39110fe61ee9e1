#ifndef CARLEMAN_HYPOTHESES_HPP
#define CARLEMAN_HYPOTHESES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "carleman/errors.hpp"
#include "carleman/weights.hpp"

namespace carleman {

enum class CheckStatus { pass, fail, not_applicable };

inline std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::not_applicable:
      return "n/a";
  }
  return "?";
}

/// First index where an inequality lhs <= rhs was violated.
struct Witness {
  std::size_t k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct HypothesisEntry {
  std::string id;  // short stable key, e.g. "non_decreasing", "sup_ratio_bounded"
  std::string description;
  std::size_t first_k = 0;
  std::size_t last_k = 0;
  CheckStatus status = CheckStatus::not_applicable;
  std::optional<Witness> witness;
  // Smallest relative slack (rhs - lhs)/|rhs| over the range, for checks that
  // are inequalities. Empty for report-only checks.
  std::optional<double> margin;
  // The reported quantity for report-only checks (running sup, smallest
  // admissible constant, ...). Empty otherwise.
  std::optional<double> statistic;
};

struct HypothesisReport {
  std::vector<HypothesisEntry> entries;

  [[nodiscard]] bool all_passed() const {
    return std::none_of(entries.begin(), entries.end(),
                        [](const HypothesisEntry& e) { return e.status == CheckStatus::fail; });
  }

  [[nodiscard]] const HypothesisEntry& at(std::string_view id) const {
    for (const auto& e : entries)
      if (e.id == id) return e;
    throw PreconditionError("no hypothesis entry named " + std::string(id));
  }
};

namespace detail {

inline HypothesisEntry named_entry(std::string id, std::string description) {
  HypothesisEntry e;
  e.id = std::move(id);
  e.description = std::move(description);
  return e;
}

// Accumulates lhs <= rhs over a range with a relative tolerance.
class InequalityTracker {
 public:
  InequalityTracker(std::string id, std::string description, double rel_tol)
      : rel_tol_(rel_tol) {
    entry_.id = std::move(id);
    entry_.description = std::move(description);
    entry_.status = CheckStatus::pass;
    entry_.margin = INFINITY;
  }

  void observe(std::size_t k, double lhs, double rhs) {
    if (entry_.first_k == 0) entry_.first_k = k;
    entry_.last_k = k;
    const double scale = std::max(std::abs(rhs), std::abs(lhs));
    const double slack = scale > 0.0 ? (rhs - lhs) / scale : 0.0;
    if (!std::isfinite(slack) || slack < -rel_tol_) {
      if (!entry_.witness) entry_.witness = Witness{k, lhs, rhs};
      entry_.status = CheckStatus::fail;
    }
    if (std::isfinite(slack)) entry_.margin = std::min(*entry_.margin, slack);
  }

  HypothesisEntry finish() && { return std::move(entry_); }

 private:
  double rel_tol_;
  HypothesisEntry entry_;
};

inline HypothesisEntry not_applicable(std::string id, std::string description) {
  HypothesisEntry e;
  e.id = std::move(id);
  e.description = std::move(description);
  e.status = CheckStatus::not_applicable;
  return e;
}

// (n+1)^a - n^a without cancellation.
inline double power_step(double n, double a) { return std::pow(n, a) * std::expm1(a * std::log1p(1.0 / n)); }

}  // namespace detail

struct HypothesisOptions {
  // Relative tolerance applied to inequalities that hold with equality in
  // exact arithmetic (e.g. the lower bound on power sums at alpha = 1).
  double rel_tol = 1e-11;
};

/// Evaluates the structural hypotheses on the weights for k = 1..k_max and
/// reports each one. Failures are recorded with a witness, never thrown.
///
/// Entry ids:
///   non_decreasing       lambda_{k+1} >= lambda_k
///   sup_M                ratio_term(k) <= M
///   sup_ratio_bounded    sup lambda_{k+1}/lambda_k (reported)
///   growth_condition     M + log(lambda_k/lambda_{k+1}) <= (Lambda_{k+1}/lambda_k) log(q_{k+1}/q_k)
///   ratio_term_rate      smallest c with |ratio_term(k) - M| <= c lambda_k/Lambda_k (reported)
///   ratio_gap_inf        inf (q_{k+1} - q_k) > 0, q_k = Lambda_k/lambda_k
///   density_rate         smallest c' with |k lambda_k/Lambda_k - C| <= c'/k (reported)
///   power_sum_lower      lower bound on sum i^alpha       (power family only)
///   power_sum_upper      upper bound on sum i^alpha       (power family only)
///   power_sum_gap        sum i^alpha <= alpha/(alpha+1) (n+1)^{2 alpha}/((n+2)^alpha - (n+1)^alpha)
///   bennett_ratio        P_n(alpha) <= (n+1)/(n+2)        (power family only)
inline HypothesisReport check_hypotheses(WeightSequence& seq, const WeightConstants& consts, std::size_t k_max,
                                         const HypothesisOptions& opt = {}) {
  if (k_max < 10 && !seq.length()) throw PreconditionError("check_hypotheses needs k_max >= 10");
  const bool is_power = seq.family() == WeightFamily::power;

  // Every check at k needs lambda_{k+1}; the power-sum checks need n+2.
  std::size_t last = k_max;
  if (auto n = seq.length()) last = std::min(k_max, *n > 0 ? *n - 1 : 0);
  seq.ensure(last + (is_power ? 2 : 1));

  const double M = consts.M;
  const double C = consts.C;
  const double tol = opt.rel_tol;

  detail::InequalityTracker non_decreasing("non_decreasing", "lambda_{k+1} >= lambda_k", 0.0);
  detail::InequalityTracker sup_m("sup_M", "ratio_term(k) <= M", tol);
  detail::InequalityTracker growth("growth_condition",
                                   "M + log(lambda_k/lambda_{k+1}) <= (Lambda_{k+1}/lambda_k) log(q_{k+1}/q_k)", tol);
  detail::InequalityTracker sum_lower("power_sum_lower",
                                      "alpha/(alpha+1) n^a (n+1)^a / ((n+1)^a - n^a) <= sum_{i<=n} i^a", tol);
  detail::InequalityTracker sum_upper("power_sum_upper", "sum_{i<=n} i^a <= (n+1)^(a+1)/(a+1)", tol);
  detail::InequalityTracker sum_gap("power_sum_gap",
                                    "sum_{i<=n} i^a <= a/(a+1) (n+1)^(2a) / ((n+2)^a - (n+1)^a)", tol);
  detail::InequalityTracker bennett("bennett_ratio", "P_n(alpha) <= (n+1)/(n+2)", tol);

  HypothesisEntry sup_ratio = detail::named_entry("sup_ratio_bounded", "sup lambda_{k+1}/lambda_k < infinity");
  HypothesisEntry rate_m = detail::named_entry("ratio_term_rate", "|ratio_term(k) - M| <= c lambda_k/Lambda_k; c reported");
  HypothesisEntry gap_inf = detail::named_entry("ratio_gap_inf", "inf_k (Lambda_{k+1}/lambda_{k+1} - Lambda_k/lambda_k) > 0");
  HypothesisEntry rate_c = detail::named_entry("density_rate", "|k lambda_k/Lambda_k - C| <= c'/k; c' reported");
  double ratio_sup = 0.0;
  double rate_m_max = 0.0;
  double gap_min = INFINITY;
  double rate_c_max = 0.0;
  std::optional<Witness> gap_witness;

  const double alpha = seq.alpha();
  for (std::size_t k = 1; k <= last; ++k) {
    const double lam = seq.cached_lambda(k);
    const double lam_next = seq.cached_lambda(k + 1);
    const double pre = seq.cached_prefix(k);
    const double pre_next = seq.cached_prefix(k + 1);
    const double kd = static_cast<double>(k);

    non_decreasing.observe(k, lam, lam_next);

    const double term = detail::ratio_term(lam, lam_next, pre);
    sup_m.observe(k, term, M);

    ratio_sup = std::max(ratio_sup, lam_next / lam);

    const double q = pre / lam;
    const double gap = detail::ratio_gap(lam, lam_next, pre);
    const double growth_rhs = (pre_next / lam) * std::log1p(gap / q);
    growth.observe(k, M - detail::log_weight_ratio(lam, lam_next), growth_rhs);

    rate_m_max = std::max(rate_m_max, std::abs(term - M) * q);

    if (gap < gap_min) gap_min = gap;
    if (!(gap > 0.0) && !gap_witness) gap_witness = Witness{k, 0.0, gap};

    rate_c_max = std::max(rate_c_max, kd * std::abs(kd * lam / pre - C));

    if (is_power) {
      const double a = alpha;
      const double sum_n = pre;
      const double step = detail::power_step(kd, a);
      sum_lower.observe(k, a / (a + 1.0) * std::pow(kd, a) * std::pow(kd + 1.0, a) / step, sum_n);
      sum_upper.observe(k, sum_n, std::pow(kd + 1.0, a + 1.0) / (a + 1.0));
      sum_gap.observe(k, sum_n, a / (a + 1.0) * std::pow(kd + 1.0, 2.0 * a) / detail::power_step(kd + 1.0, a));
      const double p = std::pow((sum_n / kd) / (pre_next / (kd + 1.0)), 1.0 / a);
      bennett.observe(k, p, (kd + 1.0) / (kd + 2.0));
    }
  }

  auto finish_report = [&](HypothesisEntry& e, double stat, bool ok) {
    e.first_k = last >= 1 ? 1 : 0;
    e.last_k = last;
    e.statistic = stat;
    e.status = ok ? CheckStatus::pass : CheckStatus::fail;
  };
  finish_report(sup_ratio, ratio_sup, std::isfinite(ratio_sup));
  finish_report(rate_m, rate_m_max, std::isfinite(rate_m_max));
  finish_report(gap_inf, gap_min, gap_min > 0.0);
  if (gap_witness) gap_inf.witness = gap_witness;
  finish_report(rate_c, rate_c_max, std::isfinite(rate_c_max));

  HypothesisReport report;
  report.entries.push_back(std::move(non_decreasing).finish());
  report.entries.push_back(std::move(sup_m).finish());
  report.entries.push_back(std::move(sup_ratio));
  report.entries.push_back(std::move(growth).finish());
  report.entries.push_back(std::move(rate_m));
  report.entries.push_back(std::move(gap_inf));
  report.entries.push_back(std::move(rate_c));
  if (is_power) {
    report.entries.push_back(std::move(sum_lower).finish());
    report.entries.push_back(std::move(sum_upper).finish());
    report.entries.push_back(std::move(sum_gap).finish());
    report.entries.push_back(std::move(bennett).finish());
  } else {
    report.entries.push_back(detail::not_applicable("power_sum_lower", "power family only"));
    report.entries.push_back(detail::not_applicable("power_sum_upper", "power family only"));
    report.entries.push_back(detail::not_applicable("power_sum_gap", "power family only"));
    report.entries.push_back(detail::not_applicable("bennett_ratio", "power family only"));
  }
  return report;
}

}  // namespace carleman

#endif  // CARLEMAN_HYPOTHESES_HPP
