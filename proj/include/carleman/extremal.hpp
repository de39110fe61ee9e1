#ifndef CARLEMAN_EXTREMAL_HPP
#define CARLEMAN_EXTREMAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <vector>

#include "carleman/errors.hpp"
#include "carleman/recursion.hpp"
#include "carleman/summation.hpp"
#include "carleman/weights.hpp"

namespace carleman {

/// A point a of the simplex together with its weighted geometric means
/// G_n = prod_{k<=n} a_k^{lambda_k/Lambda_n} and the objective sum_n G_n.
struct ExtremalVector {
  std::size_t N = 0;
  std::vector<double> a;
  std::vector<double> G;
  double objective = 0.0;
};

/// Geometric means for a positive vector, computed in log space.
inline std::vector<double> geometric_means(WeightSequence& seq, std::span<const double> a) {
  seq.ensure(a.size());
  std::vector<double> G(a.size());
  CompensatedSum weighted_log;
  for (std::size_t k = 1; k <= a.size(); ++k) {
    if (!(a[k - 1] > 0.0)) throw PreconditionError("geometric means need a positive vector");
    weighted_log.add(seq.cached_lambda(k) * std::log(a[k - 1]));
    G[k - 1] = std::exp(weighted_log.value() / seq.cached_prefix(k));
  }
  return G;
}

/// Builds an ExtremalVector from a (not necessarily normalised) positive vector.
inline ExtremalVector make_extremal(WeightSequence& seq, std::vector<double> a) {
  ExtremalVector v;
  v.N = a.size();
  v.G = geometric_means(seq, a);
  v.a = std::move(a);
  CompensatedSum obj;
  for (double g : v.G) obj.add(g);
  v.objective = obj.value();
  return v;
}

/// The quotient sum G_n / sum a_n; degree-0 homogeneous in a.
inline double carleman_quotient(WeightSequence& seq, std::span<const double> a) {
  const auto G = geometric_means(seq, a);
  CompensatedSum num, den;
  for (double g : G) num.add(g);
  for (double x : a) den.add(x);
  return num.value() / den.value();
}

/// Optimising vector of the N-term section from its constant mu_N.
///
/// Seeds a_1 = 1 and propagates forward through the Lagrange system
///   a_{k+1}/lambda_{k+1} = a_k/lambda_k - G_k/(mu_N Lambda_k),  G_k = a_k e^{h_k},
/// i.e. log a_{k+1} = log a_k + log(lambda_{k+1}/lambda_k) + log(-expm1(t_k)),
/// then normalises onto the simplex.
inline ExtremalVector reconstruct_extremal(WeightSequence& seq, double mu_N, std::size_t N) {
  if (N == 0) throw PreconditionError("reconstruct_extremal needs N >= 1");
  detail::require_mu(mu_N);
  if (auto n = seq.length(); n && N > *n) throw WeightError("N exceeds the explicit weight list length");
  seq.ensure(N);

  std::vector<double> log_a(N);
  log_a[0] = 0.0;
  const double log_mu = std::log(mu_N);
  double h = 0.0;
  for (std::size_t k = 1; k < N; ++k) {
    const double lam = seq.cached_lambda(k);
    const double lam_next = seq.cached_lambda(k + 1);
    const double pre = seq.cached_prefix(k);
    const double t = detail::breakdown_gap(h, log_mu, lam, pre);
    if (!(t < 0.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "a_" << (k + 1) << " is not positive at mu = " << mu_N << " (mu_N not converged or hypotheses violated)";
      throw NumericError(os.str());
    }
    log_a[k] = log_a[k - 1] + detail::log_weight_ratio(lam, lam_next) + std::log(-std::expm1(t));
    h = detail::advance_h(h, t, lam, lam_next, pre, seq.cached_prefix(k + 1));
  }

  const double top = *std::max_element(log_a.begin(), log_a.end());
  CompensatedSum total;
  for (double la : log_a) total.add(std::exp(la - top));
  const double log_norm = top + std::log(total.value());
  std::vector<double> a(N);
  for (std::size_t k = 0; k < N; ++k) a[k] = std::exp(log_a[k] - log_norm);
  return make_extremal(seq, std::move(a));
}

/// max_k |mu a_k - lambda_k sum_{n>=k} G_n/Lambda_n| / mu.
inline double verify_stationarity(WeightSequence& seq, const ExtremalVector& v, double mu) {
  if (v.a.size() != v.N || v.G.size() != v.N) throw PreconditionError("malformed extremal vector");
  if (v.N == 0) return 0.0;
  seq.ensure(v.N);
  double tail = 0.0;
  double worst = 0.0;
  for (std::size_t k = v.N; k >= 1; --k) {
    tail += v.G[k - 1] / seq.cached_prefix(k);
    const double r = std::abs(mu * v.a[k - 1] - seq.cached_lambda(k) * tail) / mu;
    worst = std::max(worst, r);
  }
  return worst;
}

struct OracleOptions {
  std::uint64_t seed = 0;
  double stall_tol = 1e-12;  // improvement over `stall_window` iterations
  int stall_window = 100;
  long max_iterations = 2'000'000;
  double grid_mesh = 1e-4;  // full simplex grid for N <= 3
};

namespace detail {

// Multiplicative fixed-point ascent a_k <- lambda_k sum_{n>=k} G_n/Lambda_n / f(a).
// By Jensen on log f this never decreases f; its fixed points solve the
// Lagrange system.
inline ExtremalVector multiplicative_ascent(WeightSequence& seq, std::vector<double> a, const OracleOptions& opt) {
  const std::size_t N = a.size();
  ExtremalVector v = make_extremal(seq, a);
  std::vector<double> next(N);
  double checkpoint = v.objective;
  for (long it = 1; it <= opt.max_iterations; ++it) {
    double tail = 0.0;
    for (std::size_t k = N; k >= 1; --k) {
      tail += v.G[k - 1] / seq.cached_prefix(k);
      next[k - 1] = seq.cached_lambda(k) * tail;
    }
    CompensatedSum s;
    for (double x : next) s.add(x);
    const double f = s.value();
    for (double& x : next) x /= f;
    ExtremalVector cand = make_extremal(seq, next);
    if (cand.objective >= v.objective) v = std::move(cand);
    if (it % opt.stall_window == 0) {
      if (v.objective - checkpoint < opt.stall_tol) break;
      checkpoint = v.objective;
    }
  }
  return v;
}

// Best point of the simplex grid with mesh h, N in {2, 3}.
inline std::vector<double> best_grid_point(WeightSequence& seq, std::size_t N, double mesh) {
  const long steps = std::lround(1.0 / mesh);
  std::vector<double> logs(steps + 1);
  for (long i = 1; i <= steps; ++i) logs[i] = std::log(static_cast<double>(i) / steps);
  const double w2 = seq.cached_lambda(1) / seq.cached_prefix(2);
  double best = -INFINITY;
  std::vector<double> arg(N);
  if (N == 2) {
    for (long i = 1; i < steps; ++i) {
      const long j = steps - i;
      const double f = std::exp(logs[i]) + std::exp(w2 * logs[i] + (1.0 - w2) * logs[j]);
      if (f > best) {
        best = f;
        arg = {static_cast<double>(i) / steps, static_cast<double>(j) / steps};
      }
    }
  } else {
    const double u1 = seq.cached_lambda(1) / seq.cached_prefix(3);
    const double u2 = seq.cached_lambda(2) / seq.cached_prefix(3);
    const double u3 = seq.cached_lambda(3) / seq.cached_prefix(3);
    for (long i = 1; i < steps - 1; ++i) {
      const double g1 = std::exp(logs[i]);
      for (long j = 1; i + j < steps; ++j) {
        const long l = steps - i - j;
        const double f = g1 + std::exp(w2 * logs[i] + (1.0 - w2) * logs[j]) +
                         std::exp(u1 * logs[i] + u2 * logs[j] + u3 * logs[l]);
        if (f > best) {
          best = f;
          arg = {static_cast<double>(i) / steps, static_cast<double>(j) / steps, static_cast<double>(l) / steps};
        }
      }
    }
  }
  return arg;
}

}  // namespace detail

/// Independent maximiser of sum G_n on the simplex for small N: multiplicative
/// ascent from the uniform point and `restarts` random interior points, plus a
/// full grid search seed for N <= 3. Returns the best vector found.
inline ExtremalVector oracle_maximize(WeightSequence& seq, std::size_t N, int restarts,
                                      const OracleOptions& opt = {}) {
  if (N < 1 || N > 8) throw PreconditionError("oracle_maximize supports 1 <= N <= 8");
  if (auto n = seq.length(); n && N > *n) throw WeightError("N exceeds the explicit weight list length");
  if (restarts < 0) throw PreconditionError("restarts must be non-negative");
  seq.ensure(N);
  if (N == 1) return make_extremal(seq, {1.0});

  std::vector<std::vector<double>> starts;
  starts.emplace_back(N, 1.0 / static_cast<double>(N));
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int r = 0; r < restarts; ++r) {
    // Dirichlet(1, ..., 1) through normalised exponentials.
    std::vector<double> p(N);
    double total = 0.0;
    for (double& x : p) {
      x = -std::log1p(-unif(rng)) + 1e-12;
      total += x;
    }
    for (double& x : p) x /= total;
    starts.push_back(std::move(p));
  }
  if (N <= 3) starts.push_back(detail::best_grid_point(seq, N, opt.grid_mesh));

  ExtremalVector best;
  best.objective = -INFINITY;
  for (auto& s : starts) {
    ExtremalVector v = detail::multiplicative_ascent(seq, std::move(s), opt);
    if (v.objective > best.objective) best = std::move(v);
  }
  return best;
}

}  // namespace carleman

#endif  // CARLEMAN_EXTREMAL_HPP
