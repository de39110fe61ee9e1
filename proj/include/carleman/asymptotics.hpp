#ifndef CARLEMAN_ASYMPTOTICS_HPP
#define CARLEMAN_ASYMPTOTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "carleman/errors.hpp"
#include "carleman/recursion.hpp"
#include "carleman/weights.hpp"

namespace carleman {

namespace detail {

inline double theta_denominator(double x, double mu, double M) { return std::exp(x) / mu - x + M - 1.0; }

inline void require_theta_mu(double mu, double M, bool allow_upper) {
  if (!(M > 0.0) || !std::isfinite(M)) throw PreconditionError("theta needs M > 0");
  const bool lower_ok = mu > std::exp(M - 1.0);
  const bool upper_ok = allow_upper ? mu <= std::exp(M) : mu < std::exp(M);
  if (!lower_ok || !upper_ok || !std::isfinite(mu)) {
    std::ostringstream os;
    os.precision(17);
    os << "theta needs e^(M-1) < mu " << (allow_upper ? "<=" : "<") << " e^M; got mu = " << mu << ", M = " << M;
    throw PreconditionError(os.str());
  }
}

// Adaptive Gauss-Kronrod on [a, b] with knots inserted at the peak of the
// integrand and at a few peak widths either side of it.
inline double integrate_theta(double a, double b, double mu, double M, double tol) {
  if (!(b > a)) return 0.0;
  auto f = [mu, M](double x) { return 1.0 / theta_denominator(x, mu, M); };
  const double peak = std::log(mu);
  const double depth = M - peak;  // denominator minimum when log mu >= 0
  std::vector<double> knots{a, b};
  if (depth > 0.0) {
    const double width = std::sqrt(2.0 * depth);
    for (double m : {0.0, -1.0, 1.0, -8.0, 8.0, -64.0, 64.0}) knots.push_back(peak + m * width);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::remove_if(knots.begin(), knots.end(), [&](double x) { return x < a || x > b; }), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  using Gk = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    double err = 0.0;
    total += Gk::integrate(f, knots[i], knots[i + 1], 15, tol, &err);
  }
  return total;
}

}  // namespace detail

/// theta(y) = int_0^y dx / (e^x/mu - x + M - 1), for e^{M-1} < mu <= e^M.
inline double theta(double y, double mu, double M) {
  detail::require_theta_mu(mu, M, true);
  if (!(y >= 0.0) || std::isnan(y)) throw PreconditionError("theta needs y >= 0");
  if (y == 0.0) return 0.0;
  // The denominator is minimised at x = log mu (clamped into [0, y]).
  const double x_min = std::clamp(std::log(mu), 0.0, y);
  if (!(detail::theta_denominator(x_min, mu, M) > 0.0))
    throw PreconditionError("theta integrand has a non-positive denominator on [0, y]");
  return detail::integrate_theta(0.0, y, mu, M, 1e-12);
}

/// theta at infinity for e^{M-1} < mu < e^M. Integrates to log mu + 40 and
/// adds the leading tail mu e^{-x} beyond it.
inline double theta_infinity(double mu, double M) {
  detail::require_theta_mu(mu, M, false);
  const double cutoff = std::max(std::log(mu), 0.0) + 40.0;
  return detail::integrate_theta(0.0, cutoff, mu, M, 1e-12) + mu * std::exp(-cutoff);
}

/// Closed-form leading behaviour sqrt(2) pi (log(e^M/mu))^{-1/2} of theta at infinity.
inline double theta_infinity_leading(double mu, double M) {
  return std::numbers::sqrt2 * std::numbers::pi / std::sqrt(M - std::log(mu));
}

struct AsymptoticPrediction {
  double M = 0.0;
  double C = 0.0;
  std::size_t N = 0;
  double mu_predicted = 0.0;             // e^M - 2 pi^2 e^M / (C^2 (log N)^2)
  double leading_gap_coefficient = 0.0;  // 2 pi^2 e^M / C^2
};

inline double leading_gap_coefficient(const WeightConstants& c) {
  return 2.0 * std::numbers::pi * std::numbers::pi * c.exp_M() / (c.C * c.C);
}

inline AsymptoticPrediction predicted_mu(const WeightConstants& c, std::size_t N) {
  if (N < 2) throw PreconditionError("predicted_mu needs N >= 2");
  AsymptoticPrediction p;
  p.M = c.M;
  p.C = c.C;
  p.N = N;
  p.leading_gap_coefficient = leading_gap_coefficient(c);
  const double logn = std::log(static_cast<double>(N));
  p.mu_predicted = c.exp_M() - p.leading_gap_coefficient / (logn * logn);
  return p;
}

/// Predicted log N_mu = (sqrt(2) pi / C) (log(e^M/mu))^{-1/2}, mu < e^M.
inline double predicted_log_breakdown(const WeightConstants& c, double mu) {
  detail::require_mu(mu);
  if (!(mu < c.exp_M())) throw PreconditionError("predicted_log_breakdown needs mu < e^M");
  return std::numbers::sqrt2 * std::numbers::pi / (c.C * std::sqrt(c.M - std::log(mu)));
}

/// r(N) = (e^M - mu_N)(log N)^2 on a grid, fitted by least squares to A + B/log N.
struct ResidualFit {
  std::vector<std::size_t> grid;
  std::vector<double> mu_values;
  std::vector<double> r_values;
  double fitted_A = 0.0;
  double fitted_B = 0.0;
  double fit_rms = 0.0;
  double target_A = 0.0;  // 2 pi^2 e^M / C^2
};

inline void validate_fit_grid(const std::vector<std::size_t>& grid) {
  if (grid.size() < 4) throw PreconditionError("fit grid needs at least 4 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 2) throw PreconditionError("fit grid values must be >= 2");
    if (i > 0 && grid[i] <= grid[i - 1]) throw PreconditionError("fit grid must be strictly increasing");
  }
  if (static_cast<double>(grid.back()) < 1000.0 * static_cast<double>(grid.front()))
    throw PreconditionError("fit grid must span at least three decades");
}

/// Ordinary least squares of r = A + B x with x = 1/log N.
inline void fit_residual_model(ResidualFit& fit) {
  const std::size_t n = fit.grid.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 1.0 / std::log(static_cast<double>(fit.grid[i]));
    const double y = fit.r_values[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nd = static_cast<double>(n);
  const double det = nd * sxx - sx * sx;
  fit.fitted_B = (nd * sxy - sx * sy) / det;
  fit.fitted_A = (sy - fit.fitted_B * sx) / nd;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 1.0 / std::log(static_cast<double>(fit.grid[i]));
    const double e = fit.r_values[i] - (fit.fitted_A + fit.fitted_B * x);
    ss += e * e;
  }
  fit.fit_rms = std::sqrt(ss / nd);
}

inline ResidualFit fit_residual(WeightSequence& seq, const WeightConstants& consts, std::vector<std::size_t> grid,
                                const SectionOptions& opt = {}) {
  validate_fit_grid(grid);
  ResidualFit fit;
  fit.grid = std::move(grid);
  fit.target_A = leading_gap_coefficient(consts);
  seq.ensure(seq.clamp_index(fit.grid.back()));
  const double e_m = consts.exp_M();
  for (std::size_t N : fit.grid) {
    const double mu = section_constant(seq, consts, N, 1.0, opt).mu_N;
    const double logn = std::log(static_cast<double>(N));
    fit.mu_values.push_back(mu);
    fit.r_values.push_back((e_m - mu) * logn * logn);
  }
  fit_residual_model(fit);
  return fit;
}

}  // namespace carleman

#endif  // CARLEMAN_ASYMPTOTICS_HPP
