#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spatfun/covariance.hpp"
#include "spatfun/designs.hpp"
#include "spatfun/errors.hpp"
#include "spatfun/rng.hpp"

namespace spatfun {

/// Evaluated right-hand side of one of the consistency (or inconsistency)
/// bounds, with the chosen radius / epsilon and the constants echoed.
struct BoundReport {
  std::string which;
  double value = 0.0;
  std::optional<double> chosen;  // argmin rho or epsilon, when applicable
  std::vector<std::pair<std::string, double>> constants;
  std::optional<std::string> warning;

  double constant(const std::string& name) const {
    for (const auto& [k, v] : constants)
      if (k == name) return v;
    throw std::invalid_argument("BoundReport: no constant named " + name);
  }
};

namespace detail {

inline double simpson_rule(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson_rule(a, m, fa, flm, fm);
  const double right = simpson_rule(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive composite Simpson quadrature with relative tolerance 1e-6 and an
/// absolute floor of 1e-14.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double rel_tol = 1e-6, double abs_floor = 1e-14) {
  if (!(b >= a)) throw std::invalid_argument("adaptive_simpson: need b >= a");
  if (a == b) return 0.0;
  // seed the tolerance with a coarse estimate of the integral's size
  const int coarse_n = 64;
  double coarse = 0.0;
  for (int i = 0; i < coarse_n; ++i)
    coarse += std::abs(f(a + (b - a) * (i + 0.5) / coarse_n));
  coarse *= (b - a) / coarse_n;
  const double tol = std::max(abs_floor, rel_tol * std::max(coarse, abs_floor));

  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = detail::simpson_rule(a, b, fa, fm, fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// Default minimization grid: 32 log-spaced radii between the smallest
/// positive pairwise distance and the design diameter.
inline std::vector<double> default_rho_grid(const PointSet& s) {
  double lo = s.min_positive_distance();
  double hi = s.diameter();
  if (lo <= 0.0 || hi <= 0.0 || lo >= hi) {
    lo = 1e-3;
    hi = 1e3;
  }
  const int n = 32;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i)
    grid[static_cast<std::size_t>(i)] =
        lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return grid;
}

namespace detail {

inline BoundReport intensity_bound(const char* which, const DecayFunction& env,
                                   const PointSet& s, std::span<const double> rho_grid) {
  if (rho_grid.empty()) throw std::invalid_argument("intensity bound: empty rho grid");
  const double env0 = env.at_zero();
  double best = 0.0, best_rho = 0.0;
  bool first = true;
  for (double rho : rho_grid) {
    if (rho < 0.0) throw std::invalid_argument("intensity bound: negative radius");
    const double v = env(rho) + env0 * intensity(s, rho);
    if (first || v < best) {
      best = v;
      best_rho = rho;
      first = false;
    }
  }
  BoundReport r;
  r.which = which;
  r.value = best;
  r.chosen = best_rho;
  r.constants = {{"env0", env0}, {"N", static_cast<double>(s.size())}};
  return r;
}

inline BoundReport regular_design_bound(const char* which, const DecayFunction& env, int d,
                                        double delta_geomean, double alpha, double n,
                                        double kpp) {
  if (d < 1) throw std::invalid_argument("regular design bound: d must be >= 1");
  if (alpha <= 0.0 || n <= 0.0 || kpp <= 0.0 || delta_geomean <= 0.0)
    throw std::invalid_argument("regular design bound: parameters must be positive");

  const double upper = kpp * alpha / delta_geomean;
  auto integrand = [&](double x) { return std::pow(x, d - 1) * env(x); };

  const double integral = adaptive_simpson(integrand, 0.0, upper);

  // dense scan for the sup and for the monotone-tail hypothesis check
  const int scan_n = 10000;
  double sup = 0.0;
  int argmax = 0;
  std::vector<double> scan(static_cast<std::size_t>(scan_n + 1));
  for (int i = 0; i <= scan_n; ++i) {
    const double x = upper * i / scan_n;
    scan[static_cast<std::size_t>(i)] = integrand(x);
    if (scan[static_cast<std::size_t>(i)] > sup) {
      sup = scan[static_cast<std::size_t>(i)];
      argmax = i;
    }
  }
  std::optional<std::string> warning;
  const double slack = 1e-12 * std::max(1.0, sup);
  for (int i = argmax; i < scan_n; ++i) {
    if (scan[static_cast<std::size_t>(i + 1)] > scan[static_cast<std::size_t>(i)] + slack) {
      warning = "x^{d-1} * envelope is not monotone beyond its peak; the bound's "
                "hypothesis is violated";
      break;
    }
  }

  const double three_delta = 3.0 * delta_geomean;
  const double term1 = std::pow(three_delta, d) * d / std::pow(alpha, d) * integral;
  const double term2 = 4.0 * d * std::pow(three_delta, d - 1) /
                       (std::pow(alpha, d - 1) * std::pow(n, 1.0 / d)) * sup;
  const double term3 = 2.0 * env.at_zero() / n;

  BoundReport r;
  r.which = which;
  r.value = term1 + term2 + term3;
  r.constants = {{"alpha", alpha},         {"N", n},         {"Kpp", kpp},
                 {"Delta", delta_geomean}, {"term1", term1}, {"term2", term2},
                 {"term3", term3}};
  r.warning = warning;
  return r;
}

/// Monte Carlo estimate of V(eps) = Vol{(s, r) in R0^2 : ||s - r|| <= eps}
/// for every epsilon in the grid, from one shared pair sample.
struct PairVolume {
  std::vector<double> value;  // per epsilon
  std::vector<double> se;
};

inline PairVolume pair_volume_mc(Region r0, int d, std::span<const double> eps_grid, int mc_n,
                                 StreamKey key) {
  auto rng = key.engine();
  std::vector<double> dist(static_cast<std::size_t>(mc_n));
  const double rad = unit_ball_radius(d);
  auto draw_point = [&](std::vector<double>& x) {
    if (r0 == Region::Cube) {
      for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = uniform01(rng) - 0.5;
    } else {
      while (true) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
          x[static_cast<std::size_t>(i)] = rad * (2.0 * uniform01(rng) - 1.0);
          s += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        }
        if (s <= rad * rad) break;
      }
    }
  };
  std::vector<double> a(static_cast<std::size_t>(d)), b(static_cast<std::size_t>(d));
  for (int m = 0; m < mc_n; ++m) {
    draw_point(a);
    draw_point(b);
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      const double diff = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
      s += diff * diff;
    }
    dist[static_cast<std::size_t>(m)] = std::sqrt(s);
  }
  PairVolume out;
  for (double eps : eps_grid) {
    std::int64_t c = 0;
    for (double x : dist)
      if (x <= eps) ++c;
    const double p = static_cast<double>(c) / mc_n;
    out.value.push_back(p);  // Vol(R0)^2 = 1
    out.se.push_back(std::sqrt(std::max(p * (1.0 - p), 0.0) / mc_n));
  }
  return out;
}

inline BoundReport random_design_bound(const char* which, const DecayFunction& env, Region r0,
                                       int d, double f_sup, double alpha, double n,
                                       std::span<const double> eps_grid, int mc_n,
                                       StreamKey key) {
  if (eps_grid.empty()) throw std::invalid_argument("random design bound: empty epsilon grid");
  for (double e : eps_grid)
    if (e <= 0.0) throw std::invalid_argument("random design bound: epsilons must be positive");
  if (mc_n < 10000)
    throw std::invalid_argument("random design bound: need at least 1e4 Monte Carlo pairs");

  const auto vol = pair_volume_mc(r0, d, eps_grid, mc_n, key);
  double best = 0.0, best_eps = 0.0, best_se = 0.0, best_v = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double eps = eps_grid[i];
    const double v = vol.value[i] * f_sup * f_sup + env(alpha * eps) + env.at_zero() / n;
    if (first || v < best) {
      best = v;
      best_eps = eps;
      best_se = vol.se[i];
      best_v = vol.value[i];
      first = false;
    }
  }
  BoundReport r;
  r.which = which;
  r.value = best;
  r.chosen = best_eps;
  r.constants = {{"alpha", alpha}, {"N", n},           {"f_sup", f_sup},
                 {"V", best_v},    {"V_se", best_se},  {"mc_n", static_cast<double>(mc_n)}};
  return r;
}

}  // namespace detail

/// General intensity bound for the sample-mean loss:
/// min over the radius grid of h(rho) + h(0) I_rho(S).
inline BoundReport bound_mean_general(const DecayFunction& h, const PointSet& s,
                                      std::span<const double> rho_grid) {
  return detail::intensity_bound("prop5.1", h, s, rho_grid);
}

/// Regular-design bound for the sample-mean loss, in its explicit
/// finite-sample form
///   (3D)^d d / a^d * int_0^{K'' a / D} x^{d-1} h(x) dx
/// + 4 d (3D)^{d-1} / (a^{d-1} N^{1/d}) * sup x^{d-1} h(x)  +  2 h(0) / N.
inline BoundReport bound_mean_reg(const DecayFunction& h, int d, double delta_geomean,
                                  double alpha, double n, double kpp) {
  return detail::regular_design_bound("prop5.2", h, d, delta_geomean, alpha, n, kpp);
}

/// Randomized-design bound for the sample-mean loss:
/// min over the epsilon grid of V(eps) sup f^2 + h(alpha eps) + h(0)/N,
/// with V(eps) estimated by Monte Carlo over point pairs in R0^2.
inline BoundReport bound_mean_rand(const DecayFunction& h, Region r0, int d, double f_sup,
                                   double alpha, double n, std::span<const double> eps_grid,
                                   int mc_n, StreamKey key) {
  return detail::random_design_bound("prop5.3", h, r0, d, f_sup, alpha, n, eps_grid, mc_n, key);
}

/// The same three bounds with the fourth-order envelope H, for the
/// uncentered covariance-operator loss.
inline BoundReport bound_cov_general(const DecayFunction& H, const PointSet& s,
                                     std::span<const double> rho_grid) {
  return detail::intensity_bound("prop6.1", H, s, rho_grid);
}

inline BoundReport bound_cov_reg(const DecayFunction& H, int d, double delta_geomean,
                                 double alpha, double n, double kpp) {
  return detail::regular_design_bound("prop6.2", H, d, delta_geomean, alpha, n, kpp);
}

inline BoundReport bound_cov_rand(const DecayFunction& H, Region r0, int d, double f_sup,
                                  double alpha, double n, std::span<const double> eps_grid,
                                  int mc_n, StreamKey key) {
  return detail::random_design_bound("prop6.3", H, r0, d, f_sup, alpha, n, eps_grid, mc_n, key);
}

/// Centered covariance-operator bound:
/// 2 {H(rho) + H(0) I_rho} + 2 C(delta) {h(rho) + h(0) I_rho}^{delta/(2+delta)},
/// minimized over the radius grid. Pass delta = infinity with
/// c_delta = 4 B^2 for almost-surely bounded fields.
inline BoundReport bound_cov_centered(const DecayFunction& h, const DecayFunction& H,
                                      const PointSet& s, std::span<const double> rho_grid,
                                      double delta, double c_delta) {
  if (rho_grid.empty()) throw std::invalid_argument("bound_cov_centered: empty rho grid");
  if (!(delta > 0.0)) throw std::invalid_argument("bound_cov_centered: delta must be > 0");
  if (!(c_delta >= 0.0))
    throw std::invalid_argument("bound_cov_centered: the moment constant C(delta) is required");
  const double expo = std::isinf(delta) ? 1.0 : delta / (2.0 + delta);
  const double h0 = h.at_zero(), H0 = H.at_zero();
  double best = 0.0, best_rho = 0.0;
  bool first = true;
  for (double rho : rho_grid) {
    const double i_rho = intensity(s, rho);
    const double v = 2.0 * (H(rho) + H0 * i_rho) +
                     2.0 * c_delta * std::pow(h(rho) + h0 * i_rho, expo);
    if (first || v < best) {
      best = v;
      best_rho = rho;
      first = false;
    }
  }
  BoundReport r;
  r.which = "prop6.4";
  r.value = best;
  r.chosen = best_rho;
  r.constants = {{"delta", delta}, {"C_delta", c_delta}, {"exponent", expo}};
  return r;
}

/// Pair-count bound for m-dependent fields: the covariance loss is at most
/// |B_N(m)| E||X||^4 / N^2; the normalized form N * loss is echoed.
inline BoundReport bound_example21(const PointSet& s, double m, double fourth_moment) {
  if (fourth_moment < 0.0)
    throw std::invalid_argument("bound_example21: fourth moment must be >= 0");
  const auto pairs = pair_count_B(s, m);
  const double n = static_cast<double>(s.size());
  BoundReport r;
  r.which = "example2.1";
  r.value = static_cast<double>(pairs) * fourth_moment / (n * n);
  r.chosen = m;
  r.constants = {{"pairs", static_cast<double>(pairs)},
                 {"normalized", static_cast<double>(pairs) * fourth_moment / n},
                 {"N", n}};
  return r;
}

/// Lower bound showing inconsistency under clustered sampling:
/// b(rho) * I_rho(S)^2.
inline BoundReport lower_bound_inconsistency(double b_at_rho, const PointSet& s, double rho) {
  if (b_at_rho < 0.0)
    throw std::invalid_argument("lower_bound_inconsistency: b(rho) must be >= 0");
  const double i_rho = intensity(s, rho);
  BoundReport r;
  r.which = "prop7.2-lower";
  r.value = b_at_rho * i_rho * i_rho;
  r.chosen = rho;
  r.constants = {{"intensity", i_rho}, {"b", b_at_rho}};
  return r;
}

/// Exact mean loss of the tent field sampled at s_k = k alpha / N:
/// 1/N + (2/N^2) sum_{h=1}^{min(floor(N/alpha), N-1)} (1 - h alpha/N)(N - h).
inline double exact_tent_loss(std::int64_t n, double alpha) {
  if (n < 1) throw std::invalid_argument("exact_tent_loss: N must be >= 1");
  if (alpha <= 0.0) throw std::invalid_argument("exact_tent_loss: alpha must be > 0");
  const double nd = static_cast<double>(n);
  auto hmax = static_cast<std::int64_t>(std::floor(nd / alpha));
  hmax = std::min(hmax, n - 1);
  double sum = 0.0;
  for (std::int64_t h = 1; h <= hmax; ++h)
    sum += (1.0 - static_cast<double>(h) * alpha / nd) * static_cast<double>(n - h);
  return 1.0 / nd + 2.0 / (nd * nd) * sum;
}

}  // namespace spatfun
