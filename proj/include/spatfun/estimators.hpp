#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatfun/designs.hpp"
#include "spatfun/errors.hpp"
#include "spatfun/grid.hpp"
#include "spatfun/matrix.hpp"
#include "spatfun/operators.hpp"
#include "spatfun/simulate.hpp"

namespace spatfun {

/// One replicate's quadratic loss, tagged by the estimand.
struct LossRecord {
  enum class Kind { MeanL2Sq, CovHSSq, CovCenteredHSSq, XstarHSSq };
  Kind kind;
  double value = 0.0;
  int n = 0;
  std::string design;
};

/// Pointwise average of the sample rows.
inline Curve sample_mean(const FunctionSample& sample) {
  const int n = sample.data_rows();
  if (n < 1) throw std::invalid_argument("sample_mean: empty sample");
  const int t = sample.grid.size();
  std::vector<double> v(static_cast<std::size_t>(t), 0.0);
  for (int k = 0; k < n; ++k) {
    const double* row = sample.values.row(static_cast<std::size_t>(k));
    for (int i = 0; i < t; ++i) v[static_cast<std::size_t>(i)] += row[static_cast<std::size_t>(i)];
  }
  for (double& x : v) x /= n;
  return Curve(sample.grid, std::move(v));
}

namespace detail {

/// (1/N) sum_k (row_k - c) (x) (row_k - c) as a discretized kernel.
inline KernelOperator centered_cov_kernel(const FunctionSample& sample, const double* center) {
  const int n = sample.data_rows();
  if (n < 1) throw std::invalid_argument("covariance estimator: empty sample");
  const std::size_t t = static_cast<std::size_t>(sample.grid.size());
  Matrix k(t, t, 0.0);
  std::vector<double> x(t);
  for (int r = 0; r < n; ++r) {
    const double* row = sample.values.row(static_cast<std::size_t>(r));
    for (std::size_t i = 0; i < t; ++i) x[i] = row[i] - (center ? center[i] : 0.0);
    for (std::size_t i = 0; i < t; ++i) {
      const double xi = x[i];
      double* krow = k.row(i);
      for (std::size_t j = 0; j <= i; ++j) krow[j] += xi * x[j];
    }
  }
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = k(i, j) / n;
      k(i, j) = v;
      k(j, i) = v;
    }
  return KernelOperator(sample.grid, std::move(k));
}

}  // namespace detail

/// Uncentered sample covariance operator (1/N) sum_k X(s_k) (x) X(s_k).
inline KernelOperator cov_op_uncentered(const FunctionSample& sample) {
  return detail::centered_cov_kernel(sample, nullptr);
}

/// Centered sample covariance operator, rows centered at the sample mean.
inline KernelOperator cov_op_centered(const FunctionSample& sample) {
  const Curve mean = sample_mean(sample);
  return detail::centered_cov_kernel(sample, mean.values.data());
}

/// Covariance operator centered at a supplied (true) mean.
inline KernelOperator cov_op_known_mean(const FunctionSample& sample, const Curve& mu) {
  require_same_grid(sample.grid, mu.grid, "cov_op_known_mean");
  return detail::centered_cov_kernel(sample, mu.values.data());
}

/// Empirical functional principal components: the leading eigenpairs, each
/// eigenfunction sign-aligned to the matching reference when one is given.
inline EigenSystem efpc(const KernelOperator& op, int k, const std::vector<Curve>* refs = nullptr) {
  if (k < 1) throw std::invalid_argument("efpc: need k >= 1");
  EigenSystem es = eigenpairs(op, k);
  if (refs) {
    for (std::size_t j = 0; j < es.eigenfunctions.size() && j < refs->size(); ++j)
      es.eigenfunctions[j] = sign_align(es.eigenfunctions[j], (*refs)[j]);
  }
  return es;
}

/// ||X_bar - mu||^2
inline double mean_loss(const FunctionSample& sample, const Curve& mu) {
  const Curve xbar = sample_mean(sample);
  require_same_grid(xbar.grid, mu.grid, "mean_loss");
  double s = 0.0;
  for (std::size_t i = 0; i < xbar.values.size(); ++i) {
    const double d = xbar.values[i] - mu.values[i];
    s += d * d;
  }
  return s * mu.grid.weight();
}

/// ||A - B||_S^2
inline double cov_loss(const KernelOperator& a, const KernelOperator& b) {
  return hs_dist_sq(a, b);
}

/// ||C_hat_N - X(0) (x) X(0)||_S^2 for a sample carrying the origin row.
inline double xstar_loss(const FunctionSample& sample) {
  if (!sample.with_origin)
    throw std::invalid_argument("xstar_loss: sample has no distinguished origin row");
  const int origin_idx = sample.points.size() - 1;
  for (int i = 0; i < sample.points.dim; ++i)
    if (sample.points.coord(origin_idx, i) != 0.0)
      throw std::invalid_argument("xstar_loss: last row is not at the origin");

  const KernelOperator c_hat = cov_op_uncentered(sample);
  const Curve x0 = sample.origin_curve();
  const KernelOperator xstar = rank_one(x0, x0);
  return hs_dist_sq(c_hat, xstar);
}

/// Population covariance operator of a model with independent scores:
/// sum_j phi_j(0) e_j (x) e_j.
inline KernelOperator population_operator(const FieldModel& model) {
  const std::size_t t = static_cast<std::size_t>(model.basis.grid.size());
  Matrix k(t, t, 0.0);
  for (const auto& s : model.scores) {
    const double lambda = s.phi.variance();
    const auto& e = model.basis.element(s.index).values;
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < t; ++j) k(i, j) += lambda * e[i] * e[j];
  }
  return KernelOperator(model.basis.grid, std::move(k));
}

/// Best linear predictor of X(s0) from X(s_1..s_N) for a zero-mean model:
/// solves G a = g with G_{kl} = sum_j phi_j(||s_k - s_l||) and
/// g_k = sum_j phi_j(||s_k - s0||); mse = K(s0,s0) - 2 a'g + a'G a.
struct KrigingResult {
  std::vector<double> weights;
  double mse = 0.0;
  double jitter = 0.0;
};

inline KrigingResult kriging_weights(const FieldModel& model, const PointSet& pts,
                                     const std::vector<double>& s0) {
  if (static_cast<int>(s0.size()) != pts.dim)
    throw std::invalid_argument("kriging_weights: s0 dimension mismatch");
  for (std::size_t i = 0; i < model.mean.values.size(); ++i)
    if (model.mean.values[i] != 0.0)
      throw std::invalid_argument("kriging_weights: model mean must be zero");

  const int n = pts.size();
  auto k_of = [&](double dist) {
    double s = 0.0;
    for (const auto& sc : model.scores) s += phi_eval(sc.phi, dist);
    return s;
  };
  auto dist_to_s0 = [&](int k) {
    double s = 0.0;
    for (int i = 0; i < pts.dim; ++i) {
      const double d = pts.coord(k, i) - s0[static_cast<std::size_t>(i)];
      s += d * d;
    }
    return std::sqrt(s);
  };

  Matrix g(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    for (int l = 0; l <= k; ++l) {
      const double v = k_of(pts.distance(k, l));
      g(static_cast<std::size_t>(k), static_cast<std::size_t>(l)) = v;
      g(static_cast<std::size_t>(l), static_cast<std::size_t>(k)) = v;
    }
  std::vector<double> rhs(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) rhs[static_cast<std::size_t>(k)] = k_of(dist_to_s0(k));

  static constexpr double kJitterLadder[] = {0.0, 1e-12, 1e-8, 1e-6};
  Matrix l;
  double used = -1.0;
  for (double jitter : kJitterLadder)
    if (detail::try_cholesky(g, jitter, l)) {
      used = jitter;
      break;
    }
  if (used < 0.0)
    throw numeric_error("kriging_weights: covariance system is singular after maximal jitter");

  // forward/backward solve
  std::vector<double> y(static_cast<std::size_t>(n)), a(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double s = rhs[static_cast<std::size_t>(i)];
    for (int k = 0; k < i; ++k) s -= l(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) * y[static_cast<std::size_t>(k)];
    y[static_cast<std::size_t>(i)] = s / l(static_cast<std::size_t>(i), static_cast<std::size_t>(i));
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < n; ++k) s -= l(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) * a[static_cast<std::size_t>(k)];
    a[static_cast<std::size_t>(i)] = s / l(static_cast<std::size_t>(i), static_cast<std::size_t>(i));
  }

  double quad = 0.0, cross = 0.0;
  for (int k = 0; k < n; ++k) {
    cross += a[static_cast<std::size_t>(k)] * rhs[static_cast<std::size_t>(k)];
    double row = 0.0;
    for (int m = 0; m < n; ++m)
      row += g(static_cast<std::size_t>(k), static_cast<std::size_t>(m)) * a[static_cast<std::size_t>(m)];
    quad += a[static_cast<std::size_t>(k)] * row;
  }
  const double mse = k_of(0.0) - 2.0 * cross + quad;
  return KrigingResult{std::move(a), mse, used};
}

}  // namespace spatfun
