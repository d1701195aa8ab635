#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatfun/errors.hpp"
#include "spatfun/grid.hpp"
#include "spatfun/matrix.hpp"

namespace spatfun {

/// Discretized symmetric integral operator on the grid: kernel(i,j) holds
/// c(t_i, t_j) and the operator acts by quadrature,
///   (A f)(t_i) = sum_j w_j kernel(i,j) f(t_j).
class KernelOperator {
public:
  KernelOperator(TimeGrid grid, Matrix kernel) : grid_(grid), kernel_(std::move(kernel)) {
    const std::size_t n = static_cast<std::size_t>(grid_.size());
    if (kernel_.rows() != n || kernel_.cols() != n)
      throw std::invalid_argument("KernelOperator: kernel must be T x T");
    double max_abs = 0.0, max_asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const double a = kernel_(i, j), b = kernel_(j, i);
        if (!std::isfinite(a) || !std::isfinite(b))
          throw std::invalid_argument("KernelOperator: non-finite kernel entry");
        max_abs = std::max({max_abs, std::abs(a), std::abs(b)});
        max_asym = std::max(max_asym, std::abs(a - b));
      }
    if (max_asym > 1e-12 * std::max(1.0, max_abs))
      throw std::invalid_argument("KernelOperator: kernel not symmetric (max asymmetry " +
                                  std::to_string(max_asym) + ")");
    // symmetrize away roundoff so downstream code sees an exactly symmetric kernel
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) {
        const double m = 0.5 * (kernel_(i, j) + kernel_(j, i));
        kernel_(i, j) = kernel_(j, i) = m;
      }
  }

  static KernelOperator zero(TimeGrid grid) {
    const std::size_t n = static_cast<std::size_t>(grid.size());
    return KernelOperator(grid, Matrix(n, n, 0.0));
  }

  TimeGrid grid() const { return grid_; }
  const Matrix& kernel() const { return kernel_; }

private:
  TimeGrid grid_;
  Matrix kernel_;
};

/// Rank-one operator x (x) y with kernel(i,j) = x(t_j) y(t_i). The symmetry
/// invariant of KernelOperator restricts this to collinear x and y; the
/// covariance-style use x (x) x is the intended one.
inline KernelOperator rank_one(const Curve& x, const Curve& y) {
  require_same_grid(x.grid, y.grid, "rank_one");
  const std::size_t n = x.values.size();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k(i, j) = x.values[j] * y.values[i];
  return KernelOperator(x.grid, std::move(k));
}

inline Curve apply(const KernelOperator& a, const Curve& f) {
  require_same_grid(a.grid(), f.grid, "apply");
  const int n = f.grid.size();
  const double w = f.grid.weight();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    const double* row = a.kernel().row(static_cast<std::size_t>(i));
    for (int j = 0; j < n; ++j) s += row[j] * f.values[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = w * s;
  }
  return Curve(f.grid, std::move(out));
}

/// Hilbert-Schmidt inner product, computed as the quadrature-weighted
/// Frobenius inner product of the kernels.
inline double hs_inner(const KernelOperator& a, const KernelOperator& b) {
  require_same_grid(a.grid(), b.grid(), "hs_inner");
  const std::size_t n = static_cast<std::size_t>(a.grid().size());
  const double w = a.grid().weight();
  double s = 0.0;
  const double* pa = a.kernel().data();
  const double* pb = b.kernel().data();
  for (std::size_t i = 0; i < n * n; ++i) s += pa[i] * pb[i];
  return s * w * w;
}

inline double hs_norm(const KernelOperator& a) { return std::sqrt(hs_inner(a, a)); }

/// ||A - B||_S^2 without materializing the difference.
inline double hs_dist_sq(const KernelOperator& a, const KernelOperator& b) {
  require_same_grid(a.grid(), b.grid(), "hs_dist_sq");
  const std::size_t n = static_cast<std::size_t>(a.grid().size());
  const double w = a.grid().weight();
  double s = 0.0;
  const double* pa = a.kernel().data();
  const double* pb = b.kernel().data();
  for (std::size_t i = 0; i < n * n; ++i) {
    const double d = pa[i] - pb[i];
    s += d * d;
  }
  return s * w * w;
}

inline KernelOperator linear_combination(double ca, const KernelOperator& a, double cb,
                                         const KernelOperator& b) {
  require_same_grid(a.grid(), b.grid(), "linear_combination");
  const std::size_t n = static_cast<std::size_t>(a.grid().size());
  Matrix k(n, n);
  for (std::size_t i = 0; i < n * n; ++i)
    k.data()[i] = ca * a.kernel().data()[i] + cb * b.kernel().data()[i];
  return KernelOperator(a.grid(), std::move(k));
}

namespace detail {

/// Cyclic Jacobi sweeps on a symmetric matrix. `m` is destroyed; on return
/// `eval[i]` holds the eigenvalues (unsorted) and column i of `vec` the
/// matching orthonormal eigenvector.
inline void jacobi_symmetric(Matrix& m, std::vector<double>& eval, Matrix& vec) {
  const std::size_t n = m.rows();
  vec = Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vec(i, i) = 1.0;

  double scale = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(m.data()[i]));
  const double tol = 1e-12 * std::max(1.0, scale);

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(m(p, q)));
    if (off <= tol) break;
    if (sweep == max_sweeps - 1)
      throw numeric_error("jacobi_symmetric: no convergence after 100 sweeps");

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) <= tol * 1e-3) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e154) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = m(p, p), aqq = m(q, q);
        m(p, p) = app - t * apq;
        m(q, q) = aqq + t * apq;
        m(p, q) = m(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = m(r, p), arq = m(r, q);
            m(r, p) = m(p, r) = arp - s * (arq + tau * arp);
            m(r, q) = m(q, r) = arq + s * (arp - tau * arq);
          }
          const double vrp = vec(r, p), vrq = vec(r, q);
          vec(r, p) = vrp - s * (vrq + tau * vrp);
          vec(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }
  eval.resize(n);
  for (std::size_t i = 0; i < n; ++i) eval[i] = m(i, i);
}

}  // namespace detail

/// Decreasing eigenvalues of a kernel operator together with the leading
/// eigenfunctions (unit L2 norm under the grid quadrature).
struct EigenSystem {
  std::vector<double> eigenvalues;     // all T, descending
  std::vector<Curve> eigenfunctions;   // leading k
  int count = 0;                       // k

  /// Spectral gap used by the eigenfunction perturbation bound:
  /// alpha_1 = l1 - l2, alpha_j = min(l_{j-1} - l_j, l_j - l_{j+1}).
  double gap(int j) const {
    const int t = static_cast<int>(eigenvalues.size());
    if (j < 1 || j > t) throw std::invalid_argument("EigenSystem::gap: index out of range");
    auto lam = [&](int i) { return eigenvalues[static_cast<std::size_t>(i - 1)]; };
    if (j == 1) return t > 1 ? lam(1) - lam(2) : 0.0;
    const double up = lam(j - 1) - lam(j);
    if (j == t) return up;
    return std::min(up, lam(j) - lam(j + 1));
  }
};

/// Solves the quadrature-weighted eigenproblem. With uniform weights the
/// operator matrix is kernel/T; eigenvectors are rescaled by sqrt(T) so the
/// returned curves have unit L2 norm.
inline EigenSystem eigenpairs(const KernelOperator& a, int k) {
  const int t = a.grid().size();
  if (k < 0 || k > t) throw std::invalid_argument("eigenpairs: need 0 <= k <= T");

  const std::size_t n = static_cast<std::size_t>(t);
  Matrix m(n, n);
  const double w = a.grid().weight();
  for (std::size_t i = 0; i < n * n; ++i) m.data()[i] = a.kernel().data()[i] * w;

  std::vector<double> eval;
  Matrix vec;
  detail::jacobi_symmetric(m, eval, vec);

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t x, std::size_t y) { return eval[x] > eval[y]; });

  EigenSystem es;
  es.count = k;
  es.eigenvalues.resize(n);
  for (std::size_t r = 0; r < n; ++r) es.eigenvalues[r] = eval[idx[r]];
  es.eigenfunctions.reserve(static_cast<std::size_t>(k));
  const double root_t = std::sqrt(static_cast<double>(t));
  for (int j = 0; j < k; ++j) {
    std::vector<double> v(n);
    for (std::size_t r = 0; r < n; ++r) v[r] = root_t * vec(r, idx[static_cast<std::size_t>(j)]);
    es.eigenfunctions.emplace_back(a.grid(), std::move(v));
  }
  return es;
}

/// Resolves the sign ambiguity of an eigenfunction against a reference:
/// returns u * sign(<u, ref>), treating sign 0 as +1. Inner products at
/// roundoff scale count as zero so orthogonal references never flip.
inline Curve sign_align(const Curve& u, const Curve& ref) {
  const double ip = inner(u, ref);
  const double tol = 1e-12 * norm(u) * norm(ref);
  return ip < -tol ? scaled(u, -1.0) : u;
}

/// Perturbation bound for the j-th sign-aligned eigenfunction of an operator
/// at Hilbert-Schmidt distance `dist_hs` from the reference spectrum:
/// 2*sqrt(2)*dist_hs / alpha_j. Requires the leading d+1 eigenvalues of the
/// reference to be strictly decreasing.
inline double efpc_error_bound(const EigenSystem& ref, double dist_hs, int j, int d) {
  if (j < 1 || j > d) throw std::invalid_argument("efpc_error_bound: need 1 <= j <= d");
  if (d + 1 > static_cast<int>(ref.eigenvalues.size()))
    throw std::invalid_argument("efpc_error_bound: spectrum too short for requested d");
  constexpr double min_gap = 1e-10;
  for (int i = 1; i <= d; ++i) {
    const double diff = ref.eigenvalues[static_cast<std::size_t>(i - 1)] -
                        ref.eigenvalues[static_cast<std::size_t>(i)];
    if (diff < min_gap)
      throw numeric_error("efpc_error_bound: degenerate spectrum, gap below 1e-10 at index " +
                          std::to_string(i));
  }
  return 2.0 * std::numbers::sqrt2 * dist_hs / ref.gap(j);
}

}  // namespace spatfun
