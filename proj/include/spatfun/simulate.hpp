#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spatfun/covariance.hpp"
#include "spatfun/designs.hpp"
#include "spatfun/errors.hpp"
#include "spatfun/grid.hpp"
#include "spatfun/matrix.hpp"
#include "spatfun/rng.hpp"

namespace spatfun {

/// Truncated score representation of a functional random field:
/// X(s) = mu + sum_j xi_j(s) e_j with mutually independent Gaussian score
/// fields, E[xi_j(s1) xi_j(s2)] = phi_j(||s1 - s2||).
struct FieldModel {
  BasisSystem basis;
  Curve mean;

  struct Score {
    int index;       // basis index j (1-based)
    CovFamily phi;   // spatial covariance of xi_j; phi(0) is the eigenvalue
  };
  std::vector<Score> scores;

  FieldModel(BasisSystem b, Curve mu, std::vector<Score> sc)
      : basis(std::move(b)), mean(std::move(mu)), scores(std::move(sc)) {
    require_same_grid(basis.grid, mean.grid, "FieldModel");
    std::vector<int> seen;
    for (const auto& s : scores) {
      if (s.index < 1 || s.index > basis.order)
        throw std::invalid_argument("FieldModel: score index outside basis order");
      if (std::find(seen.begin(), seen.end(), s.index) != seen.end())
        throw std::invalid_argument("FieldModel: duplicate score index");
      seen.push_back(s.index);
      s.phi.validate();
    }
  }
};

inline FieldModel zero_mean_model(BasisSystem basis, std::vector<FieldModel::Score> scores) {
  Curve mu = zero_curve(basis.grid);
  return FieldModel(std::move(basis), std::move(mu), std::move(scores));
}

/// Curves simulated at spatial locations: row k holds X(s_k; .).
/// When `with_origin` is set, the last row is a distinguished draw at the
/// origin that estimators must not average over.
struct FunctionSample {
  TimeGrid grid;
  PointSet points;
  Matrix values;  // points.size() x grid.size()
  bool with_origin = false;

  /// Number of rows that belong to the sample proper.
  int data_rows() const { return points.size() - (with_origin ? 1 : 0); }

  Curve row_curve(int k) const {
    std::vector<double> v(values.row(static_cast<std::size_t>(k)),
                          values.row(static_cast<std::size_t>(k)) + grid.size());
    return Curve(grid, std::move(v));
  }

  Curve origin_curve() const {
    if (!with_origin) throw std::invalid_argument("FunctionSample: no origin row");
    return row_curve(points.size() - 1);
  }
};

namespace detail {

/// Lower-triangular Cholesky factor of the covariance matrix of a score
/// field over a point set, with diagonal jitter escalation on breakdown.
struct CovarianceFactor {
  Matrix chol;       // lower triangular
  double jitter;     // 0 when none was needed
};

inline bool try_cholesky(const Matrix& a, double jitter, Matrix& l) {
  const std::size_t n = a.rows();
  l = Matrix(n, n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j) + jitter;
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) return false;
    const double root = std::sqrt(diag);
    l(j, j) = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / root;
    }
  }
  return true;
}

inline CovarianceFactor factor_covariance(const CovFamily& phi, const PointSet& pts) {
  const std::size_t n = static_cast<std::size_t>(pts.size());
  Matrix a(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l <= k; ++l) {
      const double v = phi_eval(phi, pts.distance(static_cast<int>(k), static_cast<int>(l)));
      a(k, l) = a(l, k) = v;
    }

  static constexpr double kJitterLadder[] = {0.0, 1e-12, 1e-8, 1e-6};
  Matrix l;
  for (double jitter : kJitterLadder)
    if (try_cholesky(a, jitter, l)) return CovarianceFactor{std::move(l), jitter};

  // identify the closest pair for the error message
  int bk = 0, bl = 1;
  double best = pts.size() > 1 ? pts.distance(0, 1) : 0.0;
  for (int k = 0; k < pts.size(); ++k)
    for (int l = k + 1; l < pts.size(); ++l)
      if (pts.distance(k, l) < best) {
        best = pts.distance(k, l);
        bk = k;
        bl = l;
      }
  throw numeric_error(std::string("covariance matrix for ") + cov_kind_name(phi.kind) +
                      " is not positive definite after maximal jitter; closest points " +
                      std::to_string(bk + 1) + " and " + std::to_string(bl + 1) +
                      " at distance " + format_double(best));
}

}  // namespace detail

/// Factors the covariance of one score field over a fixed point set once and
/// then produces draws in O(N^2) each. Immutable after construction, so it
/// can be shared across replicate workers.
class GaussianFieldSampler {
public:
  GaussianFieldSampler(CovFamily phi, const PointSet& pts)
      : phi_(phi), n_(pts.size()), degenerate_(phi.variance() == 0.0), jitter_(0.0) {
    phi_.validate();
    if (!degenerate_) {
      auto f = detail::factor_covariance(phi_, pts);
      chol_ = std::move(f.chol);
      jitter_ = f.jitter;
    }
  }

  int size() const { return n_; }
  double jitter() const { return jitter_; }

  std::vector<double> draw(Xoshiro256pp& rng) const {
    std::vector<double> z(static_cast<std::size_t>(n_));
    for (auto& v : z) v = normal_draw(rng);
    if (degenerate_) return std::vector<double>(static_cast<std::size_t>(n_), 0.0);
    std::vector<double> x(static_cast<std::size_t>(n_), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += chol_(i, k) * z[k];
      x[i] = s;
    }
    return x;
  }

private:
  CovFamily phi_;
  int n_;
  bool degenerate_;
  double jitter_;
  Matrix chol_;
};

/// One draw of (xi(s_1), ..., xi(s_N)) with covariance phi(||s_k - s_l||).
inline std::vector<double> gaussian_field_draw(const CovFamily& phi, const PointSet& pts,
                                               StreamKey key) {
  GaussianFieldSampler sampler(phi, pts);
  auto rng = key.engine();
  return sampler.draw(rng);
}

namespace detail {

/// Score-field draws already materialized for a fixed design: one sampler
/// per score component.
struct ModelSamplers {
  std::vector<GaussianFieldSampler> per_score;

  ModelSamplers(const FieldModel& model, const PointSet& pts) {
    per_score.reserve(model.scores.size());
    for (const auto& s : model.scores) per_score.emplace_back(s.phi, pts);
  }
};

inline FunctionSample assemble_sample(const FieldModel& model, const PointSet& pts,
                                      const ModelSamplers& samplers, StreamKey key,
                                      bool with_origin) {
  const int n = pts.size();
  const int t = model.basis.grid.size();
  Matrix values(static_cast<std::size_t>(n), static_cast<std::size_t>(t));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < t; ++i)
      values(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) =
          model.mean.values[static_cast<std::size_t>(i)];

  for (std::size_t j = 0; j < model.scores.size(); ++j) {
    // per-score substream keyed by the basis index, so draws do not depend
    // on the order score components are listed in
    auto rng = key.child(static_cast<std::uint64_t>(model.scores[j].index)).engine();
    const auto xi = samplers.per_score[j].draw(rng);
    const auto& e = model.basis.element(model.scores[j].index);
    for (int k = 0; k < n; ++k) {
      double* row = values.row(static_cast<std::size_t>(k));
      const double w = xi[static_cast<std::size_t>(k)];
      for (int i = 0; i < t; ++i) row[static_cast<std::size_t>(i)] += w * e.values[static_cast<std::size_t>(i)];
    }
  }
  return FunctionSample{model.basis.grid, pts, std::move(values), with_origin};
}

}  // namespace detail

/// Simulates the field at the given locations: values(k, i) = mu(t_i) +
/// sum_j xi_j(s_k) e_j(t_i), independent streams per score component.
inline FunctionSample field_sample(const FieldModel& model, const PointSet& pts, StreamKey key) {
  detail::ModelSamplers samplers(model, pts);
  return detail::assemble_sample(model, pts, samplers, key, false);
}

/// Single-factor field on the line, X(s; t) = psi(s) e(t), where psi takes
/// iid +-1 values on the unit intervals (U + k, U + k + 1] of a uniformly
/// shifted partition. Its spatial covariance is the tent (1 - |u - v|)+.
inline FunctionSample tent_field_sample(const PointSet& pts, const Curve& e, StreamKey key) {
  if (pts.dim != 1)
    throw std::invalid_argument("tent_field_sample: the construction lives on the line (d = 1)");
  const int n = pts.size();

  double lo = pts.coord(0, 0), hi = lo;
  for (int k = 1; k < n; ++k) {
    lo = std::min(lo, pts.coord(k, 0));
    hi = std::max(hi, pts.coord(k, 0));
  }
  const auto kmin = static_cast<std::int64_t>(std::floor(lo)) - 1;
  const auto kmax = static_cast<std::int64_t>(std::ceil(hi)) + 1;

  auto shift_rng = key.child(0).engine();
  const double u = uniform01(shift_rng);
  auto sign_rng = key.child(1).engine();
  std::vector<double> delta(static_cast<std::size_t>(kmax - kmin + 1));
  for (auto& d : delta) d = (uniform01(sign_rng) < 0.5) ? -1.0 : 1.0;

  const int t = e.grid.size();
  Matrix values(static_cast<std::size_t>(n), static_cast<std::size_t>(t));
  for (int k = 0; k < n; ++k) {
    const double s = pts.coord(k, 0);
    // s lies in (U + m, U + m + 1] for m = ceil(s - U) - 1
    const auto m = static_cast<std::int64_t>(std::ceil(s - u)) - 1;
    const double psi = delta[static_cast<std::size_t>(m - kmin)];
    for (int i = 0; i < t; ++i)
      values(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) =
          psi * e.values[static_cast<std::size_t>(i)];
  }
  return FunctionSample{e.grid, pts, std::move(values), false};
}

/// The two-component model X(s; t) = zeta_1(s) e_1(t) + sqrt(lambda) zeta_2(s) e_2(t)
/// with iid squared-exponential unit-variance Gaussian factors and
/// e_1 = sqrt(2) sin(2 pi t), e_2 = sqrt(2) cos(2 pi t).
inline FieldModel two_component_model(double lambda, int grid_size) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("two_component_model: lambda must be in (0, 1)");
  BasisSystem basis = make_fourier_basis(2, grid_size);
  std::vector<FieldModel::Score> scores;
  scores.push_back({1, CovFamily::squared_exponential(1.0, 1.0)});
  scores.push_back({2, CovFamily::squared_exponential(lambda, 1.0)});
  return zero_mean_model(std::move(basis), std::move(scores));
}

inline FunctionSample two_component_field(double lambda, const PointSet& pts, StreamKey key,
                                          int grid_size = TimeGrid::kDefaultSize) {
  return field_sample(two_component_model(lambda, grid_size), pts, key);
}

/// Appends the origin to a point set so a sample can carry the distinguished
/// X(0) row alongside the design points.
inline PointSet with_origin_appended(const PointSet& pts) {
  Matrix m(static_cast<std::size_t>(pts.size() + 1), static_cast<std::size_t>(pts.dim), 0.0);
  for (int k = 0; k < pts.size(); ++k)
    for (int i = 0; i < pts.dim; ++i)
      m(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) = pts.coord(k, i);
  auto out = make_point_set(pts.dim, std::move(m), pts.meta);
  return out;
}

/// Simulates at the design points plus the origin; the extra row is flagged
/// so estimators exclude it.
inline FunctionSample field_sample_with_origin(const FieldModel& model, const PointSet& pts,
                                               StreamKey key) {
  const PointSet extended = with_origin_appended(pts);
  detail::ModelSamplers samplers(model, extended);
  return detail::assemble_sample(model, extended, samplers, key, true);
}

}  // namespace spatfun
