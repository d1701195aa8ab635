#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatfun/csv.hpp"
#include "spatfun/errors.hpp"
#include "spatfun/matrix.hpp"
#include "spatfun/rng.hpp"

namespace spatfun {

/// Sampling locations s_1..s_N in R^d.
struct PointSet {
  int dim = 1;
  Matrix points;  // N x d

  struct Meta {
    std::optional<double> alpha;  // domain scaling, when generated from a family
    std::string kind;             // generator tag
  } meta;

  int size() const { return static_cast<int>(points.rows()); }

  double coord(int k, int i) const {
    return points(static_cast<std::size_t>(k), static_cast<std::size_t>(i));
  }

  double distance(int k, int l) const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double d = coord(k, i) - coord(l, i);
      s += d * d;
    }
    return std::sqrt(s);
  }

  double diameter() const {
    double d = 0.0;
    for (int k = 0; k < size(); ++k)
      for (int l = k + 1; l < size(); ++l) d = std::max(d, distance(k, l));
    return d;
  }

  /// Smallest strictly positive pairwise distance (0 if none).
  double min_positive_distance() const {
    double d = 0.0;
    bool found = false;
    for (int k = 0; k < size(); ++k)
      for (int l = k + 1; l < size(); ++l) {
        const double v = distance(k, l);
        if (v > 0.0 && (!found || v < d)) {
          d = v;
          found = true;
        }
      }
    return found ? d : 0.0;
  }
};

inline PointSet make_point_set(int dim, Matrix pts, PointSet::Meta meta = {}) {
  if (dim < 1) throw std::invalid_argument("PointSet: dimension must be >= 1");
  if (pts.rows() < 1) throw std::invalid_argument("PointSet: need at least one point");
  if (pts.cols() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("PointSet: column count must equal dimension");
  for (std::size_t i = 0; i < pts.rows() * pts.cols(); ++i)
    if (!std::isfinite(pts.data()[i]))
      throw std::invalid_argument("PointSet: non-finite coordinate");
  return PointSet{dim, std::move(pts), std::move(meta)};
}

inline PointSet points_from_list(const std::vector<std::vector<double>>& coords) {
  if (coords.empty()) throw std::invalid_argument("points_from_list: empty list");
  const int d = static_cast<int>(coords.front().size());
  Matrix m(coords.size(), static_cast<std::size_t>(d));
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (static_cast<int>(coords[k].size()) != d)
      throw std::invalid_argument("points_from_list: ragged coordinate list");
    for (int i = 0; i < d; ++i) m(k, static_cast<std::size_t>(i)) = coords[k][static_cast<std::size_t>(i)];
  }
  return make_point_set(d, std::move(m));
}

inline PointSet points_on_line(std::vector<double> xs, PointSet::Meta meta = {}) {
  Matrix m(xs.size(), 1);
  for (std::size_t k = 0; k < xs.size(); ++k) m(k, 0) = xs[k];
  return make_point_set(1, std::move(m), std::move(meta));
}

/// Maximal fraction of points within Euclidean distance rho of a point of the
/// set (the point itself included). Exhaustive O(N^2) evaluation.
inline double intensity(const PointSet& s, double rho) {
  if (rho < 0.0) throw std::invalid_argument("intensity: rho must be >= 0");
  const int n = s.size();
  int best = 0;
  for (int k = 0; k < n; ++k) {
    int c = 0;
    for (int l = 0; l < n; ++l)
      if (s.distance(k, l) <= rho) ++c;
    best = std::max(best, c);
  }
  return static_cast<double>(best) / static_cast<double>(n);
}

/// The intensity function rho -> I_rho(S) tabulated on a radius grid.
struct IntensityProfile {
  std::vector<double> radii;
  std::vector<double> values;
};

inline IntensityProfile intensity_profile(const PointSet& s, std::vector<double> radii) {
  std::sort(radii.begin(), radii.end());
  IntensityProfile p;
  p.radii = std::move(radii);
  p.values.reserve(p.radii.size());
  for (double r : p.radii) p.values.push_back(intensity(s, r));
  return p;
}

/// Count of ordered pairs (k, l) with ||s_k - s_l|| <= m, diagonal included.
inline std::int64_t pair_count_B(const PointSet& s, double m) {
  if (m < 0.0) throw std::invalid_argument("pair_count_B: m must be >= 0");
  const int n = s.size();
  std::int64_t c = 0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      if (s.distance(k, l) <= m) ++c;
  return c;
}

// ---------------------------------------------------------------------------
// Parametric design families: lattice in a scaled region, or iid points.
// ---------------------------------------------------------------------------

enum class Region { Cube, Ball };  // unit volume, centered at the origin

/// Radius of the d-dimensional ball with unit volume.
inline double unit_ball_radius(int d) {
  // V_d r^d = 1  with  V_d = pi^{d/2} / Gamma(d/2 + 1)
  const double vd = std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
  return std::pow(1.0 / vd, 1.0 / d);
}

inline double region_diameter(Region r, int d) {
  return r == Region::Cube ? std::sqrt(static_cast<double>(d)) : 2.0 * unit_ball_radius(d);
}

enum class GrowthKind { Bounded, Power, PowerLog };

/// Domain scaling alpha_N as a function of N: a constant, N^beta, or
/// N^beta * ln N.
struct GrowthSpec {
  GrowthKind kind = GrowthKind::Bounded;
  double value = 1.0;  // the constant c, or the exponent beta

  double alpha_at(double n) const {
    switch (kind) {
      case GrowthKind::Bounded: return value;
      case GrowthKind::Power: return std::pow(n, value);
      case GrowthKind::PowerLog: return std::pow(n, value) * std::log(n);
    }
    return value;
  }

  void validate() const {
    if (kind == GrowthKind::Bounded) {
      if (value <= 0.0) throw std::invalid_argument("GrowthSpec: bounded alpha must be > 0");
    } else if (value < 0.0) {
      throw std::invalid_argument("GrowthSpec: exponent beta must be >= 0");
    }
  }
};

enum class DesignKind { RegularGrid, Randomized };

/// Piecewise-constant sampling density on the unit cube, bounded below by a
/// positive constant. Cells split each axis into `cells_per_dim` equal parts.
struct GridDensity {
  int cells_per_dim = 1;
  std::vector<double> weights;  // cells_per_dim^d values, relative mass

  void validate(int d) const {
    std::size_t expect = 1;
    for (int i = 0; i < d; ++i) expect *= static_cast<std::size_t>(cells_per_dim);
    if (cells_per_dim < 1 || weights.size() != expect)
      throw std::invalid_argument("GridDensity: weight count must be cells_per_dim^d");
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("GridDensity: negative mass");
      if (w == 0.0) throw std::invalid_argument("GridDensity: zero-density region");
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("GridDensity: no mass");
  }

  /// sup of the normalized density over the cube.
  double sup() const {
    const auto cells = static_cast<double>(weights.size());
    double total = 0.0, top = 0.0;
    for (double w : weights) {
      total += w;
      top = std::max(top, w);
    }
    return top / total * cells;
  }
};

struct DesignFamilySpec {
  DesignKind kind = DesignKind::RegularGrid;
  Region r0 = Region::Cube;
  int dim = 1;
  std::vector<double> delta = {1.0};    // lattice increments (regular grid)
  GrowthSpec growth;
  std::optional<GridDensity> density;   // randomized only; empty = uniform

  void validate() const {
    if (dim < 1 || dim > 3)
      throw std::invalid_argument("DesignFamilySpec: dimension must be 1, 2 or 3");
    growth.validate();
    if (kind == DesignKind::RegularGrid) {
      if (delta.empty()) throw std::invalid_argument("DesignFamilySpec: missing lattice increments");
      for (double d : delta)
        if (d <= 0.0) throw std::invalid_argument("DesignFamilySpec: increments must be > 0");
      double d0 = *std::min_element(delta.begin(), delta.end());
      if (std::abs(d0 - 1.0) > 1e-12)
        throw std::invalid_argument("DesignFamilySpec: smallest increment must be 1 (rescale)");
    }
    if (density) {
      if (kind != DesignKind::Randomized)
        throw std::invalid_argument("DesignFamilySpec: density only applies to randomized designs");
      if (r0 != Region::Cube)
        throw std::invalid_argument("DesignFamilySpec: grid densities supported on the cube only");
      density->validate(dim);
    }
  }

  std::vector<double> increments() const {
    std::vector<double> d(static_cast<std::size_t>(dim), 1.0);
    for (std::size_t i = 0; i < d.size() && i < delta.size(); ++i) d[i] = delta[i];
    return d;
  }

  /// Delta = (prod delta_i)^(1/d)
  double delta_geomean() const {
    const auto d = increments();
    double prod = 1.0;
    for (double v : d) prod *= v;
    return std::pow(prod, 1.0 / dim);
  }
};

namespace detail {

// closed-region membership with a relative slack so lattice points that land
// exactly on the boundary are kept regardless of rounding
inline constexpr double kBoundarySlack = 1e-9;

inline bool region_contains(Region r, int d, const std::vector<double>& x, double alpha) {
  if (r == Region::Cube) {
    for (double v : x)
      if (std::abs(v) > alpha / 2.0 * (1.0 + kBoundarySlack)) return false;
    return true;
  }
  double s = 0.0;
  for (double v : x) s += v * v;
  const double rad = alpha * unit_ball_radius(d);
  return s <= rad * rad * (1.0 + kBoundarySlack);
}

}  // namespace detail

/// Lattice design: Z(eta_N * delta) clipped to the scaled region alpha_N R0,
/// with eta_N = alpha_N / (Delta N^{1/d}) so the realized size tracks N.
inline PointSet grid_design(const DesignFamilySpec& spec, int n_target) {
  spec.validate();
  if (spec.kind != DesignKind::RegularGrid)
    throw std::invalid_argument("grid_design: spec is not a regular grid family");
  if (n_target < 1) throw std::invalid_argument("grid_design: N must be >= 1");

  const int d = spec.dim;
  const double alpha = spec.growth.alpha_at(static_cast<double>(n_target));
  const double eta = alpha / (spec.delta_geomean() * std::pow(static_cast<double>(n_target), 1.0 / d));
  const auto incr = spec.increments();

  // per-axis index ranges covering the region
  const double extent = (spec.r0 == Region::Cube) ? alpha / 2.0 : alpha * unit_ball_radius(d);
  std::vector<std::int64_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const double step = eta * incr[static_cast<std::size_t>(i)];
    const auto m =
        static_cast<std::int64_t>(std::floor(extent / step * (1.0 + detail::kBoundarySlack)));
    lo[static_cast<std::size_t>(i)] = -m;
    hi[static_cast<std::size_t>(i)] = m;
  }

  std::vector<std::vector<double>> pts;
  std::vector<double> x(static_cast<std::size_t>(d), 0.0);
  std::vector<std::int64_t> idx(lo);
  while (true) {
    for (int i = 0; i < d; ++i)
      x[static_cast<std::size_t>(i)] =
          static_cast<double>(idx[static_cast<std::size_t>(i)]) * eta * incr[static_cast<std::size_t>(i)];
    if (detail::region_contains(spec.r0, d, x, alpha)) pts.push_back(x);
    int axis = 0;
    while (axis < d) {
      if (++idx[static_cast<std::size_t>(axis)] <= hi[static_cast<std::size_t>(axis)]) break;
      idx[static_cast<std::size_t>(axis)] = lo[static_cast<std::size_t>(axis)];
      ++axis;
    }
    if (axis == d) break;
  }
  if (pts.empty())
    throw numeric_error("grid_design: no lattice points fall inside the region (N too small for d)");

  Matrix m(pts.size(), static_cast<std::size_t>(d));
  for (std::size_t k = 0; k < pts.size(); ++k)
    for (int i = 0; i < d; ++i) m(k, static_cast<std::size_t>(i)) = pts[k][static_cast<std::size_t>(i)];
  return make_point_set(d, std::move(m), {alpha, "regular-grid"});
}

/// Randomized design: N iid draws from the density on R0, scaled by alpha_N.
/// Deterministic given the stream key.
inline PointSet random_design(const DesignFamilySpec& spec, int n, StreamKey key) {
  spec.validate();
  if (spec.kind != DesignKind::Randomized)
    throw std::invalid_argument("random_design: spec is not a randomized family");
  if (n < 1) throw std::invalid_argument("random_design: N must be >= 1");

  const int d = spec.dim;
  const double alpha = spec.growth.alpha_at(static_cast<double>(n));
  auto rng = key.engine();
  Matrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(d));

  if (spec.density) {
    const auto& den = *spec.density;
    const int c = den.cells_per_dim;
    double total = 0.0;
    for (double w : den.weights) total += w;
    for (int k = 0; k < n; ++k) {
      // categorical cell draw, then uniform within the cell
      double u = uniform01(rng) * total, acc = 0.0;
      std::size_t cell = 0;
      for (std::size_t i = 0; i < den.weights.size(); ++i) {
        acc += den.weights[i];
        if (u <= acc || i + 1 == den.weights.size()) {
          cell = i;
          break;
        }
      }
      for (int i = 0; i < d; ++i) {
        const auto ci = static_cast<int>(cell % static_cast<std::size_t>(c));
        cell /= static_cast<std::size_t>(c);
        const double lo = -0.5 + static_cast<double>(ci) / c;
        m(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) =
            alpha * (lo + uniform01(rng) / c);
      }
    }
  } else if (spec.r0 == Region::Cube) {
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < d; ++i)
        m(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) = alpha * (uniform01(rng) - 0.5);
  } else {
    const double rad = unit_ball_radius(d);
    for (int k = 0; k < n; ++k) {
      // rejection from the bounding cube
      while (true) {
        double s = 0.0;
        std::vector<double> x(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
          x[static_cast<std::size_t>(i)] = rad * (2.0 * uniform01(rng) - 1.0);
          s += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        }
        if (s <= rad * rad) {
          for (int i = 0; i < d; ++i)
            m(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) = alpha * x[static_cast<std::size_t>(i)];
          break;
        }
      }
    }
  }
  return make_point_set(d, std::move(m), {alpha, "randomized"});
}

enum class SamplingType { TypeA, TypeB, TypeC };

inline const char* sampling_type_name(SamplingType t) {
  switch (t) {
    case SamplingType::TypeA: return "TypeA";
    case SamplingType::TypeB: return "TypeB";
    case SamplingType::TypeC: return "TypeC";
  }
  return "?";
}

struct Classification {
  SamplingType type;
  bool heuristic = false;  // randomized Type C is not covered by the theory
};

/// Analytic A/B/C classification from the growth tag:
/// bounded -> A;  alpha_N -> infinity with alpha_N = o(N^{1/d}) -> B;
/// alpha_N growing at least like N^{1/d} -> C.
inline Classification classify_family(const DesignFamilySpec& spec) {
  spec.validate();
  const double inv_d = 1.0 / spec.dim;
  SamplingType t;
  switch (spec.growth.kind) {
    case GrowthKind::Bounded:
      t = SamplingType::TypeA;
      break;
    case GrowthKind::Power:
      t = spec.growth.value == 0.0
              ? SamplingType::TypeA
              : (spec.growth.value < inv_d ? SamplingType::TypeB : SamplingType::TypeC);
      break;
    case GrowthKind::PowerLog:
      // N^beta ln N = o(N^{1/d}) exactly when beta < 1/d
      t = spec.growth.value < inv_d ? SamplingType::TypeB : SamplingType::TypeC;
      break;
    default:
      throw std::invalid_argument("classify_family: malformed growth spec");
  }
  const bool heuristic = (spec.kind == DesignKind::Randomized && t == SamplingType::TypeC);
  return Classification{t, heuristic};
}

// ---------------------------------------------------------------------------
// Canonical point sets used by the experiments.
// ---------------------------------------------------------------------------

/// Interleaved line set {1/k} u {k}, k = 1..n: a cluster near the origin mixed
/// with an equispaced spread. The full set behaves like Type A while the
/// spread-only subsample behaves like Type C.
inline PointSet interleaved_cluster_points(int n) {
  if (n < 1) throw std::invalid_argument("interleaved_cluster_points: n must be >= 1");
  std::vector<double> xs;
  xs.reserve(2 * static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    xs.push_back(1.0 / k);
    xs.push_back(static_cast<double>(k));
  }
  return points_on_line(std::move(xs), {std::nullopt, "interleaved"});
}

/// s_n = 1/n, n = 1..n: points accumulating at the origin.
inline PointSet inverse_index_points(int n) {
  if (n < 1) throw std::invalid_argument("inverse_index_points: n must be >= 1");
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) xs[static_cast<std::size_t>(k - 1)] = 1.0 / k;
  return points_on_line(std::move(xs), {std::nullopt, "inverse-index"});
}

/// s_k = k * alpha / n, k = 1..n: equispaced points spanning (0, alpha].
inline PointSet equispaced_line(int n, double alpha) {
  if (n < 1) throw std::invalid_argument("equispaced_line: n must be >= 1");
  if (alpha <= 0.0) throw std::invalid_argument("equispaced_line: alpha must be > 0");
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) xs[static_cast<std::size_t>(k - 1)] = alpha * k / n;
  return points_on_line(std::move(xs), {alpha, "equispaced-line"});
}

/// n copies of the origin in R^d.
inline PointSet coincident_points(int n, int d) {
  if (n < 1 || d < 1) throw std::invalid_argument("coincident_points: bad arguments");
  Matrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(d), 0.0);
  return make_point_set(d, std::move(m), {std::nullopt, "coincident"});
}

// ---------------------------------------------------------------------------
// CSV import/export: one row per point, header "x1,...,xd".
// ---------------------------------------------------------------------------

inline void write_points_csv(const std::string& path, const PointSet& s) {
  CsvWriter out(path);
  std::vector<std::string> cells;
  for (int i = 1; i <= s.dim; ++i) cells.push_back("x" + std::to_string(i));
  out.row(cells);
  for (int k = 0; k < s.size(); ++k) {
    cells.clear();
    for (int i = 0; i < s.dim; ++i) cells.push_back(format_double(s.coord(k, i)));
    out.row(cells);
  }
}

inline PointSet read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open point CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw config_error("empty point CSV: " + path);
  const auto header = split_csv_line(line);
  const int d = static_cast<int>(header.size());
  for (int i = 0; i < d; ++i)
    if (header[static_cast<std::size_t>(i)] != "x" + std::to_string(i + 1))
      throw config_error("point CSV header must be x1,...,xd: " + path);

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != d)
      throw config_error("row " + std::to_string(lineno) + " of " + path +
                         " has wrong column count");
    std::vector<double> row(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i)
      row[static_cast<std::size_t>(i)] =
          parse_double(cells[static_cast<std::size_t>(i)], path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw config_error("point CSV has no rows: " + path);
  auto s = points_from_list(rows);
  s.meta.kind = "points-csv";
  return s;
}

}  // namespace spatfun
