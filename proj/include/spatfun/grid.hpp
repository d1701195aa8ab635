#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatfun/errors.hpp"

namespace spatfun {

/// Uniform midpoint grid on [0,1]: nodes t_i = (i+0.5)/T, weight 1/T.
/// The midpoint rule keeps the trigonometric system orthonormal to near
/// machine precision and the weights sum to one.
class TimeGrid {
public:
  static constexpr int kDefaultSize = 256;

  explicit TimeGrid(int size = kDefaultSize) : size_(size) {
    if (size < 2) throw std::invalid_argument("TimeGrid: size must be >= 2");
  }

  int size() const { return size_; }
  double node(int i) const { return (i + 0.5) / size_; }
  double weight() const { return 1.0 / size_; }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.size_ == b.size_;
  }

private:
  int size_;
};

/// A discretized function on [0,1]: one value per grid node.
struct Curve {
  TimeGrid grid;
  std::vector<double> values;

  Curve(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.size())
      throw std::invalid_argument("Curve: value count does not match grid");
    for (double x : values)
      if (!std::isfinite(x))
        throw std::invalid_argument("Curve: non-finite value");
  }
};

inline Curve constant_curve(TimeGrid g, double c) {
  return Curve(g, std::vector<double>(g.size(), c));
}

inline Curve zero_curve(TimeGrid g) { return constant_curve(g, 0.0); }

inline void require_same_grid(const TimeGrid& a, const TimeGrid& b,
                              const char* where) {
  if (!(a == b))
    throw std::invalid_argument(std::string(where) + ": grid mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
}

/// L2 inner product under the grid quadrature.
inline double inner(const Curve& x, const Curve& y) {
  require_same_grid(x.grid, y.grid, "inner");
  double s = 0.0;
  const int n = x.grid.size();
  for (int i = 0; i < n; ++i) s += x.values[i] * y.values[i];
  return s * x.grid.weight();
}

inline double norm(const Curve& x) { return std::sqrt(inner(x, x)); }

/// x + a*y
inline Curve axpy(const Curve& x, double a, const Curve& y) {
  require_same_grid(x.grid, y.grid, "axpy");
  std::vector<double> v(x.values);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * y.values[i];
  return Curve(x.grid, std::move(v));
}

inline Curve scaled(const Curve& x, double a) {
  std::vector<double> v(x.values);
  for (double& t : v) t *= a;
  return Curve(x.grid, std::move(v));
}

/// Finite orthonormal system e_1..e_J on a common grid.
struct BasisSystem {
  TimeGrid grid;
  int order;                   // J
  std::vector<Curve> elements; // size J

  /// 1-based access, matching the usual subscripting e_1, e_2, ...
  const Curve& element(int j) const { return elements.at(j - 1); }
};

/// Trigonometric system ordered in sin/cos pairs:
///   e_{2k-1}(t) = sqrt(2) sin(2 pi k t),  e_{2k}(t) = sqrt(2) cos(2 pi k t).
/// Requires T >= 4J so the highest frequency is well resolved.
inline BasisSystem make_fourier_basis(int order, int grid_size) {
  if (order < 1) throw std::invalid_argument("make_fourier_basis: J must be >= 1");
  if (grid_size < 4 * order)
    throw std::invalid_argument(
        "make_fourier_basis: grid too coarse, need T >= 4J (T=" +
        std::to_string(grid_size) + ", J=" + std::to_string(order) + ")");
  TimeGrid grid(grid_size);
  const double sqrt2 = std::numbers::sqrt2;
  std::vector<Curve> elems;
  elems.reserve(order);
  for (int j = 1; j <= order; ++j) {
    const int k = (j + 1) / 2;
    const bool is_sin = (j % 2 == 1);
    std::vector<double> v(grid_size);
    for (int i = 0; i < grid_size; ++i) {
      const double arg = 2.0 * std::numbers::pi * k * grid.node(i);
      v[i] = sqrt2 * (is_sin ? std::sin(arg) : std::cos(arg));
    }
    elems.emplace_back(grid, std::move(v));
  }
  return BasisSystem{grid, order, std::move(elems)};
}

}  // namespace spatfun
