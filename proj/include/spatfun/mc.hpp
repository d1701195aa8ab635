#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spatfun/bounds.hpp"
#include "spatfun/covariance.hpp"
#include "spatfun/designs.hpp"
#include "spatfun/errors.hpp"
#include "spatfun/estimators.hpp"
#include "spatfun/grid.hpp"
#include "spatfun/rng.hpp"
#include "spatfun/simulate.hpp"

namespace spatfun {

// ---------------------------------------------------------------------------
// Configuration model. Parsed from JSON by config.hpp; usable directly from
// code as well.
// ---------------------------------------------------------------------------

enum class ExperimentKind { McMean, McCov, McXstar, Figure2, Bounds, Rates, Classify, Kriging };

enum class ModelKind { GaussianKL, Tent, TwoComponent };

enum class TargetKind { Mean, Cov, Xstar };

struct ModelConfig {
  ModelKind kind = ModelKind::Tent;
  int grid_size = TimeGrid::kDefaultSize;  // T
  int order = 20;                          // J, basis truncation
  std::vector<FieldModel::Score> scores;   // gaussian-kl components
  double lambda = 0.5;                     // two-component weight
  TargetKind target = TargetKind::Mean;    // which loss rates/bounds refer to
  bool centered = false;                   // mc-cov: use the centered estimator
  std::optional<double> delta;             // centered-bound moment surplus
  std::optional<double> c_delta;           // centered-bound constant C(delta)
  std::optional<double> kpp;               // regular-design bound constant K''
};

enum class DesignConfigKind {
  RegularGrid,
  Randomized,
  EquispacedLine,  // s_k = k alpha_N / N on the line
  InverseIndex,    // s_n = 1/n
  Interleaved,     // {1/k} u {k}
  Coincident,      // N copies of the origin
  PointsCsv,
};

struct DesignConfig {
  DesignConfigKind kind = DesignConfigKind::EquispacedLine;
  DesignFamilySpec family;        // regular-grid / randomized families; growth
                                  // also drives the equispaced-line alpha_N
  std::string csv_path;
  std::vector<double> s0;         // kriging prediction site
  std::string x_var = "N";        // rates regressor: "N" or "alpha"
  std::vector<double> rho_grid;   // optional override for intensity bounds
  std::vector<double> eps_grid;   // optional override for randomized bounds
  int mc_n = 100000;              // pair-volume Monte Carlo size
  double f_sup = 1.0;             // sup of the sampling density
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::McMean;
  ModelConfig model;
  DesignConfig design;
  std::vector<double> ladder = {50, 100, 200, 400};
  int replicates = 500;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: SPATFUN_THREADS env, then hardware concurrency
  std::string out_dir = ".";
  bool svg = false;
};

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPATFUN_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs body(0..n-1) on the given number of workers. Results must be written
/// to per-index slots; aggregation stays with the caller so output does not
/// depend on the thread count. The first worker exception is rethrown.
template <class F>
inline void parallel_for(int n, int threads, F&& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          next.store(n);
          break;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

struct McRow {
  double step = 0.0;       // ladder value (N)
  double param = 0.0;      // realized alpha_N (or N when no scaling applies)
  double loss_mean = 0.0;
  double loss_se = 0.0;
  double bound1 = std::nan("");  // general intensity bound
  double bound2 = std::nan("");  // regular-design bound
  double bound3 = std::nan("");  // randomized-design bound
  int replicates = 0;
  int sample_size = 0;           // realized S_N
};

struct McReport {
  std::vector<McRow> rows;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares on (log x, log loss).
inline RateFit rate_fit(std::span<const double> xs, std::span<const double> losses) {
  if (xs.size() != losses.size()) throw std::invalid_argument("rate_fit: size mismatch");
  if (xs.size() < 3) throw std::invalid_argument("rate_fit: need at least 3 points");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0)) throw std::invalid_argument("rate_fit: x values must be positive");
    if (!(losses[i] > 0.0)) throw numeric_error("rate_fit: nonpositive loss at index " + std::to_string(i));
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(losses[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("rate_fit: degenerate x values");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy == 0.0) {
    f.r2 = 1.0;
  } else {
    double ssres = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = ly[i] - (f.intercept + f.slope * lx[i]);
      ssres += e * e;
    }
    f.r2 = 1.0 - ssres / syy;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Experiment internals.
// ---------------------------------------------------------------------------

namespace detail {

// Stream lanes under the master seed. Replicate streams live under
// lane 0 / step / replicate; design and bound randomness get their own lanes
// so they never collide with replicate streams.
inline StreamKey replicate_key(StreamKey root, int step, int rep) {
  return root.child(0).child(static_cast<std::uint64_t>(step)).child(static_cast<std::uint64_t>(rep));
}
inline StreamKey design_key(StreamKey root, int step) {
  return root.child(1).child(static_cast<std::uint64_t>(step));
}
inline StreamKey bound_key(StreamKey root, int step) {
  return root.child(2).child(static_cast<std::uint64_t>(step));
}

inline PointSet build_design(const DesignConfig& dc, int n, StreamKey dkey) {
  switch (dc.kind) {
    case DesignConfigKind::RegularGrid:
      return grid_design(dc.family, n);
    case DesignConfigKind::Randomized:
      return random_design(dc.family, n, dkey);
    case DesignConfigKind::EquispacedLine:
      return equispaced_line(n, dc.family.growth.alpha_at(static_cast<double>(n)));
    case DesignConfigKind::InverseIndex:
      return inverse_index_points(n);
    case DesignConfigKind::Interleaved:
      return interleaved_cluster_points(n);
    case DesignConfigKind::Coincident:
      return coincident_points(n, dc.family.dim);
    case DesignConfigKind::PointsCsv:
      return read_points_csv(dc.csv_path);
  }
  throw config_error("build_design: unknown design kind");
}

inline bool design_is_regular(const DesignConfig& dc) {
  return dc.kind == DesignConfigKind::RegularGrid || dc.kind == DesignConfigKind::EquispacedLine;
}

inline int design_dim(const DesignConfig& dc) {
  switch (dc.kind) {
    case DesignConfigKind::RegularGrid:
    case DesignConfigKind::Randomized:
    case DesignConfigKind::Coincident:
      return dc.family.dim;
    default:
      return 1;
  }
}

inline double design_delta_geomean(const DesignConfig& dc) {
  return dc.kind == DesignConfigKind::RegularGrid ? dc.family.delta_geomean() : 1.0;
}

/// Covariance components of the configured model, as seen by the envelopes.
inline std::vector<CovFamily> model_components(const ModelConfig& mc) {
  switch (mc.kind) {
    case ModelKind::GaussianKL: {
      std::vector<CovFamily> out;
      for (const auto& s : mc.scores) out.push_back(s.phi);
      return out;
    }
    case ModelKind::Tent:
      return {CovFamily::tent()};
    case ModelKind::TwoComponent:
      return {CovFamily::squared_exponential(1.0, 1.0),
              CovFamily::squared_exponential(mc.lambda, 1.0)};
  }
  return {};
}

/// Everything about the configured model that does not depend on the design.
struct ModelObjects {
  TimeGrid grid;
  Curve mu;
  std::optional<FieldModel> field;   // gaussian-kl / two-component
  std::optional<Curve> tent_factor;  // tent: the fixed unit curve e
  std::optional<KernelOperator> population;
  DecayFunction h;
  std::optional<DecayFunction> H;  // fourth-order envelope (Gaussian models)

  explicit ModelObjects(const ModelConfig& mc)
      : grid(mc.grid_size), mu(zero_curve(grid)), h(h_from_components(model_components(mc))) {
    switch (mc.kind) {
      case ModelKind::GaussianKL: {
        if (mc.scores.empty())
          throw config_error("gaussian-kl model needs at least one score component");
        BasisSystem basis = make_fourier_basis(mc.order, mc.grid_size);
        field.emplace(basis, mu, mc.scores);
        H = H_gaussian_independent(model_components(mc));
        break;
      }
      case ModelKind::Tent: {
        BasisSystem basis = make_fourier_basis(1, mc.grid_size);
        tent_factor = basis.element(1);
        // population covariance of the tent field is e (x) e
        population = rank_one(*tent_factor, *tent_factor);
        break;
      }
      case ModelKind::TwoComponent: {
        field = two_component_model(mc.lambda, mc.grid_size);
        H = H_gaussian_independent(model_components(mc));
        break;
      }
    }
    if (field) population = population_operator(*field);
  }
};

/// Per-step simulation context: the design plus pre-factored samplers.
struct StepContext {
  PointSet points;                                   // design (with origin for xstar)
  bool with_origin = false;
  std::optional<ModelSamplers> samplers;             // Gaussian models
  const ModelObjects* model = nullptr;

  FunctionSample simulate(StreamKey rep_key) const {
    const auto& mo = *model;
    if (mo.tent_factor) return tent_field_sample(points, *mo.tent_factor, rep_key);
    return assemble_sample(*mo.field, points, *samplers, rep_key, with_origin);
  }
};

inline StepContext make_step_context(const ModelObjects& mo, PointSet pts, bool with_origin) {
  StepContext ctx;
  ctx.with_origin = with_origin;
  ctx.points = with_origin ? with_origin_appended(pts) : std::move(pts);
  ctx.model = &mo;
  if (mo.field) ctx.samplers.emplace(*mo.field, ctx.points);
  if (mo.tent_factor && ctx.points.dim != 1)
    throw config_error("the tent model requires a one-dimensional design");
  return ctx;
}

inline double replicate_loss(const StepContext& ctx, TargetKind target, bool centered,
                             StreamKey rep_key) {
  const FunctionSample sample = ctx.simulate(rep_key);
  const auto& mo = *ctx.model;
  switch (target) {
    case TargetKind::Mean:
      return mean_loss(sample, mo.mu);
    case TargetKind::Cov: {
      const KernelOperator est = centered ? cov_op_centered(sample) : cov_op_uncentered(sample);
      return cov_loss(est, *mo.population);
    }
    case TargetKind::Xstar:
      return xstar_loss(sample);
  }
  throw config_error("replicate_loss: unknown target");
}

inline std::vector<double> default_eps_grid(int d, Region r0) {
  const double hi = region_diameter(r0, d);
  const double lo = hi * 1e-4;
  const int n = 16;
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    grid[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return grid;
}

inline double default_kpp(const DesignConfig& dc) {
  const int d = design_dim(dc);
  const Region r0 = design_is_regular(dc) && dc.kind == DesignConfigKind::RegularGrid
                        ? dc.family.r0
                        : Region::Cube;
  return 2.0 * region_diameter(r0, d) * std::sqrt(static_cast<double>(d));
}

/// Fills the three bound columns applicable to this design / target.
inline void attach_bounds(McRow& row, const ExperimentConfig& cfg, const ModelObjects& mo,
                          const PointSet& pts, TargetKind target, StreamKey bkey) {
  if (target == TargetKind::Xstar) return;
  const DecayFunction* env = nullptr;
  if (target == TargetKind::Mean) {
    env = &mo.h;
  } else {
    if (!mo.H) return;  // no fourth-order envelope for non-Gaussian models
    env = &*mo.H;
  }

  const auto rho_grid =
      cfg.design.rho_grid.empty() ? default_rho_grid(pts) : cfg.design.rho_grid;
  {
    const auto r = detail::intensity_bound(target == TargetKind::Mean ? "prop5.1" : "prop6.1",
                                           *env, pts, rho_grid);
    row.bound1 = r.value;
  }
  if (design_is_regular(cfg.design)) {
    const double alpha = pts.meta.alpha.value_or(static_cast<double>(pts.size()));
    const double kpp = cfg.model.kpp.value_or(default_kpp(cfg.design));
    const auto r = detail::regular_design_bound(
        target == TargetKind::Mean ? "prop5.2" : "prop6.2", *env, design_dim(cfg.design),
        design_delta_geomean(cfg.design), alpha, static_cast<double>(pts.size()), kpp);
    row.bound2 = r.value;
  }
  if (cfg.design.kind == DesignConfigKind::Randomized) {
    const double alpha = pts.meta.alpha.value_or(1.0);
    const auto eps_grid = cfg.design.eps_grid.empty()
                              ? default_eps_grid(cfg.design.family.dim, cfg.design.family.r0)
                              : cfg.design.eps_grid;
    const double f_sup =
        cfg.design.family.density ? cfg.design.family.density->sup()
                                  : cfg.design.f_sup;
    const auto r = detail::random_design_bound(
        target == TargetKind::Mean ? "prop5.3" : "prop6.3", *env, cfg.design.family.r0,
        cfg.design.family.dim, f_sup, alpha, static_cast<double>(pts.size()), eps_grid,
        cfg.design.mc_n, bkey);
    row.bound3 = r.value;
  }
}

inline McReport run_mc(const ExperimentConfig& cfg, TargetKind target) {
  if (cfg.replicates < 1) throw config_error("replicates must be >= 1");
  if (cfg.ladder.empty()) throw config_error("ladder must be nonempty");
  for (std::size_t i = 1; i < cfg.ladder.size(); ++i)
    if (cfg.ladder[i] <= cfg.ladder[i - 1]) throw config_error("ladder must be increasing");

  const ModelObjects mo(cfg.model);
  const StreamKey root(cfg.seed);
  const int threads = resolve_threads(cfg.threads);
  const bool with_origin = target == TargetKind::Xstar;

  McReport report;
  for (std::size_t step = 0; step < cfg.ladder.size(); ++step) {
    const int n = static_cast<int>(cfg.ladder[step]);
    auto step_error = [n](const numeric_error& e) {
      return numeric_error("ladder step N=" + std::to_string(n) + ": " + e.what());
    };
    struct Prepared {
      PointSet pts;
      StepContext ctx;
    };
    Prepared prep = [&]() -> Prepared {
      try {
        PointSet pts = build_design(cfg.design, n, design_key(root, static_cast<int>(step)));
        StepContext ctx = make_step_context(mo, pts, with_origin);
        return Prepared{std::move(pts), std::move(ctx)};
      } catch (const numeric_error& e) {
        throw step_error(e);
      }
    }();
    const PointSet& pts = prep.pts;
    const StepContext& ctx = prep.ctx;

    McRow row;
    row.step = static_cast<double>(n);
    row.param = pts.meta.alpha.value_or(static_cast<double>(pts.size()));
    row.replicates = cfg.replicates;
    row.sample_size = ctx.points.size() - (with_origin ? 1 : 0);

    std::vector<LossRecord> losses(static_cast<std::size_t>(cfg.replicates));
    const auto loss_kind = target == TargetKind::Mean ? LossRecord::Kind::MeanL2Sq
                           : target == TargetKind::Cov
                               ? (cfg.model.centered ? LossRecord::Kind::CovCenteredHSSq
                                                     : LossRecord::Kind::CovHSSq)
                               : LossRecord::Kind::XstarHSSq;
    try {
      parallel_for(cfg.replicates, threads, [&](int rep) {
        const double v = replicate_loss(ctx, target, cfg.model.centered,
                                        replicate_key(root, static_cast<int>(step), rep));
        losses[static_cast<std::size_t>(rep)] =
            LossRecord{loss_kind, v, row.sample_size, ctx.points.meta.kind};
      });
    } catch (const numeric_error& e) {
      throw step_error(e);
    }

    double mean = 0.0;
    for (const auto& l : losses) mean += l.value;
    mean /= cfg.replicates;
    double var = 0.0;
    for (const auto& l : losses) var += (l.value - mean) * (l.value - mean);
    row.loss_mean = mean;
    row.loss_se =
        cfg.replicates > 1 ? std::sqrt(var / (cfg.replicates - 1)) / std::sqrt(double(cfg.replicates)) : 0.0;

    // bounds refer to the design points only, never the origin row
    attach_bounds(row, cfg, mo, pts, target, bound_key(root, static_cast<int>(step)));
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiments.
// ---------------------------------------------------------------------------

/// Monte Carlo estimate of E||X_bar - mu||^2 along the ladder, with the
/// applicable bounds attached per step.
inline McReport mc_mean_experiment(const ExperimentConfig& cfg) {
  return detail::run_mc(cfg, TargetKind::Mean);
}

/// Monte Carlo estimate of E||C_hat - C||_S^2 (or the centered variant).
inline McReport mc_cov_experiment(const ExperimentConfig& cfg) {
  if (cfg.model.kind == ModelKind::Tent && cfg.model.centered)
    throw config_error("centered covariance experiment is not defined for the tent model");
  return detail::run_mc(cfg, TargetKind::Cov);
}

/// Monte Carlo estimate of E||C_hat - X(0) (x) X(0)||_S^2 for designs whose
/// points approach the origin.
inline McReport mc_xstar_experiment(const ExperimentConfig& cfg) {
  if (cfg.model.kind == ModelKind::Tent)
    throw config_error("the x-star comparison needs a Gaussian score model");
  return detail::run_mc(cfg, TargetKind::Xstar);
}

/// Leading-EFPC replication bundle: unaligned first eigenfunctions plus the
/// per-replicate projection diagnostics.
struct Figure2Result {
  TimeGrid grid{TimeGrid::kDefaultSize};
  std::vector<Curve> v1;            // unaligned leading EFPC per replicate
  std::vector<Curve> v2;            // second EFPC per replicate
  std::vector<double> inner_f;      // |<v1, X(0)/||X(0)||>|
  std::vector<double> mass;         // <v1,e1>^2 + <v1,e2>^2
  std::vector<double> w1, w2;       // <v1,e1>, <v1,e2>
};

inline Figure2Result mc_efpc_experiment(const ExperimentConfig& cfg) {
  if (cfg.model.kind != ModelKind::TwoComponent)
    throw config_error("the EFPC replication experiment uses the two-component model");
  const int n = cfg.ladder.empty() ? 100 : static_cast<int>(cfg.ladder.back());
  const int reps = cfg.replicates;
  const StreamKey root(cfg.seed);
  const int threads = resolve_threads(cfg.threads);

  const detail::ModelObjects mo(cfg.model);
  PointSet pts = detail::build_design(cfg.design, n, detail::design_key(root, 0));
  const detail::StepContext ctx = detail::make_step_context(mo, pts, true);

  const auto& e1 = mo.field->basis.element(1);
  const auto& e2 = mo.field->basis.element(2);

  Figure2Result out;
  out.grid = mo.grid;
  out.v1.resize(static_cast<std::size_t>(reps), zero_curve(mo.grid));
  out.v2.resize(static_cast<std::size_t>(reps), zero_curve(mo.grid));
  out.inner_f.resize(static_cast<std::size_t>(reps));
  out.mass.resize(static_cast<std::size_t>(reps));
  out.w1.resize(static_cast<std::size_t>(reps));
  out.w2.resize(static_cast<std::size_t>(reps));

  parallel_for(reps, threads, [&](int rep) {
    const FunctionSample sample = ctx.simulate(detail::replicate_key(root, 0, rep));
    const KernelOperator c_hat = cov_op_uncentered(sample);
    const EigenSystem es = eigenpairs(c_hat, 2);
    const Curve& v1 = es.eigenfunctions.front();

    Curve x0 = sample.origin_curve();
    const double x0_norm = norm(x0);
    if (x0_norm < 1e-12) throw numeric_error("degenerate origin draw (||X(0)|| ~ 0)");
    const Curve f = scaled(x0, 1.0 / x0_norm);

    const std::size_t r = static_cast<std::size_t>(rep);
    out.v1[r] = v1;
    out.v2[r] = es.eigenfunctions[1];
    out.inner_f[r] = std::abs(inner(v1, f));
    out.w1[r] = inner(v1, e1);
    out.w2[r] = inner(v1, e2);
    out.mass[r] = out.w1[r] * out.w1[r] + out.w2[r] * out.w2[r];
  });
  return out;
}

}  // namespace spatfun
