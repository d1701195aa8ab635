#pragma once

#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spatfun/config.hpp"
#include "spatfun/mc.hpp"
#include "spatfun/report.hpp"
#include "spatfun/svg.hpp"

namespace spatfun {

/// Built-in configuration used when a subcommand runs without --config.
inline ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case ExperimentKind::McMean:
    case ExperimentKind::Rates:
      cfg.model.kind = ModelKind::Tent;
      cfg.design.kind = DesignConfigKind::EquispacedLine;
      cfg.design.family.growth = {GrowthKind::Power, 1.0};  // alpha_N = N
      cfg.ladder = {50, 100, 200, 400};
      cfg.replicates = 500;
      break;
    case ExperimentKind::McCov:
      cfg.model.kind = ModelKind::GaussianKL;
      cfg.model.grid_size = 64;
      cfg.model.order = 1;
      cfg.model.scores = {{1, CovFamily::exponential(1.0, 1.0)}};
      cfg.model.target = TargetKind::Cov;
      cfg.design.kind = DesignConfigKind::RegularGrid;
      cfg.design.family.kind = DesignKind::RegularGrid;
      cfg.design.family.growth = {GrowthKind::Power, 1.0};
      cfg.ladder = {50, 100, 200, 400};
      cfg.replicates = 500;
      break;
    case ExperimentKind::McXstar:
      cfg.model.kind = ModelKind::TwoComponent;
      cfg.model.grid_size = 64;
      cfg.model.target = TargetKind::Xstar;
      cfg.design.kind = DesignConfigKind::InverseIndex;
      cfg.ladder = {10, 50, 100};
      cfg.replicates = 200;
      break;
    case ExperimentKind::Figure2:
      cfg.model.kind = ModelKind::TwoComponent;
      cfg.model.lambda = 0.5;
      cfg.design.kind = DesignConfigKind::InverseIndex;
      cfg.ladder = {100};
      cfg.replicates = 10;
      break;
    case ExperimentKind::Bounds:
      cfg.model.kind = ModelKind::GaussianKL;
      cfg.model.grid_size = 64;
      cfg.model.order = 1;
      cfg.model.scores = {{1, CovFamily::exponential(1.0, 1.0)}};
      cfg.design.kind = DesignConfigKind::RegularGrid;
      cfg.design.family.kind = DesignKind::RegularGrid;
      cfg.design.family.growth = {GrowthKind::Power, 0.5};
      cfg.ladder = {100, 400, 1600};
      break;
    case ExperimentKind::Classify:
      cfg.design.kind = DesignConfigKind::Interleaved;
      cfg.ladder = {500};
      break;
    case ExperimentKind::Kriging:
      cfg.model.kind = ModelKind::GaussianKL;
      cfg.model.grid_size = 64;
      cfg.model.order = 1;
      cfg.model.scores = {{1, CovFamily::exponential(1.0, 1.0)}};
      cfg.design.kind = DesignConfigKind::EquispacedLine;
      cfg.design.family.growth = {GrowthKind::Power, 1.0};
      cfg.design.s0 = {2.5};
      cfg.ladder = {5};
      break;
  }
  return cfg;
}

namespace detail {

inline std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  namespace fs = std::filesystem;
  fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
  fs::create_directories(dir);
  return (dir / name).string();
}

inline void note(const std::string& path) { std::cout << "wrote " << path << "\n"; }

inline void write_mc_outputs(const ExperimentConfig& cfg, const McReport& report,
                             const std::string& stem) {
  const auto csv = out_path(cfg, stem + ".csv");
  write_mc_report(csv, report);
  note(csv);
  if (cfg.svg) {
    std::vector<SvgSeries> series;
    SvgSeries loss{"loss", {}, {}}, b1{"bound_5_1", {}, {}}, b2{"bound_5_2", {}, {}},
        b3{"bound_5_3", {}, {}};
    for (const auto& r : report.rows) {
      loss.xs.push_back(r.step);
      loss.ys.push_back(r.loss_mean);
      if (std::isfinite(r.bound1) && r.bound1 > 0) {
        b1.xs.push_back(r.step);
        b1.ys.push_back(r.bound1);
      }
      if (std::isfinite(r.bound2) && r.bound2 > 0) {
        b2.xs.push_back(r.step);
        b2.ys.push_back(r.bound2);
      }
      if (std::isfinite(r.bound3) && r.bound3 > 0) {
        b3.xs.push_back(r.step);
        b3.ys.push_back(r.bound3);
      }
    }
    series.push_back(loss);
    if (!b1.xs.empty()) series.push_back(b1);
    if (!b2.xs.empty()) series.push_back(b2);
    if (!b3.xs.empty()) series.push_back(b3);
    bool positive = true;
    for (const auto& s : series)
      for (double y : s.ys) positive = positive && y > 0.0;
    const auto svg = out_path(cfg, stem + ".svg");
    write_svg_lines(svg, stem, "N", "loss", series, true, positive);
    note(svg);
  }
}

inline void run_bounds_experiment(const ExperimentConfig& cfg) {
  const ModelObjects mo(cfg.model);
  const TargetKind target = cfg.model.target;
  if (target == TargetKind::Xstar) throw config_error("bounds experiment targets mean or cov");
  const DecayFunction* env = nullptr;
  if (target == TargetKind::Mean) {
    env = &mo.h;
  } else {
    if (!mo.H) throw config_error("no fourth-order envelope for this model (non-Gaussian)");
    env = &*mo.H;
  }

  const StreamKey root(cfg.seed);
  std::vector<BoundReport> reports;
  for (std::size_t step = 0; step < cfg.ladder.size(); ++step) {
    const int n = static_cast<int>(cfg.ladder[step]);
    PointSet pts = build_design(cfg.design, n, design_key(root, static_cast<int>(step)));
    const double alpha = pts.meta.alpha.value_or(static_cast<double>(pts.size()));
    auto annotate = [&](BoundReport r) {
      auto has = [&](const char* name) {
        for (const auto& [k, v] : r.constants)
          if (k == name) return true;
        return false;
      };
      r.constants.emplace_back("step", static_cast<double>(n));
      if (!has("alpha")) r.constants.emplace_back("alpha", alpha);
      reports.push_back(std::move(r));
    };

    const auto rho_grid = cfg.design.rho_grid.empty() ? default_rho_grid(pts) : cfg.design.rho_grid;
    annotate(intensity_bound(target == TargetKind::Mean ? "prop5.1" : "prop6.1", *env, pts,
                             rho_grid));
    if (design_is_regular(cfg.design)) {
      const double kpp = cfg.model.kpp.value_or(default_kpp(cfg.design));
      annotate(regular_design_bound(target == TargetKind::Mean ? "prop5.2" : "prop6.2", *env,
                                    design_dim(cfg.design), design_delta_geomean(cfg.design),
                                    alpha, static_cast<double>(pts.size()), kpp));
    }
    if (cfg.design.kind == DesignConfigKind::Randomized) {
      const auto eps_grid = cfg.design.eps_grid.empty()
                                ? default_eps_grid(cfg.design.family.dim, cfg.design.family.r0)
                                : cfg.design.eps_grid;
      const double f_sup = cfg.design.family.density
                               ? cfg.design.family.density->sup()
                               : cfg.design.f_sup;
      annotate(random_design_bound(target == TargetKind::Mean ? "prop5.3" : "prop6.3", *env,
                                   cfg.design.family.r0, cfg.design.family.dim, f_sup, alpha,
                                   static_cast<double>(pts.size()), eps_grid, cfg.design.mc_n,
                                   bound_key(root, static_cast<int>(step))));
    }
    if (target == TargetKind::Cov && cfg.model.delta && cfg.model.c_delta)
      annotate(bound_cov_centered(mo.h, *env, pts, rho_grid, *cfg.model.delta,
                                  *cfg.model.c_delta));
    if (cfg.model.kind == ModelKind::Tent && target == TargetKind::Mean &&
        cfg.design.kind == DesignConfigKind::EquispacedLine) {
      BoundReport r;
      r.which = "tent-exact";
      r.value = exact_tent_loss(n, alpha);
      annotate(std::move(r));
    }
  }
  const auto path = out_path(cfg, "bounds.csv");
  write_bound_reports(path, reports);
  note(path);
}

inline void run_classify_experiment(const ExperimentConfig& cfg) {
  const StreamKey root(cfg.seed);
  const int n = cfg.ladder.empty() ? 500 : static_cast<int>(cfg.ladder.back());
  PointSet pts = build_design(cfg.design, n, design_key(root, 0));
  const auto profile = intensity_profile(pts, default_rho_grid(pts));
  const auto profile_path = out_path(cfg, "intensity_profile.csv");
  write_intensity_profile(profile_path, profile);
  note(profile_path);

  if (cfg.design.kind == DesignConfigKind::RegularGrid ||
      cfg.design.kind == DesignConfigKind::Randomized) {
    const auto cls = classify_family(cfg.design.family);
    CsvWriter out(out_path(cfg, "classification.csv"));
    out.row({"kind", "type", "heuristic"});
    out.row({cfg.design.kind == DesignConfigKind::RegularGrid ? "regular-grid" : "randomized",
             sampling_type_name(cls.type), cls.heuristic ? "1" : "0"});
    note(out_path(cfg, "classification.csv"));
    std::cout << "analytic classification: " << sampling_type_name(cls.type)
              << (cls.heuristic ? " (heuristic)" : "") << "\n";
  } else {
    std::cout << "non-parametric point set: intensity profile only\n";
  }
}

inline void run_kriging_experiment(const ExperimentConfig& cfg) {
  if (cfg.model.kind != ModelKind::GaussianKL)
    throw config_error("kriging needs a gaussian-kl model with score components");
  const ModelObjects mo(cfg.model);
  const StreamKey root(cfg.seed);
  const int n = cfg.ladder.empty() ? 5 : static_cast<int>(cfg.ladder.back());
  PointSet pts = build_design(cfg.design, n, design_key(root, 0));
  std::vector<double> s0 = cfg.design.s0;
  if (s0.empty()) s0.assign(static_cast<std::size_t>(pts.dim), 0.0);
  const auto res = kriging_weights(*mo.field, pts, s0);
  const auto wpath = out_path(cfg, "kriging_weights.csv");
  const auto spath = out_path(cfg, "kriging_summary.csv");
  write_kriging(wpath, spath, res);
  note(wpath);
  note(spath);
  std::cout << "kriging mse: " << format_double(res.mse) << "\n";
}

inline void run_rates_experiment(const ExperimentConfig& cfg) {
  McReport report;
  std::string stem;
  switch (cfg.model.target) {
    case TargetKind::Mean:
      report = mc_mean_experiment(cfg);
      stem = "mc_mean";
      break;
    case TargetKind::Cov:
      report = mc_cov_experiment(cfg);
      stem = "mc_cov";
      break;
    case TargetKind::Xstar:
      report = mc_xstar_experiment(cfg);
      stem = "mc_xstar";
      break;
  }
  write_mc_outputs(cfg, report, stem);
  std::vector<double> xs, losses;
  for (const auto& r : report.rows) {
    xs.push_back(cfg.design.x_var == "alpha" ? r.param : r.step);
    losses.push_back(r.loss_mean);
  }
  const RateFit fit = rate_fit(xs, losses);
  const auto path = out_path(cfg, "rates.csv");
  write_rate_fit(path, cfg.design.x_var, fit);
  note(path);
  std::cout << "fitted slope " << format_double(fit.slope) << " (r2 " << format_double(fit.r2)
            << ")\n";
}

inline void run_figure2_experiment(const ExperimentConfig& cfg) {
  const Figure2Result res = mc_efpc_experiment(cfg);
  const auto curves_path = out_path(cfg, "efpc_curves.csv");
  write_efpc_bundle(curves_path, res.grid, res.v1);
  note(curves_path);
  const auto stats_path = out_path(cfg, "efpc_stats.csv");
  write_efpc_stats(stats_path, res);
  note(stats_path);
  if (!res.v1.empty()) {
    // per-component view of the first replicate's leading EFPCs
    const auto comp_path = out_path(cfg, "efpc_components.csv");
    write_efpc_components(comp_path, res.grid, {res.v1.front(), res.v2.front()});
    note(comp_path);
  }
  if (cfg.svg) {
    std::vector<SvgSeries> series;
    for (std::size_t r = 0; r < res.v1.size(); ++r) {
      SvgSeries s{"rep " + std::to_string(r + 1), {}, {}};
      for (int i = 0; i < res.grid.size(); ++i) {
        s.xs.push_back(res.grid.node(i));
        s.ys.push_back(res.v1[r].values[static_cast<std::size_t>(i)]);
      }
      series.push_back(std::move(s));
    }
    const auto svg_path = out_path(cfg, "efpc_curves.svg");
    write_svg_lines(svg_path, "replicated leading EFPCs", "t", "v1(t)", series);
    note(svg_path);
  }
}

inline void dispatch(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::McMean:
      write_mc_outputs(cfg, mc_mean_experiment(cfg), "mc_mean");
      break;
    case ExperimentKind::McCov:
      write_mc_outputs(cfg, mc_cov_experiment(cfg), "mc_cov");
      break;
    case ExperimentKind::McXstar:
      write_mc_outputs(cfg, mc_xstar_experiment(cfg), "mc_xstar");
      break;
    case ExperimentKind::Figure2:
      run_figure2_experiment(cfg);
      break;
    case ExperimentKind::Bounds:
      run_bounds_experiment(cfg);
      break;
    case ExperimentKind::Rates:
      run_rates_experiment(cfg);
      break;
    case ExperimentKind::Classify:
      run_classify_experiment(cfg);
      break;
    case ExperimentKind::Kriging:
      run_kriging_experiment(cfg);
      break;
  }
}

}  // namespace detail

/// Command-line entry point. Exit codes: 0 success, 2 configuration or usage
/// error, 3 numerical failure.
inline int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"simulation and estimation toolkit for spatially distributed functional data"};
  app.require_subcommand(1);

  struct SubState {
    ExperimentKind kind;
    CLI::App* cmd = nullptr;
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    std::string out_dir;
    bool svg = false;
  };

  const std::vector<std::pair<std::string, ExperimentKind>> kinds = {
      {"classify", ExperimentKind::Classify}, {"mc-mean", ExperimentKind::McMean},
      {"mc-cov", ExperimentKind::McCov},      {"mc-xstar", ExperimentKind::McXstar},
      {"figure2", ExperimentKind::Figure2},   {"bounds", ExperimentKind::Bounds},
      {"rates", ExperimentKind::Rates},       {"kriging", ExperimentKind::Kriging}};

  std::vector<std::unique_ptr<SubState>> subs;
  for (const auto& [name, kind] : kinds) {
    auto st = std::make_unique<SubState>();
    st->kind = kind;
    st->cmd = app.add_subcommand(name, "run the " + name + " experiment");
    st->cmd->add_option("--config", st->config_path, "experiment configuration (JSON)");
    auto* seed_opt = st->cmd->add_option("--seed", st->seed, "master seed (overrides config)");
    st->cmd->add_option("--threads", st->threads,
                        "worker threads (also SPATFUN_THREADS; 0 = auto)");
    st->cmd->add_option("--out", st->out_dir, "output directory");
    st->cmd->add_flag("--svg", st->svg, "also emit SVG line plots");
    seed_opt->each([st = st.get()](const std::string&) { st->seed_set = true; });
    subs.push_back(std::move(st));
  }

  std::vector<char*> argv;
  std::vector<std::string> storage;
  storage.emplace_back("spatfun");
  for (const auto& a : args) storage.push_back(a);
  argv.reserve(storage.size());
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const SubState* active = nullptr;
  for (const auto& st : subs)
    if (st->cmd->parsed()) active = st.get();
  if (!active) {
    std::cerr << "error: no subcommand given\n";
    return 2;
  }

  try {
    ExperimentConfig cfg = active->config_path.empty() ? default_config(active->kind)
                                                       : load_config(active->config_path);
    if (!active->config_path.empty() && cfg.kind != active->kind)
      throw config_error(std::string("config file runs \"") +
                         detail::experiment_kind_name(cfg.kind) +
                         "\" but the subcommand asks for something else");
    cfg.kind = active->kind;
    if (active->seed_set) cfg.seed = active->seed;
    if (active->threads > 0) cfg.threads = active->threads;
    if (!active->out_dir.empty()) cfg.out_dir = active->out_dir;
    if (active->svg) cfg.svg = true;
    detail::dispatch(cfg);
    return 0;
  } catch (const config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace spatfun
