#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spatfun/errors.hpp"
#include "spatfun/mc.hpp"

namespace spatfun {

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw config_error("unknown key \"" + it.key() + "\" in " + where);
}

inline double get_number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.at(key).is_number())
    throw config_error("\"" + key + "\" in " + where + " must be a number");
  return obj.at(key).get<double>();
}

inline CovFamily parse_component(const json& j, const std::string& where) {
  if (!j.is_object()) throw config_error(where + " entries must be objects");
  reject_unknown_keys(j, {"family", "index", "sigma2", "rho", "p", "nu", "scale"}, where);
  const std::string family = j.value("family", std::string{});
  const double sigma2 = j.value("sigma2", 1.0);
  const double rho = j.value("rho", 1.0);
  try {
    if (family == "exponential") return CovFamily::exponential(sigma2, rho);
    if (family == "powered-exponential")
      return CovFamily::powered_exponential(sigma2, rho, j.value("p", 1.0));
    if (family == "matern") return CovFamily::matern(sigma2, rho, j.value("nu", 0.5));
    if (family == "spherical") return CovFamily::spherical(sigma2, rho);
    if (family == "rational-quadratic") return CovFamily::rational_quadratic(sigma2, rho);
    if (family == "tent") return CovFamily::tent();
    if (family == "squared-exponential")
      return CovFamily::squared_exponential(sigma2, j.value("scale", 1.0));
  } catch (const std::invalid_argument& e) {
    throw config_error(where + ": " + e.what());
  }
  throw config_error("unknown covariance family \"" + family + "\" in " + where);
}

inline ModelConfig parse_model(const json& j) {
  ModelConfig mc;
  if (j.is_null()) return mc;
  if (!j.is_object()) throw config_error("\"model\" must be an object");
  reject_unknown_keys(j,
                      {"kind", "T", "J", "components", "lambda", "target", "centered", "delta",
                       "c_delta", "kpp"},
                      "model");
  const std::string kind = j.value("kind", std::string("tent"));
  if (kind == "gaussian-kl") {
    mc.kind = ModelKind::GaussianKL;
  } else if (kind == "tent") {
    mc.kind = ModelKind::Tent;
  } else if (kind == "two-component") {
    mc.kind = ModelKind::TwoComponent;
  } else {
    throw config_error("unknown model kind \"" + kind + "\"");
  }
  mc.grid_size = j.value("T", TimeGrid::kDefaultSize);
  mc.order = j.value("J", 20);
  mc.lambda = j.value("lambda", 0.5);
  if (j.contains("components")) {
    if (!j.at("components").is_array()) throw config_error("\"model.components\" must be an array");
    int auto_index = 0;
    for (const auto& cj : j.at("components")) {
      ++auto_index;
      const int index = cj.is_object() ? cj.value("index", auto_index) : auto_index;
      mc.scores.push_back({index, parse_component(cj, "model.components")});
    }
  }
  const std::string target = j.value("target", std::string("mean"));
  if (target == "mean") mc.target = TargetKind::Mean;
  else if (target == "cov") mc.target = TargetKind::Cov;
  else if (target == "xstar") mc.target = TargetKind::Xstar;
  else throw config_error("unknown target \"" + target + "\" (use mean, cov or xstar)");
  mc.centered = j.value("centered", false);
  if (j.contains("delta")) mc.delta = get_number(j, "delta", "model");
  if (j.contains("c_delta")) mc.c_delta = get_number(j, "c_delta", "model");
  if (j.contains("kpp")) mc.kpp = get_number(j, "kpp", "model");
  return mc;
}

inline GrowthSpec parse_growth(const json& j) {
  GrowthSpec g;
  if (!j.is_object()) throw config_error("\"design.growth\" must be an object");
  reject_unknown_keys(j, {"kind", "value"}, "design.growth");
  const std::string kind = j.value("kind", std::string("bounded"));
  if (kind == "bounded") g.kind = GrowthKind::Bounded;
  else if (kind == "power") g.kind = GrowthKind::Power;
  else if (kind == "power-log") g.kind = GrowthKind::PowerLog;
  else throw config_error("unknown growth kind \"" + kind + "\"");
  g.value = j.value("value", 1.0);
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("design.growth: ") + e.what());
  }
  return g;
}

inline DesignConfig parse_design(const json& j) {
  DesignConfig dc;
  if (j.is_null()) return dc;
  if (!j.is_object()) throw config_error("\"design\" must be an object");
  reject_unknown_keys(j,
                      {"kind", "d", "r0", "delta", "growth", "density", "csv", "s0", "x_var",
                       "rho_grid", "eps_grid", "mc_n", "f_sup"},
                      "design");
  const std::string kind = j.value("kind", std::string("equispaced-line"));
  if (kind == "regular-grid") dc.kind = DesignConfigKind::RegularGrid;
  else if (kind == "randomized") dc.kind = DesignConfigKind::Randomized;
  else if (kind == "equispaced-line") dc.kind = DesignConfigKind::EquispacedLine;
  else if (kind == "inverse-index") dc.kind = DesignConfigKind::InverseIndex;
  else if (kind == "interleaved") dc.kind = DesignConfigKind::Interleaved;
  else if (kind == "coincident") dc.kind = DesignConfigKind::Coincident;
  else if (kind == "points-csv") dc.kind = DesignConfigKind::PointsCsv;
  else throw config_error("unknown design kind \"" + kind + "\"");

  dc.family.kind = dc.kind == DesignConfigKind::Randomized ? DesignKind::Randomized
                                                           : DesignKind::RegularGrid;
  dc.family.dim = j.value("d", 1);
  const std::string r0 = j.value("r0", std::string("cube"));
  if (r0 == "cube") dc.family.r0 = Region::Cube;
  else if (r0 == "ball") dc.family.r0 = Region::Ball;
  else throw config_error("unknown region \"" + r0 + "\" (use cube or ball)");

  if (j.contains("delta")) {
    const auto& dj = j.at("delta");
    if (dj.is_number()) {
      dc.family.delta = {dj.get<double>()};
    } else if (dj.is_array()) {
      dc.family.delta = dj.get<std::vector<double>>();
    } else {
      throw config_error("\"design.delta\" must be a number or an array");
    }
  } else {
    dc.family.delta.assign(static_cast<std::size_t>(dc.family.dim), 1.0);
  }
  if (j.contains("growth")) dc.family.growth = parse_growth(j.at("growth"));
  if (j.contains("density")) {
    const auto& den = j.at("density");
    reject_unknown_keys(den, {"cells_per_dim", "weights"}, "design.density");
    GridDensity g;
    g.cells_per_dim = den.value("cells_per_dim", 1);
    g.weights = den.value("weights", std::vector<double>{});
    dc.family.density = g;
  }
  dc.csv_path = j.value("csv", std::string{});
  if (dc.kind == DesignConfigKind::PointsCsv && dc.csv_path.empty())
    throw config_error("points-csv design needs a \"csv\" path");
  if (j.contains("s0")) dc.s0 = j.at("s0").get<std::vector<double>>();
  dc.x_var = j.value("x_var", std::string("N"));
  if (dc.x_var != "N" && dc.x_var != "alpha")
    throw config_error("design.x_var must be \"N\" or \"alpha\"");
  if (j.contains("rho_grid")) dc.rho_grid = j.at("rho_grid").get<std::vector<double>>();
  if (j.contains("eps_grid")) dc.eps_grid = j.at("eps_grid").get<std::vector<double>>();
  dc.mc_n = j.value("mc_n", 100000);
  dc.f_sup = j.value("f_sup", 1.0);
  try {
    if (dc.kind == DesignConfigKind::RegularGrid || dc.kind == DesignConfigKind::Randomized)
      dc.family.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("design: ") + e.what());
  }
  return dc;
}

inline ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "mc-mean") return ExperimentKind::McMean;
  if (name == "mc-cov") return ExperimentKind::McCov;
  if (name == "mc-xstar") return ExperimentKind::McXstar;
  if (name == "figure2" || name == "mc-efpc") return ExperimentKind::Figure2;
  if (name == "bounds") return ExperimentKind::Bounds;
  if (name == "rates") return ExperimentKind::Rates;
  if (name == "classify") return ExperimentKind::Classify;
  if (name == "kriging") return ExperimentKind::Kriging;
  throw config_error("unknown experiment \"" + name + "\"");
}

inline const char* experiment_kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::McMean: return "mc-mean";
    case ExperimentKind::McCov: return "mc-cov";
    case ExperimentKind::McXstar: return "mc-xstar";
    case ExperimentKind::Figure2: return "figure2";
    case ExperimentKind::Bounds: return "bounds";
    case ExperimentKind::Rates: return "rates";
    case ExperimentKind::Classify: return "classify";
    case ExperimentKind::Kriging: return "kriging";
  }
  return "?";
}

}  // namespace detail

/// Parses an experiment configuration. Top-level keys are exactly
/// "experiment", "model", "design", "ladder", "replicates", "seed";
/// anything else is rejected.
inline ExperimentConfig parse_config_json(const detail::json& j) {
  if (!j.is_object()) throw config_error("config root must be a JSON object");
  detail::reject_unknown_keys(j, {"experiment", "model", "design", "ladder", "replicates", "seed"},
                              "config");
  if (!j.contains("experiment")) throw config_error("config needs an \"experiment\" key");

  ExperimentConfig cfg;
  cfg.kind = detail::parse_experiment_kind(j.at("experiment").get<std::string>());
  cfg.model = detail::parse_model(j.contains("model") ? j.at("model") : detail::json{});
  cfg.design = detail::parse_design(j.contains("design") ? j.at("design") : detail::json{});
  if (j.contains("ladder")) {
    cfg.ladder = j.at("ladder").get<std::vector<double>>();
    if (cfg.ladder.empty()) throw config_error("ladder must be nonempty");
    for (std::size_t i = 0; i < cfg.ladder.size(); ++i) {
      if (cfg.ladder[i] < 1) throw config_error("ladder values must be >= 1");
      if (i > 0 && cfg.ladder[i] <= cfg.ladder[i - 1])
        throw config_error("ladder must be strictly increasing");
    }
  }
  if (j.contains("replicates")) {
    cfg.replicates = j.at("replicates").get<int>();
    if (cfg.replicates < 1) throw config_error("replicates must be >= 1");
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  detail::json j;
  try {
    in >> j;
  } catch (const detail::json::parse_error& e) {
    throw config_error("config parse error in " + path + ": " + e.what());
  }
  return parse_config_json(j);
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  detail::json j;
  try {
    j = detail::json::parse(text);
  } catch (const detail::json::parse_error& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  return parse_config_json(j);
}

}  // namespace spatfun
