#pragma once

#include <string>
#include <vector>

#include "spatfun/bounds.hpp"
#include "spatfun/csv.hpp"
#include "spatfun/designs.hpp"
#include "spatfun/estimators.hpp"
#include "spatfun/grid.hpp"
#include "spatfun/mc.hpp"

namespace spatfun {

/// Pinned Monte Carlo report schema. The three bound columns hold the
/// general / regular-design / randomized-design bound values for the
/// experiment's loss (empty slots are written as nan).
inline void write_mc_report(const std::string& path, const McReport& report) {
  CsvWriter out(path);
  out.row({"step", "param", "loss_mean", "loss_se", "bound_5_1", "bound_5_2", "bound_5_3",
           "replicates"});
  for (const auto& r : report.rows)
    out.row({format_double(r.step), format_double(r.param), format_double(r.loss_mean),
             format_double(r.loss_se), format_double(r.bound1), format_double(r.bound2),
             format_double(r.bound3), std::to_string(r.replicates)});
}

inline void write_intensity_profile(const std::string& path, const IntensityProfile& profile) {
  CsvWriter out(path);
  out.row({"rho", "intensity"});
  for (std::size_t i = 0; i < profile.radii.size(); ++i)
    out.row({format_double(profile.radii[i]), format_double(profile.values[i])});
}

inline void write_bound_reports(const std::string& path, const std::vector<BoundReport>& reports) {
  CsvWriter out(path);
  out.row({"which", "value", "chosen", "constants"});
  for (const auto& r : reports) {
    std::string consts;
    for (const auto& [k, v] : r.constants) {
      if (!consts.empty()) consts += ';';
      consts += k + "=" + format_double(v);
    }
    if (r.warning) {
      if (!consts.empty()) consts += ';';
      consts += "warning";
    }
    out.row({r.which, format_double(r.value),
             r.chosen ? format_double(*r.chosen) : std::string("nan"), consts});
  }
}

/// Replicated leading-EFPC curves, one column per replicate.
inline void write_efpc_bundle(const std::string& path, const TimeGrid& grid,
                              const std::vector<Curve>& curves) {
  CsvWriter out(path);
  std::vector<std::string> header{"t"};
  for (std::size_t r = 0; r < curves.size(); ++r)
    header.push_back("v1_rep" + std::to_string(r + 1));
  out.row(header);
  for (int i = 0; i < grid.size(); ++i) {
    std::vector<std::string> cells{format_double(grid.node(i))};
    for (const auto& c : curves) cells.push_back(format_double(c.values[static_cast<std::size_t>(i)]));
    out.row(cells);
  }
}

/// EFPC component curves, one column per component.
inline void write_efpc_components(const std::string& path, const TimeGrid& grid,
                                  const std::vector<Curve>& components) {
  CsvWriter out(path);
  std::vector<std::string> header{"t"};
  for (std::size_t j = 0; j < components.size(); ++j)
    header.push_back("v" + std::to_string(j + 1));
  out.row(header);
  for (int i = 0; i < grid.size(); ++i) {
    std::vector<std::string> cells{format_double(grid.node(i))};
    for (const auto& c : components)
      cells.push_back(format_double(c.values[static_cast<std::size_t>(i)]));
    out.row(cells);
  }
}

inline void write_efpc_stats(const std::string& path, const Figure2Result& res) {
  CsvWriter out(path);
  out.row({"rep", "abs_inner_f", "projection_mass", "w1", "w2"});
  for (std::size_t r = 0; r < res.v1.size(); ++r)
    out.row({std::to_string(r + 1), format_double(res.inner_f[r]), format_double(res.mass[r]),
             format_double(res.w1[r]), format_double(res.w2[r])});
}

inline void write_rate_fit(const std::string& path, const std::string& x_var, const RateFit& fit) {
  CsvWriter out(path);
  out.row({"x_var", "slope", "intercept", "r2"});
  out.row({x_var, format_double(fit.slope), format_double(fit.intercept), format_double(fit.r2)});
}

/// Raw simulated curves: N rows, T columns, no header.
inline void write_sample_csv(const std::string& path, const FunctionSample& sample) {
  CsvWriter out(path);
  std::vector<std::string> cells(static_cast<std::size_t>(sample.grid.size()));
  for (int k = 0; k < sample.points.size(); ++k) {
    const double* row = sample.values.row(static_cast<std::size_t>(k));
    for (int i = 0; i < sample.grid.size(); ++i)
      cells[static_cast<std::size_t>(i)] = format_double(row[static_cast<std::size_t>(i)]);
    out.row(cells);
  }
}

inline void write_kriging(const std::string& weights_path, const std::string& summary_path,
                          const KrigingResult& res) {
  {
    CsvWriter out(weights_path);
    out.row({"k", "weight"});
    for (std::size_t k = 0; k < res.weights.size(); ++k)
      out.row({std::to_string(k + 1), format_double(res.weights[k])});
  }
  {
    CsvWriter out(summary_path);
    out.row({"mse", "jitter", "n"});
    out.row({format_double(res.mse), format_double(res.jitter),
             std::to_string(res.weights.size())});
  }
}

}  // namespace spatfun
