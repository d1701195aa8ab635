// Acceptance suite: one pass/fail line per criterion. Exits nonzero when any
// criterion fails. An optional integer argument restricts the run to a single
// criterion.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "spatfun/cli.hpp"
#include "spatfun/spatfun.hpp"

#include "oracles.hpp"

using namespace spatfun;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) { return format_double(v); }

// --- criterion 1: exact tent loss vs brute force, and vs Monte Carlo -------

Outcome criterion1() {
  Outcome out;
  for (int n = 2; n <= 50 && out.pass; ++n)
    for (double alpha : {0.5, 1.0, 2.0, 5.0}) {
      const double exact = exact_tent_loss(n, alpha);
      const double brute = oracles::tent_loss_double_sum(n, alpha);
      out.check(std::abs(exact - brute) <= 1e-12,
                "mismatch at N=" + std::to_string(n) + " alpha=" + fmt(alpha));
    }

  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::McMean;
  cfg.model.kind = ModelKind::Tent;
  cfg.model.grid_size = 64;
  cfg.design.kind = DesignConfigKind::EquispacedLine;
  cfg.design.family.growth = {GrowthKind::Power, 1.0};
  cfg.ladder = {100};
  cfg.replicates = 2000;
  cfg.seed = 101;
  const auto report = mc_mean_experiment(cfg);
  const double oracle = exact_tent_loss(100, 100.0);  // exactly 0.01
  out.check(std::abs(oracle - 0.01) < 1e-15, "oracle is not exactly 1/N");
  out.check(std::abs(report.rows[0].loss_mean - oracle) <= 3.0 * report.rows[0].loss_se,
            "MC " + fmt(report.rows[0].loss_mean) + " vs oracle 0.01 (se " +
                fmt(report.rows[0].loss_se) + ")");
  if (out.detail.empty())
    out.detail = "MC " + fmt(report.rows[0].loss_mean) + " ~ 0.01 within 3 SE";
  return out;
}

// --- criterion 2: tent model slope under alpha_N = N ------------------------

Outcome criterion2() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::McMean;
  cfg.model.kind = ModelKind::Tent;
  cfg.model.grid_size = 64;
  cfg.design.kind = DesignConfigKind::EquispacedLine;
  cfg.design.family.growth = {GrowthKind::Power, 1.0};
  cfg.ladder = {50, 100, 200, 400};
  cfg.replicates = 2000;
  cfg.seed = 202;
  const auto report = mc_mean_experiment(cfg);
  std::vector<double> xs, losses;
  for (const auto& r : report.rows) {
    xs.push_back(r.step);
    losses.push_back(r.loss_mean);
  }
  const auto fit = rate_fit(xs, losses);
  out.check(fit.slope >= -1.1 && fit.slope <= -0.9, "slope " + fmt(fit.slope));
  out.detail = "slope " + fmt(fit.slope) + " (r2 " + fmt(fit.r2) + ")";
  return out;
}

// --- criteria 3 & 4: exponential model on a slow-growing grid ---------------

ExperimentConfig type_b_mean_config() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::McMean;
  cfg.model.kind = ModelKind::GaussianKL;
  cfg.model.grid_size = 32;
  cfg.model.order = 1;
  cfg.model.scores = {{1, CovFamily::exponential(1.0, 1.0)}};
  cfg.design.kind = DesignConfigKind::RegularGrid;
  cfg.design.family.kind = DesignKind::RegularGrid;
  cfg.design.family.dim = 1;
  cfg.design.family.growth = {GrowthKind::Power, 0.5};
  cfg.ladder = {100, 200, 400, 800, 1600};
  return cfg;
}

Outcome criterion3() {
  Outcome out;
  auto cfg = type_b_mean_config();
  cfg.replicates = 600;
  cfg.seed = 303;
  const auto report = mc_mean_experiment(cfg);
  std::vector<double> alphas, losses;
  for (const auto& r : report.rows) {
    alphas.push_back(r.param);
    losses.push_back(r.loss_mean);
  }
  const auto fit = rate_fit(alphas, losses);
  out.check(fit.slope >= -1.3 && fit.slope <= -0.7, "slope " + fmt(fit.slope));
  out.detail = "loss ~ alpha^" + fmt(fit.slope) + " (r2 " + fmt(fit.r2) + ")";
  return out;
}

Outcome criterion4() {
  Outcome out;
  auto cfg = type_b_mean_config();
  cfg.replicates = 200;
  int dominated = 0;
  const int batches = 20;
  for (int b = 0; b < batches; ++b) {
    cfg.seed = 1000 + static_cast<std::uint64_t>(b);
    const auto report = mc_mean_experiment(cfg);
    bool all_steps = true;
    for (const auto& r : report.rows)
      all_steps = all_steps && r.loss_mean <= r.bound1 && r.loss_mean <= r.bound2;
    if (all_steps) ++dominated;
  }
  out.check(dominated >= 19, "only " + std::to_string(dominated) + "/20 batches dominated");
  out.detail = std::to_string(dominated) + "/20 batches dominated by both bounds";
  return out;
}

// --- criterion 5: covariance-operator consistency under fast growth ---------

Outcome criterion5() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::McCov;
  cfg.model.kind = ModelKind::GaussianKL;
  cfg.model.grid_size = 32;
  cfg.model.order = 1;
  cfg.model.scores = {{1, CovFamily::exponential(1.0, 1.0)}};
  cfg.model.target = TargetKind::Cov;
  cfg.design.kind = DesignConfigKind::RegularGrid;
  cfg.design.family.kind = DesignKind::RegularGrid;
  cfg.design.family.dim = 1;
  cfg.design.family.growth = {GrowthKind::Power, 1.0};  // type C
  cfg.ladder = {50, 100, 200, 400};
  cfg.replicates = 400;
  cfg.seed = 505;
  const auto report = mc_cov_experiment(cfg);

  std::vector<double> ns, losses, fitted_constants;
  for (const auto& r : report.rows) {
    ns.push_back(r.step);
    losses.push_back(r.loss_mean);
    fitted_constants.push_back(r.bound1 / (1.0 / r.param + 1.0 / r.sample_size));
  }
  const auto fit = rate_fit(ns, losses);
  out.check(fit.slope >= -1.2 && fit.slope <= -0.8, "slope " + fmt(fit.slope));
  const double lo = *std::min_element(fitted_constants.begin(), fitted_constants.end());
  const double hi = *std::max_element(fitted_constants.begin(), fitted_constants.end());
  out.check(hi / lo <= 2.0, "scaling constant drifts by " + fmt(hi / lo));
  out.detail = "slope " + fmt(fit.slope) + ", bound/(alpha^-1 + N^-1) drift " + fmt(hi / lo);
  return out;
}

// --- criterion 6: EFPC inconsistency replication -----------------------------

Outcome criterion6() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Figure2;
  cfg.model.kind = ModelKind::TwoComponent;
  cfg.model.grid_size = 256;
  cfg.model.lambda = 0.5;
  cfg.design.kind = DesignConfigKind::InverseIndex;
  cfg.ladder = {100};
  cfg.replicates = 10;
  cfg.seed = 2;
  const auto res = mc_efpc_experiment(cfg);

  double inner_sum = 0.0, w1_mean = 0.0;
  for (std::size_t r = 0; r < res.v1.size(); ++r) {
    out.check(res.mass[r] > 0.99, "projection mass " + fmt(res.mass[r]) + " at replicate " +
                                      std::to_string(r + 1));
    inner_sum += res.inner_f[r];
    w1_mean += res.w1[r];
  }
  const double inner_mean = inner_sum / 10.0;
  w1_mean /= 10.0;
  double w1_var = 0.0;
  for (double w : res.w1) w1_var += (w - w1_mean) * (w - w1_mean);
  const double w1_sd = std::sqrt(w1_var / 9.0);
  out.check(inner_mean > 0.99, "mean |<v1, f>| " + fmt(inner_mean));
  out.check(w1_sd > 0.05, "replicate spread of <v1, e1> " + fmt(w1_sd));

  ExperimentConfig xcfg;
  xcfg.kind = ExperimentKind::McXstar;
  xcfg.model.kind = ModelKind::TwoComponent;
  xcfg.model.grid_size = 64;
  xcfg.model.lambda = 0.5;
  xcfg.model.target = TargetKind::Xstar;
  xcfg.design.kind = DesignConfigKind::InverseIndex;
  xcfg.ladder = {10, 100};
  xcfg.replicates = 300;
  xcfg.seed = 607;
  const auto xreport = mc_xstar_experiment(xcfg);
  const double ratio = xreport.rows[1].loss_mean / xreport.rows[0].loss_mean;
  out.check(ratio < 0.5, "x-star loss ratio " + fmt(ratio));
  if (out.pass)
    out.detail = "mean |<v1,f>| " + fmt(inner_mean) + ", sd<v1,e1> " + fmt(w1_sd) +
                 ", x-star ratio " + fmt(ratio);
  return out;
}

// --- criterion 7: gaussian fourth-moment oracle ------------------------------

Outcome criterion7() {
  Outcome out;
  StreamKey root(707);
  for (int trial = 0; trial < 10; ++trial) {
    auto prng = root.child(trial).engine();
    const double sigma = 0.5 + 2.0 * uniform01(prng);
    const double nu = 0.5 + 2.0 * uniform01(prng);
    const double rho = 2.0 * uniform01(prng) - 1.0;
    const double expected = gaussian_sq_cov(sigma, nu, rho);

    const int n = 1000000;
    auto mc = root.child(100 + trial).engine();
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z1 = normal_draw(mc), z2 = normal_draw(mc);
      const double x = sigma * z1;
      const double y = nu * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2);
      const double d = (x * x - sigma * sigma) * (y * y - nu * nu);
      sum += d;
      sumsq += d * d;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / (n - 1));
    out.check(std::abs(mean - expected) <= 3.0 * se,
              "triple " + std::to_string(trial) + ": " + fmt(mean) + " vs " + fmt(expected));
  }
  if (out.pass) out.detail = "10 random (sigma, nu, rho) triples within 3 SE";
  return out;
}

// --- criterion 8: f(lambda) endpoints and the Isserlis oracle ----------------

Outcome criterion8() {
  Outcome out;
  out.check(std::abs(f_lambda(0.0) - 0.17157) <= 1e-4, "f(0) = " + fmt(f_lambda(0.0)));
  out.check(std::abs(f_lambda(1.0) - 0.68629) <= 1e-4, "f(1) = " + fmt(f_lambda(1.0)));

  StreamKey root(808);
  int trial = 0;
  for (double lambda : {0.0, 0.5, 1.0}) {
    for (double r : {0.2, 0.8}) {
      const double expected = kappa_isserlis_two_component(lambda, r);
      const int n = 400000;
      auto mc = root.child(trial++).engine();
      const double lam[2] = {1.0, lambda};
      double sum = 0.0, sumsq = 0.0;
      for (int m = 0; m < n; ++m) {
        double a[2], b[2];
        for (int j = 0; j < 2; ++j) {
          const double z1 = normal_draw(mc), z2 = normal_draw(mc);
          a[j] = std::sqrt(lam[j]) * z1;
          b[j] = std::sqrt(lam[j]) * (r * z1 + std::sqrt(1.0 - r * r) * z2);
        }
        double t = 0.0;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            const double mean_ij = (i == j) ? lam[i] : 0.0;
            t += (a[i] * a[j] - mean_ij) * (b[i] * b[j] - mean_ij);
          }
        sum += t;
        sumsq += t * t;
      }
      const double mean = sum / n;
      const double se = std::sqrt((sumsq / n - mean * mean) / (n - 1));
      out.check(std::abs(mean - expected) <= 3.0 * std::max(se, 1e-12),
                "kappa(" + fmt(lambda) + ", " + fmt(r) + ") = " + fmt(mean) + " vs " +
                    fmt(expected));
    }
  }
  if (out.pass) out.detail = "endpoints exact, 6 (lambda, r) pairs within 3 SE";
  return out;
}

// --- criterion 9: perturbation bound certification ---------------------------

Outcome criterion9() {
  Outcome out;
  TimeGrid grid(16);
  const int t = grid.size();
  const int d = 3;
  StreamKey root(909);
  int held = 0, total = 0;
  double worst_resid = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    auto rng = root.child(rep).engine();
    std::vector<double> lambdas(static_cast<std::size_t>(t));
    double acc = 1.0 + uniform01(rng);
    for (int j = t - 1; j >= 0; --j) {
      lambdas[static_cast<std::size_t>(j)] = acc;
      acc += 0.05 + 0.4 * uniform01(rng);
    }
    const auto frame_op = oracles::random_symmetric_operator(grid, root.child(1000 + rep));
    const auto frame = eigenpairs(frame_op, t);
    KernelOperator ref = KernelOperator::zero(grid);
    for (int j = 0; j < t; ++j)
      ref = linear_combination(1.0, ref, lambdas[static_cast<std::size_t>(j)],
                               rank_one(frame.eigenfunctions[static_cast<std::size_t>(j)],
                                        frame.eigenfunctions[static_cast<std::size_t>(j)]));
    auto noise = oracles::random_symmetric_operator(grid, root.child(2000 + rep));
    const double eps = 0.005 + 0.015 * uniform01(rng);
    noise = linear_combination(eps / hs_norm(noise), noise, 0.0, noise);
    const auto pert = linear_combination(1.0, ref, 1.0, noise);

    const auto es_ref = eigenpairs(ref, t);
    const auto es_pert = eigenpairs(pert, t);
    const double dist = std::sqrt(hs_dist_sq(pert, ref));

    for (int j = 1; j <= d; ++j) {
      const Curve& u = es_pert.eigenfunctions[static_cast<std::size_t>(j - 1)];
      const Curve aligned = sign_align(es_ref.eigenfunctions[static_cast<std::size_t>(j - 1)], u);
      const double err = norm(axpy(u, -1.0, aligned));
      const double bound = efpc_error_bound(es_ref, dist, j, d);
      ++total;
      if (err <= bound) ++held;
    }

    // reconstruction residuals for both decompositions
    for (const auto* pair : {&es_ref, &es_pert}) {
      const auto& source = (pair == &es_ref) ? ref : pert;
      KernelOperator recon = KernelOperator::zero(grid);
      for (int j = 0; j < t; ++j)
        recon = linear_combination(1.0, recon, pair->eigenvalues[static_cast<std::size_t>(j)],
                                   rank_one(pair->eigenfunctions[static_cast<std::size_t>(j)],
                                            pair->eigenfunctions[static_cast<std::size_t>(j)]));
      worst_resid = std::max(worst_resid,
                             std::sqrt(hs_dist_sq(source, recon)) / std::max(1.0, hs_norm(source)));
    }
  }
  out.check(held == total,
            std::to_string(held) + "/" + std::to_string(total) + " bound certifications");
  out.check(worst_resid <= 1e-8, "worst reconstruction residual " + fmt(worst_resid));
  out.detail = std::to_string(held) + "/" + std::to_string(total) +
               " held, worst residual " + fmt(worst_resid);
  return out;
}

// --- criterion 10: design taxonomy -------------------------------------------

Outcome criterion10() {
  Outcome out;
  const int n = 500;
  const auto full = interleaved_cluster_points(n);
  const double i1 = intensity(full, 1.0);
  out.check(i1 >= 0.45 && i1 <= 0.55, "interleaved intensity " + fmt(i1));

  std::vector<double> spread(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) spread[static_cast<std::size_t>(k - 1)] = k;
  const auto odd = points_on_line(std::move(spread));
  const double i1_odd = intensity(odd, 1.0);
  out.check(i1_odd <= 1.5 * 3.0 / n, "spread subsample intensity " + fmt(i1_odd));

  int correct = 0;
  for (int d : {1, 2, 3}) {
    DesignFamilySpec spec;
    spec.kind = DesignKind::RegularGrid;
    spec.dim = d;
    spec.delta.assign(static_cast<std::size_t>(d), 1.0);
    spec.growth = {GrowthKind::Bounded, 2.0};
    if (classify_family(spec).type == SamplingType::TypeA) ++correct;
    spec.growth = {GrowthKind::Power, 0.5 / d};
    if (classify_family(spec).type == SamplingType::TypeB) ++correct;
    spec.growth = {GrowthKind::Power, 1.0 / d};
    if (classify_family(spec).type == SamplingType::TypeC) ++correct;
  }
  out.check(correct == 9, "only " + std::to_string(correct) + "/9 classifications correct");
  if (out.pass)
    out.detail = "I1 " + fmt(i1) + " (clustered) vs " + fmt(i1_odd) +
                 " (spread), 9/9 classifications";
  return out;
}

// --- criterion 11: inconsistency lower bound across regimes ------------------

Outcome criterion11() {
  Outcome out;
  DesignFamilySpec bounded;
  bounded.kind = DesignKind::RegularGrid;
  bounded.dim = 1;
  bounded.delta = {1.0};
  bounded.growth = {GrowthKind::Bounded, 1.0};

  const double b_rho = 0.5, rho = 0.25;
  double min_lb = 1e300;
  for (int n : {50, 100, 200, 400}) {
    const auto s = grid_design(bounded, n);
    min_lb = std::min(min_lb, lower_bound_inconsistency(b_rho, s, rho).value);
  }
  out.check(min_lb >= 0.02, "clustered lower bound dips to " + fmt(min_lb));

  DesignFamilySpec fast = bounded;
  fast.growth = {GrowthKind::Power, 1.0};
  std::vector<double> ns, lbs;
  for (int n : {50, 100, 200, 400}) {
    const auto s = grid_design(fast, n);
    ns.push_back(static_cast<double>(s.size()));
    lbs.push_back(lower_bound_inconsistency(b_rho, s, 1.0).value);
  }
  const auto fit = rate_fit(ns, lbs);
  out.check(fit.slope >= -2.05 && fit.slope <= -1.95,
            "spread-design decay slope " + fmt(fit.slope));
  out.detail = "clustered floor " + fmt(min_lb) + ", spread slope " + fmt(fit.slope);
  return out;
}

// --- criterion 12: byte-identical outputs across thread counts ---------------

Outcome criterion12() {
  Outcome out;
  namespace fs = std::filesystem;
  const auto base = fs::temp_directory_path() / "spatfun_acceptance_det";
  fs::remove_all(base);
  fs::create_directories(base);

  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  auto write_cfg = [&](const std::string& name, const std::string& text) {
    const auto p = base / name;
    std::ofstream o(p);
    o << text;
    return p.string();
  };

  const struct {
    std::string sub;
    std::string cfg;
    std::string artifact;
  } cases[] = {
      {"mc-mean", R"({"experiment":"mc-mean","model":{"kind":"tent","T":32},
        "design":{"kind":"equispaced-line","growth":{"kind":"power","value":1.0}},
        "ladder":[20,40],"replicates":80,"seed":5})",
       "mc_mean.csv"},
      {"mc-cov", R"({"experiment":"mc-cov","model":{"kind":"gaussian-kl","T":16,"J":1,
        "components":[{"family":"exponential"}],"target":"cov"},
        "design":{"kind":"regular-grid","d":1,"growth":{"kind":"power","value":1.0}},
        "ladder":[20,40],"replicates":60,"seed":6})",
       "mc_cov.csv"},
      {"figure2", R"({"experiment":"figure2","model":{"kind":"two-component","T":32},
        "design":{"kind":"inverse-index"},"ladder":[30],"replicates":4,"seed":7})",
       "efpc_curves.csv"},
  };

  for (const auto& c : cases) {
    const auto cfg_path = write_cfg(c.sub + ".json", c.cfg);
    const auto out1 = (base / (c.sub + "_t1")).string();
    const auto out2 = (base / (c.sub + "_t4")).string();
    // keep the acceptance log to one line per criterion
    std::ostringstream sink;
    auto* cout_buf = std::cout.rdbuf(sink.rdbuf());
    const int rc1 = run_cli({c.sub, "--config", cfg_path, "--threads", "1", "--out", out1});
    const int rc2 = run_cli({c.sub, "--config", cfg_path, "--threads", "4", "--out", out2});
    std::cout.rdbuf(cout_buf);
    out.check(rc1 == 0 && rc2 == 0, c.sub + " run failed");
    if (rc1 == 0 && rc2 == 0) {
      const auto a = read(fs::path(out1) / c.artifact);
      const auto b = read(fs::path(out2) / c.artifact);
      out.check(!a.empty() && a == b, c.sub + " outputs differ across thread counts");
    }
  }
  if (out.pass) out.detail = "mc-mean, mc-cov, figure2 byte-identical at 1 vs 4 threads";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const struct {
    int id;
    const char* name;
    std::function<Outcome()> run;
  } criteria[] = {
      {1, "tent-loss oracle equivalence and Monte Carlo agreement", criterion1},
      {2, "tent model mean-loss slope -1 under alpha_N = N", criterion2},
      {3, "exponential model mean-loss slope vs alpha on a slow grid", criterion3},
      {4, "bound domination across 20 seed batches", criterion4},
      {5, "covariance-operator consistency and scaling constant", criterion5},
      {6, "EFPC inconsistency replication and x-star trend", criterion6},
      {7, "gaussian fourth-moment formula vs Monte Carlo", criterion7},
      {8, "f(lambda) endpoints and Isserlis oracle", criterion8},
      {9, "eigenfunction perturbation bound certification (100 cases)", criterion9},
      {10, "design taxonomy: intensities and classification table", criterion10},
      {11, "inconsistency lower bound: clustered floor and spread decay", criterion11},
      {12, "byte-identical reports across thread counts", criterion12},
  };

  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  criterion %2d  %s%s%s\n", r.pass ? "PASS" : "FAIL", c.id, c.name,
                r.detail.empty() ? "" : " -- ", r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  return failures;
}
