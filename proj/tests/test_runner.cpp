#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "spatfun/bounds.hpp"
#include "spatfun/config.hpp"
#include "spatfun/mc.hpp"
#include "spatfun/report.hpp"

#include "oracles.hpp"

using namespace spatfun;

namespace {

ExperimentConfig tent_type_c_config() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::McMean;
  cfg.model.kind = ModelKind::Tent;
  cfg.model.grid_size = 32;
  cfg.design.kind = DesignConfigKind::EquispacedLine;
  cfg.design.family.growth = {GrowthKind::Power, 1.0};
  cfg.ladder = {25, 50, 100};
  cfg.replicates = 400;
  cfg.seed = 9;
  cfg.threads = 2;
  return cfg;
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("rate fitting", "[runner]") {
  SECTION("exact power laws are recovered to machine precision") {
    std::vector<double> xs = {10, 20, 40, 80}, inv_n, inv_a2;
    for (double x : xs) {
      inv_n.push_back(3.7 / x);
      inv_a2.push_back(0.4 / (x * x));
    }
    const auto f1 = rate_fit(xs, inv_n);
    REQUIRE(f1.slope == Catch::Approx(-1.0).margin(1e-12));
    REQUIRE(f1.r2 == Catch::Approx(1.0).margin(1e-12));
    const auto f2 = rate_fit(xs, inv_a2);
    REQUIRE(f2.slope == Catch::Approx(-2.0).margin(1e-12));
  }

  SECTION("logarithmic correction shifts the apparent slope") {
    std::vector<double> xs, losses;
    for (double a = 100.0; a <= 10000.0; a *= 2.0) {
      xs.push_back(a);
      losses.push_back(std::log(a) / (a * a));
    }
    const auto f = rate_fit(xs, losses);
    REQUIRE(f.slope > -2.0);
    REQUIRE(f.slope < -1.6);
  }

  SECTION("slope is scale invariant") {
    std::vector<double> xs = {10, 30, 90}, ys = {1.0, 0.4, 0.13}, scaled_ys;
    for (double y : ys) scaled_ys.push_back(1234.5 * y);
    REQUIRE(std::abs(rate_fit(xs, ys).slope - rate_fit(xs, scaled_ys).slope) <= 1e-12);
  }

  SECTION("input validation") {
    REQUIRE_THROWS_AS(rate_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(rate_fit(std::vector<double>{1, 2, 3}, std::vector<double>{1, 0, 2}),
                      numeric_error);
  }
}

TEST_CASE("tent mean experiment tracks the exact loss", "[runner]") {
  auto cfg = tent_type_c_config();
  cfg.replicates = 1500;
  const auto report = mc_mean_experiment(cfg);
  REQUIRE(report.rows.size() == 3);
  for (const auto& row : report.rows) {
    const double oracle = exact_tent_loss(static_cast<int>(row.step), row.param);
    REQUIRE(std::abs(row.loss_mean - oracle) <= 3.0 * row.loss_se);
    REQUIRE(row.loss_se > 0.0);
    // type C tent: alpha equals N
    REQUIRE(row.param == row.step);
  }
}

TEST_CASE("zero-variance models produce exactly zero loss", "[runner]") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::McMean;
  cfg.model.kind = ModelKind::GaussianKL;
  cfg.model.grid_size = 16;
  cfg.model.order = 1;
  cfg.model.scores = {{1, CovFamily::exponential(0.0, 1.0)}};
  cfg.design.kind = DesignConfigKind::EquispacedLine;
  cfg.design.family.growth = {GrowthKind::Power, 1.0};
  cfg.ladder = {10, 20};
  cfg.replicates = 10;
  const auto report = mc_mean_experiment(cfg);
  for (const auto& row : report.rows) {
    REQUIRE(row.loss_mean == 0.0);
    REQUIRE(row.loss_se == 0.0);
  }
}

TEST_CASE("bounds attached to mean reports dominate the loss", "[runner]") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::McMean;
  cfg.model.kind = ModelKind::GaussianKL;
  cfg.model.grid_size = 16;
  cfg.model.order = 1;
  cfg.model.scores = {{1, CovFamily::exponential(1.0, 1.0)}};
  cfg.design.kind = DesignConfigKind::RegularGrid;
  cfg.design.family.kind = DesignKind::RegularGrid;
  cfg.design.family.growth = {GrowthKind::Power, 0.5};
  cfg.ladder = {100, 400};
  cfg.replicates = 200;
  cfg.seed = 3;
  const auto report = mc_mean_experiment(cfg);
  for (const auto& row : report.rows) {
    REQUIRE(std::isfinite(row.bound1));
    REQUIRE(std::isfinite(row.bound2));
    REQUIRE(std::isnan(row.bound3));  // not a randomized design
    REQUIRE(row.loss_mean <= row.bound1);
    REQUIRE(row.loss_mean <= row.bound2);
  }
}

TEST_CASE("randomized designs fill the third bound column", "[runner]") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::McMean;
  cfg.model.kind = ModelKind::GaussianKL;
  cfg.model.grid_size = 16;
  cfg.model.order = 1;
  cfg.model.scores = {{1, CovFamily::exponential(1.0, 1.0)}};
  cfg.design.kind = DesignConfigKind::Randomized;
  cfg.design.family.kind = DesignKind::Randomized;
  cfg.design.family.growth = {GrowthKind::PowerLog, 1.0};  // alpha = N ln N
  cfg.design.mc_n = 20000;
  cfg.ladder = {50, 100};
  cfg.replicates = 150;
  const auto report = mc_mean_experiment(cfg);
  for (const auto& row : report.rows) {
    REQUIRE(std::isfinite(row.bound3));
    REQUIRE(std::isnan(row.bound2));
    REQUIRE(row.loss_mean <= row.bound3);
  }
}

TEST_CASE("non-uniform densities enter the randomized bound through their sup", "[runner]") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::McMean;
  cfg.model.kind = ModelKind::GaussianKL;
  cfg.model.grid_size = 16;
  cfg.model.order = 1;
  cfg.model.scores = {{1, CovFamily::exponential(1.0, 1.0)}};
  cfg.design.kind = DesignConfigKind::Randomized;
  cfg.design.family.kind = DesignKind::Randomized;
  cfg.design.family.growth = {GrowthKind::PowerLog, 1.0};
  cfg.design.family.density = GridDensity{2, {3.0, 1.0}};  // sup of the density is 1.5
  cfg.design.mc_n = 20000;
  cfg.ladder = {40, 80};
  cfg.replicates = 100;
  cfg.seed = 4;
  REQUIRE(cfg.design.family.density->sup() == Catch::Approx(1.5).margin(1e-15));
  const auto report = mc_mean_experiment(cfg);
  for (const auto& row : report.rows) {
    REQUIRE(std::isfinite(row.bound3));
    REQUIRE(row.loss_mean <= row.bound3);
  }
}

TEST_CASE("covariance experiment", "[runner]") {
  SECTION("single location keeps a positive loss independent of replicates") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::McCov;
    cfg.model.kind = ModelKind::GaussianKL;
    cfg.model.grid_size = 16;
    cfg.model.order = 1;
    cfg.model.scores = {{1, CovFamily::exponential(1.0, 1.0)}};
    cfg.model.target = TargetKind::Cov;
    cfg.design.kind = DesignConfigKind::EquispacedLine;
    cfg.design.family.growth = {GrowthKind::Bounded, 1.0};
    cfg.ladder = {1};
    cfg.replicates = 300;
    cfg.seed = 12;
    const auto a = mc_cov_experiment(cfg);
    cfg.replicates = 900;
    cfg.seed = 13;
    const auto b = mc_cov_experiment(cfg);
    REQUIRE(a.rows[0].loss_mean > 0.5);
    const double se = std::hypot(a.rows[0].loss_se, b.rows[0].loss_se);
    REQUIRE(std::abs(a.rows[0].loss_mean - b.rows[0].loss_mean) <= 4.0 * se);
  }

  SECTION("coincident designs do not gain from more points") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::McCov;
    cfg.model.kind = ModelKind::GaussianKL;
    cfg.model.grid_size = 16;
    cfg.model.order = 1;
    cfg.model.scores = {{1, CovFamily::squared_exponential(1.0, 1.0)}};
    cfg.design.kind = DesignConfigKind::Coincident;
    cfg.ladder = {5, 50};
    cfg.replicates = 400;
    const auto report = mc_cov_experiment(cfg);
    REQUIRE(report.rows[1].loss_mean >
            0.5 * report.rows[0].loss_mean - 3.0 * report.rows[1].loss_se);
    REQUIRE(report.rows[1].loss_mean > 0.5);
  }

  SECTION("centered estimator flag is honored") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::McCov;
    cfg.model.kind = ModelKind::GaussianKL;
    cfg.model.grid_size = 16;
    cfg.model.order = 1;
    cfg.model.scores = {{1, CovFamily::exponential(1.0, 1.0)}};
    cfg.model.centered = true;
    cfg.design.kind = DesignConfigKind::EquispacedLine;
    cfg.design.family.growth = {GrowthKind::Power, 1.0};
    cfg.ladder = {20};
    cfg.replicates = 50;
    REQUIRE_NOTHROW(mc_cov_experiment(cfg));
  }
}

TEST_CASE("x-star experiment converges for infill designs", "[runner]") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::McXstar;
  cfg.model.kind = ModelKind::TwoComponent;
  cfg.model.grid_size = 32;
  cfg.model.lambda = 0.5;
  cfg.model.target = TargetKind::Xstar;
  cfg.design.kind = DesignConfigKind::InverseIndex;
  cfg.ladder = {10, 100};
  cfg.replicates = 150;
  cfg.seed = 21;
  const auto report = mc_xstar_experiment(cfg);
  REQUIRE(report.rows[1].loss_mean < report.rows[0].loss_mean);

  SECTION("a coincident design at the origin is exact up to jitter noise") {
    cfg.design.kind = DesignConfigKind::Coincident;
    cfg.ladder = {20};
    cfg.replicates = 50;
    const auto zero_report = mc_xstar_experiment(cfg);
    REQUIRE(zero_report.rows[0].loss_mean < 1e-4);
  }
}

TEST_CASE("efpc replication bundle", "[runner]") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Figure2;
  cfg.model.kind = ModelKind::TwoComponent;
  cfg.model.grid_size = 64;
  cfg.model.lambda = 0.5;
  cfg.design.kind = DesignConfigKind::InverseIndex;
  cfg.ladder = {50};
  cfg.replicates = 6;
  cfg.seed = 5;
  const auto res = mc_efpc_experiment(cfg);
  REQUIRE(res.v1.size() == 6);
  for (std::size_t r = 0; r < res.v1.size(); ++r) {
    REQUIRE(res.mass[r] > 0.99);
    REQUIRE(res.inner_f[r] > 0.95);
    REQUIRE(norm(res.v1[r]) == Catch::Approx(1.0).margin(1e-8));
  }
}

TEST_CASE("experiment reports are byte-identical across thread counts", "[runner]") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "spatfun_runner_det";
  fs::create_directories(dir);

  auto cfg = tent_type_c_config();
  cfg.replicates = 120;
  cfg.threads = 1;
  const auto r1 = mc_mean_experiment(cfg);
  cfg.threads = 3;
  const auto r3 = mc_mean_experiment(cfg);

  const auto p1 = (dir / "t1.csv").string();
  const auto p3 = (dir / "t3.csv").string();
  write_mc_report(p1, r1);
  write_mc_report(p3, r3);
  REQUIRE(file_bytes(p1) == file_bytes(p3));
}

TEST_CASE("experiment errors carry the ladder step", "[runner]") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::McMean;
  cfg.model.kind = ModelKind::GaussianKL;
  cfg.model.grid_size = 16;
  cfg.model.order = 1;
  cfg.model.scores = {{1, CovFamily::squared_exponential(1e16, 1.0)}};
  cfg.design.kind = DesignConfigKind::InverseIndex;  // clustered: factorization breaks
  cfg.ladder = {64};
  cfg.replicates = 4;
  try {
    mc_mean_experiment(cfg);
    FAIL("expected a numeric_error");
  } catch (const numeric_error& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("N=64") != std::string::npos);
  }
}

TEST_CASE("thread resolution honors the environment variable", "[runner]") {
  ::setenv("SPATFUN_THREADS", "3", 1);
  REQUIRE(resolve_threads(0) == 3);
  REQUIRE(resolve_threads(7) == 7);  // explicit request wins
  ::unsetenv("SPATFUN_THREADS");
  REQUIRE(resolve_threads(0) >= 1);
}

TEST_CASE("config parsing", "[runner][config]") {
  SECTION("well-formed config") {
    const auto cfg = parse_config_string(R"({
      "experiment": "mc-mean",
      "model": {"kind": "gaussian-kl", "T": 64, "J": 2,
                "components": [{"family": "exponential", "sigma2": 1.0, "rho": 2.0}]},
      "design": {"kind": "regular-grid", "d": 1, "growth": {"kind": "power", "value": 0.5}},
      "ladder": [100, 200],
      "replicates": 50,
      "seed": 77
    })");
    REQUIRE(cfg.kind == ExperimentKind::McMean);
    REQUIRE(cfg.model.kind == ModelKind::GaussianKL);
    REQUIRE(cfg.model.grid_size == 64);
    REQUIRE(cfg.model.scores.size() == 1);
    REQUIRE(cfg.model.scores[0].phi.rho == 2.0);
    REQUIRE(cfg.design.kind == DesignConfigKind::RegularGrid);
    REQUIRE(cfg.design.family.growth.value == 0.5);
    REQUIRE(cfg.ladder == std::vector<double>{100, 200});
    REQUIRE(cfg.replicates == 50);
    REQUIRE(cfg.seed == 77);
  }

  SECTION("unknown top-level keys are rejected") {
    REQUIRE_THROWS_AS(parse_config_string(R"({"experiment": "mc-mean", "bogus": 1})"),
                      config_error);
  }
  SECTION("unknown nested keys are rejected") {
    REQUIRE_THROWS_AS(
        parse_config_string(R"({"experiment": "mc-mean", "model": {"kindd": "tent"}})"),
        config_error);
    REQUIRE_THROWS_AS(
        parse_config_string(R"({"experiment": "mc-mean", "design": {"shape": "line"}})"),
        config_error);
  }
  SECTION("unknown experiment") {
    REQUIRE_THROWS_AS(parse_config_string(R"({"experiment": "mc-turbo"})"), config_error);
  }
  SECTION("bad ladders") {
    REQUIRE_THROWS_AS(
        parse_config_string(R"({"experiment": "mc-mean", "ladder": [100, 100]})"), config_error);
    REQUIRE_THROWS_AS(parse_config_string(R"({"experiment": "mc-mean", "ladder": []})"),
                      config_error);
  }
  SECTION("figure2 alias") {
    REQUIRE(parse_config_string(R"({"experiment": "mc-efpc"})").kind == ExperimentKind::Figure2);
  }
  SECTION("bad component family") {
    REQUIRE_THROWS_AS(parse_config_string(R"({
      "experiment": "mc-mean",
      "model": {"kind": "gaussian-kl", "components": [{"family": "cubic"}]}
    })"),
                      config_error);
  }
}
