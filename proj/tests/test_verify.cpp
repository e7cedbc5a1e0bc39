#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gros/distribution.hpp"
#include "gros/rng.hpp"
#include "gros/verify.hpp"

using namespace gros;
using nlohmann::json;

namespace {

json uniform_eq_config(std::size_t n, std::size_t reps, std::uint64_t seed) {
  return json{{"f", {{"kind", "uniform01"}}},
              {"g", {{"kind", "uniform01"}}},
              {"sizes", {n}},
              {"reps", reps},
              {"scaling_exponent", "0"},
              {"limit",
               {{"variant", "occupation_on_set"}, {"grid", 512}, {"intervals", {{0.0, 1.0}}}}},
              {"seed", seed},
              {"distance", "both"}};
}

}  // namespace

TEST_CASE("ks distance basics") {
  CHECK(ks_distance({1, 2, 3}, {3, 1, 2}) == 0.0);
  CHECK(ks_distance({0.0}, {1.0}) == 1.0);
  CHECK(ks_distance({1, 1, 1}, {2, 2, 2}) == 1.0);
  CHECK_THROWS(ks_distance({}, {1.0}));
  // two seeded uniform samples sit within the null band
  Rng rng(101);
  std::vector<double> a(10000), b(10000);
  for (auto& v : a) v = rng.uniform();
  for (auto& v : b) v = rng.uniform();
  CHECK(ks_distance(a, b) < 0.03);
}

TEST_CASE("wasserstein distance: exact merged-grid route") {
  CHECK(wasserstein1({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(wasserstein1({0.0}, {1.0}) == doctest::Approx(1.0));
  // equal sizes: mean absolute difference of the sorted pairing
  CHECK(wasserstein1({0, 10}, {1, 3}) == doctest::Approx(0.5 * (1.0 + 7.0)));
  // unequal sizes by hand: |1-5| on (0,1/2] plus |2-5| on (1/2,1]
  CHECK(wasserstein1({1, 2}, {5}) == doctest::Approx(0.5 * 4.0 + 0.5 * 3.0).epsilon(1e-9));
  CHECK_THROWS(wasserstein1({}, {1.0}));
}

TEST_CASE("wasserstein resampling fallback agrees with the exact route") {
  Rng rng(103);
  std::vector<double> a(4096), b(4097);  // lcm ~ 16.7M > exact cutoff
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = 0.3 + rng.normal();
  std::vector<double> b_trunc(b.begin(), b.begin() + 4096);  // lcm small: exact route
  double exact = wasserstein1(a, b_trunc);
  double resampled = wasserstein1(a, b);
  CHECK(resampled == doctest::Approx(exact).epsilon(0.02));
}

TEST_CASE("experiment config json round-trips") {
  json cfg_json = uniform_eq_config(100, 200, 42);
  ExperimentConfig cfg = ExperimentConfig::from_json(cfg_json);
  json echo = cfg.to_json();
  ExperimentConfig cfg2 = ExperimentConfig::from_json(echo);
  CHECK(cfg2.to_json() == echo);
  CHECK(cfg.sizes.size() == 1);
  CHECK(cfg.sizes[0].first == 100);
  // pair-form sizes and rational exponents parse
  json j2 = cfg_json;
  j2["sizes"] = {{250, 500}};
  j2["scaling_exponent"] = "1/4";
  ExperimentConfig c2 = ExperimentConfig::from_json(j2);
  CHECK(c2.sizes[0].second == 500);
  CHECK(c2.scaling_exponent == doctest::Approx(0.25));
  CHECK_THROWS(ExperimentConfig::from_json(json{{"f", {{"kind", "uniform01"}}}}));
  json j3 = cfg_json;
  j3["reps"] = 5;  // below the floor
  CHECK_THROWS(ExperimentConfig::from_json(j3));
}

TEST_CASE("experiment reports are bit-for-bit reproducible") {
  ExperimentConfig cfg = ExperimentConfig::from_json(uniform_eq_config(80, 120, 7));
  cfg.threads = 4;
  ExperimentReport r1 = run_convergence_experiment(cfg);
  ExperimentReport r2 = run_convergence_experiment(cfg);
  json j1 = r1.to_json(cfg), j2 = r2.to_json(cfg);
  j1.erase("wall_ms");
  j2.erase("wall_ms");
  for (auto& s : j1["sizes"]) s.erase("wall_ms");
  for (auto& s : j2["sizes"]) s.erase("wall_ms");
  CHECK(j1.dump() == j2.dump());
  // thread count must not change the numbers either
  cfg.threads = 1;
  ExperimentReport r3 = run_convergence_experiment(cfg);
  CHECK(r3.sizes[0].mean == r1.sizes[0].mean);
  CHECK(r3.sizes[0].ks_to_limit.value() == r1.sizes[0].ks_to_limit.value());
}

TEST_CASE("uniform null experiment: index law approaches the occupation law") {
  ExperimentConfig cfg = ExperimentConfig::from_json(uniform_eq_config(400, 400, 11));
  ExperimentReport rep = run_convergence_experiment(cfg);
  CHECK(rep.gamma == 0.0);
  REQUIRE(rep.sizes.size() == 1);
  CHECK(rep.sizes[0].ks_to_limit.value() < 0.12);
  CHECK(rep.sizes[0].w1_to_limit.value() < 0.05);
  CHECK(rep.sizes[0].min >= 0.0);
  CHECK(rep.sizes[0].max <= 1.0);
}

TEST_CASE("monotone evidence: distance shrinks up the lattice ladder") {
  json j{{"f", {{"kind", "finite_support"}, {"atoms", {0.0, 1.0}}, {"probs", {"1/2", "1/2"}}}},
         {"g", {{"kind", "finite_support"}, {"atoms", {0.0, 1.0}}, {"probs", {"1/2", "1/2"}}}},
         {"sizes", {48, 2048}},
         {"reps", 1500},
         {"scaling_exponent", "1/2"},
         {"limit", {{"variant", "finite_support_sum"}, {"h", json::array()},
                    {"v", json::array()}, {"u", {0.5}}, {"l", json::array()},
                    {"lambda", 0.5}}},
         {"seed", 20240808},
         {"distance", "ks"}};
  ExperimentReport rep = run_convergence_experiment(ExperimentConfig::from_json(j));
  REQUIRE(rep.sizes.size() == 2);
  CHECK(rep.sizes[1].ks_to_limit.value() <= rep.sizes[0].ks_to_limit.value());
}

TEST_CASE("localized window statistic runs through the harness") {
  json j = uniform_eq_config(200, 150, 13);
  j["window"] = {{"t0", 0.5}, {"eta", 0.1}};
  j["scaling_exponent"] = "1/2";
  j.erase("limit");
  ExperimentReport rep = run_convergence_experiment(ExperimentConfig::from_json(j));
  // |window statistic| is bounded by the window length 2*eta
  CHECK(rep.sizes[0].max <= std::sqrt(400.0) * 0.2 + 1e-9);
  CHECK(rep.sizes[0].min >= -std::sqrt(400.0) * 0.2 - 1e-9);
}

TEST_CASE("partial coincidence: index law approaches occupation on the glued stretch") {
  // G equals the uniform law below 1/2 and strictly dominates it above, so
  // the index fluctuates like the occupation of {bridge > 0} on (0, 1/2).
  // Convergence is slow near the glue point (the empirical set overshoots it
  // by O(n^{-1/2})), so assert shrinkage along the ladder plus loose bounds.
  json j{{"f", {{"kind", "uniform01"}}},
         {"g", {{"kind", "piecewise_quantile"},
                {"pieces", {{{"lo", 0.0}, {"hi", 0.5}, {"center", 0.0}, {"offset", 0.0},
                             {"slope", 1.0}, {"power_coef", 0.0}, {"power", 1.0}},
                            {{"lo", 0.5}, {"hi", 1.0}, {"center", 0.5}, {"offset", 0.5},
                             {"slope", 1.5}, {"power_coef", 0.0}, {"power", 1.0}}}}}},
         {"sizes", {600, 4800}},
         {"reps", 400},
         {"limit_reps", 3000},
         {"scaling_exponent", "0"},
         {"limit", {{"variant", "occupation_on_set"}, {"grid", 1024},
                    {"intervals", {{0.0, 0.5}}}}},
         {"seed", 70707},
         {"distance", "ks"}};
  ExperimentConfig cfg = ExperimentConfig::from_json(j);
  ExperimentReport rep = run_convergence_experiment(cfg);
  CHECK(rep.gamma == 0.0);
  double ks_small = rep.sizes[0].ks_to_limit.value();
  double ks_big = rep.sizes[1].ks_to_limit.value();
  CHECK(ks_big < ks_small);
  CHECK(ks_big < 0.15);
  // the residual decomposition detects the glued stretch; its correction
  // leaves only the boundary overshoot, which shrinks with n
  auto worst = [&](std::size_t n) {
    auto res = decomposition_residual(cfg.f, cfg.g, n, n, 200, 70708);
    double w = 0;
    for (double v : res) w = std::max(w, std::fabs(v));
    return w;
  };
  double w_small = worst(600), w_big = worst(4800);
  CHECK(w_big < w_small);
  CHECK(w_big < 0.1);
}

TEST_CASE("window statistic around the order-two crossing matches the inner law") {
  json j{{"f", {{"kind", "uniform01"}}},
         {"g", {{"kind", "power_tangent_quantile"}, {"r", 2.0}}},
         {"sizes", {2000}},
         {"reps", 600},
         {"limit_reps", 4000},
         {"scaling_exponent", "1/4"},
         {"window", {{"t0", 0.5}, {"eta", 0.2}}},
         {"limit", {{"variant", "inner_t"}, {"t0", 0.5}, {"r_l", 2.0}, {"r_r", 2.0},
                    {"c_l", -1.0}, {"c_r", 1.0}, {"lambda", 0.5}}},
         {"seed", 90909},
         {"distance", "ks"}};
  ExperimentReport rep = run_convergence_experiment(ExperimentConfig::from_json(j));
  CHECK(rep.sizes[0].ks_to_limit.value() < 0.12);
}

TEST_CASE("rate estimate recovers the quarter slope of the order-two crossing") {
  Distribution f{Uniform01{}};
  Distribution g{PowerTangentQuantile{2.0}};
  std::vector<std::pair<std::size_t, std::size_t>> sizes = {
      {50, 50}, {100, 100}, {200, 200}, {400, 400}, {800, 800}};
  RateEstimate est = estimate_rate(f, g, sizes, 400, 17);
  CHECK_FALSE(est.exact_regime);
  CHECK(est.slope == doctest::Approx(-0.25).epsilon(0.45));
}

TEST_CASE("rate estimate preconditions") {
  Distribution u{Uniform01{}};
  std::vector<std::pair<std::size_t, std::size_t>> two = {{100, 100}, {200, 200}};
  CHECK_THROWS_AS(estimate_rate(u, u, two, 200, 1), std::invalid_argument);
  std::vector<std::pair<std::size_t, std::size_t>> narrow = {
      {100, 100}, {150, 150}, {200, 200}, {260, 260}};
  CHECK_THROWS_AS(estimate_rate(u, u, narrow, 200, 1), std::invalid_argument);
}

TEST_CASE("rate estimate flags the exact regime") {
  // strictly separated supports: gamma_hat is exactly 1 for every draw
  Distribution lo{Uniform01{}};
  Distribution hi{PiecewiseQuantile::make({QuantilePiece{0, 1, 0, 2.0, 1.0, 0, 1}})};
  std::vector<std::pair<std::size_t, std::size_t>> sizes = {
      {50, 50}, {120, 120}, {260, 260}, {520, 520}};
  RateEstimate est = estimate_rate(hi, lo, sizes, 150, 19);
  CHECK(est.exact_regime);
}

TEST_CASE("decomposition residual vanishes identically for a continuous common law") {
  auto res = decomposition_residual(Distribution{Uniform01{}}, Distribution{Uniform01{}}, 300,
                                    300, 150, 23);
  for (double v : res) CHECK(v == 0.0);
}

TEST_CASE("decomposition residual vanishes for separated supports") {
  Distribution lo{Uniform01{}};
  Distribution hi{PiecewiseQuantile::make({QuantilePiece{0, 1, 0, 2.0, 1.0, 0, 1}})};
  auto res = decomposition_residual(hi, lo, 200, 200, 150, 29);
  for (double v : res) CHECK(v == 0.0);
}

TEST_CASE("decomposition residual shrinks along the ladder for a lattice law") {
  Distribution b{FiniteSupport::bernoulli(Rat(2, 5))};
  auto worst = [&](std::size_t n) {
    auto res = decomposition_residual(b, b, n, n, 300, 31);
    double w = 0;
    for (double v : res) w = std::max(w, std::fabs(v));
    return w;
  };
  double w_small = worst(250), w_big = worst(4000);
  CHECK(w_big < w_small);
  CHECK(w_big < 0.05);
}

TEST_CASE("shipped configs round-trip through parse and serialize") {
  namespace fs = std::filesystem;
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(GROS_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    std::ifstream in(entry.path());
    json j;
    in >> j;
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    json echo = cfg.to_json();
    CHECK(ExperimentConfig::from_json(echo).to_json() == echo);
  }
  CHECK(seen >= 6);
}

TEST_CASE("config hash is stable and sensitive") {
  json a = uniform_eq_config(100, 200, 42);
  json b = uniform_eq_config(100, 200, 43);
  CHECK(config_hash_hex(a) == config_hash_hex(a));
  CHECK(config_hash_hex(a) != config_hash_hex(b));
}
