#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gros/distribution.hpp"
#include "gros/limit_laws.hpp"

namespace gros {

// Two-sample sup distance between empirical cdfs.
double ks_distance(const std::vector<double>& a, const std::vector<double>& b);

// Exact L1 distance between the empirical quantile functions when the merged
// grid is affordable, otherwise both sides are resampled to a common grid.
double wasserstein1(const std::vector<double>& a, const std::vector<double>& b);

enum class DistanceKind { ks, wasserstein1, both };
enum class ExperimentMode { convergence, rate, residual };

struct Window {
  double t0 = 0.5;
  double eta = 0.1;
};

struct ExperimentConfig {
  Distribution f, g;
  std::vector<std::pair<std::size_t, std::size_t>> sizes;
  std::size_t reps = 1000;
  std::size_t limit_reps = 0;  // 0: same as reps
  double scaling_exponent = 0.0;
  std::string scaling_exponent_text = "0";
  std::optional<LimitLawSpec> limit;
  std::uint64_t seed = 1;
  DistanceKind distance = DistanceKind::both;
  ExperimentMode mode = ExperimentMode::convergence;
  std::optional<Window> window;  // localized statistic instead of the global one
  int threads = 0;               // 0 = hardware default

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SizeSummary {
  std::size_t n = 0, m = 0;
  double mean = 0, sd = 0, iqr = 0;
  double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
  double min = 0, max = 0;
  std::optional<double> ks_to_limit, w1_to_limit;
  double wall_ms = 0;
  std::vector<double> scaled_samples;  // (n+m)^s * (statistic - population value)
  std::vector<double> raw_samples;     // unscaled differences
};

struct RateEstimate {
  double slope = 0, slope_stderr = 0, intercept = 0;
  bool exact_regime = false;  // some size had zero dispersion
};

struct ExperimentReport {
  double gamma = 0;  // population index
  std::vector<SizeSummary> sizes;
  std::optional<RateEstimate> rate;
  std::vector<double> limit_samples;
  double wall_ms = 0;
  std::uint64_t seed = 0;
  std::string config_hash;

  nlohmann::json to_json(const ExperimentConfig& cfg) const;
};

// Draws reps replications of (n+m)^s * (gamma_hat - gamma) (or the localized
// window statistic) per size, a fresh limit-law reference sample, distances,
// and the dispersion-based rate trend. Deterministic for a fixed config.
ExperimentReport run_convergence_experiment(const ExperimentConfig& cfg);

// Regression of log IQR(gamma_hat - gamma) on log(n+m). Requires >= 4 sizes
// spanning at least one decade in n+m.
RateEstimate estimate_rate(const Distribution& f, const Distribution& g,
                           const std::vector<std::pair<std::size_t, std::size_t>>& sizes,
                           std::size_t reps, std::uint64_t seed, int threads = 0);

// Per-replication residual gamma_hat - gamma - l({F_n^{-1} > G_m^{-1}} cap S)
// where S is the detected fixed-point set of the transform (a union of
// intervals; isolated fixed points carry no measure).
std::vector<double> decomposition_residual(const Distribution& f, const Distribution& g,
                                           std::size_t n, std::size_t m, std::size_t reps,
                                           std::uint64_t seed, int threads = 0);

// FNV-1a over the canonical JSON dump; embedded in reports and CSV headers.
std::string config_hash_hex(const nlohmann::json& j);

// Deterministic work-sharing helper used by the harness: calls fn(i) for
// i in [0, count) from a small thread pool; results must go into
// preallocated per-index slots.
void parallel_for_index(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace gros
