#include "gros/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "gros/galton.hpp"
#include "gros/rng.hpp"
#include "gros/version.hpp"

namespace gros {

namespace {

double sorted_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  double pos = p * (static_cast<double>(sorted.size()) - 1.0);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  double w = pos - std::floor(pos);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

struct Moments {
  double mean = 0, sd = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.sd = v.size() > 1 ? std::sqrt(ss / (static_cast<double>(v.size()) - 1.0)) : 0.0;
  return m;
}

// Seed streams per purpose; replication seeds depend only on (size index,
// rep index), never on scheduling.
constexpr std::uint64_t kStreamX = 0x11;
constexpr std::uint64_t kStreamY = 0x22;
constexpr std::uint64_t kStreamLimit = 0x33;

}  // namespace

void parallel_for_index(std::size_t count, int threads,
                        const std::function<void(std::size_t)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min<int>(threads, 64);
  if (threads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  std::atomic<bool> failed{false};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failed.load()) throw std::runtime_error("parallel_for_index: worker failed");
}

double ks_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::vector<double> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  double best = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= v) ++i;
    while (j < sb.size() && sb[j] <= v) ++j;
    best = std::max(best, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

double wasserstein1(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1: empty sample");
  std::vector<double> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const auto na = static_cast<std::int64_t>(sa.size());
  const auto nb = static_cast<std::int64_t>(sb.size());
  __int128 lcm_wide = static_cast<__int128>(na) / gcd_i64(na, nb) * nb;
  if (lcm_wide <= 10'000'000) {
    // Exact integral of |F_a^{-1} - F_b^{-1}| over the merged grid.
    auto lcm = static_cast<std::int64_t>(lcm_wide);
    const std::int64_t step_a = lcm / na, step_b = lcm / nb;
    std::int64_t ia = 0, ib = 0, prev = 0;
    double total = 0.0;
    while (prev < lcm) {
      std::int64_t ba = (ia + 1) * step_a, bb = (ib + 1) * step_b;
      std::int64_t next = std::min(ba, bb);
      total += std::fabs(sa[static_cast<std::size_t>(ia)] - sb[static_cast<std::size_t>(ib)]) *
               static_cast<double>(next - prev);
      if (ba == next) ++ia;
      if (bb == next) ++ib;
      prev = next;
    }
    return total / static_cast<double>(lcm);
  }
  // Common-size resampling fallback.
  const std::size_t k = 1 << 12;
  double total = 0.0;
  for (std::size_t c = 1; c <= k; ++c) {
    double t = (static_cast<double>(c) - 0.5) / static_cast<double>(k);
    total += std::fabs(empirical_quantile(sa, t) - empirical_quantile(sb, t));
  }
  return total / static_cast<double>(k);
}

std::string config_hash_hex(const nlohmann::json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.f = Distribution::from_json(j.at("f"));
  cfg.g = Distribution::from_json(j.at("g"));
  for (const auto& s : j.at("sizes")) {
    if (s.is_array())
      cfg.sizes.emplace_back(s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>());
    else
      cfg.sizes.emplace_back(s.get<std::size_t>(), s.get<std::size_t>());
  }
  if (cfg.sizes.empty()) throw std::invalid_argument("experiment: no sizes");
  cfg.reps = j.at("reps").get<std::size_t>();
  if (cfg.reps < 100) throw std::invalid_argument("experiment: reps must be >= 100");
  cfg.limit_reps = j.value("limit_reps", std::size_t{0});
  if (j.contains("scaling_exponent")) {
    const auto& s = j.at("scaling_exponent");
    if (s.is_string()) {
      cfg.scaling_exponent_text = s.get<std::string>();
      cfg.scaling_exponent = Rat::parse(cfg.scaling_exponent_text).to_double();
    } else {
      cfg.scaling_exponent = s.get<double>();
      cfg.scaling_exponent_text = std::to_string(cfg.scaling_exponent);
    }
  }
  if (j.contains("limit")) cfg.limit = LimitLawSpec::from_json(j.at("limit"));
  cfg.seed = j.value("seed", std::uint64_t{1});
  std::string dist = j.value("distance", std::string("both"));
  cfg.distance = dist == "ks"            ? DistanceKind::ks
                 : dist == "wasserstein1" ? DistanceKind::wasserstein1
                                          : DistanceKind::both;
  std::string mode = j.value("mode", std::string("convergence"));
  cfg.mode = mode == "rate" ? ExperimentMode::rate
             : mode == "residual" ? ExperimentMode::residual
                                  : ExperimentMode::convergence;
  if (j.contains("window"))
    cfg.window = Window{j.at("window").at("t0").get<double>(),
                        j.at("window").at("eta").get<double>()};
  cfg.threads = j.value("threads", 0);
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["f"] = f.to_json();
  j["g"] = g.to_json();
  nlohmann::json sizes_j = nlohmann::json::array();
  for (auto [n, m] : sizes) sizes_j.push_back({n, m});
  j["sizes"] = sizes_j;
  j["reps"] = reps;
  if (limit_reps != 0) j["limit_reps"] = limit_reps;
  j["scaling_exponent"] = scaling_exponent_text;
  if (limit) j["limit"] = limit->to_json();
  j["seed"] = seed;
  j["distance"] = distance == DistanceKind::ks            ? "ks"
                  : distance == DistanceKind::wasserstein1 ? "wasserstein1"
                                                           : "both";
  j["mode"] = mode == ExperimentMode::rate       ? "rate"
              : mode == ExperimentMode::residual ? "residual"
                                                 : "convergence";
  if (window) j["window"] = {{"t0", window->t0}, {"eta", window->eta}};
  if (threads != 0) j["threads"] = threads;
  return j;
}

namespace {

// reps draws of the (unscaled) statistic-minus-population difference for one
// size. Localized mode uses the window statistic.
std::vector<double> draw_differences(const ExperimentConfig& cfg, std::size_t size_index,
                                     double gamma) {
  auto [n, m] = cfg.sizes[size_index];
  std::vector<double> out(cfg.reps);
  std::uint64_t size_seed = derive_seed(cfg.seed, 1000 + size_index);
  parallel_for_index(cfg.reps, cfg.threads, [&](std::size_t r) {
    std::uint64_t sx = derive_seed(size_seed, kStreamX + 2 * r);
    std::uint64_t sy = derive_seed(size_seed, kStreamY + 2 * r + 1);
    std::vector<double> xs = cfg.f.sample(n, sx);
    std::vector<double> ys = cfg.g.sample(m, sy);
    if (cfg.window) {
      out[r] = localized_deficiency(std::move(xs), std::move(ys), cfg.f, cfg.g, cfg.window->t0,
                                    cfg.window->eta);
    } else {
      IndexReport rep = empirical_index(std::move(xs), std::move(ys));
      out[r] = rep.gamma_hat.to_double() - gamma;
    }
  });
  return out;
}

RateEstimate regress_log_iqr(const std::vector<std::pair<std::size_t, std::size_t>>& sizes,
                             const std::vector<double>& iqrs) {
  RateEstimate est;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (iqrs[i] <= 0.0) {
      est.exact_regime = true;
      return est;
    }
    xs.push_back(std::log(static_cast<double>(sizes[i].first + sizes[i].second)));
    ys.push_back(std::log(iqrs[i]));
  }
  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  est.slope = (n * sxy - sx * sy) / denom;
  est.intercept = (sy - est.slope * sx) / n;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double resid = ys[i] - (est.intercept + est.slope * xs[i]);
    rss += resid * resid;
  }
  double dof = std::max(1.0, n - 2.0);
  est.slope_stderr = std::sqrt(rss / dof / (sxx - sx * sx / n));
  return est;
}

}  // namespace

ExperimentReport run_convergence_experiment(const ExperimentConfig& cfg) {
  auto t_start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.seed = cfg.seed;
  report.config_hash = config_hash_hex(cfg.to_json());
  report.gamma = cfg.window
                     ? 0.0  // window statistic already subtracts its population term
                     : population_index(cfg.f, cfg.g);

  if (cfg.limit) {
    std::size_t limit_reps = cfg.limit_reps == 0 ? cfg.reps : cfg.limit_reps;
    report.limit_samples.resize(limit_reps);
    std::uint64_t limit_seed = derive_seed(cfg.seed, kStreamLimit);
    parallel_for_index(limit_reps, cfg.threads, [&](std::size_t r) {
      Rng rng(derive_seed(limit_seed, r));
      report.limit_samples[r] = cfg.limit->sample(rng);
    });
  }

  std::vector<double> iqrs;
  for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
    auto t0 = std::chrono::steady_clock::now();
    SizeSummary s;
    s.n = cfg.sizes[si].first;
    s.m = cfg.sizes[si].second;
    s.raw_samples = draw_differences(cfg, si, report.gamma);
    double scale = std::pow(static_cast<double>(s.n + s.m), cfg.scaling_exponent);
    s.scaled_samples.resize(s.raw_samples.size());
    for (std::size_t i = 0; i < s.raw_samples.size(); ++i)
      s.scaled_samples[i] = scale * s.raw_samples[i];

    std::vector<double> sorted = s.scaled_samples;
    std::sort(sorted.begin(), sorted.end());
    Moments mom = moments(sorted);
    s.mean = mom.mean;
    s.sd = mom.sd;
    s.q05 = sorted_quantile(sorted, 0.05);
    s.q25 = sorted_quantile(sorted, 0.25);
    s.q50 = sorted_quantile(sorted, 0.50);
    s.q75 = sorted_quantile(sorted, 0.75);
    s.q95 = sorted_quantile(sorted, 0.95);
    s.min = sorted.front();
    s.max = sorted.back();
    s.iqr = s.q75 - s.q25;
    {
      std::vector<double> raw_sorted = s.raw_samples;
      std::sort(raw_sorted.begin(), raw_sorted.end());
      iqrs.push_back(sorted_quantile(raw_sorted, 0.75) - sorted_quantile(raw_sorted, 0.25));
    }
    if (cfg.limit) {
      if (cfg.distance != DistanceKind::wasserstein1)
        s.ks_to_limit = ks_distance(s.scaled_samples, report.limit_samples);
      if (cfg.distance != DistanceKind::ks)
        s.w1_to_limit = wasserstein1(s.scaled_samples, report.limit_samples);
    }
    s.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
    report.sizes.push_back(std::move(s));
  }
  if (cfg.sizes.size() >= 2) report.rate = regress_log_iqr(cfg.sizes, iqrs);
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
          .count();
  return report;
}

RateEstimate estimate_rate(const Distribution& f, const Distribution& g,
                           const std::vector<std::pair<std::size_t, std::size_t>>& sizes,
                           std::size_t reps, std::uint64_t seed, int threads) {
  if (sizes.size() < 4) throw std::invalid_argument("estimate_rate: need at least 4 sizes");
  std::size_t lo = sizes.front().first + sizes.front().second;
  std::size_t hi = lo;
  for (auto [n, m] : sizes) {
    lo = std::min(lo, n + m);
    hi = std::max(hi, n + m);
  }
  if (static_cast<double>(hi) < 10.0 * static_cast<double>(lo))
    throw std::invalid_argument("estimate_rate: sizes must span at least one decade");
  ExperimentConfig cfg;
  cfg.f = f;
  cfg.g = g;
  cfg.sizes = sizes;
  cfg.reps = reps;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.mode = ExperimentMode::rate;
  ExperimentReport rep = run_convergence_experiment(cfg);
  if (!rep.rate) throw std::logic_error("estimate_rate: missing regression");
  return *rep.rate;
}

std::vector<double> decomposition_residual(const Distribution& f, const Distribution& g,
                                           std::size_t n, std::size_t m, std::size_t reps,
                                           std::uint64_t seed, int threads) {
  const double gamma = population_index(f, g);
  // Fixed-point set of the transform as a union of intervals; isolated fixed
  // points have measure zero and drop out of the correction term.
  std::vector<std::pair<double, double>> flats;
  bool full_interval = false;
  if (!(f.is_finite_support() && g.is_finite_support())) {
    const int cells = 1 << 12;
    int run_start = -1;
    int flat_cells = 0;
    for (int k = 0; k <= cells; ++k) {
      double t = std::clamp(static_cast<double>(k) / cells, 1e-9, 1.0 - 1e-9);
      bool flat = std::fabs(transform_fg(f, g, t) - t) <= 1e-12;
      if (flat) ++flat_cells;
      if (flat && run_start < 0) run_start = k;
      if ((!flat || k == cells) && run_start >= 0) {
        int run_end = flat ? k : k - 1;
        if (run_end > run_start)
          flats.emplace_back(static_cast<double>(run_start) / cells,
                             static_cast<double>(run_end) / cells);
        run_start = -1;
      }
    }
    full_interval = flat_cells == cells + 1;
  }

  std::vector<double> out(reps);
  parallel_for_index(reps, threads, [&](std::size_t r) {
    std::uint64_t sx = derive_seed(seed, kStreamX + 2 * r);
    std::uint64_t sy = derive_seed(seed, kStreamY + 2 * r + 1);
    std::vector<double> xs = f.sample(n, sx);
    std::vector<double> ys = g.sample(m, sy);
    IndexReport rep = empirical_index(xs, ys);
    double gamma_hat = rep.gamma_hat.to_double();
    double correction = 0.0;
    if (full_interval) {
      correction = gamma_hat;  // the whole unit interval: identical sweeps cancel exactly
    } else if (!flats.empty()) {
      std::sort(xs.begin(), xs.end());
      std::sort(ys.begin(), ys.end());
      for (auto [a, b] : flats) correction += empirical_window_measure(xs, ys, a, b);
    }
    out[r] = gamma_hat - gamma - correction;
  });
  return out;
}

nlohmann::json ExperimentReport::to_json(const ExperimentConfig& cfg) const {
  nlohmann::json j;
  j["tool_version"] = kToolVersion;
  j["config"] = cfg.to_json();
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["gamma"] = gamma;
  j["wall_ms"] = wall_ms;
  nlohmann::json sizes_j = nlohmann::json::array();
  for (const SizeSummary& s : sizes) {
    nlohmann::json sj;
    sj["n"] = s.n;
    sj["m"] = s.m;
    sj["mean"] = s.mean;
    sj["sd"] = s.sd;
    sj["iqr"] = s.iqr;
    sj["quantiles"] = {{"q05", s.q05}, {"q25", s.q25}, {"q50", s.q50},
                       {"q75", s.q75}, {"q95", s.q95}};
    sj["min"] = s.min;
    sj["max"] = s.max;
    if (s.ks_to_limit) sj["ks_to_limit"] = *s.ks_to_limit;
    if (s.w1_to_limit) sj["w1_to_limit"] = *s.w1_to_limit;
    sj["wall_ms"] = s.wall_ms;
    sizes_j.push_back(std::move(sj));
  }
  j["sizes"] = sizes_j;
  if (rate) {
    j["rate"] = {{"slope", rate->slope},
                 {"slope_stderr", rate->slope_stderr},
                 {"intercept", rate->intercept},
                 {"exact_regime", rate->exact_regime}};
  }
  if (!limit_samples.empty()) {
    Moments mom = moments(limit_samples);
    j["limit"] = {{"reps", limit_samples.size()}, {"mean", mom.mean}, {"sd", mom.sd}};
  }
  return j;
}

}  // namespace gros
