#include "gros/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "gros/rng.hpp"

namespace gros {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

double power_cross_q(double r, double t) {
  return 0.5 + sgn(t - 0.5) * std::pow(std::fabs(t - 0.5), r);
}

double power_tangent_q(double r, double t) {
  return t + sgn(t - 0.5) * std::pow(std::fabs(t - 0.5), r);
}

// sup{t in (0,1) : q(t) <= x} for a nondecreasing q, by bisection down to
// double resolution. lo keeps q(lo) <= x (or 0), hi keeps q(hi) > x.
template <typename Q>
double invert_monotone(const Q& q, double x) {
  if (q(1.0) <= x) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 120; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (q(mid) <= x)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

FiniteSupport FiniteSupport::make(std::vector<double> atoms, std::vector<Rat> probs) {
  if (atoms.empty() || atoms.size() != probs.size())
    throw std::invalid_argument("finite support: atoms/probs size mismatch");
  for (std::size_t i = 1; i < atoms.size(); ++i)
    if (!(atoms[i - 1] < atoms[i]))
      throw std::invalid_argument("finite support: atoms must be strictly increasing");
  Rat total(0);
  std::vector<Rat> cum;
  cum.reserve(probs.size());
  for (const Rat& p : probs) {
    if (p < Rat(0)) throw std::invalid_argument("finite support: negative probability");
    total += p;
    cum.push_back(total);
  }
  if (total != Rat(1)) throw std::invalid_argument("finite support: probs must sum to 1 exactly");
  FiniteSupport fs;
  fs.atoms = std::move(atoms);
  fs.probs = std::move(probs);
  fs.cum = std::move(cum);
  return fs;
}

FiniteSupport FiniteSupport::bernoulli(const Rat& p_one) {
  return make({0.0, 1.0}, {Rat(1) - p_one, p_one});
}

double QuantilePiece::eval(double t) const {
  double h = t - center;
  double v = offset + slope * h;
  if (power_coef != 0.0) v += power_coef * sgn(h) * std::pow(std::fabs(h), power);
  return v;
}

double QuantilePiece::derivative(double t) const {
  double h = t - center;
  double d = slope;
  if (power_coef != 0.0) d += power_coef * power * std::pow(std::fabs(h), power - 1.0);
  return d;
}

PiecewiseQuantile PiecewiseQuantile::make(std::vector<QuantilePiece> pieces) {
  if (pieces.empty()) throw std::invalid_argument("piecewise quantile: no pieces");
  if (pieces.front().lo != 0.0 || pieces.back().hi != 1.0)
    throw std::invalid_argument("piecewise quantile: pieces must cover (0,1)");
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (!(p.lo < p.hi)) throw std::invalid_argument("piecewise quantile: empty piece");
    if (i > 0 && pieces[i - 1].hi != p.lo)
      throw std::invalid_argument("piecewise quantile: pieces must be contiguous");
    if (p.power <= 0.0) throw std::invalid_argument("piecewise quantile: power must be positive");
  }
  // Monotonicity probe: nondecreasing within pieces and across boundaries.
  double prev = -kInf;
  for (const auto& p : pieces) {
    const int kGrid = 512;
    for (int k = 0; k <= kGrid; ++k) {
      double t = p.lo + (p.hi - p.lo) * (k + 0.5) / (kGrid + 1.0);
      double v = p.eval(t);
      if (v < prev - 1e-12)
        throw std::invalid_argument("piecewise quantile: not nondecreasing");
      prev = v;
    }
  }
  PiecewiseQuantile pq;
  pq.pieces = std::move(pieces);
  return pq;
}

bool Distribution::is_finite_support() const {
  return std::holds_alternative<FiniteSupport>(v_) || std::holds_alternative<Empirical>(v_);
}

FiniteSupport Distribution::to_finite_support() const {
  if (const auto* fs = std::get_if<FiniteSupport>(&v_)) return *fs;
  if (const auto* e = std::get_if<Empirical>(&v_)) {
    std::map<double, std::int64_t> counts;
    for (double v : e->values) counts[v] += 1;
    std::vector<double> atoms;
    std::vector<Rat> probs;
    auto n = static_cast<std::int64_t>(e->values.size());
    for (auto& [x, c] : counts) {
      atoms.push_back(x);
      probs.push_back(Rat(c, n));
    }
    return FiniteSupport::make(std::move(atoms), std::move(probs));
  }
  throw std::logic_error("to_finite_support on a non-finite law");
}

double Distribution::quantile(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("quantile: t outside [0,1]");
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Uniform01>) {
          return t;
        } else if constexpr (std::is_same_v<T, Normal>) {
          if (t <= 0.0) return -kInf;
          if (t >= 1.0) return kInf;
          boost::math::normal_distribution<double> nd(d.mu, d.sigma);
          return boost::math::quantile(nd, t);
        } else if constexpr (std::is_same_v<T, StudentTShift>) {
          if (t <= 0.0) return -kInf;
          if (t >= 1.0) return kInf;
          boost::math::students_t_distribution<double> td(d.nu);
          return d.mu + boost::math::quantile(td, t);
        } else if constexpr (std::is_same_v<T, FiniteSupport>) {
          if (t <= 0.0) {
            for (std::size_t i = 0; i < d.probs.size(); ++i)
              if (!d.probs[i].is_zero()) return d.atoms[i];
          }
          for (std::size_t i = 0; i < d.cum.size(); ++i)
            if (t <= d.cum[i].to_double()) return d.atoms[i];
          return d.atoms.back();
        } else if constexpr (std::is_same_v<T, PowerCrossQuantile>) {
          return power_cross_q(d.r, t);
        } else if constexpr (std::is_same_v<T, PowerTangentQuantile>) {
          return power_tangent_q(d.r, t);
        } else if constexpr (std::is_same_v<T, Empirical>) {
          if (t <= 0.0) return d.values.front();
          return empirical_quantile(d.values, t);
        } else {
          const PiecewiseQuantile& pq = d;
          double tt = t;
          if (tt <= 0.0) tt = std::numeric_limits<double>::min();
          for (const auto& p : pq.pieces)
            if (tt <= p.hi || &p == &pq.pieces.back()) return p.eval(tt);
          return pq.pieces.back().eval(tt);
        }
      },
      v_);
}

double Distribution::cdf(double x) const {
  if (std::isnan(x)) throw std::domain_error("cdf: NaN input");
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Uniform01>) {
          return std::clamp(x, 0.0, 1.0);
        } else if constexpr (std::is_same_v<T, Normal>) {
          if (x == -kInf) return 0.0;
          if (x == kInf) return 1.0;
          boost::math::normal_distribution<double> nd(d.mu, d.sigma);
          return boost::math::cdf(nd, x);
        } else if constexpr (std::is_same_v<T, StudentTShift>) {
          if (x == -kInf) return 0.0;
          if (x == kInf) return 1.0;
          boost::math::students_t_distribution<double> td(d.nu);
          return boost::math::cdf(td, x - d.mu);
        } else if constexpr (std::is_same_v<T, FiniteSupport>) {
          double acc = 0.0;
          for (std::size_t i = 0; i < d.atoms.size(); ++i) {
            if (d.atoms[i] <= x)
              acc = d.cum[i].to_double();
            else
              break;
          }
          return acc;
        } else if constexpr (std::is_same_v<T, PowerCrossQuantile>) {
          double half_width = std::pow(0.5, d.r);
          if (x <= 0.5 - half_width) return 0.0;
          if (x >= 0.5 + half_width) return 1.0;
          return 0.5 + sgn(x - 0.5) * std::pow(std::fabs(x - 0.5), 1.0 / d.r);
        } else if constexpr (std::is_same_v<T, PowerTangentQuantile>) {
          double r = d.r;
          if (x < power_tangent_q(r, 0.0)) return 0.0;
          if (x >= power_tangent_q(r, 1.0)) return 1.0;
          return invert_monotone([&](double t) { return power_tangent_q(r, t); }, x);
        } else if constexpr (std::is_same_v<T, Empirical>) {
          auto it = std::upper_bound(d.values.begin(), d.values.end(), x);
          return static_cast<double>(it - d.values.begin()) / static_cast<double>(d.values.size());
        } else {
          const PiecewiseQuantile& pq = d;
          return invert_monotone(
              [&](double t) {
                for (const auto& p : pq.pieces)
                  if (t <= p.hi || &p == &pq.pieces.back()) return p.eval(t);
                return pq.pieces.back().eval(t);
              },
              x);
        }
      },
      v_);
}

std::optional<double> Distribution::density(double x) const {
  return std::visit(
      [&](const auto& d) -> std::optional<double> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Uniform01>) {
          return (x > 0.0 && x < 1.0) ? std::optional<double>(1.0) : std::optional<double>(0.0);
        } else if constexpr (std::is_same_v<T, Normal>) {
          boost::math::normal_distribution<double> nd(d.mu, d.sigma);
          return boost::math::pdf(nd, x);
        } else if constexpr (std::is_same_v<T, StudentTShift>) {
          boost::math::students_t_distribution<double> td(d.nu);
          return boost::math::pdf(td, x - d.mu);
        } else if constexpr (std::is_same_v<T, FiniteSupport>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, PowerCrossQuantile>) {
          double half_width = std::pow(0.5, d.r);
          double h = std::fabs(x - 0.5);
          if (h >= half_width) return 0.0;
          return (1.0 / d.r) * std::pow(h, 1.0 / d.r - 1.0);
        } else if constexpr (std::is_same_v<T, PowerTangentQuantile>) {
          double t = cdf(x);
          if (t <= 0.0 || t >= 1.0) return 0.0;
          double slope = 1.0 + d.r * std::pow(std::fabs(t - 0.5), d.r - 1.0);
          return 1.0 / slope;
        } else if constexpr (std::is_same_v<T, Empirical>) {
          return std::nullopt;
        } else {
          const PiecewiseQuantile& pq = d;
          double t = cdf(x);
          if (t <= 0.0 || t >= 1.0) return 0.0;
          for (const auto& p : pq.pieces) {
            if (t <= p.hi || &p == &pq.pieces.back()) {
              double slope = p.derivative(t);
              if (slope <= 1e-14) return std::nullopt;  // atom
              return 1.0 / slope;
            }
          }
          return std::nullopt;
        }
      },
      v_);
}

std::vector<double> Distribution::sample(std::size_t n, std::uint64_t seed) const {
  if (n == 0) throw std::invalid_argument("sample: n must be positive");
  Rng rng(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = quantile(rng.uniform());
  return out;
}

double transform_fg(const Distribution& f, const Distribution& g, double t) {
  return f.cdf(g.quantile(t));
}

double empirical_quantile(std::span<const double> sorted_sample, double t) {
  if (sorted_sample.empty()) throw std::invalid_argument("empirical quantile: empty sample");
  if (!(t > 0.0 && t <= 1.0)) throw std::domain_error("empirical quantile: t outside (0,1]");
  auto n = static_cast<double>(sorted_sample.size());
  auto idx = static_cast<std::size_t>(std::ceil(n * t));
  if (idx < 1) idx = 1;
  if (idx > sorted_sample.size()) idx = sorted_sample.size();
  return sorted_sample[idx - 1];
}

std::pair<FiniteSupport, FiniteSupport> align_supports(const FiniteSupport& f,
                                                       const FiniteSupport& g) {
  std::vector<double> atoms;
  atoms.reserve(f.atoms.size() + g.atoms.size());
  std::merge(f.atoms.begin(), f.atoms.end(), g.atoms.begin(), g.atoms.end(),
             std::back_inserter(atoms));
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  auto pad = [&](const FiniteSupport& src) {
    std::vector<Rat> probs(atoms.size(), Rat(0));
    for (std::size_t i = 0; i < src.atoms.size(); ++i) {
      auto it = std::lower_bound(atoms.begin(), atoms.end(), src.atoms[i]);
      probs[static_cast<std::size_t>(it - atoms.begin())] = src.probs[i];
    }
    return FiniteSupport::make(atoms, std::move(probs));
  };
  return {pad(f), pad(g)};
}

// ---------------------------------------------------------------------------
// JSON (de)serialization. Finite-support probabilities round-trip as exact
// fraction strings.

namespace {

Rat prob_from_json(const nlohmann::json& j) {
  if (j.is_string()) return Rat::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rat(j.get<std::int64_t>());
  if (j.is_number_float()) {
    // Accept short decimals written as JSON numbers via their text form.
    double v = j.get<double>();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return Rat::parse(buf);
  }
  throw std::invalid_argument("finite support: probability must be a string or number");
}

}  // namespace

Distribution Distribution::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform01") return Distribution(Uniform01{});
  if (kind == "normal") {
    Normal n;
    n.mu = j.at("mu").get<double>();
    n.sigma = j.at("sigma").get<double>();
    if (!(n.sigma > 0.0)) throw std::invalid_argument("normal: sigma must be positive");
    return Distribution(n);
  }
  if (kind == "student_t_shift") {
    StudentTShift s;
    s.nu = j.at("nu").get<double>();
    s.mu = j.at("mu").get<double>();
    if (!(s.nu > 0.0)) throw std::invalid_argument("student_t_shift: nu must be positive");
    return Distribution(s);
  }
  if (kind == "finite_support") {
    std::vector<double> atoms = j.at("atoms").get<std::vector<double>>();
    std::vector<Rat> probs;
    for (const auto& p : j.at("probs")) probs.push_back(prob_from_json(p));
    return Distribution(FiniteSupport::make(std::move(atoms), std::move(probs)));
  }
  if (kind == "power_cross_quantile") {
    PowerCrossQuantile p;
    p.r = j.at("r").get<double>();
    if (!(p.r > 0.0)) throw std::invalid_argument("power_cross_quantile: r must be positive");
    return Distribution(p);
  }
  if (kind == "power_tangent_quantile") {
    PowerTangentQuantile p;
    p.r = j.at("r").get<double>();
    if (!(p.r > 0.0)) throw std::invalid_argument("power_tangent_quantile: r must be positive");
    return Distribution(p);
  }
  if (kind == "empirical") {
    Empirical e;
    e.values = j.at("values").get<std::vector<double>>();
    if (e.values.empty()) throw std::invalid_argument("empirical: no values");
    std::sort(e.values.begin(), e.values.end());
    return Distribution(std::move(e));
  }
  if (kind == "piecewise_quantile") {
    std::vector<QuantilePiece> pieces;
    for (const auto& pj : j.at("pieces")) {
      QuantilePiece p;
      p.lo = pj.at("lo").get<double>();
      p.hi = pj.at("hi").get<double>();
      p.center = pj.value("center", 0.0);
      p.offset = pj.value("offset", 0.0);
      p.slope = pj.value("slope", 0.0);
      p.power_coef = pj.value("power_coef", 0.0);
      p.power = pj.value("power", 1.0);
      pieces.push_back(p);
    }
    return Distribution(PiecewiseQuantile::make(std::move(pieces)));
  }
  throw std::invalid_argument("unknown distribution kind: " + kind);
}

nlohmann::json Distribution::to_json() const {
  nlohmann::json j;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Uniform01>) {
          j["kind"] = "uniform01";
        } else if constexpr (std::is_same_v<T, Normal>) {
          j["kind"] = "normal";
          j["mu"] = d.mu;
          j["sigma"] = d.sigma;
        } else if constexpr (std::is_same_v<T, StudentTShift>) {
          j["kind"] = "student_t_shift";
          j["nu"] = d.nu;
          j["mu"] = d.mu;
        } else if constexpr (std::is_same_v<T, FiniteSupport>) {
          j["kind"] = "finite_support";
          j["atoms"] = d.atoms;
          nlohmann::json probs = nlohmann::json::array();
          for (const Rat& p : d.probs) probs.push_back(p.str());
          j["probs"] = probs;
        } else if constexpr (std::is_same_v<T, PowerCrossQuantile>) {
          j["kind"] = "power_cross_quantile";
          j["r"] = d.r;
        } else if constexpr (std::is_same_v<T, PowerTangentQuantile>) {
          j["kind"] = "power_tangent_quantile";
          j["r"] = d.r;
        } else if constexpr (std::is_same_v<T, Empirical>) {
          j["kind"] = "empirical";
          j["values"] = d.values;
        } else {
          j["kind"] = "piecewise_quantile";
          nlohmann::json arr = nlohmann::json::array();
          for (const auto& p : d.pieces) {
            arr.push_back({{"lo", p.lo},
                           {"hi", p.hi},
                           {"center", p.center},
                           {"offset", p.offset},
                           {"slope", p.slope},
                           {"power_coef", p.power_coef},
                           {"power", p.power}});
          }
          j["pieces"] = arr;
        }
      },
      v_);
  return j;
}

}  // namespace gros
