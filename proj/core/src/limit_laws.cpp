#include "gros/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gros {

namespace {

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }
double pos_part(double x) { return x > 0 ? x : 0.0; }
double neg_part(double x) { return x < 0 ? -x : 0.0; }

// x^+ when c > 0, x^- when c < 0.
double signed_part(double x, double c) { return c > 0 ? pos_part(x) : neg_part(x); }

void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("limit law: lambda must lie in (0,1)");
}

constexpr double kOrderTol = 1e-9;

}  // namespace

BridgePath sample_bridge(std::size_t grid, Rng& rng) {
  if (grid < 2 || (grid & (grid - 1)) != 0)
    throw std::invalid_argument("sample_bridge: grid must be a power of two >= 2");
  BridgePath path;
  path.grid = grid;
  path.values.resize(grid + 1);
  const double sd = std::sqrt(1.0 / static_cast<double>(grid));
  double w = 0.0;
  for (std::size_t i = 1; i <= grid; ++i) {
    w += sd * rng.normal();
    path.values[i] = w;
  }
  const double w1 = path.values[grid];
  for (std::size_t i = 1; i < grid; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(grid);
    path.values[i] -= t * w1;
  }
  path.values[0] = 0.0;
  path.values[grid] = 0.0;
  return path;
}

BridgePath sample_bridge(std::size_t grid, std::uint64_t seed) {
  Rng rng(seed);
  return sample_bridge(grid, rng);
}

double occupation_positive(const BridgePath& path,
                           const std::vector<std::pair<double, double>>& intervals) {
  const auto n = static_cast<double>(path.grid);
  double occ = 0.0;
  for (auto [a, b] : intervals) {
    if (!(a <= b) || a < 0.0 || b > 1.0)
      throw std::invalid_argument("occupation_positive: bad interval");
    for (std::size_t i = 0; i < path.grid; ++i) {
      double lo = static_cast<double>(i) / n;
      double hi = static_cast<double>(i + 1) / n;
      double cut = std::min(hi, b) - std::max(lo, a);
      if (cut > 0.0 && path.values[i] > 0.0) occ += cut;
    }
  }
  return occ;
}

std::vector<double> bridge_values_at(const std::vector<double>& points, Rng& rng) {
  const std::size_t k = points.size();
  for (double t : points)
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("bridge_values_at: t outside (0,1)");
  for (std::size_t i = 1; i < k; ++i)
    if (!(points[i - 1] < points[i]))
      throw std::invalid_argument("bridge_values_at: points must be strictly increasing");
  // Cholesky of cov(s,t) = s(1-t), s <= t.
  std::vector<double> chol(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double cov = points[j] * (1.0 - points[i]);
      double acc = cov;
      for (std::size_t l = 0; l < j; ++l) acc -= chol[i * k + l] * chol[j * k + l];
      if (i == j)
        chol[i * k + i] = std::sqrt(std::max(acc, 0.0));
      else
        chol[i * k + j] = chol[j * k + j] > 0 ? acc / chol[j * k + j] : 0.0;
    }
  }
  std::vector<double> z(k), out(k, 0.0);
  for (double& v : z) v = rng.normal();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j <= i; ++j) out[i] += chol[i * k + j] * z[j];
  return out;
}

double t_inner_from_bridges(double b1, double b2, double r_l, double r_r, double c_l, double c_r,
                            double lambda) {
  check_lambda(lambda);
  if (c_l == 0.0 || c_r == 0.0) throw std::invalid_argument("inner limit: zero constant");
  if (r_l < 1.0 || r_r < 1.0) throw std::invalid_argument("inner limit: intensities must be >= 1");
  const double b_lambda = b1 / std::sqrt(lambda) - b2 / std::sqrt(1.0 - lambda);
  const double r0 = std::max(r_l, r_r);
  if (std::fabs(r0 - 1.0) < kOrderTol && c_l * c_r < 0.0) {
    return signed_part(b_lambda, c_l) / c_l + signed_part(b_lambda, c_r) / c_r +
           sgn(c_l) * b2 / std::sqrt(1.0 - lambda);
  }
  double value = 0.0;
  if (r_l >= r0 - kOrderTol)
    value += sgn(c_l) * std::pow(signed_part(b_lambda, c_l) / std::fabs(c_l), 1.0 / r0);
  if (r_r >= r0 - kOrderTol)
    value += sgn(c_r) * std::pow(signed_part(b_lambda, c_r) / std::fabs(c_r), 1.0 / r0);
  return value;
}

double sample_t_inner(double t0, double r_l, double r_r, double c_l, double c_r, double lambda,
                      Rng& rng) {
  if (!(t0 > 0.0 && t0 < 1.0)) throw std::invalid_argument("inner limit: t0 outside (0,1)");
  const double sd = std::sqrt(t0 * (1.0 - t0));
  double b1 = sd * rng.normal();
  double b2 = sd * rng.normal();
  return t_inner_from_bridges(b1, b2, r_l, r_r, c_l, c_r, lambda);
}

namespace {

// r > 1: occupation of {sgn(c) W(y) > sqrt(lambda(1-lambda)) |c| y^r} on a
// step grid. Horizon: smallest Y with the threshold at 8 fluctuation scales
// sqrt(Y), doubled; 2^16 steps.
double extremal_brownian(double r, double c, double lambda, Rng& rng) {
  const double scale = std::sqrt(lambda * (1.0 - lambda)) * std::fabs(c);
  const double horizon = 2.0 * std::pow(8.0 / scale, 1.0 / (r - 0.5));
  const std::size_t steps = 1u << 16;
  const double dy = horizon / static_cast<double>(steps);
  const double sd = std::sqrt(dy);
  const double orient = sgn(c);
  double w = 0.0, occ = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    double y = static_cast<double>(k) * dy;  // left endpoint
    if (orient * w > scale * std::pow(y, r)) occ += dy;
    w += sd * rng.normal();
  }
  return orient * occ;
}

// r = 1: renewal integral at end 0 for constant c (end 1 mirrors by
// c -> -c with the sign flipped). The indicator is constant between
// consecutive ceiling breakpoints, so the integral is exact given the
// renewal draws; the stop rule demands a long all-zero stretch past both
// the initial horizon and the last active segment.
double extremal_renewal_end0(double c, double lambda, Rng& rng) {
  const double orient = sgn(c);
  const double lam = lambda;
  std::vector<double> s1{0.0}, s2{0.0};  // partial sums, s[k] = S_k
  auto extend = [&rng](std::vector<double>& s, std::size_t k) {
    while (s.size() <= k) s.push_back(s.back() + rng.exponential());
  };
  const double min_side = std::min(lam, 1.0 - lam);
  const double horizon0 = 10.0 / min_side;
  const auto quiet_needed = static_cast<long>(std::ceil(50.0 / min_side));
  const long hard_cap = 20'000'000;

  double integral = 0.0;
  double y = 0.0;
  double last_active = 0.0;
  long quiet = 0;
  // Integer breakpoint counters: on (y, y_next) the ceilings equal k1 and k2.
  std::size_t k1 = 1, k2 = 1;
  for (long seg = 0; seg < hard_cap; ++seg) {
    double b1 = static_cast<double>(k1) / lam;
    double b2 = static_cast<double>(k2) / (1.0 - lam);
    double y_next = std::min(b1, b2);
    extend(s1, k1);
    extend(s2, k2);
    bool active = orient * (1.0 - lam) * s1[k1] > orient * lam * (1.0 + c) * s2[k2];
    if (active) {
      integral += y_next - y;
      last_active = y_next;
      quiet = 0;
    } else {
      ++quiet;
      if (quiet >= quiet_needed && y > std::max(horizon0, last_active)) return orient * integral;
    }
    if (b1 <= y_next) ++k1;
    if (b2 <= y_next) ++k2;
    y = y_next;
  }
  throw std::runtime_error(
      "extremal renewal sampler: stop rule not certified within the hard cap (lambda=" +
      std::to_string(lambda) + ", c=" + std::to_string(c) + ")");
}

}  // namespace

double sample_t_extremal(int end, double r, double c, double lambda, Rng& rng) {
  check_lambda(lambda);
  if (end != 0 && end != 1) throw std::invalid_argument("extremal limit: end must be 0 or 1");
  if (c == 0.0) throw std::invalid_argument("extremal limit: zero constant");
  if (r < 1.0) throw std::invalid_argument("extremal limit: r must be >= 1");
  if (r > 1.0 + kOrderTol) return extremal_brownian(r, c, lambda, rng);
  if (end == 0) return extremal_renewal_end0(c, lambda, rng);
  return -extremal_renewal_end0(-c, lambda, rng);
}

double virtual_from_bridges(ContactClass cls, double b1, double b2, double lambda) {
  check_lambda(lambda);
  const double sl = std::sqrt(lambda), sr = std::sqrt(1.0 - lambda);
  switch (cls) {
    case ContactClass::virtual_horizontal_crossing: return b1 / sl;
    case ContactClass::virtual_vertical_crossing: return -b2 / sr;
    case ContactClass::upper_tangency: return pos_part(b1 / sl - b2 / sr);
    case ContactClass::lower_tangency: return -neg_part(b1 / sl - b2 / sr);
    default: throw std::invalid_argument("virtual limit: not a virtual contact class");
  }
}

double sample_virtual(ContactClass cls, double t0, double lambda, Rng& rng) {
  if (!(t0 > 0.0 && t0 < 1.0)) throw std::invalid_argument("virtual limit: t0 outside (0,1)");
  const double sd = std::sqrt(t0 * (1.0 - t0));
  double b1 = sd * rng.normal();
  double b2 = sd * rng.normal();
  return virtual_from_bridges(cls, b1, b2, lambda);
}

double sample_global_limit(const std::vector<ContactPoint>& contacts, double lambda, Rng& rng) {
  check_lambda(lambda);
  if (contacts.empty()) return 0.0;
  double r0 = 0.0;
  for (const ContactPoint& cp : contacts) r0 = std::max(r0, cp.effective_order());

  std::vector<const ContactPoint*> inner, extremal;
  for (const ContactPoint& cp : contacts) {
    if (cp.effective_order() < r0 - kOrderTol) continue;  // non-maximal terms vanish
    (cp.position == ContactPosition::inner ? inner : extremal).push_back(&cp);
  }

  double total = 0.0;
  if (!inner.empty()) {
    std::vector<double> points;
    for (const ContactPoint* cp : inner) points.push_back(cp->t0);
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    std::vector<double> sorted_pts;
    for (std::size_t idx : order) sorted_pts.push_back(points[idx]);
    std::vector<double> b1 = bridge_values_at(sorted_pts, rng);
    std::vector<double> b2 = bridge_values_at(sorted_pts, rng);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const ContactPoint& cp = *inner[order[pos]];
      bool swapped = cp.source == ContactSource::via_gf;
      double v1 = swapped ? b2[pos] : b1[pos];
      double v2 = swapped ? b1[pos] : b2[pos];
      double lam = swapped ? 1.0 - lambda : lambda;
      double term;
      if (cp.cls == ContactClass::crossing || cp.cls == ContactClass::tangency) {
        term = t_inner_from_bridges(v1, v2, cp.r_left.value_or(1.0), cp.r_right.value_or(1.0),
                                    cp.c_left.value_or(1.0), cp.c_right.value_or(-1.0), lam);
      } else {
        // Virtual classes are stated in the unswapped orientation already.
        term = virtual_from_bridges(cp.cls, b1[pos], b2[pos], lambda);
        total += term;
        continue;
      }
      total += swapped ? -term : term;
    }
  }
  for (const ContactPoint* cp : extremal) {
    int end = cp->t0 < 0.5 ? 0 : 1;
    double r = cp->r_left ? cp->r_left_snapped.value_or(*cp->r_left)
                          : cp->r_right_snapped.value_or(cp->r_right.value_or(1.0));
    double c = cp->c_left ? *cp->c_left : cp->c_right.value_or(1.0);
    bool swapped = cp->source == ContactSource::via_gf;
    double lam = swapped ? 1.0 - lambda : lambda;
    if (swapped) {
      // Exchanged roles; the mirrored end statistic flips sign.
      double term = sample_t_extremal(end, r, c, lam, rng);
      total -= term;
    } else {
      total += sample_t_extremal(end, r, c, lam, rng);
    }
  }
  return total;
}

double sample_finite_support_limit(const std::vector<double>& horizontal,
                                   const std::vector<double>& vertical,
                                   const std::vector<double>& upper,
                                   const std::vector<double>& lower, double lambda, Rng& rng) {
  check_lambda(lambda);
  std::vector<double> points;
  points.insert(points.end(), horizontal.begin(), horizontal.end());
  points.insert(points.end(), vertical.begin(), vertical.end());
  points.insert(points.end(), upper.begin(), upper.end());
  points.insert(points.end(), lower.begin(), lower.end());
  if (points.empty()) return 0.0;
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  std::vector<double> b1 = bridge_values_at(points, rng);
  std::vector<double> b2 = bridge_values_at(points, rng);
  auto value_at = [&](double t, const std::vector<double>& b) {
    auto it = std::lower_bound(points.begin(), points.end(), t);
    return b[static_cast<std::size_t>(it - points.begin())];
  };
  const double sl = std::sqrt(lambda), sr = std::sqrt(1.0 - lambda);
  double total = 0.0;
  for (double t : horizontal) total += value_at(t, b1) / sl;
  for (double t : vertical) total -= value_at(t, b2) / sr;
  for (double t : upper) total += pos_part(value_at(t, b1) / sl - value_at(t, b2) / sr);
  for (double t : lower) total -= neg_part(value_at(t, b1) / sl - value_at(t, b2) / sr);
  return total;
}

double LimitLawSpec::sample(Rng& rng) const {
  return std::visit(
      [&](const auto& spec) -> double {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, OccupationSpec>) {
          BridgePath path = sample_bridge(spec.grid, rng);
          return occupation_positive(path, spec.intervals);
        } else if constexpr (std::is_same_v<T, InnerTSpec>) {
          return sample_t_inner(spec.t0, spec.r_l, spec.r_r, spec.c_l, spec.c_r, spec.lambda,
                                rng);
        } else if constexpr (std::is_same_v<T, ExtremalTSpec>) {
          return sample_t_extremal(spec.end, spec.r, spec.c, spec.lambda, rng);
        } else if constexpr (std::is_same_v<T, VirtualSpec>) {
          return sample_virtual(spec.cls, spec.t0, spec.lambda, rng);
        } else if constexpr (std::is_same_v<T, GlobalSumSpec>) {
          return sample_global_limit(spec.contacts, spec.lambda, rng);
        } else {
          return sample_finite_support_limit(spec.horizontal, spec.vertical, spec.upper,
                                             spec.lower, spec.lambda, rng);
        }
      },
      v);
}

namespace {

ContactClass contact_class_from_string(const std::string& s) {
  if (s == "crossing") return ContactClass::crossing;
  if (s == "tangency") return ContactClass::tangency;
  if (s == "virtual_horizontal_crossing") return ContactClass::virtual_horizontal_crossing;
  if (s == "virtual_vertical_crossing") return ContactClass::virtual_vertical_crossing;
  if (s == "upper_tangency") return ContactClass::upper_tangency;
  if (s == "lower_tangency") return ContactClass::lower_tangency;
  throw std::invalid_argument("unknown contact class: " + s);
}

ContactPoint contact_from_json(const nlohmann::json& j) {
  ContactPoint cp;
  cp.t0 = j.at("t0").get<double>();
  cp.cls = contact_class_from_string(j.at("class").get<std::string>());
  cp.position = j.value("position", std::string("inner")) == "extremal"
                    ? ContactPosition::extremal
                    : ContactPosition::inner;
  cp.source = j.value("source", std::string("via_FG")) == "via_GF" ? ContactSource::via_gf
                                                                   : ContactSource::via_fg;
  if (j.contains("r_l")) cp.r_left = j.at("r_l").get<double>();
  if (j.contains("r_r")) cp.r_right = j.at("r_r").get<double>();
  if (j.contains("c_l")) cp.c_left = j.at("c_l").get<double>();
  if (j.contains("c_r")) cp.c_right = j.at("c_r").get<double>();
  return cp;
}

nlohmann::json contact_to_json(const ContactPoint& cp) {
  nlohmann::json j;
  j["t0"] = cp.t0;
  j["class"] = to_string(cp.cls);
  j["position"] = to_string(cp.position);
  j["source"] = to_string(cp.source);
  if (cp.r_left) j["r_l"] = *cp.r_left;
  if (cp.r_right) j["r_r"] = *cp.r_right;
  if (cp.c_left) j["c_l"] = *cp.c_left;
  if (cp.c_right) j["c_r"] = *cp.c_right;
  if (cp.r_left_stderr) j["r_l_stderr"] = *cp.r_left_stderr;
  if (cp.r_right_stderr) j["r_r_stderr"] = *cp.r_right_stderr;
  if (cp.r_left_snapped) j["r_l_snapped"] = *cp.r_left_snapped;
  if (cp.r_right_snapped) j["r_r_snapped"] = *cp.r_right_snapped;
  return j;
}

}  // namespace

LimitLawSpec LimitLawSpec::from_json(const nlohmann::json& j) {
  const std::string variant = j.at("variant").get<std::string>();
  LimitLawSpec spec;
  if (variant == "occupation_on_set") {
    OccupationSpec s;
    s.grid = j.value("grid", std::size_t{4096});
    for (const auto& iv : j.at("intervals"))
      s.intervals.emplace_back(iv.at(0).get<double>(), iv.at(1).get<double>());
    spec.v = s;
  } else if (variant == "inner_t") {
    spec.v = InnerTSpec{j.at("t0").get<double>(),  j.at("r_l").get<double>(),
                        j.at("r_r").get<double>(), j.at("c_l").get<double>(),
                        j.at("c_r").get<double>(), j.at("lambda").get<double>()};
  } else if (variant == "extremal_t") {
    spec.v = ExtremalTSpec{j.at("end").get<int>(), j.at("r").get<double>(),
                           j.at("c").get<double>(), j.at("lambda").get<double>()};
  } else if (variant == "virtual_crossing" || variant == "virtual_tangency") {
    VirtualSpec s;
    std::string orient = j.at("orientation").get<std::string>();
    if (variant == "virtual_crossing")
      s.cls = orient == "vertical" ? ContactClass::virtual_vertical_crossing
                                   : ContactClass::virtual_horizontal_crossing;
    else
      s.cls = orient == "lower" ? ContactClass::lower_tangency : ContactClass::upper_tangency;
    s.t0 = j.at("t0").get<double>();
    s.lambda = j.at("lambda").get<double>();
    spec.v = s;
  } else if (variant == "global_sum") {
    GlobalSumSpec s;
    for (const auto& cj : j.at("contacts")) s.contacts.push_back(contact_from_json(cj));
    s.lambda = j.at("lambda").get<double>();
    spec.v = s;
  } else if (variant == "finite_support_sum") {
    FiniteSupportSumSpec s;
    s.horizontal = j.value("h", std::vector<double>{});
    s.vertical = j.value("v", std::vector<double>{});
    s.upper = j.value("u", std::vector<double>{});
    s.lower = j.value("l", std::vector<double>{});
    s.lambda = j.at("lambda").get<double>();
    spec.v = s;
  } else {
    throw std::invalid_argument("unknown limit law variant: " + variant);
  }
  return spec;
}

nlohmann::json LimitLawSpec::to_json() const {
  nlohmann::json j;
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, OccupationSpec>) {
          j["variant"] = "occupation_on_set";
          j["grid"] = spec.grid;
          nlohmann::json arr = nlohmann::json::array();
          for (auto [a, b] : spec.intervals) arr.push_back({a, b});
          j["intervals"] = arr;
        } else if constexpr (std::is_same_v<T, InnerTSpec>) {
          j = {{"variant", "inner_t"}, {"t0", spec.t0},   {"r_l", spec.r_l},
               {"r_r", spec.r_r},      {"c_l", spec.c_l}, {"c_r", spec.c_r},
               {"lambda", spec.lambda}};
        } else if constexpr (std::is_same_v<T, ExtremalTSpec>) {
          j = {{"variant", "extremal_t"},
               {"end", spec.end},
               {"r", spec.r},
               {"c", spec.c},
               {"lambda", spec.lambda}};
        } else if constexpr (std::is_same_v<T, VirtualSpec>) {
          bool crossing = spec.cls == ContactClass::virtual_horizontal_crossing ||
                          spec.cls == ContactClass::virtual_vertical_crossing;
          j["variant"] = crossing ? "virtual_crossing" : "virtual_tangency";
          if (crossing)
            j["orientation"] =
                spec.cls == ContactClass::virtual_vertical_crossing ? "vertical" : "horizontal";
          else
            j["orientation"] = spec.cls == ContactClass::lower_tangency ? "lower" : "upper";
          j["t0"] = spec.t0;
          j["lambda"] = spec.lambda;
        } else if constexpr (std::is_same_v<T, GlobalSumSpec>) {
          j["variant"] = "global_sum";
          nlohmann::json arr = nlohmann::json::array();
          for (const ContactPoint& cp : spec.contacts) arr.push_back(contact_to_json(cp));
          j["contacts"] = arr;
          j["lambda"] = spec.lambda;
        } else {
          j = {{"variant", "finite_support_sum"}, {"h", spec.horizontal},
               {"v", spec.vertical},              {"u", spec.upper},
               {"l", spec.lower},                 {"lambda", spec.lambda}};
        }
      },
      v);
  return j;
}

}  // namespace gros
