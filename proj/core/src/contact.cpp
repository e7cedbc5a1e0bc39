#include "gros/contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gros {

namespace {

constexpr double kFlatTol = 1e-9;   // structural-jump / flatness threshold
constexpr double kZeroTol = 1e-10;  // "touches the identity" threshold

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

double hfun(const Distribution& f, const Distribution& g, double t) {
  return transform_fg(f, g, t) - t;
}

}  // namespace

std::string to_string(ContactClass c) {
  switch (c) {
    case ContactClass::crossing: return "crossing";
    case ContactClass::tangency: return "tangency";
    case ContactClass::virtual_horizontal_crossing: return "virtual_horizontal_crossing";
    case ContactClass::virtual_vertical_crossing: return "virtual_vertical_crossing";
    case ContactClass::upper_tangency: return "upper_tangency";
    case ContactClass::lower_tangency: return "lower_tangency";
  }
  return "?";
}

std::string to_string(ContactPosition p) {
  return p == ContactPosition::inner ? "inner" : "extremal";
}

std::string to_string(ContactSource s) { return s == ContactSource::via_fg ? "via_FG" : "via_GF"; }

double ContactPoint::effective_order() const {
  double r = 1.0;
  if (r_left) r = std::max(r, r_left_snapped.value_or(*r_left));
  if (r_right) r = std::max(r, r_right_snapped.value_or(*r_right));
  if (position == ContactPosition::extremal) r -= 0.5;
  return r;
}

IntensityEstimate estimate_intensity(const Distribution& f, const Distribution& g, double t0,
                                     Side side, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("estimate_intensity: eta must be positive");
  const double dir = side == Side::right ? 1.0 : -1.0;
  const double floor = std::max(1e-13, 64.0 * std::numeric_limits<double>::epsilon());
  std::vector<double> log_h, log_d;
  double c_sign = 0.0;
  int flat = 0, total = 0;
  for (int j = 3; j <= 14; ++j) {
    double h = eta * std::ldexp(1.0, -j);
    double t = t0 + dir * h;
    if (t <= 0.0 || t >= 1.0) continue;
    ++total;
    double delta = hfun(f, g, t);
    if (std::fabs(delta) < floor) {
      ++flat;
      continue;
    }
    if (c_sign == 0.0) c_sign = sgn(delta);
    log_h.push_back(std::log(h));
    log_d.push_back(std::log(std::fabs(delta)));
  }
  IntensityEstimate est;
  est.points_used = static_cast<int>(log_h.size());
  if (total > 0 && flat == total) {
    est.locally_flat = true;
    return est;
  }
  if (est.points_used < 3)
    throw std::runtime_error("estimate_intensity: too few resolvable grid points");
  // OLS of log|Delta| on log h.
  double n = static_cast<double>(log_h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    sx += log_h[i];
    sy += log_d[i];
    sxx += log_h[i] * log_h[i];
    sxy += log_h[i] * log_d[i];
  }
  double denom = n * sxx - sx * sx;
  double slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / n;
  double rss = 0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    double resid = log_d[i] - (intercept + slope * log_h[i]);
    rss += resid * resid;
  }
  double dof = std::max(1.0, n - 2.0);
  est.r = slope;
  est.c = c_sign * std::exp(intercept);
  est.r_stderr = std::sqrt(rss / dof / (sxx - sx * sx / n));
  double eighth = std::max(1.0, std::round((slope - 1.0) * 8.0) / 8.0 + 1.0);
  // Committed value for sampler selection; raw slope stays auditable above.
  est.r_snapped = std::fabs(slope - eighth) <= 2.0 * est.r_stderr ? eighth : std::max(slope, 1.0);
  return est;
}

FiniteClassification classify_finite_support(const FiniteSupport& f, const FiniteSupport& g) {
  auto [fa, ga] = align_supports(f, g);
  // Work from the exact quantile lateral limits at every merged cumulative
  // level. With a = F^{-1}(t0), a+ = F^{-1}(t0+), b = G^{-1}(t0),
  // b+ = G^{-1}(t0+):
  //   horizontal: G flat, F jumps from at-or-below across it
  //               (b+ = b, a <= b < a+)              -> +B1(t0)/sqrt(l)
  //   vertical:   F flat, G jumps from below onto-or-past it
  //               (a+ = a, b < a <= b+)              -> -B2(t0)/sqrt(1-l)
  //   upper:      both jump, a <= b < a+ <= b+       -> +(.)^+
  //   lower:      both jump, b < a <= b+ < a+        -> -(.)^-
  // Configurations outside these patterns contribute no fluctuation at t0.
  auto value_at = [](const FiniteSupport& fs, const Rat& t0) {
    for (std::size_t i = 0; i < fs.cum.size(); ++i)
      if (t0 <= fs.cum[i]) return fs.atoms[i];
    return fs.atoms.back();
  };
  auto value_after = [](const FiniteSupport& fs, const Rat& t0) {
    for (std::size_t i = 0; i < fs.cum.size(); ++i)
      if (t0 < fs.cum[i]) return fs.atoms[i];
    return fs.atoms.back();
  };
  std::vector<Rat> levels;
  for (const Rat& v : fa.cum) levels.push_back(v);
  for (const Rat& v : ga.cum) levels.push_back(v);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  FiniteClassification out;
  for (const Rat& t0 : levels) {
    if (!(Rat(0) < t0 && t0 < Rat(1))) continue;
    double a = value_at(fa, t0), ap = value_after(fa, t0);
    double b = value_at(ga, t0), bp = value_after(ga, t0);
    bool f_jumps = ap > a, g_jumps = bp > b;
    if (f_jumps && !g_jumps && a <= b && b < ap) out.horizontal.push_back(t0);
    else if (!f_jumps && g_jumps && b < a && a <= bp) out.vertical.push_back(t0);
    else if (f_jumps && g_jumps && a <= b && b < ap && ap <= bp) out.upper.push_back(t0);
    else if (f_jumps && g_jumps && b < a && a <= bp && bp < ap) out.lower.push_back(t0);
  }
  return out;
}

namespace {

ContactPoint make_virtual(double t0, ContactClass cls, ContactSource src) {
  ContactPoint cp;
  cp.t0 = t0;
  cp.position = ContactPosition::inner;
  cp.cls = cls;
  cp.source = src;
  cp.r_left = cp.r_right = 1.0;
  double cl = 1.0, cr = -1.0;  // crossing default: above then below the identity
  if (cls == ContactClass::upper_tangency) cl = cr = 1.0;
  if (cls == ContactClass::lower_tangency) cl = cr = -1.0;
  cp.c_left = cl;
  cp.c_right = cr;
  return cp;
}

// Regular (power-expansion) point: fit both sides, swapping the transform
// roles when the first fit is sub-linear (not locally Lipschitz).
ContactPoint analyze_regular(const Distribution& f, const Distribution& g, double t0,
                             double eta_loc, ContactPosition pos, bool side_left,
                             bool side_right) {
  auto fit = [&](const Distribution& a, const Distribution& b) {
    std::pair<std::optional<IntensityEstimate>, std::optional<IntensityEstimate>> r;
    if (side_left) r.first = estimate_intensity(a, b, t0, Side::left, eta_loc);
    if (side_right) r.second = estimate_intensity(a, b, t0, Side::right, eta_loc);
    return r;
  };
  ContactSource src = ContactSource::via_fg;
  auto [left, right] = fit(f, g);
  auto sublinear = [](const std::optional<IntensityEstimate>& e) {
    return e && !e->locally_flat && e->r < 0.9;
  };
  if (sublinear(left) || sublinear(right)) {
    auto [left2, right2] = fit(g, f);
    if (!sublinear(left2) && !sublinear(right2)) {
      left = left2;
      right = right2;
      src = ContactSource::via_gf;
    }
  }
  ContactPoint cp;
  cp.t0 = t0;
  cp.position = pos;
  cp.source = src;
  if (left && !left->locally_flat) {
    cp.r_left = left->r;
    cp.c_left = left->c;
    cp.r_left_stderr = left->r_stderr;
    cp.r_left_snapped = left->r_snapped;
  }
  if (right && !right->locally_flat) {
    cp.r_right = right->r;
    cp.c_right = right->c;
    cp.r_right_stderr = right->r_stderr;
    cp.r_right_snapped = right->r_snapped;
  }
  if (cp.c_left && cp.c_right)
    cp.cls = sgn(*cp.c_left) != sgn(*cp.c_right) ? ContactClass::crossing
                                                 : ContactClass::tangency;
  else
    cp.cls = ContactClass::tangency;
  return cp;
}

std::vector<ContactPoint> find_contacts_finite(const FiniteSupport& f, const FiniteSupport& g) {
  FiniteClassification cls = classify_finite_support(f, g);
  std::vector<ContactPoint> out;
  for (const Rat& t : cls.horizontal)
    out.push_back(make_virtual(t.to_double(), ContactClass::virtual_horizontal_crossing,
                               ContactSource::via_fg));
  for (const Rat& t : cls.vertical)
    out.push_back(make_virtual(t.to_double(), ContactClass::virtual_vertical_crossing,
                               ContactSource::via_gf));
  for (const Rat& t : cls.upper)
    out.push_back(make_virtual(t.to_double(), ContactClass::upper_tangency, ContactSource::via_fg));
  for (const Rat& t : cls.lower)
    out.push_back(make_virtual(t.to_double(), ContactClass::lower_tangency, ContactSource::via_fg));
  std::sort(out.begin(), out.end(),
            [](const ContactPoint& a, const ContactPoint& b) { return a.t0 < b.t0; });
  return out;
}

// Ternary search for the minimizer of orient*h on [a, b].
double refine_touch(const Distribution& f, const Distribution& g, double a, double b,
                    double orient) {
  for (int it = 0; it < 120 && b - a > 1e-14; ++it) {
    double m1 = a + (b - a) / 3.0;
    double m2 = b - (b - a) / 3.0;
    if (orient * hfun(f, g, m1) <= orient * hfun(f, g, m2))
      b = m2;
    else
      a = m1;
  }
  return 0.5 * (a + b);
}

// Ternary search for the minimizer of |h| on [a, b]; locates high-order
// contacts whose displacement dips below the sign tolerance on several nodes.
double refine_abs_min(const Distribution& f, const Distribution& g, double a, double b) {
  for (int it = 0; it < 120 && b - a > 1e-15; ++it) {
    double m1 = a + (b - a) / 3.0;
    double m2 = b - (b - a) / 3.0;
    if (std::fabs(hfun(f, g, m1)) <= std::fabs(hfun(f, g, m2)))
      b = m2;
    else
      a = m1;
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<ContactPoint> find_contacts(const Distribution& f, const Distribution& g,
                                        int budget) {
  if (budget < 64) throw std::invalid_argument("find_contacts: budget too small");
  if (f.is_finite_support() && g.is_finite_support())
    return find_contacts_finite(f.to_finite_support(), g.to_finite_support());

  const int cells = budget;
  const double step = 1.0 / cells;
  std::vector<double> grid_t(static_cast<std::size_t>(cells) + 1);
  std::vector<double> grid_h(static_cast<std::size_t>(cells) + 1);
  std::vector<int> grid_s(static_cast<std::size_t>(cells) + 1);
  double max_abs_h = 0.0;
  for (int k = 0; k <= cells; ++k) {
    double t = std::clamp(k * step, step * 1e-3, 1.0 - step * 1e-3);
    double h = hfun(f, g, t);
    grid_t[static_cast<std::size_t>(k)] = t;
    grid_h[static_cast<std::size_t>(k)] = h;
    grid_s[static_cast<std::size_t>(k)] = h > 1e-12 ? 1 : (h < -1e-12 ? -1 : 0);
    max_abs_h = std::max(max_abs_h, std::fabs(h));
  }
  // Transform glued to the identity everywhere: a positive-measure contact
  // set, outside pointwise classification.
  if (max_abs_h < 1e-12) return {};

  std::vector<ContactPoint> out;
  auto neighbor_gap = [&](double t0) {
    double gap = std::min(t0, 1.0 - t0);
    for (const ContactPoint& cp : out) gap = std::min(gap, std::fabs(cp.t0 - t0) / 2.0);
    return std::max(gap, 4.0 * step);
  };

  // Shared classifier for a located contact: structural flat -> horizontal
  // virtual; structural jump -> vertical virtual or jump-onto tangency;
  // otherwise a power-expansion fit (with role swap when not Lipschitz).
  auto classify_located = [&](double t0) -> ContactPoint {
    const double wide = 1e-4;
    if (t0 > wide && t0 < 1.0 - wide && std::fabs(transform_fg(f, g, t0 - wide) - t0) < kFlatTol &&
        std::fabs(transform_fg(f, g, t0 + wide) - t0) < kFlatTol)
      return make_virtual(t0, ContactClass::virtual_horizontal_crossing, ContactSource::via_fg);
    double fg_rf = transform_fg(f, g, std::min(t0 + 1e-9, 1.0));
    double fg_lf = transform_fg(f, g, std::max(t0 - 1e-9, 0.0));
    double var_fine = fg_rf - fg_lf;
    double var_coarse =
        transform_fg(f, g, std::min(t0 + 1e-6, 1.0)) - transform_fg(f, g, std::max(t0 - 1e-6, 0.0));
    if (var_fine > std::max(kFlatTol, 0.5 * var_coarse)) {
      if (std::fabs(fg_rf - t0) < kFlatTol)
        return make_virtual(t0, ContactClass::lower_tangency, ContactSource::via_fg);
      if (std::fabs(fg_lf - t0) < kFlatTol && fg_rf > t0 + kFlatTol)
        return make_virtual(t0, ContactClass::upper_tangency, ContactSource::via_fg);
      return make_virtual(t0, ContactClass::virtual_vertical_crossing, ContactSource::via_gf);
    }
    return analyze_regular(f, g, t0, neighbor_gap(t0), ContactPosition::inner, true, true);
  };

  int changes = 0;
  auto check_budget = [&](double where) {
    if (++changes > budget / 8)
      throw std::runtime_error("find_contacts: scan budget exceeded near t=" +
                               std::to_string(where));
  };

  // Adjacent strict sign changes: bisect to the transition point.
  for (int k = 0; k < cells; ++k) {
    int sa = grid_s[static_cast<std::size_t>(k)], sb = grid_s[static_cast<std::size_t>(k + 1)];
    if (sa == 0 || sb == 0 || sa == sb) continue;
    check_budget(grid_t[static_cast<std::size_t>(k)]);
    double a = grid_t[static_cast<std::size_t>(k)], b = grid_t[static_cast<std::size_t>(k + 1)];
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      double hm = hfun(f, g, mid);
      if ((hm > 0 ? 1 : (hm < 0 ? -1 : sa)) == sa)
        a = mid;
      else
        b = mid;
    }
    out.push_back(classify_located(0.5 * (a + b)));
  }

  // Sub-tolerance nodes: a narrow run between nonzero neighbours is a single
  // contact whose displacement dips below the sign tolerance (exact zeros at
  // a node, or the flat well of a high-order contact); wide runs are flat
  // identity segments and stay unclassified.
  for (int k = 1; k < cells; ++k) {
    if (grid_s[static_cast<std::size_t>(k)] != 0) continue;
    int j = k;
    while (j < cells && grid_s[static_cast<std::size_t>(j + 1)] == 0) ++j;
    int sl = grid_s[static_cast<std::size_t>(k - 1)];
    int sr = j + 1 <= cells ? grid_s[static_cast<std::size_t>(j + 1)] : 0;
    double width = grid_t[static_cast<std::size_t>(j)] - grid_t[static_cast<std::size_t>(k)];
    if (width < 1e-3 && sl != 0 && sr != 0) {
      check_budget(grid_t[static_cast<std::size_t>(k)]);
      double t0 = refine_abs_min(f, g, grid_t[static_cast<std::size_t>(k - 1)],
                                 grid_t[static_cast<std::size_t>(j + 1)]);
      out.push_back(classify_located(t0));
    }
    k = j;
  }

  // One-signed touches strictly between nodes.
  for (int k = 1; k < cells; ++k) {
    double hm = grid_h[static_cast<std::size_t>(k)];
    double hl = grid_h[static_cast<std::size_t>(k - 1)];
    double hr = grid_h[static_cast<std::size_t>(k + 1)];
    for (double orient : {+1.0, -1.0}) {
      if (orient * hm > 1e-12 && orient * hm <= orient * hl && orient * hm <= orient * hr &&
          orient * hm < 1e-4) {
        double t0 = refine_touch(f, g, grid_t[static_cast<std::size_t>(k - 1)],
                                 grid_t[static_cast<std::size_t>(k + 1)], orient);
        if (orient * hfun(f, g, t0) >= kZeroTol) continue;
        bool dup = false;
        for (const ContactPoint& cp : out) dup |= std::fabs(cp.t0 - t0) < 2.0 * step;
        if (dup) continue;
        check_budget(t0);
        out.push_back(classify_located(t0));
      }
    }
  }

  // Extremal contacts: both composite transforms must reach the corner
  // (equivalently the quantile one-sided limits agree there).
  if (transform_fg(f, g, 1e-9) < 1e-6 && transform_fg(g, f, 1e-9) < 1e-6) {
    ContactPoint cp = analyze_regular(f, g, 0.0, 0.08, ContactPosition::extremal,
                                      /*side_left=*/false, /*side_right=*/true);
    cp.cls = ContactClass::tangency;
    out.push_back(cp);
  }
  if (transform_fg(f, g, 1.0 - 1e-9) > 1.0 - 1e-6 &&
      transform_fg(g, f, 1.0 - 1e-9) > 1.0 - 1e-6) {
    ContactPoint cp = analyze_regular(f, g, 1.0, 0.08, ContactPosition::extremal,
                                      /*side_left=*/true, /*side_right=*/false);
    cp.cls = ContactClass::tangency;
    out.push_back(cp);
  }

  std::sort(out.begin(), out.end(),
            [](const ContactPoint& a, const ContactPoint& b) { return a.t0 < b.t0; });
  out.erase(std::unique(out.begin(), out.end(),
                        [&](const ContactPoint& a, const ContactPoint& b) {
                          return std::fabs(a.t0 - b.t0) < 2.0 * step;
                        }),
            out.end());
  return out;
}

ContactPoint analyze_contact_point(const Distribution& f, const Distribution& g, double t0,
                                   double eta) {
  if (!(t0 >= 0.0 && t0 <= 1.0))
    throw std::invalid_argument("analyze_contact_point: t0 outside [0,1]");
  bool extremal = t0 == 0.0 || t0 == 1.0;
  return analyze_regular(f, g, t0, eta,
                         extremal ? ContactPosition::extremal : ContactPosition::inner,
                         /*side_left=*/t0 > 0.0, /*side_right=*/t0 < 1.0);
}

namespace {

// Right-sided derivative of a scalar function, orders 1..4, O(h^2) stencils.
template <typename Fn>
double right_derivative(const Fn& fn, double x0, int order, double h) {
  auto v = [&](int k) { return fn(x0 + k * h); };
  switch (order) {
    case 1: return (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
    case 2: return (2.0 * v(0) - 5.0 * v(1) + 4.0 * v(2) - v(3)) / (h * h);
    case 3:
      return (-2.5 * v(0) + 9.0 * v(1) - 12.0 * v(2) + 7.0 * v(3) - 1.5 * v(4)) / (h * h * h);
    case 4:
      return (3.0 * v(0) - 14.0 * v(1) + 26.0 * v(2) - 24.0 * v(3) + 11.0 * v(4) - 2.0 * v(5)) /
             (h * h * h * h);
    default: throw std::invalid_argument("right_derivative: order out of range");
  }
}

}  // namespace

SmoothContactInfo smooth_contact_constants(const Distribution& f, const Distribution& g,
                                           double t0, int kmax) {
  if (kmax < 1 || kmax > 5) throw std::invalid_argument("smooth_contact_constants: kmax in 1..5");
  SmoothContactInfo info;
  info.x0 = f.quantile(t0);
  const double x0 = info.x0;
  auto fd = f.density(x0);
  auto gd = g.density(x0);
  const double tol = 1e-7;
  if (fd && gd && *gd > 0.0 && *fd > 0.0) {
    double h1 = *fd / *gd - 1.0;
    if (std::fabs(h1) > tol * std::max(1.0, *fd)) {
      info.order = 1;
      info.h_derivative = h1;
      return info;
    }
    double scale = 1.0 + std::fabs(x0);
    for (int k = 2; k <= kmax; ++k) {
      double h = scale * std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (k + 2.0));
      auto fdens = [&](double x) { return f.density(x).value_or(0.0); };
      auto gdens = [&](double x) { return g.density(x).value_or(0.0); };
      double df = right_derivative(fdens, x0, k - 1, h);
      double dg = right_derivative(gdens, x0, k - 1, h);
      double hk = (df - dg) / std::pow(*fd, k);
      if (std::fabs(hk) > tol * std::max(1.0, *fd)) {
        info.order = k;
        info.h_derivative = hk;
        return info;
      }
    }
    throw std::runtime_error("smooth_contact_constants: order exceeds kmax");
  }
  // No densities: right-sided differences of the transform displacement
  // (stencils go up to order four).
  auto hdisp = [&](double t) { return hfun(f, g, t); };
  for (int k = 1; k <= std::min(kmax, 4); ++k) {
    double h = std::pow(1e-14, 1.0 / (k + 1.0));
    double dk = right_derivative(hdisp, t0, k, h);
    if (std::fabs(dk) > tol) {
      info.order = k;
      info.h_derivative = dk;
      return info;
    }
  }
  throw std::runtime_error("smooth_contact_constants: order exceeds kmax");
}

}  // namespace gros
