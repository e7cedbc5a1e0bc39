#include "gros/galton.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gros {

namespace {

// Walk the merged grid {i/n} united {j/m}. Breakpoints are held as integer
// multiples of 1/lcm(n,m), so cell comparisons and lengths are exact.
template <typename Visit>
void sweep_merged_grid(const std::vector<double>& xs, const std::vector<double>& ys,
                       std::int64_t lcm, Visit&& visit) {
  auto n = static_cast<std::int64_t>(xs.size());
  auto m = static_cast<std::int64_t>(ys.size());
  const std::int64_t step_x = lcm / n;
  const std::int64_t step_y = lcm / m;
  std::int64_t i = 0, j = 0, prev = 0;
  while (prev < lcm) {
    std::int64_t bx = (i + 1) * step_x;
    std::int64_t by = (j + 1) * step_y;
    std::int64_t next = std::min(bx, by);
    visit(prev, next, xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)]);
    if (bx == next) ++i;
    if (by == next) ++j;
    prev = next;
  }
}

int sign_of(double v, double tol = 0.0) {
  if (v > tol) return 1;
  if (v < -tol) return -1;
  return 0;
}

}  // namespace

std::int64_t galton_count(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || xs.size() != ys.size())
    throw std::invalid_argument("galton_count: samples must be nonempty and of equal size");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  std::int64_t count = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] > ys[i]) ++count;
  return count;
}

IndexReport empirical_index(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || ys.empty()) throw std::invalid_argument("empirical_index: empty sample");
  IndexReport rep;
  rep.n = xs.size();
  rep.m = ys.size();
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const std::int64_t lcm =
      lcm_i64(static_cast<std::int64_t>(xs.size()), static_cast<std::int64_t>(ys.size()));
  std::int64_t gt = 0, eq = 0;
  sweep_merged_grid(xs, ys, lcm, [&](std::int64_t a, std::int64_t b, double xv, double yv) {
    if (xv > yv)
      gt += b - a;
    else if (xv == yv)
      eq += b - a;
  });
  rep.gamma_hat = Rat(gt, lcm);
  rep.tie_measure = Rat(eq, lcm);
  if (xs.size() == ys.size()) {
    std::int64_t count = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (xs[i] > ys[i]) ++count;
    rep.count = count;
  }
  return rep;
}

Rat population_index_exact(const FiniteSupport& f, const FiniteSupport& g) {
  auto [fa, ga] = align_supports(f, g);
  // {t : t > F_G(t)} with F_G(t) = P_i on (Q_{i-1}, Q_i]: the part of each
  // cell strictly above the level P_i.
  Rat total(0);
  Rat q_prev(0);
  for (std::size_t i = 0; i < ga.cum.size(); ++i) {
    const Rat& q_i = ga.cum[i];
    const Rat& p_i = fa.cum[i];
    Rat lo = std::max(q_prev, p_i);
    if (q_i > lo) total += q_i - lo;
    q_prev = q_i;
  }
  return total;
}

namespace {

// Bisect t - F_G(t) between a and b where the endpoint signs differ.
double bisect_sign_change(const Distribution& f, const Distribution& g, double a, double b,
                          int sign_a) {
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    double phim = mid - transform_fg(f, g, mid);
    if (sign_of(phim) == sign_a || sign_of(phim) == 0)
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

double scan_positive_measure(const Distribution& f, const Distribution& g, double lo, double hi,
                             int budget) {
  if (budget < 16) throw std::invalid_argument("population_index: budget too small");
  const double h = (hi - lo) / budget;
  double measure = 0.0;
  int changes = 0;
  double t_prev = lo;  // endpoint quantiles are one-sided limits, safe to probe
  double phi_prev = t_prev - transform_fg(f, g, t_prev);
  for (int k = 1; k <= budget; ++k) {
    double t = lo + k * h;
    double phi = t - transform_fg(f, g, t);
    int sa = sign_of(phi_prev, 1e-12), sb = sign_of(phi, 1e-12);
    if (sa > 0 && sb > 0) {
      measure += t - t_prev;
    } else if (sa * sb < 0) {
      ++changes;
      if (changes > budget / 8)
        throw std::runtime_error("population_index: scan budget exceeded near [" +
                                 std::to_string(t_prev) + ", " + std::to_string(t) + "]");
      double root = bisect_sign_change(f, g, t_prev, t, sa);
      if (sa > 0)
        measure += root - t_prev;
      else
        measure += t - root;
    } else if ((sa == 0 && sb > 0) || (sa > 0 && sb == 0)) {
      measure += t - t_prev;
    }
    t_prev = t;
    phi_prev = phi;
  }
  return measure;
}

}  // namespace

double population_index(const Distribution& f, const Distribution& g, int budget) {
  if (f.is_finite_support() && g.is_finite_support())
    return population_index_exact(f.to_finite_support(), g.to_finite_support()).to_double();
  return scan_positive_measure(f, g, 0.0, 1.0, budget);
}

double population_window_measure(const Distribution& f, const Distribution& g, double lo,
                                 double hi, int budget) {
  if (f.is_finite_support() && g.is_finite_support()) {
    auto [fa, ga] = align_supports(f.to_finite_support(), g.to_finite_support());
    double measure = 0.0;
    double q_prev = 0.0;
    for (std::size_t i = 0; i < ga.cum.size(); ++i) {
      double q_i = ga.cum[i].to_double();
      double p_i = fa.cum[i].to_double();
      double a = std::max({q_prev, p_i, lo});
      double b = std::min(q_i, hi);
      if (b > a) measure += b - a;
      q_prev = q_i;
    }
    return measure;
  }
  return scan_positive_measure(f, g, lo, hi, budget);
}

double empirical_window_measure(const std::vector<double>& xs_sorted,
                                const std::vector<double>& ys_sorted, double lo, double hi) {
  const std::int64_t lcm = lcm_i64(static_cast<std::int64_t>(xs_sorted.size()),
                                   static_cast<std::int64_t>(ys_sorted.size()));
  double measure = 0.0;
  sweep_merged_grid(xs_sorted, ys_sorted, lcm,
                    [&](std::int64_t a, std::int64_t b, double xv, double yv) {
                      if (xv <= yv) return;
                      double ca = static_cast<double>(a) / static_cast<double>(lcm);
                      double cb = static_cast<double>(b) / static_cast<double>(lcm);
                      double cut_lo = std::max(ca, lo);
                      double cut_hi = std::min(cb, hi);
                      if (cut_hi > cut_lo) measure += cut_hi - cut_lo;
                    });
  return measure;
}

double localized_deficiency(std::vector<double> xs, std::vector<double> ys,
                            const Distribution& f, const Distribution& g, double t0, double eta,
                            int budget) {
  if (!(eta > 0.0)) throw std::invalid_argument("localized_deficiency: eta must be positive");
  double lo = t0 - eta, hi = t0 + eta;
  if (lo < 0.0 || hi > 1.0)
    throw std::invalid_argument("localized_deficiency: window must lie inside [0,1]");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double empirical = empirical_window_measure(xs, ys, lo, hi);
  double population = population_window_measure(f, g, lo, hi, budget);
  return empirical - population;
}

Rat chung_feller_pvalue(std::int64_t count, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("chung_feller_pvalue: n must be positive");
  if (count < 0 || count > n)
    throw std::invalid_argument("chung_feller_pvalue: count outside {0..n}");
  return Rat(count + 1, n + 1);
}

}  // namespace gros
