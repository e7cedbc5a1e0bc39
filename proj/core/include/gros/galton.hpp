#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gros/distribution.hpp"
#include "gros/rational.hpp"

namespace gros {

struct IndexReport {
  Rat gamma_hat;    // exact measure of {t : F_n^{-1}(t) > G_m^{-1}(t)}
  Rat tie_measure;  // exact measure of the equality set
  std::optional<std::int64_t> count;  // #{i : X_(i) > Y_(i)}; present iff n == m
  std::size_t n = 0;
  std::size_t m = 0;
};

// #{i : X_(i) > Y_(i)} after sorting each sample; defined only for n == m.
std::int64_t galton_count(std::vector<double> xs, std::vector<double> ys);

// Exact sweep over the merged breakpoint grid {i/n} united {j/m}; both step
// quantiles are constant on each cell. Denominators divide lcm(n, m).
IndexReport empirical_index(std::vector<double> xs, std::vector<double> ys);

// Measure of {t : t > F_G(t)}. Finite-support pairs are computed exactly over
// the merged cumulative grid; continuous pairs by sign scan on `budget` cells
// with bisection refinement of the sign changes. Throws std::runtime_error
// naming the unresolved subinterval when the scan budget is exceeded.
double population_index(const Distribution& f, const Distribution& g, int budget = 1 << 14);

// Exact route for finite-support pairs: sum over the shared cumulative grid
// of the cell parts lying strictly above the transform level.
Rat population_index_exact(const FiniteSupport& f, const FiniteSupport& g);

// Empirical window measure of {F_n^{-1} > G_m^{-1}} on (t0-eta, t0+eta) minus
// the population window measure. The window must lie in [0,1].
double localized_deficiency(std::vector<double> xs, std::vector<double> ys,
                            const Distribution& f, const Distribution& g, double t0,
                            double eta, int budget = 1 << 14);

// P(count' <= count) = (count+1)/(n+1) under the continuous equal-size null.
Rat chung_feller_pvalue(std::int64_t count, std::int64_t n);

// Measure of {F_n^{-1} > G_m^{-1}} intersected with (lo, hi), exact cells cut
// at the (real) window ends. Shared by the localized statistics.
double empirical_window_measure(const std::vector<double>& xs_sorted,
                                const std::vector<double>& ys_sorted, double lo, double hi);

// Population window measure of {t in (lo,hi) : t > F_G(t)} by sign scan.
double population_window_measure(const Distribution& f, const Distribution& g, double lo,
                                 double hi, int budget = 1 << 14);

}  // namespace gros
