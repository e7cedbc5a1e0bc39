#pragma once

#include <cstdint>
#include <vector>

#include "gros/distribution.hpp"
#include "gros/rational.hpp"

namespace gros {
namespace oracle {

// Exact pmf of the rank-exceedance count over {0..n} for two interleaved
// samples of n distinct values each, by enumerating all C(2n,n) interleavings
// (balanced lattice paths). n <= 8.
std::vector<Rat> enumerate_galton_distribution(int n);

// Exact index for finite-support laws by comparing the step quantiles on the
// merged cumulative-level grid (independent of the transform-based route).
Rat exact_index_finite(const FiniteSupport& f, const FiniteSupport& g);

// Grid evaluation of the strict-inequality set measure; exact when `cells`
// is a multiple of lcm(n, m) (enforced).
Rat brute_measure(std::vector<double> xs, std::vector<double> ys, std::int64_t cells);

}  // namespace oracle
}  // namespace gros
