#include "gros/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace gros {
namespace oracle {

std::vector<Rat> enumerate_galton_distribution(int n) {
  if (n < 1 || n > 8)
    throw std::invalid_argument("enumerate_galton_distribution: n must be in 1..8");
  const int total = 2 * n;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n) + 1, 0);
  std::int64_t interleavings = 0;
  // Bitmask over the 2n sorted positions: bit set = position holds an X value.
  for (std::uint32_t mask = 0; mask < (1u << total); ++mask) {
    if (std::popcount(mask) != n) continue;
    ++interleavings;
    // Rank-by-rank comparison: X_(i) > Y_(i) iff the i-th X position comes
    // after the i-th Y position in the global order.
    int exceed = 0, xi = 0, yi = 0;
    std::vector<int> xpos(static_cast<std::size_t>(n)), ypos(static_cast<std::size_t>(n));
    for (int pos = 0; pos < total; ++pos) {
      if (mask & (1u << pos))
        xpos[static_cast<std::size_t>(xi++)] = pos;
      else
        ypos[static_cast<std::size_t>(yi++)] = pos;
    }
    for (int i = 0; i < n; ++i)
      if (xpos[static_cast<std::size_t>(i)] > ypos[static_cast<std::size_t>(i)]) ++exceed;
    counts[static_cast<std::size_t>(exceed)] += 1;
  }
  std::vector<Rat> pmf;
  pmf.reserve(counts.size());
  for (std::int64_t c : counts) pmf.push_back(Rat(c, interleavings));
  return pmf;
}

Rat exact_index_finite(const FiniteSupport& f, const FiniteSupport& g) {
  auto [fa, ga] = align_supports(f, g);
  // Merged cumulative levels; on each cell both quantiles are constant atoms.
  std::vector<Rat> levels;
  levels.reserve(fa.cum.size() + ga.cum.size());
  for (const Rat& v : fa.cum) levels.push_back(v);
  for (const Rat& v : ga.cum) levels.push_back(v);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  auto atom_at = [](const FiniteSupport& fs, const Rat& upper_level) {
    // Quantile value on a cell whose right endpoint is upper_level.
    for (std::size_t i = 0; i < fs.cum.size(); ++i)
      if (upper_level <= fs.cum[i]) return fs.atoms[i];
    return fs.atoms.back();
  };

  Rat total(0);
  Rat prev(0);
  for (const Rat& level : levels) {
    if (level > prev) {
      if (atom_at(fa, level) > atom_at(ga, level)) total += level - prev;
      prev = level;
    }
  }
  return total;
}

Rat brute_measure(std::vector<double> xs, std::vector<double> ys, std::int64_t cells) {
  if (xs.empty() || ys.empty()) throw std::invalid_argument("brute_measure: empty sample");
  const std::int64_t lcm =
      lcm_i64(static_cast<std::int64_t>(xs.size()), static_cast<std::int64_t>(ys.size()));
  if (cells < 1 || cells % lcm != 0)
    throw std::invalid_argument("brute_measure: cells must be a positive multiple of lcm(n,m)");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const auto n = static_cast<std::int64_t>(xs.size());
  const auto m = static_cast<std::int64_t>(ys.size());
  std::int64_t hits = 0;
  for (std::int64_t k = 1; k <= cells; ++k) {
    // Rank ceil(n*k/cells) at the right endpoint of cell k, in integer
    // arithmetic; the step quantiles are constant on the cell.
    auto xi = static_cast<std::size_t>((k * n + cells - 1) / cells) - 1;
    auto yj = static_cast<std::size_t>((k * m + cells - 1) / cells) - 1;
    if (xs[xi] > ys[yj]) ++hits;
  }
  return Rat(hits, cells);
}

}  // namespace oracle
}  // namespace gros
