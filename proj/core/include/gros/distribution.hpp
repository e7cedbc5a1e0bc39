#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gros/rational.hpp"

namespace gros {

// Law variants. Every variant exposes a left-continuous generalized-inverse
// quantile on (0,1), a right-continuous cdf, and a density where one exists.

struct Uniform01 {};

struct Normal {
  double mu = 0.0;
  double sigma = 1.0;
};

struct StudentTShift {
  double nu = 1.0;
  double mu = 0.0;
};

// Atoms strictly increasing; probs are exact rationals summing to 1.
// Individual probs may be zero (shared grids are zero-padded).
struct FiniteSupport {
  std::vector<double> atoms;
  std::vector<Rat> probs;
  std::vector<Rat> cum;  // cum[i] = probs[0] + ... + probs[i]; cum.back() == 1

  static FiniteSupport make(std::vector<double> atoms, std::vector<Rat> probs);
  static FiniteSupport bernoulli(const Rat& p_one);  // atoms {0,1}
};

// Quantile 1/2 + sgn(t-1/2)|t-1/2|^r; its cdf crosses at 1/2 with the
// reciprocal exponent.
struct PowerCrossQuantile {
  double r = 1.0;
};

// Quantile t + sgn(t-1/2)|t-1/2|^r; the identity-composed transform against
// Uniform01 reproduces the same displacement.
struct PowerTangentQuantile {
  double r = 2.0;
};

struct Empirical {
  std::vector<double> values;  // sorted ascending on construction
};

// Q(t) = offset + slope*(t - center) + power_coef*sgn(t - center)*|t - center|^power
// on the cell (lo, hi]. Cells partition (0,1); affine pieces are power_coef == 0,
// flat pieces (slope == power_coef == 0) encode atoms.
struct QuantilePiece {
  double lo = 0.0;
  double hi = 1.0;
  double center = 0.0;
  double offset = 0.0;
  double slope = 1.0;
  double power_coef = 0.0;
  double power = 1.0;

  double eval(double t) const;
  double derivative(double t) const;
};

struct PiecewiseQuantile {
  std::vector<QuantilePiece> pieces;

  static PiecewiseQuantile make(std::vector<QuantilePiece> pieces);
};

class Distribution {
 public:
  using Variant = std::variant<Uniform01, Normal, StudentTShift, FiniteSupport,
                               PowerCrossQuantile, PowerTangentQuantile, Empirical,
                               PiecewiseQuantile>;

  Distribution() : v_(Uniform01{}) {}
  Distribution(Variant v) : v_(std::move(v)) {}

  // t in [0,1]; the endpoints evaluate the one-sided limits and may return
  // signed infinity on unbounded support.
  double quantile(double t) const;
  double cdf(double x) const;
  std::optional<double> density(double x) const;

  // Inverse-transform sampling, deterministic given the seed.
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

  bool is_finite_support() const;
  // FiniteSupport view (Empirical collapses ties into atoms with k/n weights).
  FiniteSupport to_finite_support() const;

  const Variant& variant() const { return v_; }

  static Distribution from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  Variant v_;
};

// F_G(t) = cdf(F, quantile(G, t)), evaluated literally (left-continuous
// quantile, right-continuous cdf); nondecreasing in t.
double transform_fg(const Distribution& f, const Distribution& g, double t);

// Step quantile of a sorted sample: value with rank ceil(n*t), t in (0,1].
double empirical_quantile(std::span<const double> sorted_sample, double t);

// Rewrites both laws on the union of their atoms with zero-padded probs.
std::pair<FiniteSupport, FiniteSupport> align_supports(const FiniteSupport& f,
                                                       const FiniteSupport& g);

}  // namespace gros
