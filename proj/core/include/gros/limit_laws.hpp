#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gros/contact.hpp"
#include "gros/rng.hpp"

namespace gros {

struct BridgePath {
  std::size_t grid = 0;        // N, a power of two
  std::vector<double> values;  // N+1 values on {0, 1/N, ..., 1}; endpoints 0
};

// Gaussian-increment random walk pinned to 0 at both ends.
BridgePath sample_bridge(std::size_t grid, std::uint64_t seed);
BridgePath sample_bridge(std::size_t grid, Rng& rng);

// Occupation measure of {path > 0} on a union of subintervals of [0,1],
// left-endpoint indicator per grid cell.
double occupation_positive(const BridgePath& path,
                           const std::vector<std::pair<double, double>>& intervals);

// Exact joint draw of a standard bridge at finitely many points
// (covariance s(1-t) for s <= t), via Cholesky.
std::vector<double> bridge_values_at(const std::vector<double>& points, Rng& rng);

// Inner-contact limit. With b_lambda = b1/sqrt(lambda) - b2/sqrt(1-lambda)
// evaluated at t0, r0 = max(r_l, r_r):
//   r0 > 1, or r0 = 1 with c_l*c_r > 0:
//     sgn(c_l) (pospart_or_negpart(b_lambda, c_l)/|c_l|)^{1/r0} [r_l = r0]
//   + sgn(c_r) (pospart_or_negpart(b_lambda, c_r)/|c_r|)^{1/r0} [r_r = r0];
//   r0 = 1 with c_l*c_r < 0:
//     part(b_lambda, c_l)/c_l + part(b_lambda, c_r)/c_r + sgn(c_l) b2/sqrt(1-lambda),
// where part(x, c) is x^+ when c > 0 and x^- when c < 0.
double sample_t_inner(double t0, double r_l, double r_r, double c_l, double c_r, double lambda,
                      Rng& rng);
// Same functional on externally supplied bridge values (shared draws).
double t_inner_from_bridges(double b1, double b2, double r_l, double r_r, double c_l, double c_r,
                            double lambda);

// Extremal-contact limit at an endpoint. r > 1: signed occupation measure of
// {sgn(c) W(y) > sqrt(lambda(1-lambda)) |c| y^r} for a Brownian motion W on a
// step grid with an adaptive horizon. r = 1: renewal-sum integral
//   end 0:  sgn(c) * l{y > 0 : sgn(c) (1-lambda) S1_{ceil(lambda y)} >
//                              sgn(c) lambda (1+c) S2_{ceil((1-lambda) y)}},
// integrated exactly between the ceiling breakpoints {j/lambda, j/(1-lambda)};
// end 1 is the mirror image (c -> -c, overall sign flipped).
double sample_t_extremal(int end, double r, double c, double lambda, Rng& rng);

// Virtual-contact limits (shared-bridge versions take b1 = B1(t0), b2 = B2(t0)).
double virtual_from_bridges(ContactClass cls, double b1, double b2, double lambda);
double sample_virtual(ContactClass cls, double t0, double lambda, Rng& rng);

// Sum over the maximal-effective-order contacts: inner terms share one bridge
// pair evaluated jointly at their locations, extremal terms draw independent
// drivers, via_gf terms flip sign and swap (lambda, b1) <-> (1-lambda, b2).
// Returns 0 when the maximal set is empty (degenerate limit).
double sample_global_limit(const std::vector<ContactPoint>& contacts, double lambda, Rng& rng);

// Finite-support limit: one shared bridge pair evaluated at all listed levels,
//   sum_H b1/sqrt(lambda) - sum_V b2/sqrt(1-lambda)
//   + sum_U (b1/sqrt(lambda) - b2/sqrt(1-lambda))^+
//   - sum_L (b1/sqrt(lambda) - b2/sqrt(1-lambda))^-.
double sample_finite_support_limit(const std::vector<double>& horizontal,
                                   const std::vector<double>& vertical,
                                   const std::vector<double>& upper,
                                   const std::vector<double>& lower, double lambda, Rng& rng);

// Which limiting functional to sample, JSON-configurable.
struct OccupationSpec {
  std::size_t grid = 4096;
  std::vector<std::pair<double, double>> intervals;
};
struct InnerTSpec {
  double t0, r_l, r_r, c_l, c_r, lambda;
};
struct ExtremalTSpec {
  int end;  // 0 or 1
  double r, c, lambda;
};
struct VirtualSpec {
  ContactClass cls;
  double t0, lambda;
};
struct GlobalSumSpec {
  std::vector<ContactPoint> contacts;
  double lambda;
};
struct FiniteSupportSumSpec {
  std::vector<double> horizontal, vertical, upper, lower;
  double lambda;
};

struct LimitLawSpec {
  using Variant = std::variant<OccupationSpec, InnerTSpec, ExtremalTSpec, VirtualSpec,
                               GlobalSumSpec, FiniteSupportSumSpec>;
  Variant v;

  double sample(Rng& rng) const;
  static LimitLawSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

}  // namespace gros
