#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gros/distribution.hpp"
#include "gros/rational.hpp"

namespace gros {

enum class ContactPosition { inner, extremal };

enum class ContactClass {
  crossing,
  tangency,
  virtual_horizontal_crossing,
  virtual_vertical_crossing,
  upper_tangency,
  lower_tangency,
};

// Which composite transform was expanded around the point. via_gf means the
// roles of the samples were exchanged (the first transform failed the local
// Lipschitz probe) and contributions pick up a sign flip and lambda -> 1-lambda.
enum class ContactSource { via_fg, via_gf };

std::string to_string(ContactClass c);
std::string to_string(ContactPosition p);
std::string to_string(ContactSource s);

struct ContactPoint {
  double t0 = 0.0;
  ContactPosition position = ContactPosition::inner;
  ContactClass cls = ContactClass::crossing;
  ContactSource source = ContactSource::via_fg;
  // Intensities/constants; extremal points carry exactly one side. Virtual
  // classes carry implied unit intensities and unit-magnitude constants.
  std::optional<double> r_left, r_right;
  std::optional<double> c_left, c_right;
  std::optional<double> r_left_stderr, r_right_stderr;
  std::optional<double> r_left_snapped, r_right_snapped;

  double effective_order() const;  // max(r_l, r_r), minus 1/2 when extremal
};

enum class Side { left, right };

struct IntensityEstimate {
  double r = 0.0;        // log-log slope over the dyadic grid
  double c = 0.0;        // signed constant exp(intercept) * sgn(displacement)
  double r_stderr = 0.0;
  double r_snapped = 0.0;  // nearest eighth within 2 stderr, else raw
  int points_used = 0;
  bool locally_flat = false;  // displacement vanished on the whole grid
};

// Least-squares fit of log|Delta(h_j)| against log h_j on h_j = eta*2^{-j},
// j = 3..14, where Delta(h) = F_G(t0+h) - (t0+h). Points below the numeric
// resolution floor are dropped; all points flat => locally_flat.
IntensityEstimate estimate_intensity(const Distribution& f, const Distribution& g, double t0,
                                     Side side, double eta);

struct FiniteClassification {
  std::vector<Rat> horizontal;  // crossing levels contributing via the first sample
  std::vector<Rat> vertical;    // crossing levels contributing via the second sample
  std::vector<Rat> upper;       // one-sided (nonnegative) tangency levels
  std::vector<Rat> lower;       // one-sided (nonpositive) tangency levels
};

// Exact four-way classification on the shared atom grid. With cumulative
// levels P_i (first law) and Q_i (second law), for i = 1..k-1:
//   horizontal: P_i with Q_{i-1} < P_i < Q_i   (first law jumps across the
//               value the second holds),
//   vertical:   Q_i with P_i < Q_i < P_{i+1}   (second law jumps across the
//               value the first holds),
//   upper:      Q_i with Q_{i-1} < Q_i = P_i < P_{i+1},
//   lower:      P_i with P_{i-1} < P_i = Q_{i-1} < Q_i.
FiniteClassification classify_finite_support(const FiniteSupport& f, const FiniteSupport& g);

// All contact points between the quantile functions: strict fixed points of
// either composite transform, jump straddles of the identity, and extremal
// contacts where a one-sided transform limit reaches 0 or 1. Finite-support
// pairs go through the exact classification; other pairs are scanned on
// `budget` cells. Throws std::runtime_error when the scan budget is exceeded.
std::vector<ContactPoint> find_contacts(const Distribution& f, const Distribution& g,
                                        int budget = 1 << 14);

// Single-point analysis: intensity fits on both available sides (one side at
// the endpoints) with the role-swap probe when the first transform is not
// locally Lipschitz.
ContactPoint analyze_contact_point(const Distribution& f, const Distribution& g, double t0,
                                   double eta = 0.08);

struct SmoothContactInfo {
  int order = 0;           // smallest k with the k-th derivative away from 0
  double h_derivative = 0.0;
  double x0 = 0.0;         // quantile of the first law at t0
};

// Density route for smooth pairs: order-1 value f(x0)/g(x0) - 1, higher
// orders (f^(k-1)(x0) - g^(k-1)(x0)) / f(x0)^k with right-sided difference
// stencils (expansions here are one-sided). Falls back to right-sided
// differences of the transform when a density is unavailable.
SmoothContactInfo smooth_contact_constants(const Distribution& f, const Distribution& g,
                                           double t0, int kmax);

}  // namespace gros
