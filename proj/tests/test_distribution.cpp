#include "doctest.h"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "gros/distribution.hpp"
#include "gros/rng.hpp"

using namespace gros;

namespace {

Distribution bernoulli(double p_one_num, double p_one_den) {
  Rat p(static_cast<std::int64_t>(p_one_num), static_cast<std::int64_t>(p_one_den));
  return Distribution(FiniteSupport::bernoulli(p));
}

const double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("uniform01 quantile and cdf are the identity") {
  Distribution u{Uniform01{}};
  CHECK(u.quantile(0.3) == doctest::Approx(0.3));
  CHECK(u.cdf(0.7) == doctest::Approx(0.7));
  CHECK(u.cdf(-1.0) == 0.0);
  CHECK(u.cdf(2.0) == 1.0);
}

TEST_CASE("bernoulli quantile follows the left-continuous inverse") {
  Distribution b = bernoulli(3, 10);  // P(X=1) = 3/10, jump of the quantile at 7/10
  CHECK(b.quantile(0.69) == 0.0);
  CHECK(b.quantile(0.7) == 0.0);   // t <= 1-p picks the lower atom
  CHECK(b.quantile(0.7 + 1e-12) == 1.0);
  CHECK(b.quantile(1.0) == 1.0);
  CHECK(b.cdf(0.0) == doctest::Approx(0.7));
  CHECK(b.cdf(0.5) == doctest::Approx(0.7));
  CHECK(b.cdf(1.0) == doctest::Approx(1.0));
  CHECK(b.cdf(-0.5) == 0.0);
}

TEST_CASE("power cross quantile and cdf match the closed forms") {
  for (double r : {0.5, 1.0, 2.0, 3.0}) {
    Distribution f{PowerCrossQuantile{r}};
    for (double t : {0.05, 0.3, 0.5, 0.77, 0.95}) {
      double expected = 0.5 + (t > 0.5 ? 1 : (t < 0.5 ? -1 : 0)) * std::pow(std::fabs(t - 0.5), r);
      CHECK(f.quantile(t) == doctest::Approx(expected).epsilon(1e-12));
    }
    for (double x : {0.3, 0.5, 0.6}) {
      double expected =
          0.5 + (x > 0.5 ? 1 : (x < 0.5 ? -1 : 0)) * std::pow(std::fabs(x - 0.5), 1.0 / r);
      CHECK(f.cdf(x) == doctest::Approx(std::clamp(expected, 0.0, 1.0)).epsilon(1e-12));
    }
    CHECK(f.cdf(f.quantile(0.0) - 0.01) == 0.0);
    CHECK(f.cdf(f.quantile(1.0) + 0.01) == 1.0);
  }
}

TEST_CASE("power tangent transform against uniform reproduces the displacement") {
  Distribution u{Uniform01{}};
  for (double r : {1.0, 1.5, 2.0}) {
    Distribution g{PowerTangentQuantile{r}};
    for (double t : {0.2, 0.4, 0.5, 0.6, 0.9}) {
      double expected = t + (t > 0.5 ? 1 : (t < 0.5 ? -1 : 0)) * std::pow(std::fabs(t - 0.5), r);
      CHECK(transform_fg(u, g, t) == doctest::Approx(std::clamp(expected, 0.0, 1.0)).epsilon(1e-10));
    }
  }
}

TEST_CASE("normal and student quantile/cdf are mutually inverse to 1e-12") {
  Distribution n{Normal{0.3, 2.0}};
  Distribution s{StudentTShift{3.5, -1.0}};
  for (double t : {1e-8, 1e-4, 0.2, 0.5, 0.9, 1 - 1e-6}) {
    CHECK(n.cdf(n.quantile(t)) == doctest::Approx(t).epsilon(1e-12));
    CHECK(s.cdf(s.quantile(t)) == doctest::Approx(t).epsilon(1e-12));
  }
  CHECK(n.quantile(0.0) == -kInf);
  CHECK(n.quantile(1.0) == kInf);
}

TEST_CASE("student nu=1 matches the arctangent closed form") {
  Distribution c{StudentTShift{1.0, 0.0}};
  for (double t : {0.1, 0.25, 0.5, 0.8}) {
    double expected = std::tan(3.14159265358979323846 * (t - 0.5));
    CHECK(c.quantile(t) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("galois duality: t <= cdf(x) iff quantile(t) <= x") {
  std::vector<Distribution> laws = {
      Distribution{Uniform01{}},
      Distribution{Normal{0.0, 1.0}},
      Distribution{StudentTShift{2.0, 0.5}},
      bernoulli(2, 5),
      Distribution{PowerCrossQuantile{0.5}},
      Distribution{PowerTangentQuantile{2.0}},
      Distribution{Empirical{{-1.0, 0.25, 0.25, 2.0}}},
  };
  for (const auto& d : laws) {
    for (int i = 1; i < 40; ++i) {
      double t = i / 40.0;
      for (int j = -8; j <= 8; ++j) {
        double x = j / 4.0;
        bool lhs = t <= d.cdf(x) + 1e-12;
        bool rhs = d.quantile(t) <= x + 1e-9;
        CHECK(lhs == rhs);
      }
    }
  }
}

TEST_CASE("quantile of cdf never overshoots") {
  std::vector<Distribution> laws = {Distribution{Uniform01{}}, bernoulli(1, 3),
                                    Distribution{PowerTangentQuantile{1.5}}};
  for (const auto& d : laws)
    for (double x : {-0.2, 0.1, 0.4, 0.9, 1.2}) {
      double t = d.cdf(x);
      if (t > 0.0 && t < 1.0) CHECK(d.quantile(t) <= x + 1e-9);
    }
}

TEST_CASE("transform fixed points on the image of a common law") {
  Distribution u{Uniform01{}};
  for (double t : {0.1, 0.5, 0.9}) CHECK(transform_fg(u, u, t) == doctest::Approx(t));
  // Continuous F: F_G(t) = t everywhere for F = G.
  Distribution n{Normal{0.0, 1.0}};
  for (double t : {0.05, 0.37, 0.93})
    CHECK(transform_fg(n, n, t) == doctest::Approx(t).epsilon(1e-12));
  // Bernoulli F = G: fixed points on (0,1] are exactly {1-p, 1}.
  Distribution b = bernoulli(3, 10);
  CHECK(transform_fg(b, b, 0.7) == doctest::Approx(0.7));
  CHECK(transform_fg(b, b, 1.0) == doctest::Approx(1.0));
  CHECK(transform_fg(b, b, 0.3) > 0.3 + 1e-9);
  CHECK(transform_fg(b, b, 0.9) > 0.9 + 1e-9);
}

TEST_CASE("finite-support transform is the cumulative step function") {
  auto f = FiniteSupport::make({0.0, 1.0, 2.0}, {Rat(1, 4), Rat(1, 2), Rat(1, 4)});
  auto g = FiniteSupport::make({0.0, 1.0, 2.0}, {Rat(1, 2), Rat(1, 4), Rat(1, 4)});
  Distribution fd{f}, gd{g};
  // F_G(t) = P_i for t in (Q_{i-1}, Q_i].
  CHECK(transform_fg(fd, gd, 0.2) == doctest::Approx(0.25));
  CHECK(transform_fg(fd, gd, 0.5) == doctest::Approx(0.25));
  CHECK(transform_fg(fd, gd, 0.6) == doctest::Approx(0.75));
  CHECK(transform_fg(fd, gd, 0.75) == doctest::Approx(0.75));
  CHECK(transform_fg(fd, gd, 0.8) == doctest::Approx(1.0));
}

TEST_CASE("transform is nondecreasing") {
  Distribution f{PowerCrossQuantile{2.0}};
  Distribution g{PowerTangentQuantile{1.5}};
  double prev = -1.0;
  for (int i = 1; i < 200; ++i) {
    double v = transform_fg(f, g, i / 200.0);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("sampling is deterministic and inverse-transform") {
  Distribution atom{FiniteSupport::make({3.5}, {Rat(1)})};
  auto xs = atom.sample(5, 99);
  for (double v : xs) CHECK(v == 3.5);

  Distribution u{Uniform01{}};
  auto a = u.sample(1000, 2024), b = u.sample(1000, 2024);
  CHECK(a == b);
  double mean = 0;
  for (double v : a) mean += v / 1000.0;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.1));
  CHECK_THROWS(u.sample(0, 1));
}

TEST_CASE("empirical quantile uses the ceiling rank") {
  std::vector<double> one = {5.0};
  CHECK(empirical_quantile(one, 0.7) == 5.0);
  std::vector<double> three = {1.0, 2.0, 3.0};
  CHECK(empirical_quantile(three, 1.0 / 3.0) == 1.0);
  CHECK(empirical_quantile(three, 1.0 / 3.0 + 1e-9) == 2.0);
  std::vector<double> two = {1.0, 3.0};
  CHECK(empirical_quantile(two, 0.5) == 1.0);
  CHECK(empirical_quantile(two, 0.75) == 3.0);
  std::vector<double> empty;
  CHECK_THROWS_AS(empirical_quantile(empty, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(empirical_quantile(two, 0.0), std::domain_error);
}

TEST_CASE("finite support validation") {
  CHECK_THROWS(FiniteSupport::make({1.0, 0.5}, {Rat(1, 2), Rat(1, 2)}));
  CHECK_THROWS(FiniteSupport::make({0.0, 1.0}, {Rat(1, 2), Rat(1, 3)}));
  CHECK_THROWS(FiniteSupport::make({0.0, 1.0}, {Rat(3, 2), Rat(-1, 2)}));
  // zero-probability atoms are allowed (shared grids)
  auto fs = FiniteSupport::make({0.0, 1.0, 2.0}, {Rat(1, 2), Rat(0), Rat(1, 2)});
  Distribution d{fs};
  CHECK(d.quantile(0.5) == 0.0);
  CHECK(d.quantile(0.6) == 2.0);
}

TEST_CASE("piecewise quantile evaluates affine plus power pieces") {
  // Q(t) = t + 0.5 sgn(t-1/2)|t-1/2|^2 split into two pieces.
  QuantilePiece left{0.0, 0.5, 0.5, 0.5, 1.0, 0.5, 2.0};
  QuantilePiece right{0.5, 1.0, 0.5, 0.5, 1.0, 0.5, 2.0};
  Distribution d{PiecewiseQuantile::make({left, right})};
  for (double t : {0.25, 0.5, 0.8}) {
    double expected = t + 0.5 * (t > 0.5 ? 1 : (t < 0.5 ? -1 : 0)) * std::pow(std::fabs(t - 0.5), 2.0);
    CHECK(d.quantile(t) == doctest::Approx(expected).epsilon(1e-12));
  }
  // cdf inverts it
  for (double t : {0.1, 0.45, 0.83}) CHECK(d.cdf(d.quantile(t)) == doctest::Approx(t).epsilon(1e-9));
  CHECK_THROWS(PiecewiseQuantile::make({QuantilePiece{0.0, 0.4, 0, 0, 1, 0, 1}}));
  // decreasing pieces are rejected
  CHECK_THROWS(PiecewiseQuantile::make({QuantilePiece{0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 1.0}}));
}

TEST_CASE("endpoint quantiles are one-sided limits") {
  Distribution pc{PowerCrossQuantile{0.5}};
  CHECK(pc.quantile(0.0) == doctest::Approx(0.5 - std::pow(0.5, 0.5)));
  CHECK(pc.quantile(1.0) == doctest::Approx(0.5 + std::pow(0.5, 0.5)));
  Distribution e{Empirical{{1.0, 2.0}}};
  CHECK(e.quantile(0.0) == 1.0);
  CHECK(e.quantile(1.0) == 2.0);
}

TEST_CASE("distribution json round-trip") {
  std::vector<nlohmann::json> specs = {
      {{"kind", "uniform01"}},
      {{"kind", "normal"}, {"mu", 0.5}, {"sigma", 2.0}},
      {{"kind", "student_t_shift"}, {"nu", 1.0}, {"mu", 1.0}},
      {{"kind", "finite_support"}, {"atoms", {0.0, 1.0}}, {"probs", {"3/8", "5/8"}}},
      {{"kind", "power_cross_quantile"}, {"r", 0.5}},
      {{"kind", "power_tangent_quantile"}, {"r", 2.0}},
      {{"kind", "empirical"}, {"values", {3.0, 1.0, 2.0}}},
  };
  for (const auto& j : specs) {
    Distribution d = Distribution::from_json(j);
    Distribution d2 = Distribution::from_json(d.to_json());
    CHECK(d.to_json() == d2.to_json());
  }
  // exact fractions survive serialization
  Distribution b = Distribution::from_json(
      {{"kind", "finite_support"}, {"atoms", {0.0, 1.0}}, {"probs", {"3/8", "5/8"}}});
  CHECK(b.to_json()["probs"][0].get<std::string>() == "3/8");
  // decimal probabilities parse exactly
  Distribution b2 = Distribution::from_json(
      {{"kind", "finite_support"}, {"atoms", {0.0, 1.0}}, {"probs", {0.4, 0.6}}});
  CHECK(b2.to_finite_support().probs[0] == Rat(2, 5));
  CHECK_THROWS(Distribution::from_json({{"kind", "nope"}}));
}

TEST_CASE("empirical collapses to finite support with tie weights") {
  Distribution e{Empirical{{1.0, 2.0, 2.0, 5.0}}};
  FiniteSupport fs = e.to_finite_support();
  REQUIRE(fs.atoms.size() == 3);
  CHECK(fs.probs[1] == Rat(1, 2));
}

TEST_CASE("align_supports zero-pads onto the union grid") {
  auto f = FiniteSupport::make({0.0, 2.0}, {Rat(1, 2), Rat(1, 2)});
  auto g = FiniteSupport::make({1.0, 2.0}, {Rat(1, 4), Rat(3, 4)});
  auto [fa, ga] = align_supports(f, g);
  REQUIRE(fa.atoms.size() == 3);
  CHECK(fa.probs[1] == Rat(0));
  CHECK(ga.probs[0] == Rat(0));
  CHECK(fa.atoms == ga.atoms);
}

TEST_CASE("densities where present") {
  Distribution n{Normal{0.0, 1.0}};
  CHECK(n.density(0.0).value() == doctest::Approx(0.3989422804014327));
  Distribution pt{PowerTangentQuantile{2.0}};
  CHECK(pt.density(0.5).value() == doctest::Approx(1.0).epsilon(1e-6));
  Distribution b = bernoulli(1, 2);
  CHECK_FALSE(b.density(0.0).has_value());
}
