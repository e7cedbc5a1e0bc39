#include "doctest.h"

#include <random>

#include "gros/rational.hpp"

using gros::Rat;

TEST_CASE("rational construction and reduction") {
  CHECK(Rat(6, 8) == Rat(3, 4));
  CHECK(Rat(-6, 8) == Rat(-3, 4));
  CHECK(Rat(6, -8) == Rat(-3, 4));
  CHECK(Rat(0, 5) == Rat(0));
  CHECK(Rat(3, 4).to_double() == doctest::Approx(0.75));
  CHECK_THROWS_AS(Rat(1, 0), std::domain_error);
}

TEST_CASE("rational arithmetic is exact") {
  CHECK(Rat(1, 3) + Rat(1, 6) == Rat(1, 2));
  CHECK(Rat(1, 2) - Rat(1, 3) == Rat(1, 6));
  CHECK(Rat(2, 3) * Rat(3, 4) == Rat(1, 2));
  CHECK(Rat(1, 2) / Rat(1, 4) == Rat(2));
  CHECK(-Rat(1, 2) == Rat(-1, 2));
  CHECK_THROWS_AS(Rat(1) / Rat(0), std::domain_error);
}

TEST_CASE("rational ordering") {
  CHECK(Rat(1, 3) < Rat(1, 2));
  CHECK(Rat(-1, 2) < Rat(0));
  CHECK(Rat(7, 10) > Rat(2, 5));
  CHECK(Rat(2, 4) <= Rat(1, 2));
  CHECK(Rat(2, 4) >= Rat(1, 2));
}

TEST_CASE("rational parse and print round-trip") {
  CHECK(Rat::parse("3/8") == Rat(3, 8));
  CHECK(Rat::parse("-3/8") == Rat(-3, 8));
  CHECK(Rat::parse("5") == Rat(5));
  CHECK(Rat::parse("0.375") == Rat(3, 8));
  CHECK(Rat::parse("0.4") == Rat(2, 5));
  CHECK(Rat::parse("-0.25") == Rat(-1, 4));
  CHECK(Rat(3, 8).str() == "3/8");
  CHECK(Rat(5).str() == "5");
  CHECK(Rat::parse(Rat(-7, 12).str()) == Rat(-7, 12));
  CHECK_THROWS(Rat::parse(""));
}

TEST_CASE("rational sums of lcm-grid cells stay exact") {
  for (std::int64_t k : {7, 12, 360, 9999}) {
    Rat total(0);
    for (std::int64_t i = 0; i < k; ++i) total += Rat(1, k);
    CHECK(total == Rat(1));
  }
}

TEST_CASE("rational random field identities") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::int64_t> num(-40, 40), den(1, 40);
  for (int trial = 0; trial < 500; ++trial) {
    Rat a(num(rng), den(rng)), b(num(rng), den(rng)), c(num(rng), den(rng));
    CHECK((a + b) + c == a + (b + c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a - a == Rat(0));
    if (a != Rat(0)) CHECK(a / a == Rat(1));
  }
}

TEST_CASE("rational overflow is detected not wrapped") {
  Rat big(INT64_MAX / 2, 1);
  CHECK_THROWS_AS(big * Rat(4), std::overflow_error);
}

TEST_CASE("gcd and lcm helpers") {
  CHECK(gros::gcd_i64(12, 18) == 6);
  CHECK(gros::lcm_i64(4, 6) == 12);
  CHECK(gros::lcm_i64(2000, 2000) == 2000);
  CHECK(gros::lcm_i64(7, 13) == 91);
}
