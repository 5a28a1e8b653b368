// Copyright 2026 the afm authors. Apache 2.0 license.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "afm/errors.hpp"
#include "afm/rng.hpp"
#include "afm/sequence.hpp"

using afm::InputBall;
using afm::Sequence;

namespace {

Sequence random_sequence(afm::Rng& g, std::size_t len, double R) {
  std::vector<double> v(len);
  for (auto& x : v) x = g.uniform(-R, R);
  return Sequence(v);
}

}  // namespace

TEST_CASE("right shift matches the index definition") {
  CHECK(right_shift(Sequence({1, 2, 3}), 1) == Sequence({0, 1, 2, 3}));
  CHECK(right_shift(Sequence({1, 2, 3}), 0) == Sequence({1, 2, 3}));
  CHECK(right_shift(Sequence({5}), 3) == Sequence({0, 0, 0, 5}));

  afm::Rng g(11);
  for (int rep = 0; rep < 50; ++rep) {
    Sequence u = random_sequence(g, 1 + g.uniform_int(0, 12), 2.0);
    int k = static_cast<int>(g.uniform_int(0, 6));
    Sequence shifted = right_shift(u, k);
    for (long t = 0; t < static_cast<long>(shifted.length()) + 3; ++t) {
      double want = t >= k ? u.value(t - k) : 0.0;
      CHECK(shifted.value(t) == want);
    }
  }
}

TEST_CASE("left shift drops a prefix and inverts right shift") {
  CHECK(left_shift(Sequence({1, 2, 3}), 1) == Sequence({2, 3}));
  CHECK(left_shift(Sequence({1, 2, 3}), 0) == Sequence({1, 2, 3}));
  CHECK(left_shift(Sequence({1, 2, 3}), 5).length() == 0);

  afm::Rng g(12);
  for (int rep = 0; rep < 50; ++rep) {
    Sequence u = random_sequence(g, 1 + g.uniform_int(0, 12), 2.0);
    int k = static_cast<int>(g.uniform_int(0, 6));
    CHECK(left_shift(right_shift(u, k), k) == u);
  }
}

TEST_CASE("window zeroes entries outside [t-m, t]") {
  CHECK(window(Sequence({1, 2, 3, 4, 5, 6}), 5, 2) == Sequence({0, 0, 0, 4, 5, 6}));
  CHECK(window(Sequence({1, 2, 3}), 2, 10) == Sequence({1, 2, 3}));
  CHECK(window(Sequence({1, 2, 3}), 1, 0) == Sequence({0, 2}));

  SECTION("t beyond the horizon keeps the stored tail and pads zeros") {
    Sequence w = window(Sequence({1, 2}), 4, 1);
    CHECK(w.length() == 5);
    CHECK(w.value(4) == 0.0);
    CHECK(w.value(1) == 0.0);
  }

  SECTION("idempotence, restriction, and sup-norm contraction") {
    afm::Rng g(13);
    for (int rep = 0; rep < 80; ++rep) {
      Sequence u = random_sequence(g, 1 + g.uniform_int(0, 14), 3.0);
      int t = static_cast<int>(g.uniform_int(0, 16));
      int m = static_cast<int>(g.uniform_int(0, 16));
      Sequence w = window(u, t, m);
      CHECK(window(w, t, m) == w);
      CHECK(w.sup_norm() <= u.sup_norm());
      CHECK(static_cast<long>(w.horizon()) == t);
      if (m >= t) {
        for (long s = 0; s <= t; ++s) CHECK(w.value(s) == u.value(s));
      }
    }
  }
}

TEST_CASE("embed_vector copies and rejects the empty vector") {
  CHECK(afm::embed_vector({0.5, -0.5}) == Sequence({0.5, -0.5}));
  CHECK_THROWS_AS(afm::embed_vector({}), afm::InvalidArgument);
  CHECK(afm::embed_vector({-2, 1}).sup_norm() == 2.0);
}

TEST_CASE("zero extension convention and horizon bookkeeping") {
  Sequence u({1.5, -2.0});
  CHECK(u.value(-1) == 0.0);
  CHECK(u.value(-100) == 0.0);
  CHECK(u.value(2) == 0.0);
  CHECK(u.value(0) == 1.5);
  CHECK(u.horizon() == 1);
  CHECK(Sequence().horizon() == -1);
  CHECK(Sequence::zeros(4) == Sequence({0, 0, 0, 0}));
  CHECK(Sequence::constant(3, 2.5) == Sequence({2.5, 2.5, 2.5}));
}

TEST_CASE("non-finite entries are rejected") {
  CHECK_THROWS_AS(Sequence({1.0, std::numeric_limits<double>::quiet_NaN()}), afm::NonFinite);
  CHECK_THROWS_AS(Sequence({std::numeric_limits<double>::infinity()}), afm::NonFinite);
}

TEST_CASE("input ball membership") {
  InputBall ball{1.0};
  CHECK(ball.contains(Sequence({1.0, -1.0, 0.25})));
  CHECK_FALSE(ball.contains(Sequence({1.0 + 1e-9})));
  CHECK_THROWS_AS(InputBall{0.0}, afm::InvalidArgument);
  CHECK_THROWS_AS(InputBall{-2.0}, afm::InvalidArgument);
}

TEST_CASE("csv and json round trips are exact") {
  afm::Rng g(14);
  Sequence u = random_sequence(g, 9, 1e6);

  std::istringstream csv(afm::to_csv(u));
  CHECK(afm::sequence_from_csv(csv) == u);

  nlohmann::json j = u;
  CHECK(j.is_array());
  CHECK(j.get<Sequence>() == u);
}

TEST_CASE("csv reader skips blanks and comments") {
  std::istringstream in("# header\n1.5\n\n-2\n");
  CHECK(afm::sequence_from_csv(in) == Sequence({1.5, -2.0}));
}
