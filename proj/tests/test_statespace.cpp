// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Oracles:
//  - linear system x+ = 0.5x + 0.5u from rest under u = 1: states
//    0, 0.5, 0.75, 0.875 so the t=3 value is 0.875 exactly in binary fp.
//  - trajectory-deviation inequality at u = 1, u~ = 0, xi = 0, t = 3 with
//    beta(C, t) = C 0.5^t: both sides equal 0.875.
//  - exponential certificate arithmetic at kappa=1, mu=0.25, L=R=1,
//    eps=0.01: 2 log(800) / log(4), ceil 10; omega bound at 0.1 is 0.2.
//  - invariant ball for x+ = 0.5x + u, |u| <= 1: radius 1/(1-0.5) = 2.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "afm/beta.hpp"
#include "afm/certificate.hpp"
#include "afm/errors.hpp"
#include "afm/registry.hpp"
#include "afm/rng.hpp"
#include "afm/sequence.hpp"
#include "afm/statespace.hpp"
#include "afm/tcn.hpp"

using afm::BetaFunction;
using afm::DemidovichCertificate;
using afm::Sequence;
using afm::StateSpaceSystem;

TEST_CASE("flow iterates the one-step map and satisfies the semiflow law") {
  auto built = afm::make_linear(0.5, 0.5, 1.0);
  Sequence ones = Sequence::constant(8, 1.0);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
  CHECK(afm::flow(built.sys, x0, ones, 0, 3)[0] == 0.875);
  CHECK(afm::flow(built.sys, x0, ones, 0, 0)[0] == 0.0);
  CHECK_THROWS_AS(afm::flow(built.sys, x0, ones, 3, 2), afm::InvalidArgument);

  // phi(t, r) = phi(t, s) o phi(s, r) exactly: same op sequence.
  afm::Rng g(17);
  std::vector<double> raw(21);
  for (double& v : raw) v = g.uniform(-1.0, 1.0);
  Sequence u{raw};
  Eigen::VectorXd xi(1);
  xi[0] = 0.3;
  for (auto [r, s, t] : {std::array<int, 3>{0, 4, 9}, {2, 2, 7}, {1, 6, 6}}) {
    Eigen::VectorXd direct = afm::flow(built.sys, xi, u, r, t);
    Eigen::VectorXd mid = afm::flow(built.sys, xi, u, r, s);
    Eigen::VectorXd composed = afm::flow(built.sys, mid, u, s, t);
    CHECK(direct[0] == composed[0]);
  }
}

TEST_CASE("io map of a system evaluates from rest") {
  auto built = afm::make_linear(0.5, 0.5, 1.0);
  afm::IoMap F = afm::io_map_of(built.sys);
  CHECK(F.declared_causal);
  CHECK(F.declared_time_invariant);
  Sequence ones = Sequence::constant(8, 1.0);
  CHECK(F(ones, 3) == 0.875);

  StateSpaceSystem zero_out = built.sys;
  zero_out.g = [](const Eigen::VectorXd&) { return 0.0; };
  zero_out.output_feedthrough = nullptr;
  afm::IoMap Z = afm::io_map_of(zero_out);
  CHECK(Z(ones, 5) == 0.0);

  CHECK(afm::check_causality(F, afm::InputBall{1.0}, 30, 12, 11).pass());
}

TEST_CASE("sampled incremental gain of the linear system is exactly geometric") {
  auto built = afm::make_linear(0.5, 0.5, 1.0);
  std::vector<double> bins{0.25, 0.5, 1.0};
  BetaFunction beta = afm::estimate_beta(built.sys, 1.0, 16, 24, 21, bins, 1.0);
  for (double c : bins) {
    for (long tau : {0L, 1L, 3L, 7L}) {
      CHECK(beta(c, tau) == Catch::Approx(c * std::pow(0.5, tau)).margin(1e-12));
    }
  }
  CHECK(beta(0.0, 4) == 0.0);
  // Monotone in C, nonincreasing in tau by construction.
  CHECK(beta(0.25, 2) <= beta(0.5, 2));
  CHECK(beta(0.5, 3) <= beta(0.5, 2));
}

TEST_CASE("trajectory deviation inequality holds with equality for aligned inputs") {
  auto built = afm::make_linear(0.5, 0.5, 1.0);
  BetaFunction beta = BetaFunction::exponential(1.0, 0.5);
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(1);

  afm::Prop2Result r =
      afm::prop2_check(built.sys, beta, Sequence::constant(8, 1.0), Sequence::zeros(8), xi, 3);
  CHECK(r.lhs == Catch::Approx(0.875).margin(1e-12));
  CHECK(r.rhs == Catch::Approx(0.875).margin(1e-12));

  afm::Prop2Result same =
      afm::prop2_check(built.sys, beta, Sequence::constant(8, 0.7), Sequence::constant(8, 0.7), xi, 5);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);
}

TEST_CASE("trajectory deviation inequality survives 1000 random triples") {
  auto lin = afm::make_linear(0.5, 0.5, 1.0);
  auto tanh_sys = afm::make_contractive_tanh(0.7, 1.0);
  struct Case {
    const StateSpaceSystem* sys;
    BetaFunction beta;
  };
  std::vector<Case> cases{{&lin.sys, BetaFunction::exponential(1.0, 0.5)},
                          {&tanh_sys.sys, *tanh_sys.exact_beta}};
  afm::Rng root(31);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    afm::Rng g = root.split(static_cast<std::uint64_t>(trial));
    const Case& c = cases[trial % cases.size()];
    int t = g.uniform_int(0, 50);
    std::vector<double> a(51), b(51);
    for (double& v : a) v = g.uniform(-1.0, 1.0);
    for (double& v : b) v = g.uniform(-1.0, 1.0);
    Eigen::VectorXd xi(1);
    xi[0] = g.uniform(-1.0, 1.0);
    afm::Prop2Result r = afm::prop2_check(*c.sys, c.beta, Sequence{a}, Sequence{b}, xi, t);
    if (r.lhs > r.rhs + 1e-12) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("memory bound from a summable gain matches the tail arithmetic") {
  BetaFunction beta = BetaFunction::exponential(1.0, 0.5);
  // tail(2, m) = sum_{k>=m} 2 * 0.5^k = 4 * 0.5^m; need < 0.01.
  int m = afm::thm3_memory_bound(beta, 2.0, 1.0, 0.01);
  int expect = 0;
  while (4.0 * std::pow(0.5, expect) >= 0.01) ++expect;
  CHECK(m == expect);
  CHECK(m == 9);

  CHECK(afm::thm3_memory_bound(beta, 2.0, 1.0, 5.0) == 0);
  CHECK(afm::thm3_memory_bound(beta, 2.0, 0.0, 1e-9) == 0);
  CHECK_THROWS_AS(afm::thm3_memory_bound(beta, 2.0, 1.0, 1e-9, 3), afm::NotResolved);
  // alpha = 0.5 is not summable.
  CHECK_THROWS_AS(afm::thm3_memory_bound(BetaFunction::power(1.0, 0.5), 1.0, 1.0, 0.1),
                  afm::InvalidArgument);

  // Power-law tails: the closed form must dominate brute-force partial sums.
  BetaFunction pw = BetaFunction::power(1.0, 2.0);
  for (int m0 : {1, 4, 16}) {
    double partial = 0.0;
    for (int k = m0; k < 200000; ++k) partial += std::pow(static_cast<double>(k), -2.0);
    CHECK(pw.tail_sum(1.0, m0) >= partial);
  }
  int mp = afm::thm3_memory_bound(pw, 1.0, 1.0, 0.05);
  CHECK(pw.tail_sum(1.0, mp) < 0.05);
  if (mp > 0) CHECK(pw.tail_sum(1.0, mp - 1) >= 0.05);
}

TEST_CASE("modulus bound accumulates the gain prefix") {
  BetaFunction beta = BetaFunction::exponential(1.0, 0.5);
  CHECK(afm::thm3_modulus_bound(beta, 1.0, 1.0, 0.0) == 0.0);
  CHECK(afm::thm3_modulus_bound(beta, 1.0, 0.0, 0.4) == 0.0);
  // Infinite horizon: L_g * sum_s 0.1 * 0.5^s = 0.1 * 2.
  CHECK(afm::thm3_modulus_bound(beta, 1.0, 1.0, 0.1) == Catch::Approx(0.2).margin(1e-12));
  CHECK(afm::thm3_modulus_bound(beta, 1.0, 1.0, 0.1, 0) == 0.0);
  CHECK(afm::thm3_modulus_bound(beta, 1.0, 1.0, 0.1, 2) ==
        Catch::Approx(0.1 * 1.5).margin(1e-12));
  // L_f scales the argument, linearly for the exponential family.
  CHECK(afm::thm3_modulus_bound(beta, 3.0, 1.0, 0.1) == Catch::Approx(0.6).margin(1e-12));
}

TEST_CASE("exponential certificate bounds evaluate the closed forms") {
  afm::Thm4Bounds b = afm::thm4_bounds(1.0, 0.25, 1.0, 1.0, 1.0, 0.01, 0.1);
  double expect = 2.0 * std::log(800.0) / std::log(4.0);
  CHECK(std::abs(b.m_star_bound - expect) < 1e-12);
  CHECK(b.m_star_ceil == 10);
  CHECK(b.omega_bound == Catch::Approx(0.2).margin(1e-15));

  afm::Thm4Bounds trivial = afm::thm4_bounds(1.0, 0.25, 0.1, 0.1, 0.1, 10.0, 0.0);
  CHECK(trivial.m_star_bound == 0.0);
  CHECK(trivial.m_star_ceil == 0);
  CHECK(trivial.omega_bound == 0.0);

  CHECK_THROWS_AS(afm::thm4_bounds(1.0, 1.0, 1.0, 1.0, 1.0, 0.01, 0.1),
                  afm::InvalidCertificate);
  CHECK_THROWS_AS(afm::thm4_bounds(1.0, 0.0, 1.0, 1.0, 1.0, 0.01, 0.1),
                  afm::InvalidCertificate);
  CHECK_THROWS_AS(afm::thm4_bounds(0.5, 0.25, 1.0, 1.0, 1.0, 0.01, 0.1),
                  afm::InvalidCertificate);
  CHECK_THROWS_AS(afm::thm4_bounds(1.0, 0.25, 1.0, 1.0, 1.0, 0.0, 0.1), afm::InvalidArgument);
}

TEST_CASE("invariant ball radius is exact for the linear builtin") {
  auto built = afm::make_linear(0.5, 1.0, 1.0);
  REQUIRE(built.certificate.has_value());
  afm::InvariantBall ball = afm::compute_invariant_ball(built.sys, *built.certificate, 1.0);
  CHECK(ball.radius == Catch::Approx(2.0).margin(1e-12));
  CHECK(ball.diam() == Catch::Approx(4.0).margin(1e-12));

  afm::InvariantBall rest = afm::compute_invariant_ball(built.sys, *built.certificate, 0.0);
  CHECK(rest.radius == 0.0);

  // A forged certificate claims far faster decay than x+ = 0.9x + u has;
  // the simulated trajectories overrun the claimed ball.
  auto slow = afm::make_linear(0.9, 1.0, 1.0);
  DemidovichCertificate forged;
  forged.P = Eigen::MatrixXd::Identity(1, 1);
  forged.mu = 0.01;
  forged.kappa = 1.0;
  CHECK_THROWS_AS(afm::compute_invariant_ball(slow.sys, forged, 1.0), afm::ContainmentViolated);
}

TEST_CASE("shift register realization reproduces window functionals") {
  auto delay = afm::tapped_delay_realization([](const Eigen::VectorXd& w) { return w[0]; }, 1);
  afm::IoMap D = afm::io_map_of(delay);
  afm::Rng g(41);
  std::vector<double> raw(12);
  for (double& v : raw) v = g.uniform(-1.0, 1.0);
  Sequence u{raw};
  Sequence shifted = afm::right_shift(u, 1);
  for (int t = 0; t < 12; ++t) CHECK(D(u, t) == shifted.value(t));

  auto memoryless = afm::tapped_delay_realization(
      [](const Eigen::VectorXd& w) { return w[0] * w[0]; }, 0);
  afm::IoMap M = afm::io_map_of(memoryless);
  CHECK(M(u, 4) == raw[4] * raw[4]);

  // A random net functional realized as a shift register agrees with the
  // direct windowed evaluation at every probed time.
  afm::Rng init(43);
  afm::ReluNet net = afm::detail::init_net(3, 5, 2, init);
  afm::TCNModel model{2, net, false};
  auto sys = afm::tapped_delay_realization(
      [net](const Eigen::VectorXd& w) { return afm::net_eval(net, w); }, 2);
  afm::IoMap F = afm::io_map_of(sys);
  for (int t = 0; t < 12; ++t) CHECK(F(u, t) == afm::tcn_apply(model, u, t));
}

TEST_CASE("declared Lipschitz constants survive sampling") {
  auto lin = afm::make_linear(0.5, 0.5, 1.0);
  afm::LipschitzReport lr = afm::check_lipschitz(lin.sys, 1.0, 200, 47);
  CHECK(lr.pass());
  CHECK(lr.worst_f_ratio <= 0.5 * (1.0 + 1e-9));

  auto th = afm::make_contractive_tanh(0.7, 1.0);
  CHECK(afm::check_lipschitz(th.sys, 1.0, 200, 48).pass());

  // Understating lipschitz_f_u must be caught.
  StateSpaceSystem lying = lin.sys;
  lying.lipschitz_f_u = 0.1;
  CHECK_FALSE(afm::check_lipschitz(lying, 1.0, 200, 49).pass());
}
