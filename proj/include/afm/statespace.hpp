// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Recurrent realizations x_{t+1} = f(x_t, u_t), y_t = g(x_t): flows and
// induced i/o maps, sampled incremental-stability gains, the memory and
// modulus bound calculators driven by a gain function or a certificate,
// invariant-ball accounting, and the tapped-delay-line realization of
// finite-memory functionals.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "afm/beta.hpp"
#include "afm/certificate.hpp"
#include "afm/errors.hpp"
#include "afm/iomap.hpp"
#include "afm/parallel.hpp"
#include "afm/rng.hpp"
#include "afm/sequence.hpp"

namespace afm {

struct StateSpaceSystem {
  int n = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> f;
  std::function<double(const Eigen::VectorXd&)> g;
  Eigen::VectorXd xi;  // initial state
  // d f / d x at (x, u); empty when the system does not expose one.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, double)> jacobian_x;
  // Declared Lipschitz data: ||f(x,u) - f(x,u')|| <= lipschitz_f_u |u - u'|
  // and |g(x) - g(x')| <= lipschitz_g ||x - x'||.
  double lipschitz_f_u = 1.0;
  double lipschitz_g = 1.0;
  // Radius of the declared positively invariant ball; infinity = all of R^n.
  double domain_radius = std::numeric_limits<double>::infinity();
  // Output with direct feedthrough, y_t = h(x_t, u_t); used instead of g
  // when present (tapped delay lines need it).
  std::function<double(const Eigen::VectorXd&, double)> output_feedthrough;
  std::string name = "system";

  double output(const Eigen::VectorXd& x, double u) const {
    if (output_feedthrough) return output_feedthrough(x, u);
    if (!g) throw InvalidArgument("StateSpaceSystem: no output map");
    return g(x);
  }

  Eigen::VectorXd step(const Eigen::VectorXd& x, double u) const {
    if (!f) throw InvalidArgument("StateSpaceSystem: no transition map");
    Eigen::VectorXd next = f(x, u);
    if (next.size() != n) throw DimensionMismatch("StateSpaceSystem: f returned wrong dimension");
    if (!next.allFinite()) throw NonFinite("StateSpaceSystem '" + name + "': state blew up");
    return next;
  }

  // Rest condition for time invariance: f(xi, 0) = xi and output at rest 0.
  bool time_invariant_at_rest(double tol = 1e-9) const {
    Eigen::VectorXd moved = n > 0 ? step(xi, 0.0) : xi;
    double drift = n > 0 ? (moved - xi).norm() : 0.0;
    return drift <= tol && std::abs(output(xi, 0.0)) <= tol;
  }
};

// State at time t for the trajectory started at x_s = xi and driven by u.
inline Eigen::VectorXd flow(const StateSpaceSystem& sys, Eigen::VectorXd xi, const Sequence& u,
                            int s, int t) {
  if (s > t) throw InvalidArgument("flow: need s <= t");
  if (s < 0) throw InvalidArgument("flow: s must be nonnegative");
  for (int k = s; k < t; ++k) xi = sys.step(xi, u.value(k));
  return xi;
}

inline IoMap io_map_of(const StateSpaceSystem& sys) {
  auto shared = std::make_shared<StateSpaceSystem>(sys);
  IoMap map;
  map.name = sys.name;
  map.declared_causal = true;
  map.declared_time_invariant = shared->time_invariant_at_rest();
  map.eval = [shared](const Sequence& u, int t) {
    Eigen::VectorXd x = flow(*shared, shared->xi, u, 0, t);
    return shared->output(x, u.value(t));
  };
  return map;
}

struct BetaEstimateSpec {
  int t_max = 64;
  int pairs = 64;
  std::vector<double> c_bins;  // default: dyadic fractions of state_radius
  double state_radius = -1.0;  // default: domain radius if finite, else 1
};

// Sampled incremental gain: for deviation bins C, the observed max of
// ||phi_t(xi) - phi_t(xi')|| over random initial pairs at distance C and
// shared inputs from the ball of radius R. Lower bound of the true gain;
// monotone massaging keeps it within the class the true gain lives in.
inline BetaFunction estimate_beta(const StateSpaceSystem& sys, double R, int t_max, int pairs,
                                  std::uint64_t seed, std::vector<double> c_bins = {},
                                  double state_radius = -1.0) {
  if (pairs < 1) throw InvalidArgument("estimate_beta: pairs must be >= 1");
  if (t_max < 1) throw InvalidArgument("estimate_beta: t_max must be >= 1");
  if (!(R >= 0.0)) throw InvalidArgument("estimate_beta: R must be >= 0");
  if (sys.n < 1) throw InvalidArgument("estimate_beta: system must have state");
  double radius = state_radius > 0.0
                      ? state_radius
                      : (std::isfinite(sys.domain_radius) ? sys.domain_radius : 1.0);
  if (c_bins.empty()) c_bins = {radius / 8.0, radius / 4.0, radius / 2.0, radius};
  for (double c : c_bins) {
    if (!(c > 0.0) || c > 2.0 * radius + 1e-12) {
      throw InvalidArgument("estimate_beta: bins must lie in (0, 2 * radius]");
    }
  }

  const std::size_t bins = c_bins.size();
  std::vector<std::vector<double>> values(bins,
                                          std::vector<double>(static_cast<std::size_t>(t_max) + 1, 0.0));
  Rng root(seed);
  parallel_for_index(bins, [&](std::size_t b) {
    double C = c_bins[b];
    auto& row = values[b];
    for (int rep = 0; rep < pairs; ++rep) {
      Rng g = root.split(mix64(static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(rep)));
      // Pair at exact distance C: symmetric about a center kept deep enough
      // inside the sampling ball that both endpoints stay inside it.
      Eigen::VectorXd dir(sys.n);
      for (int i = 0; i < sys.n; ++i) dir[i] = g.normal();
      double norm = dir.norm();
      if (norm == 0.0) {
        dir.setZero();
        dir[0] = 1.0;
        norm = 1.0;
      }
      dir /= norm;
      double center_radius = std::max(radius - 0.5 * C, 0.0);
      Eigen::VectorXd center(sys.n);
      for (int i = 0; i < sys.n; ++i) center[i] = g.uniform(-1.0, 1.0);
      if (center.norm() > 0.0) center *= center_radius * g.uniform01() / center.norm();
      Eigen::VectorXd x = center - 0.5 * C * dir;
      Eigen::VectorXd y = center + 0.5 * C * dir;

      double amplitude = R;
      Eigen::VectorXd xa = x, ya = y;
      row[0] = std::max(row[0], (xa - ya).norm());
      int kind = rep % 4;
      Rng input_rng = g.split(0x17B0ULL);
      for (int tau = 1; tau <= t_max; ++tau) {
        double u = 0.0;
        switch (kind) {
          case 0: u = amplitude; break;
          case 1: u = -amplitude; break;
          case 2: u = amplitude * input_rng.sign(); break;
          default: u = input_rng.uniform(-amplitude, amplitude); break;
        }
        xa = sys.step(xa, u);
        ya = sys.step(ya, u);
        row[static_cast<std::size_t>(tau)] =
            std::max(row[static_cast<std::size_t>(tau)], (xa - ya).norm());
      }
    }
  });

  // The true gain dominates each observation at every (C' >= C, tau' <= tau),
  // so the running maxima below are still valid sampled lower bounds.
  for (std::size_t b = 0; b < bins; ++b) {
    for (int tau = t_max - 1; tau >= 0; --tau) {
      values[b][static_cast<std::size_t>(tau)] =
          std::max(values[b][static_cast<std::size_t>(tau)], values[b][static_cast<std::size_t>(tau) + 1]);
    }
  }
  for (std::size_t b = 1; b < bins; ++b) {
    for (int tau = 0; tau <= t_max; ++tau) {
      values[b][static_cast<std::size_t>(tau)] =
          std::max(values[b][static_cast<std::size_t>(tau)], values[b - 1][static_cast<std::size_t>(tau)]);
    }
  }

  // Declared geometric majorant beyond the table, estimated from the tail.
  double rate = 0.0;
  int span = std::min(8, t_max);
  for (std::size_t b = 0; b < bins; ++b) {
    double head = values[b][static_cast<std::size_t>(t_max - span)];
    double tail = values[b][static_cast<std::size_t>(t_max)];
    if (head > 0.0 && tail > 0.0) {
      rate = std::max(rate, std::pow(tail / head, 1.0 / span));
    }
  }
  rate = std::clamp(rate, 0.0, 0.999);
  return BetaFunction::tabulated(std::move(c_bins), std::move(values), rate);
}

struct Prop2Result {
  double lhs = 0.0;
  double rhs = 0.0;
};

// Trajectory-deviation inequality: the distance between the states reached
// under u and under u_tilde is at most the accumulated gain of the
// one-step input discrepancies along the u_tilde trajectory.
inline Prop2Result prop2_check(const StateSpaceSystem& sys, const BetaFunction& beta,
                               const Sequence& u, const Sequence& u_tilde,
                               const Eigen::VectorXd& xi, int t) {
  if (t < 0) throw InvalidArgument("prop2_check: t must be nonnegative");
  if (xi.size() != sys.n) throw DimensionMismatch("prop2_check: xi dimension");
  Prop2Result result;
  Eigen::VectorXd x = xi, x_tilde = xi;
  double rhs = 0.0;
  for (int s = 0; s < t; ++s) {
    double du = (sys.f(x_tilde, u.value(s)) - sys.f(x_tilde, u_tilde.value(s))).norm();
    rhs += beta(du, t - s - 1);
    x = sys.step(x, u.value(s));
    x_tilde = sys.step(x_tilde, u_tilde.value(s));
  }
  result.lhs = (x - x_tilde).norm();
  result.rhs = rhs;
  return result;
}

// Smallest m with tail_{k >= m} beta(diam_S, k) < eps / L_g.
inline int thm3_memory_bound(const BetaFunction& beta, double diam_S, double L_g, double eps,
                             int m_max = 100000) {
  if (!(eps > 0.0)) throw InvalidArgument("thm3_memory_bound: eps must be positive");
  if (!(diam_S >= 0.0)) throw InvalidArgument("thm3_memory_bound: diam_S must be >= 0");
  if (!(L_g >= 0.0)) throw InvalidArgument("thm3_memory_bound: L_g must be >= 0");
  if (L_g == 0.0) return 0;
  if (!beta.summable()) throw InvalidArgument("thm3_memory_bound: beta tail not summable");
  for (int m = 0; m <= m_max; ++m) {
    if (beta.tail_sum(diam_S, m) < eps / L_g) return m;
  }
  throw NotResolved("thm3_memory_bound: bound exceeds m_max");
}

// Modulus bound L_g * sum_{s=0}^{t-1} beta(L_f delta, s); infinite-horizon
// variant when t is absent.
inline double thm3_modulus_bound(const BetaFunction& beta, double L_f, double L_g, double delta,
                                 std::optional<long> t = std::nullopt) {
  if (!(delta >= 0.0)) throw InvalidArgument("thm3_modulus_bound: delta must be >= 0");
  if (!(L_f >= 0.0) || !(L_g >= 0.0)) {
    throw InvalidArgument("thm3_modulus_bound: Lipschitz constants must be >= 0");
  }
  if (delta == 0.0 || L_g == 0.0) return 0.0;
  return L_g * beta.prefix_sum(L_f * delta, t ? *t : -1);
}

struct Thm4Bounds {
  double m_star_bound = 0.0;  // real-valued bound on the memory horizon
  int m_star_ceil = 0;
  double omega_bound = 0.0;   // modulus bound at the supplied delta
};

// Exponential-certificate bound arithmetic:
//   m* <= 2 log(2 kappa L_f L_g R / ((1-sqrt(mu))^2 eps)) / log(1/mu),
//   omega(delta) <= sqrt(kappa) L_f L_g delta / (1 - sqrt(mu)).
inline Thm4Bounds thm4_bounds(double kappa, double mu, double L_f, double L_g, double R,
                              double eps, double delta) {
  if (!(mu > 0.0 && mu < 1.0)) throw InvalidCertificate("thm4_bounds: mu must lie in (0, 1)");
  if (!(kappa >= 1.0)) throw InvalidCertificate("thm4_bounds: kappa must be >= 1");
  if (!(eps > 0.0)) throw InvalidArgument("thm4_bounds: eps must be positive");
  if (!(delta >= 0.0)) throw InvalidArgument("thm4_bounds: delta must be >= 0");
  if (!(L_f >= 0.0) || !(L_g >= 0.0) || !(R >= 0.0)) {
    throw InvalidArgument("thm4_bounds: constants must be >= 0");
  }
  double sqrt_mu = std::sqrt(mu);
  double arg = 2.0 * kappa * L_f * L_g * R / ((1.0 - sqrt_mu) * (1.0 - sqrt_mu) * eps);
  Thm4Bounds out;
  if (arg <= 1.0) {
    out.m_star_bound = 0.0;
  } else {
    out.m_star_bound = 2.0 * std::log(arg) / std::log(1.0 / mu);
  }
  out.m_star_ceil = static_cast<int>(std::ceil(out.m_star_bound - 1e-12));
  out.omega_bound = std::sqrt(kappa) * L_f * L_g * delta / (1.0 - sqrt_mu);
  return out;
}

struct InvariantBall {
  double radius = 0.0;
  double diam() const { return 2.0 * radius; }
};

struct ContainmentSpec {
  int t_sim = 200;
  int random_inputs = 16;
  int sign_inputs = 8;
  std::uint64_t seed = 0x1BA11ULL;
};

// Ball radius sqrt(kappa) (||xi|| + L_f R / (1 - sqrt(mu))) guaranteed
// invariant for a zero-at-rest system with a valid certificate; sampled
// trajectories are simulated as a consistency check on the declared data.
inline InvariantBall compute_invariant_ball(const StateSpaceSystem& sys,
                                            const DemidovichCertificate& cert, double R,
                                            const ContainmentSpec& spec = {}) {
  cert.validate();
  if (!(R >= 0.0)) throw InvalidArgument("compute_invariant_ball: R must be >= 0");
  if (sys.n > 0) {
    Eigen::VectorXd rest = sys.step(Eigen::VectorXd::Zero(sys.n), 0.0);
    if (rest.norm() > 1e-9) {
      throw InvalidArgument("compute_invariant_ball: requires f(0, 0) = 0");
    }
  }
  double sqrt_mu = std::sqrt(cert.mu);
  InvariantBall ball;
  ball.radius = std::sqrt(cert.kappa) * (sys.xi.norm() + sys.lipschitz_f_u * R / (1.0 - sqrt_mu));

  SamplerSpec sampler;
  sampler.random_inputs = spec.random_inputs;
  sampler.sign_inputs = spec.sign_inputs;
  sampler.horizon = spec.t_sim;
  if (R > 0.0) {
    Rng root(spec.seed);
    auto family = detail::build_input_family(R, spec.t_sim, sampler, root);
    double allowed = ball.radius * (1.0 + 1e-9) + 1e-12;
    for (const auto& [u, extremal] : family) {
      (void)extremal;
      Eigen::VectorXd x = sys.xi;
      for (int t = 0; t <= spec.t_sim; ++t) {
        if (x.norm() > allowed) {
          throw ContainmentViolated("compute_invariant_ball: trajectory left the ball at t=" +
                                    std::to_string(t) + " (norm " + std::to_string(x.norm()) +
                                    " > radius " + std::to_string(ball.radius) + ")");
        }
        x = sys.step(x, u.value(t));
      }
    }
  } else {
    Eigen::VectorXd x = sys.xi;
    double allowed = ball.radius * (1.0 + 1e-9) + 1e-12;
    for (int t = 0; t <= spec.t_sim; ++t) {
      if (x.norm() > allowed) {
        throw ContainmentViolated("compute_invariant_ball: rest trajectory left the ball");
      }
      x = sys.step(x, 0.0);
    }
  }
  return ball;
}

// Shift-register realization of a finite-memory functional: states hold the
// last m inputs, the output reads fm(u_{t-m}, ..., u_{t-1}, u_t) through
// direct feedthrough.
inline StateSpaceSystem tapped_delay_realization(
    std::function<double(const Eigen::VectorXd&)> fm_functional, int m) {
  if (m < 0) throw InvalidArgument("tapped_delay_realization: m must be >= 0");
  if (!fm_functional) throw InvalidArgument("tapped_delay_realization: empty functional");
  auto fm = std::make_shared<std::function<double(const Eigen::VectorXd&)>>(std::move(fm_functional));

  StateSpaceSystem sys;
  sys.n = m;
  sys.name = "tapped_delay(m=" + std::to_string(m) + ")";
  sys.xi = Eigen::VectorXd::Zero(m);
  sys.f = [m](const Eigen::VectorXd& x, double u) {
    Eigen::VectorXd next(m);
    for (int i = 0; i + 1 < m; ++i) next[i] = x[i + 1];
    if (m > 0) next[m - 1] = u;
    return next;
  };
  sys.jacobian_x = [m](const Eigen::VectorXd&, double) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) J(i, i + 1) = 1.0;
    return J;
  };
  sys.output_feedthrough = [fm, m](const Eigen::VectorXd& x, double u) {
    Eigen::VectorXd w(m + 1);
    w.head(m) = x;
    w[m] = u;
    double y = (*fm)(w);
    if (!std::isfinite(y)) throw NonFinite("tapped_delay_realization: non-finite output");
    return y;
  };
  sys.g = [fm, m](const Eigen::VectorXd& x) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m + 1);
    w.head(m) = x;
    return (*fm)(w);
  };
  sys.lipschitz_f_u = 1.0;
  return sys;
}

struct LipschitzReport {
  int samples = 0;
  int f_violations = 0;
  int g_violations = 0;
  double worst_f_ratio = 0.0;  // max ||f(x,u)-f(x,u')|| / |u-u'|
  double worst_g_ratio = 0.0;  // max |g(x)-g(x')| / ||x-x'||

  bool pass() const { return f_violations == 0 && g_violations == 0; }
};

// Sampled consistency check of the declared Lipschitz constants.
inline LipschitzReport check_lipschitz(const StateSpaceSystem& sys, double R, int samples,
                                       std::uint64_t seed, double state_radius = -1.0,
                                       double tol_rel = 1e-9) {
  if (samples < 1) throw InvalidArgument("check_lipschitz: samples must be >= 1");
  double radius = state_radius > 0.0
                      ? state_radius
                      : (std::isfinite(sys.domain_radius) ? sys.domain_radius : 1.0);
  LipschitzReport report;
  report.samples = samples;
  Rng root(seed);
  for (int i = 0; i < samples; ++i) {
    Rng g = root.split(static_cast<std::uint64_t>(i));
    Eigen::VectorXd x(sys.n), x2(sys.n);
    for (int k = 0; k < sys.n; ++k) {
      x[k] = g.uniform(-radius, radius);
      x2[k] = g.uniform(-radius, radius);
    }
    double u = g.uniform(-R, R), u2 = g.uniform(-R, R);
    if (std::abs(u - u2) > 0.0) {
      double ratio = (sys.f(x, u) - sys.f(x, u2)).norm() / std::abs(u - u2);
      report.worst_f_ratio = std::max(report.worst_f_ratio, ratio);
      if (ratio > sys.lipschitz_f_u * (1.0 + tol_rel)) ++report.f_violations;
    }
    if (sys.g && (x - x2).norm() > 0.0) {
      double ratio = std::abs(sys.g(x) - sys.g(x2)) / (x - x2).norm();
      report.worst_g_ratio = std::max(report.worst_g_ratio, ratio);
      if (ratio > sys.lipschitz_g * (1.0 + tol_rel)) ++report.g_violations;
    }
  }
  return report;
}

}  // namespace afm
