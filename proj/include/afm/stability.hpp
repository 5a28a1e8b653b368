// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Certification machinery for exponential incremental stability: Jacobian
// metric verification on state/input grids, Lyapunov decrease sampling,
// spectral / minimality checks, H-infinity analysis on circles, an
// iterative bounded-real solver, and the end-to-end certification pipeline
// for feedback systems with a slope-bounded scalar nonlinearity.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "afm/certificate.hpp"
#include "afm/errors.hpp"
#include "afm/parallel.hpp"
#include "afm/rng.hpp"
#include "afm/statespace.hpp"

namespace afm {

// Evaluation grid over the state ball and input interval used for Jacobian
// verification and Lyapunov sampling.
struct GridSpec {
  double x_radius = 1.0;
  int x_samples = 128;   // deterministic structured points + random fill
  double u_bound = 1.0;
  int u_samples = 9;
  std::uint64_t seed = 0xC41DULL;
};

namespace detail {

inline std::vector<Eigen::VectorXd> state_grid(int n, double radius, int count,
                                               std::uint64_t seed) {
  std::vector<Eigen::VectorXd> points;
  points.push_back(Eigen::VectorXd::Zero(n));
  for (int i = 0; i < n && static_cast<int>(points.size()) < count; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = radius;
    points.push_back(e);
    if (static_cast<int>(points.size()) < count) points.push_back(-e);
  }
  if (n <= 6) {
    double corner = radius / std::sqrt(static_cast<double>(n));
    for (unsigned mask = 0; mask < (1u << n) && static_cast<int>(points.size()) < count; ++mask) {
      Eigen::VectorXd x(n);
      for (int i = 0; i < n; ++i) x[i] = (mask >> i) & 1u ? corner : -corner;
      points.push_back(x);
    }
  }
  Rng root(seed);
  int extra = 0;
  while (static_cast<int>(points.size()) < count) {
    Rng g = root.split(static_cast<std::uint64_t>(extra++));
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = g.normal();
    double norm = x.norm();
    if (norm == 0.0) continue;
    x *= radius * std::pow(g.uniform01(), 1.0 / std::max(n, 1)) / norm;
    points.push_back(x);
  }
  return points;
}

inline std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  if (count <= 1) {
    out.push_back(0.5 * (lo + hi));
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return out;
}

}  // namespace detail

struct DemidovichResult {
  bool pass = false;
  DemidovichCertificate certificate;
  Eigen::VectorXd worst_x;
  double worst_u = 0.0;
  // Largest eigenvalue of J'PJ - mu P seen anywhere on the grid; negative
  // slack everywhere means the inequality held.
  double worst_margin = -std::numeric_limits<double>::infinity();
};

// Grid check of the metric contraction inequality J'PJ <= mu P. A pass is
// a sampled certificate, not a proof; the margin quantifies the slack.
inline DemidovichResult verify_demidovich(const StateSpaceSystem& sys, const Eigen::MatrixXd& P,
                                          double mu, const GridSpec& grid = {}) {
  if (!sys.jacobian_x) throw MissingJacobian("verify_demidovich: system exposes no Jacobian");
  if (P.rows() != sys.n || P.cols() != sys.n) {
    throw DimensionMismatch("verify_demidovich: P must be n x n");
  }
  if (!P.isApprox(P.transpose(), 1e-10)) {
    throw NotPositiveDefinite("verify_demidovich: P must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw NotPositiveDefinite("verify_demidovich: P must be positive definite");
  }
  if (!(mu > 0.0 && mu < 1.0)) throw InvalidCertificate("verify_demidovich: mu must lie in (0,1)");

  auto xs = detail::state_grid(sys.n, grid.x_radius, grid.x_samples, grid.seed);
  auto us = detail::linspace(-grid.u_bound, grid.u_bound, grid.u_samples);

  DemidovichResult result;
  result.worst_x = Eigen::VectorXd::Zero(sys.n);
  std::vector<std::pair<double, double>> margins(xs.size(),
                                                 {-std::numeric_limits<double>::infinity(), 0.0});
  parallel_for_index(xs.size(), [&](std::size_t i) {
    double worst = -std::numeric_limits<double>::infinity();
    double worst_u = 0.0;
    for (double u : us) {
      Eigen::MatrixXd J = sys.jacobian_x(xs[i], u);
      if (J.rows() != sys.n || J.cols() != sys.n) {
        throw DimensionMismatch("verify_demidovich: Jacobian must be n x n");
      }
      Eigen::MatrixXd M = J.transpose() * P * J - mu * P;
      M = 0.5 * (M + M.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ms(M);
      double top = ms.eigenvalues().maxCoeff();
      if (top > worst) {
        worst = top;
        worst_u = u;
      }
    }
    margins[i] = {worst, worst_u};
  });
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (margins[i].first > result.worst_margin) {
      result.worst_margin = margins[i].first;
      result.worst_x = xs[i];
      result.worst_u = margins[i].second;
    }
  }

  double tol = 1e-9 * std::max(1.0, P.norm());
  result.pass = result.worst_margin <= tol;
  result.certificate.P = P;
  result.certificate.mu = mu;
  result.certificate.kappa = condition_number(P);
  result.certificate.margin = result.worst_margin;
  result.certificate.provenance = "grid-verified";
  return result;
}

struct LyapunovReport {
  int samples = 0;
  int violations = 0;
  double worst_ratio = 0.0;   // max of V(f(x,u), f(x',u)) / (mu V(x, x'))
  double worst_excess = 0.0;  // max of V(f(x,u), f(x',u)) - mu V(x, x')
  std::uint64_t seed = 0;

  bool pass() const { return violations == 0; }
};

// Samples the global decrease property V(f(x,u), f(x',u)) <= mu V(x,x'),
// the non-infinitesimal consequence of the Jacobian inequality on a convex
// region; strictly stronger evidence than the grid check.
inline LyapunovReport lyapunov_decrease_check(const StateSpaceSystem& sys,
                                              const DemidovichCertificate& cert, int samples,
                                              std::uint64_t seed, double x_radius = 1.0,
                                              double u_bound = 1.0, double tol_rel = 1e-9) {
  cert.validate();
  if (samples < 1) throw InvalidArgument("lyapunov_decrease_check: samples must be >= 1");
  LyapunovReport report;
  report.samples = samples;
  report.seed = seed;

  Rng root(seed);
  struct Item {
    double ratio = 0.0;
    double excess = -std::numeric_limits<double>::infinity();
    bool violated = false;
  };
  std::vector<Item> items(static_cast<std::size_t>(samples));
  parallel_for_index(static_cast<std::size_t>(samples), [&](std::size_t i) {
    Rng g = root.split(i);
    Eigen::VectorXd x(sys.n), y(sys.n);
    for (int k = 0; k < sys.n; ++k) {
      x[k] = g.uniform(-x_radius, x_radius);
      y[k] = g.uniform(-x_radius, x_radius);
    }
    double u = g.uniform(-u_bound, u_bound);
    double v0 = cert.lyapunov(x, y);
    double v1 = cert.lyapunov(sys.step(x, u), sys.step(y, u));
    Item item;
    item.excess = v1 - cert.mu * v0;
    item.ratio = v0 > 0.0 ? v1 / (cert.mu * v0) : 0.0;
    item.violated = v1 > cert.mu * v0 * (1.0 + tol_rel) + 1e-300;
    items[i] = item;
  });
  for (const auto& item : items) {
    report.worst_ratio = std::max(report.worst_ratio, item.ratio);
    report.worst_excess = std::max(report.worst_excess, item.excess);
    if (item.violated) ++report.violations;
  }
  return report;
}

// Contraction in the Euclidean metric: P = I, mu = lambda^2, kappa = 1.
inline DemidovichCertificate contraction_certificate(double lambda, int n) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw InvalidArgument("contraction_certificate: lambda must lie in (0, 1)");
  }
  if (n < 1) throw InvalidArgument("contraction_certificate: n must be >= 1");
  DemidovichCertificate cert;
  cert.P = Eigen::MatrixXd::Identity(n, n);
  cert.mu = lambda * lambda;
  cert.kappa = 1.0;
  cert.margin = 0.0;
  cert.provenance = "contraction";
  return cert;
}

struct SpectralCheck {
  double rho = 0.0;
  bool pass = false;
};

inline SpectralCheck schur_check(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("schur_check: A must be square");
  SpectralCheck check;
  if (A.rows() == 0) {
    check.pass = true;
    return check;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  check.rho = es.eigenvalues().cwiseAbs().maxCoeff();
  check.pass = check.rho < 1.0;
  return check;
}

struct RankCheck {
  int rank = 0;
  bool pass = false;
  double sigma_max = 0.0;
  double sigma_min = 0.0;  // smallest singular value counted as nonzero
};

namespace detail {

inline RankCheck rank_check(const Eigen::MatrixXd& M, int full_rank) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  RankCheck check;
  check.sigma_max = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  double threshold = 1e-10 * check.sigma_max;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    double s = svd.singularValues()(i);
    if (s > threshold && s > 0.0) {
      ++check.rank;
      check.sigma_min = s;
    }
  }
  check.pass = check.rank == full_rank;
  return check;
}

}  // namespace detail

inline RankCheck controllability_check(const Eigen::MatrixXd& A, const Eigen::VectorXd& B) {
  int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.size() != n) throw DimensionMismatch("controllability_check: shapes");
  Eigen::MatrixXd K(n, n);
  Eigen::VectorXd col = B;
  for (int i = 0; i < n; ++i) {
    K.col(i) = col;
    col = A * col;
  }
  return detail::rank_check(K, n);
}

inline RankCheck observability_check(const Eigen::MatrixXd& A, const Eigen::RowVectorXd& C) {
  int n = static_cast<int>(A.rows());
  if (A.cols() != n || C.size() != n) throw DimensionMismatch("observability_check: shapes");
  Eigen::MatrixXd O(n, n);
  Eigen::RowVectorXd row = C;
  for (int i = 0; i < n; ++i) {
    O.row(i) = row;
    row = row * A;
  }
  return detail::rank_check(O, n);
}

namespace detail {

inline double transfer_gain_at(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                               const Eigen::RowVectorXd& C, double theta) {
  int n = static_cast<int>(A.rows());
  std::complex<double> z(std::cos(theta), std::sin(theta));
  Eigen::MatrixXcd M = z * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
  Eigen::VectorXcd x = M.partialPivLu().solve(B.cast<std::complex<double>>());
  std::complex<double> y = (C.cast<std::complex<double>>() * x)(0, 0);
  return std::abs(y);
}

}  // namespace detail

// sup over the unit circle of |C (zI - A)^{-1} B|: dense angular grid, then
// golden-section refinement around the best grid point. Scalar channel, so
// the gain is evaluated directly.
inline double hinf_norm(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                        const Eigen::RowVectorXd& C, double tol = 1e-9, int grid_points = 4096) {
  SpectralCheck spectrum = schur_check(A);
  if (!spectrum.pass) {
    throw UnstableMatrix("hinf_norm: spectral radius " + std::to_string(spectrum.rho) + " >= 1");
  }
  if (grid_points < 8) throw InvalidArgument("hinf_norm: grid too coarse");
  int n = static_cast<int>(A.rows());
  if (B.size() != n || C.size() != n) throw DimensionMismatch("hinf_norm: shapes");
  if (n == 0) return 0.0;

  const double two_pi = 6.283185307179586476925286766559;
  double best = -1.0;
  double best_theta = 0.0;
  std::vector<double> gains(static_cast<std::size_t>(grid_points));
  parallel_for_index(static_cast<std::size_t>(grid_points), [&](std::size_t j) {
    gains[j] = detail::transfer_gain_at(A, B, C, two_pi * static_cast<double>(j) /
                                                     static_cast<double>(grid_points));
  });
  for (std::size_t j = 0; j < gains.size(); ++j) {
    if (gains[j] > best) {
      best = gains[j];
      best_theta = two_pi * static_cast<double>(j) / static_cast<double>(grid_points);
    }
  }

  // Golden-section ascent on the bracket around the best grid point.
  double lo = best_theta - two_pi / grid_points;
  double hi = best_theta + two_pi / grid_points;
  const double inv_phi = 0.6180339887498948482;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = detail::transfer_gain_at(A, B, C, a);
  double fb = detail::transfer_gain_at(A, B, C, b);
  double width_target = std::max(1e-13, tol * 1e-4);
  for (int iter = 0; iter < 200 && (hi - lo) > width_target; ++iter) {
    if (fa > fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = detail::transfer_gain_at(A, B, C, a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = detail::transfer_gain_at(A, B, C, b);
    }
  }
  return std::max({best, fa, fb});
}

// g(r) = sup over |z| = r of |C (zI - A)^{-1} B| for r > rho(A); equals the
// circle gain of the scaled triple (A/r, B, C/r). Nonincreasing in r by the
// maximum principle on the exterior domain.
inline double transfer_gain_on_radius(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                      const Eigen::RowVectorXd& C, double r, double tol = 1e-9,
                                      int grid_points = 2048) {
  if (!(r > 0.0)) throw InvalidArgument("transfer_gain_on_radius: r must be positive");
  SpectralCheck spectrum = schur_check(A / r);
  if (!spectrum.pass) {
    throw UnstableMatrix("transfer_gain_on_radius: r must exceed the spectral radius");
  }
  return hinf_norm(A / r, B, Eigen::RowVectorXd(C / r), tol, grid_points);
}

struct R0SearchSpec {
  double r_max = 0.995;           // preferred (largest considered) radius
  double slack_frac = 0.01;       // feasibility slack as a fraction of 1/gamma
  int curve_points = 16;          // reported gain/radius trade-off samples
  int bisect_iters = 200;
  int circle_grid = 2048;
  std::optional<double> r0_override;
};

struct DTBRSolution {
  double r0 = 0.0;
  double mu = 0.0;  // r0^2
  Eigen::MatrixXd P;
  Eigen::RowVectorXd L;
  double W = 0.0;
  double residual_state = 0.0;  // A'PA + gamma^2 C'C + r0^2 L'L - r0^2 P
  double residual_input = 0.0;  // B'PB + W^2 - 1
  double residual_cross = 0.0;  // A'PB + r0 L'W
  double gamma = 0.0;
  double hinf = 0.0;
  double rho = 0.0;
  int iterations = 0;
  std::vector<std::pair<double, double>> r_gain_curve;  // (r, g(r)) samples
};

// Solves the bounded-real equations for the radius-r0 scaled system
//   A'PA + gamma^2 C'C + r0^2 L'L = r0^2 P
//   B'PB + W'W = I
//   A'PB + r0 L'W = 0
// by a Riccati-type fixed point on (A/r0, B, gamma C/r0) from P = 0, then
// reads off W and L so all three equations hold at the solver tolerance.
inline DTBRSolution dtbr_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                               const Eigen::RowVectorXd& C, double gamma,
                               const R0SearchSpec& spec = {}) {
  int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.size() != n || C.size() != n) {
    throw DimensionMismatch("dtbr_solve: inconsistent shapes");
  }
  if (!(gamma >= 0.0)) throw InvalidArgument("dtbr_solve: gamma must be >= 0");

  DTBRSolution sol;
  sol.gamma = gamma;
  SpectralCheck spectrum = schur_check(A);
  if (!spectrum.pass) throw UnstableMatrix("dtbr_solve: A is not Schur");
  sol.rho = spectrum.rho;
  sol.hinf = hinf_norm(A, B, C, 1e-10, 2 * spec.circle_grid);
  double target = std::numeric_limits<double>::infinity();
  if (gamma > 0.0) {
    if (gamma * sol.hinf >= 1.0) {
      throw NormTooLarge("dtbr_solve: gamma * ||G|| = " + std::to_string(gamma * sol.hinf) +
                         " >= 1");
    }
    target = 1.0 / gamma;
  }
  // Slack keeps the chosen radius strictly inside the feasible set while
  // never excluding radii near 1 (where the gain approaches ||G||).
  double slack = gamma > 0.0 ? std::min(spec.slack_frac * target, 0.5 * (target - sol.hinf)) : 0.0;

  auto gain_at = [&](double r) {
    return transfer_gain_on_radius(A, B, C, r, 1e-9, spec.circle_grid);
  };
  auto feasible = [&](double r) {
    if (r <= sol.rho || r >= 1.0) return false;
    if (gamma == 0.0) return true;
    return gain_at(r) < target - slack;
  };

  double lo_limit = sol.rho + 1e-6 * (1.0 - sol.rho);
  double candidate = std::max(spec.r_max, lo_limit + 0.5 * (1.0 - lo_limit));
  for (int i = 0; i < spec.curve_points; ++i) {
    double r = lo_limit + (candidate - lo_limit) * (static_cast<double>(i) + 1.0) /
                              static_cast<double>(spec.curve_points);
    sol.r_gain_curve.emplace_back(r, gain_at(r));
  }

  if (spec.r0_override) {
    double r0 = *spec.r0_override;
    if (!(r0 > sol.rho && r0 < 1.0)) {
      throw InvalidArgument("dtbr_solve: override radius outside (rho, 1)");
    }
    if (!feasible(r0)) throw NoConvergence("dtbr_solve: override radius infeasible");
    sol.r0 = r0;
  } else if (feasible(candidate)) {
    sol.r0 = candidate;
  } else {
    // The gain is nonincreasing in r, so feasibility holds near 1; bisect
    // for the crossing radius and keep the feasible endpoint.
    double bad = candidate;
    double good = 1.0 - 1e-9 * (1.0 - sol.rho);
    if (!feasible(good)) throw NoConvergence("dtbr_solve: no admissible radius found");
    for (int i = 0; i < spec.bisect_iters && (good - bad) > 1e-12; ++i) {
      double mid = 0.5 * (good + bad);
      if (feasible(mid)) {
        good = mid;
      } else {
        bad = mid;
      }
    }
    sol.r0 = good;
  }
  sol.mu = sol.r0 * sol.r0;

  Eigen::MatrixXd At = A / sol.r0;
  Eigen::RowVectorXd Ct = C * (gamma / sol.r0);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  const int max_iters = 200000;
  bool converged = false;
  double last_delta = std::numeric_limits<double>::infinity();
  for (int k = 0; k < max_iters; ++k) {
    double s = 1.0 - (B.transpose() * P * B)(0, 0);
    if (s <= 1e-14) {
      throw NoConvergence("dtbr_solve: input coupling lost definiteness at iteration " +
                          std::to_string(k));
    }
    Eigen::RowVectorXd K = B.transpose() * P * At;
    Eigen::MatrixXd Pn = At.transpose() * P * At + Ct.transpose() * Ct + K.transpose() * K / s;
    Pn = 0.5 * (Pn + Pn.transpose());
    last_delta = (Pn - P).cwiseAbs().maxCoeff();
    P = Pn;
    sol.iterations = k + 1;
    if (last_delta <= 1e-15 * std::max(1.0, P.cwiseAbs().maxCoeff())) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NoConvergence("dtbr_solve: fixed point not reached after " +
                        std::to_string(max_iters) + " iterations, last step " +
                        std::to_string(last_delta));
  }

  double s = 1.0 - (B.transpose() * P * B)(0, 0);
  if (s <= 0.0) throw NoConvergence("dtbr_solve: nonpositive input slack at the fixed point");
  sol.P = P;
  sol.W = std::sqrt(s);
  sol.L = Eigen::RowVectorXd(-(B.transpose() * P * At) / sol.W);

  Eigen::MatrixXd state_res = A.transpose() * P * A + gamma * gamma * C.transpose() * C +
                              sol.mu * sol.L.transpose() * sol.L - sol.mu * P;
  sol.residual_state = state_res.cwiseAbs().maxCoeff();
  sol.residual_input = std::abs((B.transpose() * P * B)(0, 0) + sol.W * sol.W - 1.0);
  Eigen::VectorXd cross_res = A.transpose() * P * B + sol.r0 * sol.L.transpose() * sol.W;
  sol.residual_cross = cross_res.cwiseAbs().maxCoeff();
  return sol;
}

// Feedback interconnection of a linear block (A, B, C) with a
// differentiable scalar nonlinearity psi applied to u - Cx:
//   f(x, u) = A x + B psi(u - C x),  g(x) = C x.
struct LureSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  std::function<double(double)> psi;
  std::function<double(double)> psi_prime;
  double slope_lo = 0.0;  // a <= psi' <= b on R
  double slope_hi = 0.0;
  double gamma = 0.0;
  std::string name = "lure";

  int n() const { return static_cast<int>(A.rows()); }

  StateSpaceSystem to_state_space() const {
    StateSpaceSystem sys;
    sys.n = n();
    sys.name = name;
    sys.xi = Eigen::VectorXd::Zero(sys.n);
    Eigen::MatrixXd A_ = A;
    Eigen::VectorXd B_ = B;
    Eigen::RowVectorXd C_ = C;
    auto psi_ = psi;
    auto dpsi_ = psi_prime;
    sys.f = [A_, B_, C_, psi_](const Eigen::VectorXd& x, double u) -> Eigen::VectorXd {
      return A_ * x + B_ * psi_(u - (C_ * x)(0));
    };
    sys.g = [C_](const Eigen::VectorXd& x) { return (C_ * x)(0); };
    sys.jacobian_x = [A_, B_, C_, dpsi_](const Eigen::VectorXd& x, double u) -> Eigen::MatrixXd {
      return A_ - dpsi_(u - (C_ * x)(0)) * B_ * C_;
    };
    sys.lipschitz_f_u = B.norm() * std::max(std::abs(slope_lo), std::abs(slope_hi));
    sys.lipschitz_g = C.norm();
    return sys;
  }
};

// psi(v) = gain * tanh(v): slopes in [0, gain], psi(0) = 0.
inline LureSystem make_lure_tanh(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                 const Eigen::RowVectorXd& C, double gain, double gamma) {
  if (!(gain >= 0.0)) throw InvalidArgument("make_lure_tanh: gain must be >= 0");
  LureSystem lure;
  lure.A = A;
  lure.B = B;
  lure.C = C;
  lure.psi = [gain](double v) { return gain * std::tanh(v); };
  lure.psi_prime = [gain](double v) {
    double th = std::tanh(v);
    return gain * (1.0 - th * th);
  };
  lure.slope_lo = 0.0;
  lure.slope_hi = gain;
  lure.gamma = gamma;
  lure.name = "lure_tanh";
  return lure;
}

inline LureSystem make_lure_linear(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                   const Eigen::RowVectorXd& C, double slope, double gamma) {
  LureSystem lure;
  lure.A = A;
  lure.B = B;
  lure.C = C;
  lure.psi = [slope](double v) { return slope * v; };
  lure.psi_prime = [slope](double) { return slope; };
  lure.slope_lo = std::min(0.0, slope);
  lure.slope_hi = std::max(0.0, slope);
  lure.gamma = gamma;
  lure.name = "lure_linear";
  return lure;
}

struct LureCertification {
  DemidovichCertificate certificate;
  DTBRSolution dtbr;
  DemidovichResult grid_check;
};

// End-to-end pipeline: structural assumption checks, bounded-real solve,
// certificate assembly, and an independent grid cross-validation of the
// resulting matrix inequality.
inline LureCertification lure_certify_full(const LureSystem& lure, const GridSpec& grid = {},
                                           const R0SearchSpec& r0_spec = {}) {
  if (!lure.psi || !lure.psi_prime) throw InvalidArgument("lure_certify: psi and psi' required");
  if (std::abs(lure.psi(0.0)) > 1e-12) {
    throw AssumptionFailed("lure_certify: psi(0) != 0");
  }
  if (!(lure.slope_lo <= lure.slope_hi)) {
    throw AssumptionFailed("lure_certify: empty slope interval");
  }
  // Sampled slope-bound check on a range generous enough to cover the
  // verification grid's preactivation values.
  double v_bound = std::max(10.0, grid.u_bound + lure.C.norm() * grid.x_radius * 2.0);
  for (double v : detail::linspace(-v_bound, v_bound, 401)) {
    double slope = lure.psi_prime(v);
    if (slope < lure.slope_lo - 1e-9 || slope > lure.slope_hi + 1e-9) {
      throw AssumptionFailed("lure_certify: psi' leaves declared slope interval at v=" +
                             std::to_string(v));
    }
  }
  SpectralCheck spectrum = schur_check(lure.A);
  if (!spectrum.pass) {
    throw AssumptionFailed("lure_certify: A not Schur (rho = " + std::to_string(spectrum.rho) +
                           ")");
  }
  if (!controllability_check(lure.A, lure.B).pass) {
    throw AssumptionFailed("lure_certify: (A, B) not controllable");
  }
  if (!observability_check(lure.A, lure.C).pass) {
    throw AssumptionFailed("lure_certify: (A, C) not observable");
  }
  double slope_gain = std::max(std::abs(lure.slope_lo), std::abs(lure.slope_hi));
  if (lure.gamma < slope_gain - 1e-12) {
    throw AssumptionFailed("lure_certify: gamma must dominate the slope bound (gamma >= max(|a|,|b|))");
  }

  LureCertification out;
  try {
    out.dtbr = dtbr_solve(lure.A, lure.B, lure.C, lure.gamma, r0_spec);
  } catch (const NormTooLarge& e) {
    throw AssumptionFailed(std::string("lure_certify: small-gain condition failed: ") + e.what());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.dtbr.P);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw NotPositiveDefinite("lure_certify: bounded-real solution P is not positive definite");
  }

  StateSpaceSystem sys = lure.to_state_space();
  out.grid_check = verify_demidovich(sys, out.dtbr.P, out.dtbr.mu, grid);
  if (!out.grid_check.pass) {
    throw CrossCheckFailed("lure_certify: grid verification contradicts the algebraic certificate"
                           " (margin " + std::to_string(out.grid_check.worst_margin) + ")");
  }
  if (!(out.dtbr.mu > spectrum.rho * spectrum.rho)) {
    throw CrossCheckFailed("lure_certify: mu does not exceed rho(A)^2");
  }

  out.certificate = out.grid_check.certificate;
  out.certificate.provenance = "lure-bounded-real";
  return out;
}

inline DemidovichCertificate lure_certify(const LureSystem& lure, const GridSpec& grid = {},
                                          const R0SearchSpec& r0_spec = {}) {
  return lure_certify_full(lure, grid, r0_spec).certificate;
}

inline void to_json(nlohmann::json& j, const DTBRSolution& sol) {
  std::vector<double> p_rowmajor;
  for (int r = 0; r < sol.P.rows(); ++r) {
    for (int c = 0; c < sol.P.cols(); ++c) p_rowmajor.push_back(sol.P(r, c));
  }
  std::vector<double> l(sol.L.data(), sol.L.data() + sol.L.size());
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& [r, gain] : sol.r_gain_curve) curve.push_back({{"r", r}, {"gain", gain}});
  j = nlohmann::json{{"r0", sol.r0},
                     {"mu", sol.mu},
                     {"P", p_rowmajor},
                     {"L", l},
                     {"W", sol.W},
                     {"residual_state", sol.residual_state},
                     {"residual_input", sol.residual_input},
                     {"residual_cross", sol.residual_cross},
                     {"gamma", sol.gamma},
                     {"hinf", sol.hinf},
                     {"rho", sol.rho},
                     {"iterations", sol.iterations},
                     {"r_gain_curve", std::move(curve)}};
}

}  // namespace afm
