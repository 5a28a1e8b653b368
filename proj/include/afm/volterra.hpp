// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Polynomial (Volterra) window models: multi-index enumeration, least-squares
// fitting with conditioning diagnostics, and the parameter-count comparison
// against ReLU filter truncation at matched accuracy.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "afm/errors.hpp"
#include "afm/iomap.hpp"
#include "afm/rng.hpp"
#include "afm/sequence.hpp"
#include "afm/tcn.hpp"

namespace afm {

// Number of monomials in m + 1 variables of total degree <= d,
// i.e. binomial(m + 1 + d, d). Returned as double since it overflows
// 64-bit integers already at desk-scale (m, d).
inline double volterra_term_count(int m, int d) {
  if (m < 0 || d < 0) throw InvalidArgument("volterra_term_count: m, d must be >= 0");
  double count = 1.0;
  for (int i = 1; i <= d; ++i) {
    count *= static_cast<double>(m + 1 + i) / static_cast<double>(i);
  }
  return count;
}

// Truncated polynomial expansion of a window functional: one coefficient per
// monomial w^e with |e| <= degree over the window (w_0, ..., w_m).
struct VolterraModel {
  int m = 0;
  int degree = 0;
  std::vector<std::vector<int>> exponents;  // each entry has m + 1 slots
  std::vector<double> coeffs;

  double eval(const Eigen::VectorXd& w) const {
    if (w.size() != m + 1) throw DimensionMismatch("VolterraModel: window size mismatch");
    double acc = 0.0;
    for (std::size_t k = 0; k < exponents.size(); ++k) {
      double term = coeffs[k];
      for (int j = 0; j <= m; ++j) {
        for (int p = 0; p < exponents[k][static_cast<std::size_t>(j)]; ++p) term *= w[j];
      }
      acc += term;
    }
    return acc;
  }

  double apply(const Sequence& u, int t) const {
    if (t < 0) throw InvalidArgument("VolterraModel: t must be nonnegative");
    Eigen::VectorXd w(m + 1);
    for (int j = 0; j <= m; ++j) w[j] = u.value(static_cast<long>(t) - m + j);
    return eval(w);
  }
};

namespace detail {

inline void enumerate_exponents(int vars, int budget, std::vector<int>& current,
                                std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == vars) {
    out.push_back(current);
    return;
  }
  for (int e = 0; e <= budget; ++e) {
    current.push_back(e);
    enumerate_exponents(vars, budget - e, current, out);
    current.pop_back();
  }
}

inline std::vector<std::vector<int>> all_exponents(int m, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  enumerate_exponents(m + 1, degree, current, out);
  return out;
}

}  // namespace detail

struct VolterraFitReport {
  double holdout_sup = 0.0;
  double train_rms = 0.0;
  double condition = 0.0;  // singular value ratio of the design matrix
  int terms = 0;
  bool regularized = false;  // ridge fallback engaged on rank deficiency
  std::uint64_t seed = 0;
};

// Least-squares fit of the degree-d expansion to the window functional of F.
// Falls back to a flagged ridge solve when the design matrix is rank
// deficient; throws IllConditioned only when even that fails.
inline std::pair<VolterraModel, VolterraFitReport> volterra_fit(const IoMap& F, int m, int degree,
                                                                double R, int samples,
                                                                std::uint64_t seed) {
  if (m < 0 || degree < 0) throw InvalidArgument("volterra_fit: m, degree must be >= 0");
  if (!(R > 0.0)) throw InvalidArgument("volterra_fit: R must be positive");

  VolterraModel model;
  model.m = m;
  model.degree = degree;
  model.exponents = detail::all_exponents(m, degree);
  const int terms = static_cast<int>(model.exponents.size());
  if (samples < 2 * terms) samples = 2 * terms;

  Rng root(seed);
  auto xs = detail::make_windows(m, R, samples, root.split(0x70077ULL));
  auto holdout = detail::make_windows(m, R, std::max(terms, samples / 4), root.split(0x800880ULL));

  auto design_row = [&](const Eigen::VectorXd& w, Eigen::VectorXd& row) {
    for (int k = 0; k < terms; ++k) {
      double v = 1.0;
      for (int j = 0; j <= m; ++j) {
        for (int p = 0; p < model.exponents[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]; ++p) {
          v *= w[j];
        }
      }
      row[k] = v;
    }
  };

  Eigen::MatrixXd Phi(samples, terms);
  Eigen::VectorXd y(samples), row(terms);
  for (int i = 0; i < samples; ++i) {
    design_row(xs[static_cast<std::size_t>(i)], row);
    Phi.row(i) = row;
    std::vector<double> w(xs[static_cast<std::size_t>(i)].data(),
                          xs[static_cast<std::size_t>(i)].data() + m + 1);
    y[i] = finite_functional(F, w);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);

  VolterraFitReport report;
  report.terms = terms;
  report.seed = seed;
  report.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();

  Eigen::VectorXd c;
  if (smin > 1e-12 * smax) {
    c = svd.solve(y);
  } else {
    report.regularized = true;
    double ridge = (1e-10 * smax) * (1e-10 * smax);
    Eigen::MatrixXd G = Phi.transpose() * Phi;
    G.diagonal().array() += ridge;
    c = G.ldlt().solve(Phi.transpose() * y);
  }
  if (!c.allFinite()) throw IllConditioned("volterra_fit: normal equations produced non-finite coefficients");
  model.coeffs.assign(c.data(), c.data() + terms);

  double sse = (Phi * c - y).squaredNorm();
  report.train_rms = std::sqrt(sse / static_cast<double>(samples));
  double sup = 0.0;
  for (const auto& w : holdout) {
    std::vector<double> wv(w.data(), w.data() + m + 1);
    sup = std::max(sup, std::abs(model.eval(w) - finite_functional(F, wv)));
  }
  report.holdout_sup = sup;
  return {std::move(model), report};
}

// Least-squares polynomial fit of relu on [-S, S]: Chebyshev basis on
// Chebyshev-Lobatto nodes, sup error read off a dense uniform grid.
inline double relu_poly_ls_error(double S, int degree, int fit_nodes = 2048,
                                 int check_nodes = 8192) {
  if (!(S > 0.0)) throw InvalidArgument("relu_poly_ls_error: S must be positive");
  if (degree < 0) throw InvalidArgument("relu_poly_ls_error: degree must be >= 0");
  const int n = std::max(fit_nodes, 4 * (degree + 1));
  Eigen::MatrixXd A(n, degree + 1);
  Eigen::VectorXd y(n);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * static_cast<double>(i) / static_cast<double>(n - 1));
    double t0 = 1.0, t1 = x;
    for (int k = 0; k <= degree; ++k) {
      if (k == 0) {
        A(i, k) = 1.0;
      } else if (k == 1) {
        A(i, k) = x;
      } else {
        double t2 = 2.0 * x * t1 - t0;
        t0 = t1;
        t1 = t2;
        A(i, k) = t2;
      }
    }
    y[i] = std::max(S * x, 0.0);
  }
  Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);

  double sup = 0.0;
  for (int i = 0; i < check_nodes; ++i) {
    double x = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(check_nodes - 1);
    double t0 = 1.0, t1 = x, val = coef[0];
    if (degree >= 1) val += coef[1] * x;
    for (int k = 2; k <= degree; ++k) {
      double t2 = 2.0 * x * t1 - t0;
      t0 = t1;
      t1 = t2;
      val += coef[k] * t2;
    }
    sup = std::max(sup, std::abs(val - std::max(S * x, 0.0)));
  }
  return sup;
}

struct ParsimonyRow {
  double eps = 0.0;
  int tcn_m = 0;
  int tcn_affine_params = 0;  // m + 2: window taps plus one bias
  int volterra_degree = -1;   // -1 when no degree under the cap reached eps
  double volterra_terms = 0.0;
  double volterra_ls_error = 0.0;
};

struct ParsimonyTable {
  double C = 0.0;
  double lambda = 0.0;
  double R = 0.0;
  std::vector<ParsimonyRow> rows;
};

// Parameter counts needed to hit each target accuracy for the canonical
// exponential ReLU filter: filter truncation (exact tail bound) versus a
// degree-d polynomial in the scalar preactivation, whose gap to relu is
// measured by least squares on [-S, S] with S = R C / (1 - lambda).
inline ParsimonyTable compare_parsimony(double C, double lambda, double R,
                                        const std::vector<double>& eps_grid,
                                        int max_degree = 200) {
  if (!(C > 0.0) || !(lambda > 0.0 && lambda < 1.0) || !(R > 0.0)) {
    throw InvalidArgument("compare_parsimony: need C > 0, lambda in (0,1), R > 0");
  }
  if (eps_grid.empty()) throw InvalidArgument("compare_parsimony: eps grid is empty");
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw InvalidArgument("compare_parsimony: eps must be positive");
  }

  const double S = R * C / (1.0 - lambda);
  std::vector<double> ls_error;  // ls_error[d], computed lazily in order
  auto error_at = [&](int d) {
    while (static_cast<int>(ls_error.size()) <= d) {
      ls_error.push_back(relu_poly_ls_error(S, static_cast<int>(ls_error.size())));
    }
    return ls_error[static_cast<std::size_t>(d)];
  };

  ParsimonyTable table;
  table.C = C;
  table.lambda = lambda;
  table.R = R;
  for (double eps : eps_grid) {
    ParsimonyRow row;
    row.eps = eps;
    ExpFilter filter = ExpFilter::geometric(C, lambda);
    int m = 0;
    while (R * filter.tail_abs(m) > eps && m < 100000) ++m;
    row.tcn_m = m;
    row.tcn_affine_params = m + 2;

    row.volterra_degree = -1;
    for (int d = 0; d <= max_degree; ++d) {
      if (error_at(d) <= eps) {
        row.volterra_degree = d;
        row.volterra_ls_error = error_at(d);
        row.volterra_terms = volterra_term_count(row.tcn_m, d);
        break;
      }
    }
    if (row.volterra_degree < 0) {
      row.volterra_ls_error = error_at(max_degree);
      row.volterra_terms = std::numeric_limits<double>::infinity();
    }
    table.rows.push_back(row);
  }
  return table;
}

inline void to_json(nlohmann::json& j, const VolterraModel& model) {
  j = nlohmann::json{{"m", model.m},
                     {"degree", model.degree},
                     {"exponents", model.exponents},
                     {"coeffs", model.coeffs}};
}

inline void to_json(nlohmann::json& j, const VolterraFitReport& report) {
  j = nlohmann::json{{"holdout_sup", report.holdout_sup},
                     {"train_rms", report.train_rms},
                     {"condition", report.condition},
                     {"terms", report.terms},
                     {"regularized", report.regularized},
                     {"seed", report.seed}};
}

inline void to_json(nlohmann::json& j, const ParsimonyRow& row) {
  j = nlohmann::json{{"eps", row.eps},
                     {"tcn_m", row.tcn_m},
                     {"tcn_affine_params", row.tcn_affine_params},
                     {"volterra_degree", row.volterra_degree},
                     {"volterra_terms", row.volterra_terms},
                     {"volterra_ls_error", row.volterra_ls_error}};
}

inline void to_json(nlohmann::json& j, const ParsimonyTable& table) {
  j = nlohmann::json{
      {"C", table.C}, {"lambda", table.lambda}, {"R", table.R}, {"rows", table.rows}};
}

}  // namespace afm
