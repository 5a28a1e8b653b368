// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Quadratic incremental-stability certificates: a positive-definite metric
// P and a contraction factor mu in (0,1) such that J(x,u)' P J(x,u) <= mu P
// on the working region. A valid certificate induces the exponential gain
// beta(C, t) = sqrt(kappa(P)) * C * mu^{t/2}.

#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "afm/beta.hpp"
#include "afm/errors.hpp"

namespace afm {

struct DemidovichCertificate {
  Eigen::MatrixXd P;
  double mu = 0.0;
  double kappa = 1.0;
  // Worst grid value of lambda_max(J'PJ - mu P); <= 0 when the certificate
  // held everywhere it was checked.
  double margin = 0.0;
  std::string provenance = "unspecified";

  int n() const { return static_cast<int>(P.rows()); }

  void validate() const {
    if (P.rows() == 0 || P.rows() != P.cols()) {
      throw InvalidCertificate("certificate: P must be square and nonempty");
    }
    if (!P.isApprox(P.transpose(), 1e-10)) {
      throw InvalidCertificate("certificate: P must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw NotPositiveDefinite("certificate: P has a nonpositive eigenvalue");
    }
    if (!(mu > 0.0 && mu < 1.0)) {
      throw InvalidCertificate("certificate: mu must lie in (0, 1)");
    }
    if (!(kappa >= 1.0 - 1e-12)) {
      throw InvalidCertificate("certificate: kappa must be >= 1");
    }
  }

  // V(x, x') = (x - x')' P (x - x').
  double lyapunov(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    Eigen::VectorXd d = x - y;
    return d.dot(P * d);
  }

  BetaFunction induced_beta() const { return BetaFunction::exponential(std::sqrt(kappa), std::sqrt(mu)); }
};

inline double condition_number(const Eigen::MatrixXd& P) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw NotPositiveDefinite("condition_number: matrix not positive definite");
  return hi / lo;
}

inline void to_json(nlohmann::json& j, const DemidovichCertificate& cert) {
  std::vector<double> p_rowmajor;
  p_rowmajor.reserve(static_cast<std::size_t>(cert.P.size()));
  for (int r = 0; r < cert.P.rows(); ++r) {
    for (int c = 0; c < cert.P.cols(); ++c) p_rowmajor.push_back(cert.P(r, c));
  }
  j = nlohmann::json{{"P", p_rowmajor}, {"n", cert.n()},           {"mu", cert.mu},
                     {"kappa", cert.kappa}, {"margin", cert.margin}, {"provenance", cert.provenance}};
}

inline void from_json(const nlohmann::json& j, DemidovichCertificate& cert) {
  int n = j.at("n").get<int>();
  auto p = j.at("P").get<std::vector<double>>();
  if (static_cast<int>(p.size()) != n * n) {
    throw InvalidCertificate("certificate: P payload size mismatch");
  }
  cert.P.resize(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) cert.P(r, c) = p[static_cast<std::size_t>(r * n + c)];
  }
  cert.mu = j.at("mu").get<double>();
  cert.kappa = j.at("kappa").get<double>();
  cert.margin = j.at("margin").get<double>();
  cert.provenance = j.at("provenance").get<std::string>();
  cert.validate();
}

}  // namespace afm
