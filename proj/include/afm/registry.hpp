// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Named builtin systems addressable from configs: scalar linear, scalar
// contractive tanh, feedback systems with slope-bounded nonlinearity, and
// tapped delay lines over explicit filter taps. Analytically known
// certificates and gain functions are attached where they exist.

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "afm/beta.hpp"
#include "afm/certificate.hpp"
#include "afm/errors.hpp"
#include "afm/stability.hpp"
#include "afm/statespace.hpp"

namespace afm {

struct BuiltinSystem {
  StateSpaceSystem sys;
  // Exact certificate / gain when the dynamics admit one analytically.
  std::optional<DemidovichCertificate> certificate;
  std::optional<BetaFunction> exact_beta;
  std::optional<LureSystem> lure;
};

// x_{t+1} = a x_t + b u_t, y = c x. Contraction rate |a|.
inline BuiltinSystem make_linear(double a, double b, double c) {
  BuiltinSystem built;
  StateSpaceSystem& sys = built.sys;
  sys.n = 1;
  sys.name = "linear(a=" + std::to_string(a) + ",b=" + std::to_string(b) +
             ",c=" + std::to_string(c) + ")";
  sys.xi = Eigen::VectorXd::Zero(1);
  sys.f = [a, b](const Eigen::VectorXd& x, double u) {
    Eigen::VectorXd next(1);
    next[0] = a * x[0] + b * u;
    return next;
  };
  sys.g = [c](const Eigen::VectorXd& x) { return c * x[0]; };
  sys.jacobian_x = [a](const Eigen::VectorXd&, double) {
    Eigen::MatrixXd J(1, 1);
    J(0, 0) = a;
    return J;
  };
  sys.lipschitz_f_u = std::abs(b);
  sys.lipschitz_g = std::abs(c);
  if (std::abs(a) < 1.0) {
    DemidovichCertificate cert;
    cert.P = Eigen::MatrixXd::Identity(1, 1);
    cert.mu = std::max(a * a, 1e-12);
    cert.kappa = 1.0;
    cert.margin = 0.0;
    cert.provenance = "analytic";
    built.certificate = cert;
    built.exact_beta = BetaFunction::exponential(1.0, std::abs(a));
  }
  return built;
}

// x_{t+1} = a tanh(x_t) + b u_t, y = x. Contractive for |a| < 1.
inline BuiltinSystem make_contractive_tanh(double a, double b) {
  BuiltinSystem built;
  StateSpaceSystem& sys = built.sys;
  sys.n = 1;
  sys.name = "contractive_tanh(a=" + std::to_string(a) + ",b=" + std::to_string(b) + ")";
  sys.xi = Eigen::VectorXd::Zero(1);
  sys.f = [a, b](const Eigen::VectorXd& x, double u) {
    Eigen::VectorXd next(1);
    next[0] = a * std::tanh(x[0]) + b * u;
    return next;
  };
  sys.g = [](const Eigen::VectorXd& x) { return x[0]; };
  sys.jacobian_x = [a](const Eigen::VectorXd& x, double) {
    double th = std::tanh(x[0]);
    Eigen::MatrixXd J(1, 1);
    J(0, 0) = a * (1.0 - th * th);
    return J;
  };
  sys.lipschitz_f_u = std::abs(b);
  sys.lipschitz_g = 1.0;
  if (std::abs(a) < 1.0 && a != 0.0) {
    // |a tanh(x) - a tanh(y)| <= |a| |x - y|: Euclidean contraction at
    // rate |a|, globally.
    DemidovichCertificate cert;
    cert.P = Eigen::MatrixXd::Identity(1, 1);
    cert.mu = a * a;
    cert.kappa = 1.0;
    cert.margin = 0.0;
    cert.provenance = "analytic";
    built.certificate = cert;
    built.exact_beta = BetaFunction::exponential(1.0, std::abs(a));
  }
  return built;
}

// (F u)_t = relu(sum_s C lambda^s u_{t-s}) realized with one state:
// x_{t+1} = lambda x_t + u_t carries the discounted input history, and the
// read-out relu(C (u_t + lambda x_t)) adds the current input feedthrough.
inline BuiltinSystem make_relu_filter(double C, double lambda) {
  if (!(C > 0.0)) throw InvalidArgument("make_relu_filter: C must be positive");
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("make_relu_filter: lambda in (0,1)");
  BuiltinSystem built;
  StateSpaceSystem& sys = built.sys;
  sys.n = 1;
  sys.name = "relu_filter(C=" + std::to_string(C) + ",lambda=" + std::to_string(lambda) + ")";
  sys.xi = Eigen::VectorXd::Zero(1);
  sys.f = [lambda](const Eigen::VectorXd& x, double u) {
    Eigen::VectorXd next(1);
    next[0] = lambda * x[0] + u;
    return next;
  };
  sys.g = [C, lambda](const Eigen::VectorXd& x) { return std::max(C * lambda * x[0], 0.0); };
  sys.output_feedthrough = [C, lambda](const Eigen::VectorXd& x, double u) {
    return std::max(C * (u + lambda * x[0]), 0.0);
  };
  sys.jacobian_x = [lambda](const Eigen::VectorXd&, double) {
    Eigen::MatrixXd J(1, 1);
    J(0, 0) = lambda;
    return J;
  };
  sys.lipschitz_f_u = 1.0;
  sys.lipschitz_g = C;  // positive part is 1-Lipschitz, and lambda < 1
  DemidovichCertificate cert;
  cert.P = Eigen::MatrixXd::Identity(1, 1);
  cert.mu = lambda * lambda;
  cert.kappa = 1.0;
  cert.margin = 0.0;
  cert.provenance = "analytic";
  built.certificate = cert;
  built.exact_beta = BetaFunction::exponential(1.0, lambda);
  return built;
}

inline BuiltinSystem make_lure(const LureSystem& lure) {
  BuiltinSystem built;
  built.sys = lure.to_state_space();
  built.lure = lure;
  return built;
}

// Tapped delay line over explicit taps: y_t = act(sum_s h_s u_{t-s}) with
// window length = number of taps; act is identity or the positive part.
inline BuiltinSystem make_tapped_delay(const std::vector<double>& coeffs, bool relu) {
  if (coeffs.empty()) throw InvalidArgument("make_tapped_delay: need at least one tap");
  int m = static_cast<int>(coeffs.size()) - 1;
  // Window vector w = (u_{t-m}, ..., u_t); tap h_s multiplies u_{t-s}.
  auto fm = [coeffs, m, relu](const Eigen::VectorXd& w) {
    double acc = 0.0;
    for (int s = 0; s <= m; ++s) acc += coeffs[static_cast<std::size_t>(s)] * w[m - s];
    return relu ? std::max(acc, 0.0) : acc;
  };
  BuiltinSystem built;
  built.sys = tapped_delay_realization(fm, m);
  double l1 = 0.0;
  for (double h : coeffs) l1 += std::abs(h);
  built.sys.lipschitz_g = l1;  // crude but valid bound for the window read-out
  built.sys.name = std::string(relu ? "relu_" : "") + "tapped_delay(taps=" +
                   std::to_string(coeffs.size()) + ")";
  return built;
}

namespace detail {

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigInvalid(what + ": expected a nonempty 2-d array");
  int rows = static_cast<int>(j.size());
  int cols = static_cast<int>(j.at(0).size());
  Eigen::MatrixXd M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j.at(r).size()) != cols) throw ConfigInvalid(what + ": ragged rows");
    for (int c = 0; c < cols; ++c) M(r, c) = j.at(r).at(c).get<double>();
  }
  return M;
}

}  // namespace detail

// System spec: {"name": "linear", "a": .., "b": .., "c": ..} and friends.
inline BuiltinSystem system_from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("name")) {
    throw ConfigInvalid("system: expected an object with a 'name' field");
  }
  std::string name = spec.at("name").get<std::string>();
  auto require = [&](std::initializer_list<const char*> fields) {
    for (const char* f : fields) {
      if (!spec.contains(f)) throw ConfigInvalid("system '" + name + "': missing field '" + f + "'");
    }
    for (const auto& [key, _] : spec.items()) {
      bool known = key == "name";
      for (const char* f : fields) known = known || key == f;
      if (!known) throw ConfigInvalid("system '" + name + "': unknown field '" + key + "'");
    }
  };
  if (name == "linear") {
    require({"a", "b", "c"});
    return make_linear(spec.at("a").get<double>(), spec.at("b").get<double>(),
                       spec.at("c").get<double>());
  }
  if (name == "contractive_tanh") {
    require({"a", "b"});
    return make_contractive_tanh(spec.at("a").get<double>(), spec.at("b").get<double>());
  }
  if (name == "lure") {
    require({"A", "B", "C", "psi", "gamma"});
    Eigen::MatrixXd A = detail::matrix_from_json(spec.at("A"), "lure.A");
    auto b_vec = spec.at("B").get<std::vector<double>>();
    auto c_vec = spec.at("C").get<std::vector<double>>();
    Eigen::VectorXd B = Eigen::Map<Eigen::VectorXd>(b_vec.data(), static_cast<long>(b_vec.size()));
    Eigen::RowVectorXd C =
        Eigen::Map<Eigen::RowVectorXd>(c_vec.data(), static_cast<long>(c_vec.size()));
    double gamma = spec.at("gamma").get<double>();
    const nlohmann::json& psi = spec.at("psi");
    std::string kind = psi.at("kind").get<std::string>();
    if (kind == "tanh") {
      return make_lure(make_lure_tanh(A, B, C, psi.at("gain").get<double>(), gamma));
    }
    if (kind == "linear") {
      return make_lure(make_lure_linear(A, B, C, psi.at("slope").get<double>(), gamma));
    }
    if (kind == "zero") {
      return make_lure(make_lure_linear(A, B, C, 0.0, gamma));
    }
    throw ConfigInvalid("system 'lure': unknown psi kind '" + kind + "'");
  }
  if (name == "tapped_delay") {
    require({"coeffs", "relu"});
    return make_tapped_delay(spec.at("coeffs").get<std::vector<double>>(),
                             spec.at("relu").get<bool>());
  }
  if (name == "relu_filter") {
    require({"C", "lambda"});
    return make_relu_filter(spec.at("C").get<double>(), spec.at("lambda").get<double>());
  }
  throw ConfigInvalid("system: unknown name '" + name + "'");
}

}  // namespace afm
