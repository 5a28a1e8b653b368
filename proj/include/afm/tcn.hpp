// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Feedforward ReLU nets, sliding-window models built on them, exponential
// ReLU filters with truncation guarantees, width/depth planning from memory
// and modulus data, and deterministic training (Adam warmup + damped
// Gauss-Newton polish) against the window functional of a causal map.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "afm/errors.hpp"
#include "afm/iomap.hpp"
#include "afm/rng.hpp"
#include "afm/sequence.hpp"

namespace afm {

struct AffineLayer {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
};

// A_k o relu o A_{k-1} o ... o relu o A_1 with scalar output.
class ReluNet {
 public:
  ReluNet() = default;

  explicit ReluNet(std::vector<AffineLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw InvalidArgument("ReluNet: need at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& layer = layers_[i];
      if (layer.W.rows() != layer.b.size()) {
        throw DimensionMismatch("ReluNet: bias size must match layer rows");
      }
      if (i > 0 && layers_[i - 1].W.rows() != layer.W.cols()) {
        throw DimensionMismatch("ReluNet: layer dimensions do not chain");
      }
    }
    if (layers_.back().W.rows() != 1) throw DimensionMismatch("ReluNet: output must be scalar");
  }

  int depth() const { return static_cast<int>(layers_.size()); }
  int input_dim() const { return static_cast<int>(layers_.front().W.cols()); }

  // Widest hidden activation; 0 for a single affine layer.
  int width() const {
    int w = 0;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
      w = std::max(w, static_cast<int>(layers_[i].W.rows()));
    }
    return w;
  }

  // Weights + biases across all layers.
  int parameter_count() const {
    int count = 0;
    for (const auto& layer : layers_) {
      count += static_cast<int>(layer.W.size() + layer.b.size());
    }
    return count;
  }

  double eval(const Eigen::VectorXd& x) const {
    if (x.size() != input_dim()) throw DimensionMismatch("ReluNet: input dimension mismatch");
    Eigen::VectorXd a = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      a = layers_[i].W * a + layers_[i].b;
      if (i + 1 < layers_.size()) a = a.cwiseMax(0.0);
    }
    return a(0);
  }

  const std::vector<AffineLayer>& layers() const { return layers_; }
  std::vector<AffineLayer>& mutable_layers() { return layers_; }

 private:
  std::vector<AffineLayer> layers_;
};

inline double net_eval(const ReluNet& net, const Eigen::VectorXd& x) { return net.eval(x); }

inline double net_eval(const ReluNet& net, const std::vector<double>& x) {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<long>(x.size()));
  return net.eval(v);
}

// Sliding-window model: output at t is the net applied to the zero-padded
// window (u_{t-m}, ..., u_t).
struct TCNModel {
  int m = 0;
  ReluNet net;
  bool zero_at_zero = false;

  Eigen::VectorXd window_at(const Sequence& u, int t) const {
    Eigen::VectorXd w(m + 1);
    for (int j = 0; j <= m; ++j) w[j] = u.value(static_cast<long>(t) - m + j);
    return w;
  }
};

inline double tcn_apply(const TCNModel& model, const Sequence& u, int t) {
  if (t < 0) throw InvalidArgument("tcn_apply: t must be nonnegative");
  return model.net.eval(model.window_at(u, t));
}

inline IoMap io_map_of(const TCNModel& model) {
  IoMap map;
  map.name = "tcn(m=" + std::to_string(model.m) + ")";
  map.declared_causal = true;
  map.declared_time_invariant = model.zero_at_zero;
  map.eval = [model](const Sequence& u, int t) { return tcn_apply(model, u, t); };
  return map;
}

// Convolution filter with exponentially decaying taps |h_s| <= C lambda^s,
// either the canonical geometric taps h_s = C lambda^s on an unbounded
// index range or a stored custom prefix (zero beyond it).
struct ExpFilter {
  double C = 1.0;
  double lambda = 0.5;
  std::vector<double> h;  // empty for the canonical geometric taps
  bool geometric_taps = true;

  static ExpFilter geometric(double C, double lambda) {
    if (!(C > 0.0)) throw InvalidArgument("ExpFilter: C must be positive");
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("ExpFilter: lambda in (0,1)");
    ExpFilter f;
    f.C = C;
    f.lambda = lambda;
    f.geometric_taps = true;
    return f;
  }

  static ExpFilter custom(double C, double lambda, std::vector<double> taps) {
    if (!(C > 0.0)) throw InvalidArgument("ExpFilter: C must be positive");
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("ExpFilter: lambda in (0,1)");
    for (std::size_t s = 0; s < taps.size(); ++s) {
      double envelope = C * std::pow(lambda, static_cast<double>(s));
      if (std::abs(taps[s]) > envelope * (1.0 + 1e-12)) {
        throw DecayViolated("ExpFilter: |h_" + std::to_string(s) + "| exceeds C lambda^s");
      }
    }
    ExpFilter f;
    f.C = C;
    f.lambda = lambda;
    f.h = std::move(taps);
    f.geometric_taps = false;
    return f;
  }

  double coeff(long s) const {
    if (s < 0) return 0.0;
    if (geometric_taps) return C * std::pow(lambda, static_cast<double>(s));
    return s < static_cast<long>(h.size()) ? h[static_cast<std::size_t>(s)] : 0.0;
  }

  // Upper bound on sum_{s > m} |h_s|.
  double tail_abs(int m) const {
    if (geometric_taps) return C * std::pow(lambda, static_cast<double>(m) + 1.0) / (1.0 - lambda);
    double sum = 0.0;
    for (std::size_t s = static_cast<std::size_t>(m) + 1; s < h.size(); ++s) sum += std::abs(h[s]);
    return sum;
  }
};

// (F u)_t = relu(sum_s h_s u_{t-s}); horizon >= 0 zeroes taps beyond it.
inline IoMap relu_filter_map(const ExpFilter& filter, long horizon = -1) {
  IoMap map;
  map.name = "relu_filter";
  map.declared_causal = true;
  map.declared_time_invariant = true;
  map.eval = [filter, horizon](const Sequence& u, int t) {
    double acc = 0.0;
    long last = horizon >= 0 ? std::min<long>(horizon, t) : t;
    for (long s = 0; s <= last; ++s) acc += filter.coeff(s) * u.value(t - s);
    return std::max(acc, 0.0);
  };
  return map;
}

inline IoMap relu_filter_map(double C, double lambda, long horizon = -1) {
  return relu_filter_map(ExpFilter::geometric(C, lambda), horizon);
}

struct TruncatedFilter {
  TCNModel model;
  // Guaranteed sup error over the amplitude-R input ball: R * tail_abs(m),
  // since the positive-part clamp is 1-Lipschitz.
  double error_bound = 0.0;
};

// Zeroes all taps beyond lag m and realizes the rest as a two-layer net:
// affine taps, then the positive-part clamp.
inline TruncatedFilter truncate_filter(const ExpFilter& filter, int m, double R = 1.0) {
  if (m < 0) throw InvalidArgument("truncate_filter: m must be >= 0");
  if (!(R >= 0.0)) throw InvalidArgument("truncate_filter: R must be >= 0");
  AffineLayer taps;
  taps.W.resize(1, m + 1);
  // Window component j holds u_{t-m+j}, which tap h_{m-j} multiplies.
  for (int j = 0; j <= m; ++j) taps.W(0, j) = filter.coeff(m - j);
  taps.b = Eigen::VectorXd::Zero(1);
  AffineLayer out;
  out.W = Eigen::MatrixXd::Ones(1, 1);
  out.b = Eigen::VectorXd::Zero(1);

  TruncatedFilter result;
  result.model.m = m;
  result.model.net = ReluNet({taps, out});
  result.model.zero_at_zero = true;
  result.error_bound = R * filter.tail_abs(m);
  return result;
}

struct Theorem1Plan {
  double eps = 0.0;
  double gamma = 0.0;
  double R = 0.0;
  double c = 1.0;  // unspecified multiplicative constant, exposed as a knob
  int m = 0;
  int width = 0;  // always m + 2
  double inv_mod = 0.0;
  double depth_bound = 0.0;  // (c R / inv_mod)^{m+2}; may overflow to inf
  double log10_depth_bound = 0.0;
  bool resolved = true;  // false when inv_mod vanished and no depth exists
};

struct Theorem1PlanTable {
  Theorem1Plan chosen;
  std::vector<Theorem1Plan> tradeoff;  // one row per gamma grid value
};

// Architecture plan from an error split eps = gamma eps + (1 - gamma) eps:
// the window must cover m*(gamma eps) and the net must resolve inputs at
// granularity inv_mod(m, (1 - gamma) eps).
inline Theorem1PlanTable theorem1_plan(double eps, double gamma, double R,
                                       const std::function<int(double)>& m_star,
                                       const std::function<double(int, double)>& inv_mod,
                                       double c = 1.0,
                                       std::vector<double> gamma_grid = {0.1, 0.2, 0.3, 0.4, 0.5,
                                                                         0.6, 0.7, 0.8, 0.9}) {
  if (!(eps > 0.0)) throw InvalidArgument("theorem1_plan: eps must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("theorem1_plan: gamma in (0,1)");
  if (!(R > 0.0)) throw InvalidArgument("theorem1_plan: R must be positive");
  if (!(c > 0.0)) throw InvalidArgument("theorem1_plan: c must be positive");
  if (!m_star || !inv_mod) throw InvalidArgument("theorem1_plan: callbacks required");

  auto plan_at = [&](double split) {
    Theorem1Plan plan;
    plan.eps = eps;
    plan.gamma = split;
    plan.R = R;
    plan.c = c;
    plan.m = m_star(split * eps);
    plan.width = plan.m + 2;
    plan.inv_mod = inv_mod(plan.m, (1.0 - split) * eps);
    if (plan.inv_mod > 0.0) {
      double base = c * R / plan.inv_mod;
      base = std::max(base, 1.0);  // never claim a sub-constant depth
      plan.log10_depth_bound = (plan.m + 2) * std::log10(base);
      plan.depth_bound = plan.log10_depth_bound > 300.0
                             ? std::numeric_limits<double>::infinity()
                             : std::pow(base, static_cast<double>(plan.m + 2));
      plan.resolved = true;
    } else {
      plan.depth_bound = std::numeric_limits<double>::infinity();
      plan.log10_depth_bound = std::numeric_limits<double>::infinity();
      plan.resolved = false;
    }
    return plan;
  };

  Theorem1PlanTable table;
  table.chosen = plan_at(gamma);
  for (double split : gamma_grid) {
    if (split > 0.0 && split < 1.0) table.tradeoff.push_back(plan_at(split));
  }
  return table;
}

struct TrainSpec {
  int train_samples = 2048;
  int holdout_samples = 512;
  int adam_iters = 3000;
  double adam_lr = 0.02;
  double sup_weight = 0.1;      // extra loss weight on the worst residual
  int polish_iters = 200;       // damped Gauss-Newton steps
  int restarts = 1;
  double diverge_threshold = 1e8;
};

struct FitReport {
  double holdout_sup = 0.0;
  double holdout_rms = 0.0;
  double train_mse = 0.0;
  double zero_shift = 0.0;  // bias correction applied to pin net(0) = 0
  int adam_iters = 0;
  int polish_iters = 0;
  int restarts = 0;
  int best_restart = 0;
  std::uint64_t seed = 0;
};

namespace detail {

// Training / holdout windows in [-R, R]^{m+1}: pinned special points, sign
// corners, then uniform fill.
inline std::vector<Eigen::VectorXd> make_windows(int m, double R, int count, Rng root) {
  std::vector<Eigen::VectorXd> windows;
  windows.reserve(static_cast<std::size_t>(count));
  int d = m + 1;
  windows.push_back(Eigen::VectorXd::Zero(d));
  if (static_cast<int>(windows.size()) < count) windows.push_back(Eigen::VectorXd::Constant(d, R));
  if (static_cast<int>(windows.size()) < count) windows.push_back(Eigen::VectorXd::Constant(d, -R));
  int corners = std::min(count / 8, 64);
  for (int i = 0; i < corners && static_cast<int>(windows.size()) < count; ++i) {
    Rng g = root.split(0xC0B000ULL + static_cast<std::uint64_t>(i));
    Eigen::VectorXd w(d);
    for (int j = 0; j < d; ++j) w[j] = R * g.sign();
    windows.push_back(w);
  }
  int fill = 0;
  while (static_cast<int>(windows.size()) < count) {
    Rng g = root.split(0xF1110000ULL + static_cast<std::uint64_t>(fill++));
    Eigen::VectorXd w(d);
    for (int j = 0; j < d; ++j) w[j] = g.uniform(-R, R);
    windows.push_back(w);
  }
  return windows;
}

struct NetGradient {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
};

inline double forward_backward(const ReluNet& net, const std::vector<Eigen::VectorXd>& xs,
                               const std::vector<double>& ys, double sup_weight,
                               NetGradient* grad) {
  const auto& layers = net.layers();
  const std::size_t k = layers.size();
  const std::size_t n = xs.size();
  if (grad) {
    grad->dW.assign(k, Eigen::MatrixXd());
    grad->db.assign(k, Eigen::VectorXd());
    for (std::size_t i = 0; i < k; ++i) {
      grad->dW[i] = Eigen::MatrixXd::Zero(layers[i].W.rows(), layers[i].W.cols());
      grad->db[i] = Eigen::VectorXd::Zero(layers[i].b.size());
    }
  }

  std::vector<double> residuals(n);
  std::vector<std::vector<Eigen::VectorXd>> acts(n), pres(n);
  for (std::size_t s = 0; s < n; ++s) {
    Eigen::VectorXd a = xs[s];
    acts[s].push_back(a);
    pres[s].reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      Eigen::VectorXd z = layers[i].W * a + layers[i].b;
      pres[s].push_back(z);
      a = (i + 1 < k) ? z.cwiseMax(0.0) : z;
      acts[s].push_back(a);
    }
    residuals[s] = a(0) - ys[s];
  }

  double mse = 0.0;
  std::size_t worst = 0;
  for (std::size_t s = 0; s < n; ++s) {
    mse += residuals[s] * residuals[s];
    if (std::abs(residuals[s]) > std::abs(residuals[worst])) worst = s;
  }
  mse /= static_cast<double>(n);
  double loss = mse + sup_weight * residuals[worst] * residuals[worst];

  if (grad) {
    for (std::size_t s = 0; s < n; ++s) {
      double upstream = 2.0 * residuals[s] / static_cast<double>(n);
      if (s == worst) upstream += 2.0 * sup_weight * residuals[s];
      if (upstream == 0.0) continue;
      Eigen::VectorXd delta(1);
      delta[0] = upstream;
      for (std::size_t i = k; i-- > 0;) {
        grad->dW[i] += delta * acts[s][i].transpose();
        grad->db[i] += delta;
        if (i > 0) {
          Eigen::VectorXd back = layers[i].W.transpose() * delta;
          delta = (pres[s][i - 1].array() > 0.0).select(back, 0.0);
        }
      }
    }
  }
  return loss;
}

// Flattened parameter helpers for the Gauss-Newton polish.
inline int flat_size(const ReluNet& net) { return net.parameter_count(); }

inline void flatten(const ReluNet& net, Eigen::VectorXd& theta) {
  theta.resize(flat_size(net));
  int at = 0;
  for (const auto& layer : net.layers()) {
    for (int r = 0; r < layer.W.rows(); ++r) {
      for (int c = 0; c < layer.W.cols(); ++c) theta[at++] = layer.W(r, c);
    }
    for (int r = 0; r < layer.b.size(); ++r) theta[at++] = layer.b[r];
  }
}

inline void unflatten(const Eigen::VectorXd& theta, ReluNet& net) {
  int at = 0;
  for (auto& layer : net.mutable_layers()) {
    for (int r = 0; r < layer.W.rows(); ++r) {
      for (int c = 0; c < layer.W.cols(); ++c) layer.W(r, c) = theta[at++];
    }
    for (int r = 0; r < layer.b.size(); ++r) layer.b[r] = theta[at++];
  }
}

// Residuals e_s = net(x_s) - y_s and the Jacobian d e / d theta.
inline void residual_jacobian(const ReluNet& net, const std::vector<Eigen::VectorXd>& xs,
                              const std::vector<double>& ys, Eigen::VectorXd& e,
                              Eigen::MatrixXd& J) {
  const auto& layers = net.layers();
  const std::size_t k = layers.size();
  const std::size_t n = xs.size();
  const int p = flat_size(net);
  e.resize(static_cast<long>(n));
  J.resize(static_cast<long>(n), p);

  std::vector<int> w_offsets(k), b_offsets(k);
  int at = 0;
  for (std::size_t i = 0; i < k; ++i) {
    w_offsets[i] = at;
    at += static_cast<int>(layers[i].W.size());
    b_offsets[i] = at;
    at += static_cast<int>(layers[i].b.size());
  }

  std::vector<Eigen::VectorXd> act(k + 1), pre(k);
  for (std::size_t s = 0; s < n; ++s) {
    act[0] = xs[s];
    for (std::size_t i = 0; i < k; ++i) {
      pre[i] = layers[i].W * act[i] + layers[i].b;
      act[i + 1] = (i + 1 < k) ? Eigen::VectorXd(pre[i].cwiseMax(0.0)) : pre[i];
    }
    e[static_cast<long>(s)] = act[k](0) - ys[s];

    Eigen::VectorXd delta(1);
    delta[0] = 1.0;
    for (std::size_t i = k; i-- > 0;) {
      for (int r = 0; r < layers[i].W.rows(); ++r) {
        for (int c = 0; c < layers[i].W.cols(); ++c) {
          J(static_cast<long>(s), w_offsets[i] + r * static_cast<int>(layers[i].W.cols()) + c) =
              delta[r] * act[i][c];
        }
        J(static_cast<long>(s), b_offsets[i] + r) = delta[r];
      }
      if (i > 0) {
        Eigen::VectorXd back = layers[i].W.transpose() * delta;
        delta = (pre[i - 1].array() > 0.0).select(back, 0.0);
      }
    }
  }
}

inline ReluNet init_net(int input_dim, int width, int depth, Rng rng) {
  if (depth < 1) throw InvalidArgument("fit_tcn: depth must be >= 1");
  if (depth > 1 && width < 1) throw InvalidArgument("fit_tcn: width must be >= 1");
  std::vector<AffineLayer> layers;
  int in = input_dim;
  for (int i = 0; i < depth; ++i) {
    int out = (i + 1 < depth) ? width : 1;
    AffineLayer layer;
    layer.W.resize(out, in);
    layer.b.resize(out);
    double scale = std::sqrt(2.0 / static_cast<double>(in));
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) layer.W(r, c) = scale * rng.normal();
      layer.b[r] = 0.05 * rng.normal();
    }
    layers.push_back(std::move(layer));
    in = out;
  }
  return ReluNet(std::move(layers));
}

}  // namespace detail

struct TcnArch {
  int width = 8;
  int depth = 2;
};

// Trains a net of the requested architecture against the window functional
// of F on [-R, R]^{m+1}, then pins net(0, ..., 0) = 0 by a bias shift.
// Deterministic in (spec, seed); restarts pick the best holdout sup error.
inline std::pair<TCNModel, FitReport> fit_tcn(const IoMap& F, int m, double R, TcnArch arch,
                                              const TrainSpec& spec, std::uint64_t seed) {
  if (m < 0) throw InvalidArgument("fit_tcn: m must be >= 0");
  if (!(R > 0.0)) throw InvalidArgument("fit_tcn: R must be positive");
  if (spec.train_samples < 8 || spec.holdout_samples < 1) {
    throw InvalidArgument("fit_tcn: sample counts too small");
  }

  Rng root(seed);
  auto train_x = detail::make_windows(m, R, spec.train_samples, root.split(0x77AA11ULL));
  auto holdout_x = detail::make_windows(m, R, spec.holdout_samples, root.split(0x880FFULL));
  auto label = [&](const std::vector<Eigen::VectorXd>& xs) {
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::vector<double> w(xs[i].data(), xs[i].data() + xs[i].size());
      ys[i] = finite_functional(F, w);
    }
    return ys;
  };
  auto train_y = label(train_x);
  auto holdout_y = label(holdout_x);

  ReluNet best_net;
  double best_sup = std::numeric_limits<double>::infinity();
  int best_restart = 0;
  double best_train_mse = 0.0;

  for (int restart = 0; restart < std::max(1, spec.restarts); ++restart) {
    ReluNet net = detail::init_net(m + 1, arch.width, arch.depth,
                                   root.split(0x111700ULL + static_cast<std::uint64_t>(restart)));

    // Adam warmup on the sup-weighted squared loss.
    Eigen::VectorXd theta, mom1, mom2;
    detail::flatten(net, theta);
    mom1 = Eigen::VectorXd::Zero(theta.size());
    mom2 = Eigen::VectorXd::Zero(theta.size());
    detail::NetGradient grad;
    double lr = spec.adam_lr;
    for (int iter = 0; iter < spec.adam_iters; ++iter) {
      double loss = detail::forward_backward(net, train_x, train_y, spec.sup_weight, &grad);
      if (!std::isfinite(loss) || loss > spec.diverge_threshold) {
        throw TrainingDiverged("fit_tcn: loss " + std::to_string(loss) + " at iteration " +
                               std::to_string(iter));
      }
      Eigen::VectorXd g(theta.size());
      int at = 0;
      for (std::size_t i = 0; i < grad.dW.size(); ++i) {
        for (int r = 0; r < grad.dW[i].rows(); ++r) {
          for (int c = 0; c < grad.dW[i].cols(); ++c) g[at++] = grad.dW[i](r, c);
        }
        for (int r = 0; r < grad.db[i].size(); ++r) g[at++] = grad.db[i][r];
      }
      if (iter > 0 && iter % std::max(1, spec.adam_iters / 3) == 0) lr *= 0.5;
      mom1 = 0.9 * mom1 + 0.1 * g;
      mom2 = 0.999 * mom2 + 0.001 * g.cwiseProduct(g).eval();
      double bc1 = 1.0 - std::pow(0.9, iter + 1);
      double bc2 = 1.0 - std::pow(0.999, iter + 1);
      for (long i = 0; i < theta.size(); ++i) {
        theta[i] -= lr * (mom1[i] / bc1) / (std::sqrt(mom2[i] / bc2) + 1e-12);
      }
      if (!theta.allFinite()) throw TrainingDiverged("fit_tcn: parameters left finite range");
      detail::unflatten(theta, net);
    }

    // Damped Gauss-Newton polish on the plain residuals.
    Eigen::VectorXd e;
    Eigen::MatrixXd J;
    double damping = 1e-3;
    detail::residual_jacobian(net, train_x, train_y, e, J);
    double sse = e.squaredNorm();
    for (int iter = 0; iter < spec.polish_iters; ++iter) {
      Eigen::MatrixXd H = J.transpose() * J;
      H.diagonal().array() += damping;
      Eigen::VectorXd step = H.ldlt().solve(-J.transpose() * e);
      detail::flatten(net, theta);
      Eigen::VectorXd trial = theta + step;
      ReluNet trial_net = net;
      detail::unflatten(trial, trial_net);
      Eigen::VectorXd e_trial;
      Eigen::MatrixXd J_trial;
      detail::residual_jacobian(trial_net, train_x, train_y, e_trial, J_trial);
      double sse_trial = e_trial.squaredNorm();
      if (std::isfinite(sse_trial) && sse_trial < sse) {
        net = trial_net;
        e = e_trial;
        J = J_trial;
        double gain = (sse - sse_trial) / std::max(sse, 1e-300);
        sse = sse_trial;
        damping = std::max(damping / 3.0, 1e-12);
        if (gain < 1e-16) break;
      } else {
        damping *= 4.0;
        if (damping > 1e12) break;
      }
    }

    double sup = 0.0;
    for (std::size_t i = 0; i < holdout_x.size(); ++i) {
      sup = std::max(sup, std::abs(net.eval(holdout_x[i]) - holdout_y[i]));
    }
    if (sup < best_sup) {
      best_sup = sup;
      best_net = net;
      best_restart = restart;
      best_train_mse = sse / static_cast<double>(train_x.size());
    }
  }

  // Bias shift pins the all-zero window to output exactly 0.
  double shift = best_net.eval(Eigen::VectorXd::Zero(m + 1));
  best_net.mutable_layers().back().b[0] -= shift;

  TCNModel model;
  model.m = m;
  model.net = best_net;
  model.zero_at_zero = true;

  FitReport report;
  report.zero_shift = shift;
  report.train_mse = best_train_mse;
  report.adam_iters = spec.adam_iters;
  report.polish_iters = spec.polish_iters;
  report.restarts = std::max(1, spec.restarts);
  report.best_restart = best_restart;
  report.seed = seed;
  double sup = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < holdout_x.size(); ++i) {
    double err = std::abs(best_net.eval(holdout_x[i]) - holdout_y[i]);
    sup = std::max(sup, err);
    sq += err * err;
  }
  report.holdout_sup = sup;
  report.holdout_rms = std::sqrt(sq / static_cast<double>(holdout_x.size()));
  return {std::move(model), report};
}

inline void to_json(nlohmann::json& j, const ReluNet& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    std::vector<double> weights;
    weights.reserve(static_cast<std::size_t>(layer.W.size()));
    for (int r = 0; r < layer.W.rows(); ++r) {
      for (int c = 0; c < layer.W.cols(); ++c) weights.push_back(layer.W(r, c));
    }
    std::vector<double> bias(layer.b.data(), layer.b.data() + layer.b.size());
    layers.push_back({{"rows", layer.W.rows()},
                      {"cols", layer.W.cols()},
                      {"weights", std::move(weights)},
                      {"bias", std::move(bias)}});
  }
  j = nlohmann::json{{"input_dim", net.input_dim()},
                     {"depth", net.depth()},
                     {"width", net.width()},
                     {"layers", std::move(layers)}};
}

inline void from_json(const nlohmann::json& j, ReluNet& net) {
  std::vector<AffineLayer> layers;
  for (const auto& item : j.at("layers")) {
    AffineLayer layer;
    int rows = item.at("rows").get<int>();
    int cols = item.at("cols").get<int>();
    auto weights = item.at("weights").get<std::vector<double>>();
    auto bias = item.at("bias").get<std::vector<double>>();
    if (static_cast<int>(weights.size()) != rows * cols ||
        static_cast<int>(bias.size()) != rows) {
      throw DimensionMismatch("ReluNet: layer payload size mismatch");
    }
    layer.W.resize(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) layer.W(r, c) = weights[static_cast<std::size_t>(r * cols + c)];
    }
    layer.b = Eigen::Map<Eigen::VectorXd>(bias.data(), rows);
    layers.push_back(std::move(layer));
  }
  net = ReluNet(std::move(layers));
}

inline void to_json(nlohmann::json& j, const TCNModel& model) {
  j = nlohmann::json{{"m", model.m}, {"zero_at_zero", model.zero_at_zero}, {"net", model.net}};
}

inline void from_json(const nlohmann::json& j, TCNModel& model) {
  j.at("m").get_to(model.m);
  j.at("zero_at_zero").get_to(model.zero_at_zero);
  j.at("net").get_to(model.net);
  if (model.net.input_dim() != model.m + 1) {
    throw DimensionMismatch("TCNModel: net input dim must equal m + 1");
  }
}

inline void to_json(nlohmann::json& j, const Theorem1Plan& plan) {
  j = nlohmann::json{{"eps", plan.eps},
                     {"gamma", plan.gamma},
                     {"R", plan.R},
                     {"c", plan.c},
                     {"m", plan.m},
                     {"width", plan.width},
                     {"inv_mod", plan.inv_mod},
                     {"depth_bound", plan.depth_bound},
                     {"log10_depth_bound", plan.log10_depth_bound},
                     {"resolved", plan.resolved}};
}

inline void to_json(nlohmann::json& j, const FitReport& report) {
  j = nlohmann::json{{"holdout_sup", report.holdout_sup},
                     {"holdout_rms", report.holdout_rms},
                     {"train_mse", report.train_mse},
                     {"zero_shift", report.zero_shift},
                     {"adam_iters", report.adam_iters},
                     {"polish_iters", report.polish_iters},
                     {"restarts", report.restarts},
                     {"best_restart", report.best_restart},
                     {"seed", report.seed}};
}

}  // namespace afm
