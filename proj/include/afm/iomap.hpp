// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Causal i/o maps and their empirical metrology: causality and
// time-invariance property checks, memory-horizon estimation, and the
// plain / fading moduli of continuity with their conversion bounds.
//
// Every estimator here samples a supremum over an infinite set, so each
// result is a certified *lower* bound of the true quantity and carries the
// witness achieving it. Sampling is keyed per (seed, work item) so results
// never depend on thread count.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "afm/errors.hpp"
#include "afm/parallel.hpp"
#include "afm/rng.hpp"
#include "afm/sequence.hpp"

namespace afm {

// Evaluatable operator u |-> (F u)_t. eval must be a pure function of
// (u_{0:t}, t) for the declared flags to mean anything; the checkers below
// probe exactly that.
struct IoMap {
  std::function<double(const Sequence&, int)> eval;
  bool declared_causal = true;
  bool declared_time_invariant = true;
  std::string name = "iomap";

  double operator()(const Sequence& u, int t) const {
    if (!eval) throw InvalidArgument("IoMap: empty eval");
    if (t < 0) throw InvalidArgument("IoMap: t must be nonnegative");
    double y = eval(u, t);
    if (!std::isfinite(y)) throw NonFinite("IoMap '" + name + "': non-finite output");
    return y;
  }
};

// The functional on finite windows induced by a causal map: x in R^{t+1}
// evaluates to (F u)_t for any u agreeing with x on [0, t].
inline double finite_functional(const IoMap& F, const std::vector<double>& x) {
  return F(embed_vector(x), static_cast<int>(x.size()) - 1);
}

// Positive, nonincreasing, vanishing discount w_t on t = 0, 1, 2, ...
class WeightingSequence {
 public:
  explicit WeightingSequence(std::function<double(int)> generator, int check_prefix = 64)
      : w_(std::move(generator)) {
    if (!w_) throw InvalidArgument("WeightingSequence: empty generator");
    double prev = w_(0);
    if (!(prev > 0.0) || !(prev <= 1.0)) {
      throw InvalidArgument("WeightingSequence: w_0 must lie in (0, 1]");
    }
    for (int t = 1; t <= check_prefix; ++t) {
      double wt = w_(t);
      if (!(wt > 0.0)) throw InvalidArgument("WeightingSequence: w_t must stay positive");
      if (wt > prev * (1.0 + 1e-12)) {
        throw InvalidArgument("WeightingSequence: w_t must be nonincreasing");
      }
      prev = wt;
    }
    // Finite-prefix proxy for w_t -> 0: the prefix must show actual decay.
    if (!(w_(check_prefix) < w_(0))) {
      throw InvalidArgument("WeightingSequence: no decay on checked prefix");
    }
  }

  static WeightingSequence geometric(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
      throw InvalidArgument("WeightingSequence::geometric: rho must lie in (0,1)");
    }
    return WeightingSequence([rho](int t) { return std::pow(rho, t); });
  }

  double operator()(int t) const {
    if (t < 0) throw InvalidArgument("WeightingSequence: negative index");
    return w_(t);
  }

 private:
  std::function<double(int)> w_;
};

// Sampled modulus table: value[i] is the observed max output deviation over
// pairs at budget delta[i]. Always contains the (0, 0) entry and is monotone
// nondecreasing in delta. Values are sampled lower bounds of the true sup.
struct ModulusTable {
  enum class Kind { forward, fading };

  Kind kind = Kind::forward;
  std::vector<double> delta;
  std::vector<double> value;
  // witness[i]: input pair achieving value[i]; empty pair for the 0 entry.
  std::vector<std::pair<Sequence, Sequence>> witness;
  std::uint64_t seed = 0;
  int samples = 0;

  std::size_t size() const { return delta.size(); }
};

// Largest grid delta with value <= eps (piecewise-constant conservative
// inverse); 0 when even the smallest positive grid point overshoots.
inline double inverse_modulus(const ModulusTable& table, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("inverse_modulus: eps must be positive");
  double best = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.value[i] <= eps) best = std::max(best, table.delta[i]);
  }
  return best;
}

struct MemoryEstimate {
  double epsilon = 0.0;
  int m_hat = 0;
  double worst_deviation = 0.0;
  enum class Method { extremal, sampled } method = Method::extremal;
  Sequence witness;     // input achieving worst_deviation at m_hat
  int witness_t = 0;    // time index of the worst deviation
  std::uint64_t seed = 0;
};

struct CheckViolation {
  int trial = 0;
  int t = 0;
  int shift = -1;             // k for time-invariance trials, -1 otherwise
  double got = 0.0;
  double want = 0.0;
  std::string branch;         // which case of the definition was violated
};

struct CheckReport {
  std::string check;
  int trials = 0;
  long comparisons = 0;
  int violation_count = 0;
  int violations_before_support = 0;  // t <  k branch (time invariance only)
  int violations_shifted = 0;         // t >= k branch
  std::vector<CheckViolation> examples;  // first few violations, trial order
  double tol = 0.0;
  std::uint64_t seed = 0;

  bool pass() const { return violation_count == 0; }
};

// Input families used by the estimators: extremal constants, random sign
// patterns, then i.i.d. uniform draws. Extremal inputs attain the sup
// exactly for monotone convolution-type maps.
struct SamplerSpec {
  int random_inputs = 24;
  int sign_inputs = 8;
  bool include_constants = true;
  // Simulation horizon for probing; default t_max + lookahead below.
  int horizon = -1;
  int lookahead = 50;
};

namespace detail {

inline std::vector<std::pair<Sequence, bool>> build_input_family(double R, int horizon,
                                                                 const SamplerSpec& spec,
                                                                 const Rng& root) {
  std::vector<std::pair<Sequence, bool>> family;
  int len = horizon + 1;
  if (spec.include_constants) {
    family.emplace_back(Sequence::constant(len, R), true);
    family.emplace_back(Sequence::constant(len, -R), true);
  }
  for (int i = 0; i < spec.sign_inputs; ++i) {
    Rng g = root.split(0x51C7000000ULL + static_cast<std::uint64_t>(i));
    std::vector<double> v(static_cast<std::size_t>(len));
    for (double& x : v) x = R * g.sign();
    family.emplace_back(Sequence(std::move(v)), true);
  }
  for (int i = 0; i < spec.random_inputs; ++i) {
    Rng g = root.split(0xA1D0000000ULL + static_cast<std::uint64_t>(i));
    std::vector<double> v(static_cast<std::size_t>(len));
    for (double& x : v) x = g.uniform(-R, R);
    family.emplace_back(Sequence(std::move(v)), false);
  }
  if (family.empty()) throw InvalidArgument("SamplerSpec: empty input family");
  return family;
}

}  // namespace detail

// Causality probe: u and v agree on [0, t] and differ afterwards, so
// (F u)_t must equal (F v)_t exactly.
inline CheckReport check_causality(const IoMap& F, const InputBall& ball, int trials,
                                   int horizon, std::uint64_t seed, double tol = 1e-12) {
  if (trials < 1) throw InvalidArgument("check_causality: trials must be >= 1");
  if (horizon < 1) throw InvalidArgument("check_causality: horizon must be >= 1");
  CheckReport report;
  report.check = "causality";
  report.trials = trials;
  report.tol = tol;
  report.seed = seed;

  Rng root(seed);
  std::vector<std::optional<CheckViolation>> found(static_cast<std::size_t>(trials));
  parallel_for_index(static_cast<std::size_t>(trials), [&](std::size_t trial) {
    Rng g = root.split(trial);
    int t = g.uniform_int(0, horizon - 1);
    std::vector<double> u(static_cast<std::size_t>(horizon) + 1);
    for (double& x : u) x = g.uniform(-ball.R, ball.R);
    std::vector<double> v = u;
    for (int s = t + 1; s <= horizon; ++s) v[static_cast<std::size_t>(s)] = g.uniform(-ball.R, ball.R);
    // Force an actual suffix difference so the probe has teeth.
    v[static_cast<std::size_t>(t + 1)] = -u[static_cast<std::size_t>(t + 1)] +
                                         (u[static_cast<std::size_t>(t + 1)] == 0.0 ? ball.R / 2 : 0.0);
    double a = F(Sequence(u), t);
    double b = F(Sequence(v), t);
    if (std::abs(a - b) > tol) {
      found[trial] = CheckViolation{static_cast<int>(trial), t, -1, b, a, "suffix-dependence"};
    }
  });
  for (const auto& v : found) {
    if (!v) continue;
    ++report.violation_count;
    if (report.examples.size() < 8) report.examples.push_back(*v);
  }
  report.comparisons = trials;
  return report;
}

// Time-invariance probe over random (u, k): (F R^k u)_t must equal
// (F u)_{t-k} for t >= k and vanish for t < k.
inline CheckReport check_time_invariance(const IoMap& F, const InputBall& ball, int trials,
                                         int max_shift, std::uint64_t seed, int horizon = 24,
                                         double tol = 1e-12) {
  if (trials < 1) throw InvalidArgument("check_time_invariance: trials must be >= 1");
  if (max_shift < 1) throw InvalidArgument("check_time_invariance: max_shift must be >= 1");
  if (horizon < 0) throw InvalidArgument("check_time_invariance: horizon must be >= 0");
  CheckReport report;
  report.check = "time_invariance";
  report.trials = trials;
  report.tol = tol;
  report.seed = seed;

  struct TrialOutcome {
    std::vector<CheckViolation> violations;
    long comparisons = 0;
  };
  Rng root(seed);
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
  parallel_for_index(static_cast<std::size_t>(trials), [&](std::size_t trial) {
    Rng g = root.split(trial);
    int k = g.uniform_int(1, max_shift);
    std::vector<double> raw(static_cast<std::size_t>(horizon) + 1);
    for (double& x : raw) x = g.uniform(-ball.R, ball.R);
    Sequence u(std::move(raw));
    Sequence shifted = right_shift(u, k);
    TrialOutcome& out = outcomes[trial];
    for (int t = 0; t <= horizon + k; ++t) {
      double got = F(shifted, t);
      double want = (t >= k) ? F(u, t - k) : 0.0;
      ++out.comparisons;
      if (std::abs(got - want) > tol) {
        out.violations.push_back(CheckViolation{static_cast<int>(trial), t, k, got, want,
                                                t < k ? "t<k" : "t>=k"});
      }
    }
  });
  for (const auto& out : outcomes) {
    report.comparisons += out.comparisons;
    for (const auto& v : out.violations) {
      ++report.violation_count;
      if (v.branch == "t<k") {
        ++report.violations_before_support;
      } else {
        ++report.violations_shifted;
      }
      if (report.examples.size() < 8) report.examples.push_back(v);
    }
  }
  return report;
}

// Smallest m <= t_max whose windowed evaluations stay within eps of the
// full map, over the sampled input family and all probed times. Deviations
// at t <= m vanish identically, so the probe horizon extends past t_max.
inline MemoryEstimate estimate_memory_horizon(const IoMap& F, double eps, const InputBall& ball,
                                              int t_max, const SamplerSpec& spec,
                                              std::uint64_t seed) {
  if (!(eps > 0.0)) throw InvalidArgument("estimate_memory_horizon: eps must be positive");
  if (t_max < 0) throw InvalidArgument("estimate_memory_horizon: t_max must be >= 0");
  int horizon = spec.horizon >= 0 ? spec.horizon : t_max + spec.lookahead;
  if (horizon <= t_max) throw InvalidArgument("estimate_memory_horizon: horizon must exceed t_max");

  Rng root(seed);
  auto family = detail::build_input_family(ball.R, horizon, spec, root);
  const std::size_t n_inputs = family.size();

  // Reference outputs (F u)_t, shared across all candidate m.
  std::vector<std::vector<double>> base(n_inputs);
  parallel_for_index(n_inputs, [&](std::size_t i) {
    base[i].resize(static_cast<std::size_t>(horizon) + 1);
    for (int t = 0; t <= horizon; ++t) base[i][static_cast<std::size_t>(t)] = F(family[i].first, t);
  });

  struct Worst {
    double dev = -1.0;
    int t = 0;
  };
  for (int m = 0; m <= t_max; ++m) {
    std::vector<Worst> per_input(n_inputs);
    parallel_for_index(n_inputs, [&](std::size_t i) {
      const Sequence& u = family[i].first;
      Worst w;
      for (int t = m + 1; t <= horizon; ++t) {
        double d = std::abs(base[i][static_cast<std::size_t>(t)] - F(window(u, t, m), t));
        if (d > w.dev) w = Worst{d, t};
      }
      per_input[i] = w;
    });
    double worst = 0.0;
    std::size_t worst_idx = 0;
    int worst_t = 0;
    for (std::size_t i = 0; i < n_inputs; ++i) {
      if (per_input[i].dev > worst) {
        worst = per_input[i].dev;
        worst_idx = i;
        worst_t = per_input[i].t;
      }
    }
    if (worst <= eps) {
      MemoryEstimate est;
      est.epsilon = eps;
      est.m_hat = m;
      est.worst_deviation = worst;
      est.method = family[worst_idx].second ? MemoryEstimate::Method::extremal
                                            : MemoryEstimate::Method::sampled;
      est.witness = family[worst_idx].first;
      est.witness_t = worst_t;
      est.seed = seed;
      return est;
    }
  }
  throw NotResolved("estimate_memory_horizon: deviation above eps for every m <= t_max");
}

namespace detail {

// Shared pair generator for the modulus estimators. Produces exactly
// `count` pairs (x, x') in [-R, R]^{t+1} with |x_s - x'_s| <= delta *
// scale(s); the identity scale gives plain sup-norm pairs. Determinism and
// the flat/fading dominance property both rely on the generation order
// being a pure function of (rng, t, delta, R, count).
template <typename ScaleFn, typename Visit>
void visit_modulus_pairs(Rng rng, int t, double delta, double R, int count, ScaleFn scale,
                         Visit visit) {
  const int d = t + 1;
  std::vector<double> x(static_cast<std::size_t>(d)), y(static_cast<std::size_t>(d));
  int produced = 0;

  // Symmetric extremal pair: realizes the full budget at every coordinate.
  for (int s = 0; s < d; ++s) {
    double half = std::min(0.5 * delta * scale(s), R);
    x[static_cast<std::size_t>(s)] = -half;
    y[static_cast<std::size_t>(s)] = half;
  }
  visit(x, y);
  if (++produced >= count) return;

  // Single bump at s = t: tight for the identity map.
  std::fill(x.begin(), x.end(), 0.0);
  y = x;
  y[static_cast<std::size_t>(t)] = std::min(delta * scale(t), R);
  visit(x, y);
  if (++produced >= count) return;

  while (produced < count) {
    switch (produced % 3) {
      case 0: {  // corner pair, perturbed inward
        for (int s = 0; s < d; ++s) {
          double sg = rng.sign();
          x[static_cast<std::size_t>(s)] = R * sg;
          y[static_cast<std::size_t>(s)] = R * sg - sg * std::min(delta * scale(s), 2.0 * R);
        }
        break;
      }
      case 1: {  // random base, full-budget signed perturbation
        for (int s = 0; s < d; ++s) {
          double base = rng.uniform(-R, R);
          x[static_cast<std::size_t>(s)] = base;
          y[static_cast<std::size_t>(s)] =
              std::clamp(base + rng.sign() * delta * scale(s), -R, R);
        }
        break;
      }
      default: {  // random base, random sub-budget perturbation
        for (int s = 0; s < d; ++s) {
          double base = rng.uniform(-R, R);
          double budget = delta * scale(s);
          x[static_cast<std::size_t>(s)] = base;
          y[static_cast<std::size_t>(s)] = std::clamp(base + rng.uniform(-budget, budget), -R, R);
        }
        break;
      }
    }
    visit(x, y);
    ++produced;
  }
}

inline std::uint64_t modulus_stream_key(int t, double delta) {
  return mix64(static_cast<std::uint64_t>(t), key_of(delta));
}

inline void finalize_modulus_table(ModulusTable& table) {
  // Prepend the exact (0, 0) entry, then enforce monotonicity in delta:
  // a larger budget admits every smaller-budget pair, so the running max
  // is still a valid sampled lower bound.
  table.delta.insert(table.delta.begin(), 0.0);
  table.value.insert(table.value.begin(), 0.0);
  table.witness.insert(table.witness.begin(), std::make_pair(Sequence(), Sequence()));
  for (std::size_t i = 1; i < table.value.size(); ++i) {
    if (table.value[i] < table.value[i - 1]) {
      table.value[i] = table.value[i - 1];
      table.witness[i] = table.witness[i - 1];
    }
  }
}

inline void validate_delta_grid(const std::vector<double>& grid, double R) {
  if (grid.empty()) throw InvalidArgument("delta_grid: empty");
  double prev = 0.0;
  for (double d : grid) {
    if (!(d > 0.0) || !(d <= 2.0 * R)) {
      throw InvalidArgument("delta_grid: entries must lie in (0, 2R]");
    }
    if (d <= prev) throw InvalidArgument("delta_grid: must be sorted strictly ascending");
    prev = d;
  }
}

}  // namespace detail

// Sampled modulus of continuity of the time-t functional on [-R, R]^{t+1}.
inline ModulusTable estimate_modulus(const IoMap& F, int t, const std::vector<double>& delta_grid,
                                     const InputBall& ball, int samples, std::uint64_t seed) {
  if (t < 0) throw InvalidArgument("estimate_modulus: t must be nonnegative");
  if (samples < 1) throw InvalidArgument("estimate_modulus: samples must be >= 1");
  detail::validate_delta_grid(delta_grid, ball.R);

  ModulusTable table;
  table.kind = ModulusTable::Kind::forward;
  table.seed = seed;
  table.samples = samples;
  table.delta = delta_grid;
  table.value.assign(delta_grid.size(), 0.0);
  table.witness.assign(delta_grid.size(), {});

  parallel_for_index(delta_grid.size(), [&](std::size_t i) {
    double delta = delta_grid[i];
    Rng g(mix64(seed, detail::modulus_stream_key(t, delta)));
    double best = 0.0;
    std::pair<Sequence, Sequence> wit;
    detail::visit_modulus_pairs(
        g, t, delta, ball.R, samples, [](int) { return 1.0; },
        [&](const std::vector<double>& x, const std::vector<double>& y) {
          double v = std::abs(finite_functional(F, x) - finite_functional(F, y));
          if (v > best) {
            best = v;
            wit = {embed_vector(x), embed_vector(y)};
          }
        });
    table.value[i] = best;
    table.witness[i] = std::move(wit);
  });
  detail::finalize_modulus_table(table);
  return table;
}

// Sampled w-weighted modulus: max over (t, u, v) with
// max_s w_{t-s} |u_s - v_s| <= delta of the output deviation at t. Probes a
// spread of times up to t_max; for each, a flat-budget pass (identical
// candidate stream to estimate_modulus, which makes alpha >= omega
// structural on shared grids) plus a pass with budgets inflated by
// 1/w_{t-s} and clipped to the input ball.
inline ModulusTable estimate_fading_modulus(const IoMap& F, const WeightingSequence& w,
                                            const std::vector<double>& delta_grid,
                                            const InputBall& ball, int t_max, int samples,
                                            std::uint64_t seed) {
  if (t_max < 1) throw InvalidArgument("estimate_fading_modulus: t_max must be >= 1");
  if (samples < 1) throw InvalidArgument("estimate_fading_modulus: samples must be >= 1");
  detail::validate_delta_grid(delta_grid, ball.R);

  std::vector<int> probe_times;
  for (int t : {t_max, (3 * t_max) / 4, t_max / 2, t_max / 4, 8, 4, 2, 1}) {
    if (t >= 1 && t <= t_max &&
        std::find(probe_times.begin(), probe_times.end(), t) == probe_times.end()) {
      probe_times.push_back(t);
    }
  }

  ModulusTable table;
  table.kind = ModulusTable::Kind::fading;
  table.seed = seed;
  table.samples = samples;
  table.delta = delta_grid;
  table.value.assign(delta_grid.size(), 0.0);
  table.witness.assign(delta_grid.size(), {});

  parallel_for_index(delta_grid.size(), [&](std::size_t i) {
    double delta = delta_grid[i];
    double best = 0.0;
    std::pair<Sequence, Sequence> wit;
    auto consider = [&](const std::vector<double>& x, const std::vector<double>& y) {
      double v = std::abs(finite_functional(F, x) - finite_functional(F, y));
      if (v > best) {
        best = v;
        wit = {embed_vector(x), embed_vector(y)};
      }
    };
    for (int t : probe_times) {
      Rng flat(mix64(seed, detail::modulus_stream_key(t, delta)));
      detail::visit_modulus_pairs(flat, t, delta, ball.R, samples,
                                  [](int) { return 1.0; }, consider);
      Rng scaled(mix64(seed ^ 0xFAD1ULL, detail::modulus_stream_key(t, delta)));
      detail::visit_modulus_pairs(scaled, t, delta, ball.R, samples,
                                  [&](int s) { return 1.0 / w(t - s); }, consider);
    }
    table.value[i] = best;
    table.witness[i] = std::move(wit);
  });
  detail::finalize_modulus_table(table);
  return table;
}

// Lower bound on the inverse fading modulus at eps: delta = w_{m*} * d3,
// where m* = m*(eps/3) and d3 is the inverse plain modulus at eps/3.
inline double afm_to_fading_bound(int m_star_third, double inv_mod_third,
                                  const WeightingSequence& w, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("afm_to_fading_bound: eps must be positive");
  if (m_star_third < 0) throw InvalidArgument("afm_to_fading_bound: m_star must be >= 0");
  if (!(inv_mod_third >= 0.0)) throw InvalidArgument("afm_to_fading_bound: inv_mod must be >= 0");
  return w(m_star_third) * inv_mod_third;
}

// Upper bound on the memory horizon from a fading modulus table:
// inf { m : w_m <= alpha^{-1}(eps) / R }.
inline int fading_to_afm_bound(const ModulusTable& alpha_table, const WeightingSequence& w,
                               double R, double eps, int m_max = 100000) {
  if (!(eps > 0.0)) throw InvalidArgument("fading_to_afm_bound: eps must be positive");
  if (!(R > 0.0)) throw InvalidArgument("fading_to_afm_bound: R must be positive");
  double threshold = inverse_modulus(alpha_table, eps) / R;
  if (threshold <= 0.0) {
    throw NotResolved("fading_to_afm_bound: inverse fading modulus is 0, bound vacuous");
  }
  for (int m = 0; m <= m_max; ++m) {
    if (w(m) <= threshold) return m;
  }
  throw NotResolved("fading_to_afm_bound: no m within evaluated prefix");
}

inline void to_json(nlohmann::json& j, const ModulusTable& table) {
  nlohmann::json witnesses = nlohmann::json::array();
  for (const auto& [u, v] : table.witness) {
    witnesses.push_back({{"u", u}, {"v", v}});
  }
  j = nlohmann::json{
      {"quantity", table.kind == ModulusTable::Kind::forward ? "modulus" : "fading_modulus"},
      {"estimator", "sampled lower bound"},
      {"grid", table.delta},
      {"values", table.value},
      {"witnesses", std::move(witnesses)},
      {"seed", table.seed},
      {"samples", table.samples}};
}

inline void from_json(const nlohmann::json& j, ModulusTable& table) {
  std::string quantity = j.at("quantity").get<std::string>();
  table.kind =
      quantity == "fading_modulus" ? ModulusTable::Kind::fading : ModulusTable::Kind::forward;
  j.at("grid").get_to(table.delta);
  j.at("values").get_to(table.value);
  table.witness.clear();
  for (const auto& w : j.at("witnesses")) {
    table.witness.emplace_back(w.at("u").get<Sequence>(), w.at("v").get<Sequence>());
  }
  table.seed = j.at("seed").get<std::uint64_t>();
  table.samples = j.at("samples").get<int>();
}

inline std::string to_csv(const ModulusTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "# kind=" << (table.kind == ModulusTable::Kind::forward ? "modulus" : "fading_modulus")
      << " seed=" << table.seed << " samples=" << table.samples << '\n';
  out << "delta,value\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.delta[i] << ',' << table.value[i] << '\n';
  }
  return out.str();
}

inline ModulusTable modulus_table_from_csv(std::istream& in) {
  ModulusTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("fading_modulus") != std::string::npos) table.kind = ModulusTable::Kind::fading;
      continue;
    }
    if (line.rfind("delta,", 0) == 0) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw InvalidArgument("modulus_table_from_csv: bad line '" + line + "'");
    }
    table.delta.push_back(std::stod(line.substr(0, comma)));
    table.value.push_back(std::stod(line.substr(comma + 1)));
    table.witness.emplace_back();
  }
  return table;
}

inline void to_json(nlohmann::json& j, const MemoryEstimate& est) {
  j = nlohmann::json{{"quantity", "memory_horizon"},
                     {"estimator", "sampled lower bound"},
                     {"epsilon", est.epsilon},
                     {"m_hat", est.m_hat},
                     {"worst_deviation", est.worst_deviation},
                     {"method", est.method == MemoryEstimate::Method::extremal ? "extremal"
                                                                               : "sampled"},
                     {"witness", est.witness},
                     {"witness_t", est.witness_t},
                     {"seed", est.seed}};
}

inline void to_json(nlohmann::json& j, const CheckViolation& v) {
  j = nlohmann::json{{"trial", v.trial}, {"t", v.t},       {"shift", v.shift},
                     {"got", v.got},     {"want", v.want}, {"branch", v.branch}};
}

inline void to_json(nlohmann::json& j, const CheckReport& r) {
  j = nlohmann::json{{"check", r.check},
                     {"trials", r.trials},
                     {"comparisons", r.comparisons},
                     {"violation_count", r.violation_count},
                     {"violations_before_support", r.violations_before_support},
                     {"violations_shifted", r.violations_shifted},
                     {"examples", r.examples},
                     {"tol", r.tol},
                     {"seed", r.seed},
                     {"pass", r.pass()}};
}

}  // namespace afm
