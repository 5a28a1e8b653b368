// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Config-driven experiment runner. A single JSON document selects a task,
// a builtin system, and the numeric knobs; the result is a report with the
// exact config echoed back, task results keyed for machine consumption, and
// plot-ready CSV tables. Unknown config fields are errors: silent drift in
// replayed configs is worse than a hard stop.

#pragma once

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "afm/beta.hpp"
#include "afm/certificate.hpp"
#include "afm/errors.hpp"
#include "afm/iomap.hpp"
#include "afm/registry.hpp"
#include "afm/sequence.hpp"
#include "afm/stability.hpp"
#include "afm/statespace.hpp"
#include "afm/tcn.hpp"
#include "afm/volterra.hpp"

namespace afm {

inline constexpr const char* kLibraryVersion = "0.1.0";

enum class Task { simulate, memory, modulus, certify, bounds, fit_tcn, compare, check, pipeline };

inline std::string task_name(Task task) {
  switch (task) {
    case Task::simulate: return "simulate";
    case Task::memory: return "memory";
    case Task::modulus: return "modulus";
    case Task::certify: return "certify";
    case Task::bounds: return "bounds";
    case Task::fit_tcn: return "fit-tcn";
    case Task::compare: return "compare";
    case Task::check: return "check";
    case Task::pipeline: return "pipeline";
  }
  throw InvalidArgument("task_name: unhandled task");
}

inline Task task_from_string(const std::string& name) {
  for (Task t : {Task::simulate, Task::memory, Task::modulus, Task::certify, Task::bounds,
                 Task::fit_tcn, Task::compare, Task::check, Task::pipeline}) {
    if (task_name(t) == name) return t;
  }
  throw ConfigInvalid("task: unknown task '" + name + "'");
}

struct ExperimentConfig {
  Task task = Task::simulate;
  std::uint64_t seed = 0;
  nlohmann::json raw;
};

struct RunReport {
  std::string task;
  std::uint64_t seed = 0;
  nlohmann::json config;   // exact document, for replay
  nlohmann::json results;  // task-specific payload; deterministic in (config, seed)
  double wall_ms = 0.0;
  std::vector<std::pair<std::string, std::string>> csv_tables;  // filename, content
};

namespace detail {

inline void expect_fields(const nlohmann::json& j, const std::string& path,
                          std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigInvalid(path + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigInvalid(path + ": unknown field '" + key + "'");
  }
}

inline const nlohmann::json& need(const nlohmann::json& j, const std::string& path,
                                  const char* field) {
  if (!j.contains(field)) throw ConfigInvalid(path + ": missing field '" + field + "'");
  return j.at(field);
}

inline double need_number(const nlohmann::json& j, const std::string& path, const char* field) {
  const nlohmann::json& v = need(j, path, field);
  if (!v.is_number()) throw ConfigInvalid(path + "." + field + ": expected a number");
  return v.get<double>();
}

inline double need_positive(const nlohmann::json& j, const std::string& path, const char* field) {
  double v = need_number(j, path, field);
  if (!(v > 0.0)) throw ConfigInvalid(path + "." + field + ": must be positive");
  return v;
}

inline long need_integer(const nlohmann::json& j, const std::string& path, const char* field) {
  const nlohmann::json& v = need(j, path, field);
  if (!v.is_number_integer()) throw ConfigInvalid(path + "." + field + ": expected an integer");
  return v.get<long>();
}

inline double opt_number(const nlohmann::json& j, const std::string& path, const char* field,
                         double fallback) {
  if (!j.contains(field)) return fallback;
  if (!j.at(field).is_number()) throw ConfigInvalid(path + "." + field + ": expected a number");
  return j.at(field).get<double>();
}

inline long opt_integer(const nlohmann::json& j, const std::string& path, const char* field,
                        long fallback) {
  if (!j.contains(field)) return fallback;
  if (!j.at(field).is_number_integer()) {
    throw ConfigInvalid(path + "." + field + ": expected an integer");
  }
  return j.at(field).get<long>();
}

inline std::string format_cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline Sequence input_from_json(const nlohmann::json& j, std::uint64_t seed) {
  expect_fields(j, "input", {"kind", "value", "values", "length", "R"});
  std::string kind = need(j, "input", "kind").get<std::string>();
  if (kind == "values") {
    return Sequence(need(j, "input", "values").get<std::vector<double>>());
  }
  long length = need_integer(j, "input", "length");
  if (length < 1) throw ConfigInvalid("input.length: must be >= 1");
  if (kind == "constant") {
    return Sequence::constant(static_cast<std::size_t>(length), need_number(j, "input", "value"));
  }
  double R = need_positive(j, "input", "R");
  Rng g(mix64(seed, 0x1AB0C0DEULL));
  std::vector<double> values(static_cast<std::size_t>(length));
  if (kind == "signs") {
    for (auto& v : values) v = R * g.sign();
    return Sequence(values);
  }
  if (kind == "uniform") {
    for (auto& v : values) v = g.uniform(-R, R);
    return Sequence(values);
  }
  throw ConfigInvalid("input.kind: unknown kind '" + kind + "'");
}

inline GridSpec grid_from_json(const nlohmann::json& cfg, const std::string& path,
                               std::uint64_t seed) {
  GridSpec grid;
  grid.seed = mix64(seed, 0x6119DULL);
  if (!cfg.contains("grid")) return grid;
  const nlohmann::json& j = cfg.at("grid");
  expect_fields(j, path + ".grid", {"x_radius", "x_samples", "u_bound", "u_samples"});
  grid.x_radius = opt_number(j, path + ".grid", "x_radius", grid.x_radius);
  grid.x_samples = static_cast<int>(opt_integer(j, path + ".grid", "x_samples", grid.x_samples));
  grid.u_bound = opt_number(j, path + ".grid", "u_bound", grid.u_bound);
  grid.u_samples = static_cast<int>(opt_integer(j, path + ".grid", "u_samples", grid.u_samples));
  if (!(grid.x_radius > 0.0) || grid.x_samples < 1 || !(grid.u_bound >= 0.0) || grid.u_samples < 1) {
    throw ConfigInvalid(path + ".grid: radius/samples out of range");
  }
  return grid;
}

inline TrainSpec train_from_json(const nlohmann::json& cfg, const std::string& path) {
  TrainSpec spec;
  if (!cfg.contains("train")) return spec;
  const nlohmann::json& j = cfg.at("train");
  expect_fields(j, path + ".train",
                {"train_samples", "holdout_samples", "adam_iters", "adam_lr", "sup_weight",
                 "polish_iters", "restarts"});
  spec.train_samples = static_cast<int>(opt_integer(j, path, "train_samples", spec.train_samples));
  spec.holdout_samples =
      static_cast<int>(opt_integer(j, path, "holdout_samples", spec.holdout_samples));
  spec.adam_iters = static_cast<int>(opt_integer(j, path, "adam_iters", spec.adam_iters));
  spec.adam_lr = opt_number(j, path, "adam_lr", spec.adam_lr);
  spec.sup_weight = opt_number(j, path, "sup_weight", spec.sup_weight);
  spec.polish_iters = static_cast<int>(opt_integer(j, path, "polish_iters", spec.polish_iters));
  spec.restarts = static_cast<int>(opt_integer(j, path, "restarts", spec.restarts));
  return spec;
}

inline TcnArch arch_from_json(const nlohmann::json& cfg, const std::string& path) {
  TcnArch arch;
  if (!cfg.contains("arch")) return arch;
  const nlohmann::json& j = cfg.at("arch");
  expect_fields(j, path + ".arch", {"width", "depth"});
  arch.width = static_cast<int>(opt_integer(j, path, "width", arch.width));
  arch.depth = static_cast<int>(opt_integer(j, path, "depth", arch.depth));
  if (arch.depth < 1 || (arch.depth > 1 && arch.width < 1)) {
    throw ConfigInvalid(path + ".arch: need depth >= 1 and width >= 1 for hidden layers");
  }
  return arch;
}

// Certificate for a config-selected system: analytic when the registry
// attaches one, via the feedback pipeline for slope-bounded systems.
inline DemidovichCertificate certificate_for(const BuiltinSystem& built, const GridSpec& grid) {
  if (built.certificate) return *built.certificate;
  if (built.lure) return lure_certify(*built.lure, grid);
  throw AssumptionFailed("certify: system '" + built.sys.name + "' admits no known certificate");
}

inline nlohmann::json run_simulate(const nlohmann::json& cfg, std::uint64_t seed) {
  expect_fields(cfg, "config", {"task", "seed", "name", "system", "input"});
  BuiltinSystem built = system_from_json(need(cfg, "config", "system"));
  Sequence u = input_from_json(need(cfg, "config", "input"), seed);
  std::vector<double> y(static_cast<std::size_t>(u.length()));
  Eigen::VectorXd x = built.sys.xi;
  for (int t = 0; t < u.length(); ++t) {
    y[static_cast<std::size_t>(t)] = built.sys.output(x, u[t]);
    x = built.sys.step(x, u[t]);
  }
  return nlohmann::json{{"system", built.sys.name}, {"input", u}, {"y", y}};
}

inline nlohmann::json run_memory(const nlohmann::json& cfg, std::uint64_t seed,
                                 MemoryEstimate* out = nullptr) {
  expect_fields(cfg, "config",
                {"task", "seed", "name", "system", "eps", "R", "t_max", "lookahead",
                 "random_inputs", "sign_inputs"});
  BuiltinSystem built = system_from_json(need(cfg, "config", "system"));
  double eps = need_positive(cfg, "config", "eps");
  double R = need_positive(cfg, "config", "R");
  int t_max = static_cast<int>(need_integer(cfg, "config", "t_max"));
  SamplerSpec spec;
  spec.lookahead = static_cast<int>(opt_integer(cfg, "config", "lookahead", spec.lookahead));
  spec.random_inputs =
      static_cast<int>(opt_integer(cfg, "config", "random_inputs", spec.random_inputs));
  spec.sign_inputs = static_cast<int>(opt_integer(cfg, "config", "sign_inputs", spec.sign_inputs));
  MemoryEstimate est =
      estimate_memory_horizon(io_map_of(built.sys), eps, InputBall{R}, t_max, spec, seed);
  if (out) *out = est;
  return nlohmann::json{{"system", built.sys.name}, {"estimate", est}};
}

inline nlohmann::json run_modulus(const nlohmann::json& cfg, std::uint64_t seed,
                                  std::vector<std::pair<std::string, std::string>>* tables) {
  expect_fields(cfg, "config",
                {"task", "seed", "name", "system", "t", "R", "grid", "samples", "weight_rho",
                 "eps"});
  BuiltinSystem built = system_from_json(need(cfg, "config", "system"));
  IoMap F = io_map_of(built.sys);
  int t = static_cast<int>(need_integer(cfg, "config", "t"));
  double R = need_positive(cfg, "config", "R");
  auto grid = need(cfg, "config", "grid").get<std::vector<double>>();
  int samples = static_cast<int>(need_integer(cfg, "config", "samples"));
  InputBall ball{R};

  ModulusTable forward = estimate_modulus(F, t, grid, ball, samples, seed);
  nlohmann::json results{{"system", built.sys.name}, {"forward", forward}};
  if (tables) tables->push_back({"modulus_forward.csv", to_csv(forward)});

  if (cfg.contains("weight_rho")) {
    double rho = need_positive(cfg, "config", "weight_rho");
    WeightingSequence w = WeightingSequence::geometric(rho);
    ModulusTable fading = estimate_fading_modulus(F, w, grid, ball, std::max(t, 1), samples, seed);
    results["fading"] = fading;
    if (tables) tables->push_back({"modulus_fading.csv", to_csv(fading)});
    if (cfg.contains("eps")) {
      double eps = need_positive(cfg, "config", "eps");
      results["inverse"] = nlohmann::json{{"eps", eps},
                                          {"forward", inverse_modulus(forward, eps)},
                                          {"fading", inverse_modulus(fading, eps)}};
    }
  } else if (cfg.contains("eps")) {
    double eps = need_positive(cfg, "config", "eps");
    results["inverse"] = nlohmann::json{{"eps", eps}, {"forward", inverse_modulus(forward, eps)}};
  }
  return results;
}

inline nlohmann::json run_certify(const nlohmann::json& cfg, std::uint64_t seed) {
  expect_fields(cfg, "config", {"task", "seed", "name", "system", "method", "P", "mu", "grid"});
  BuiltinSystem built = system_from_json(need(cfg, "config", "system"));
  GridSpec grid = grid_from_json(cfg, "config", seed);
  std::string method = cfg.contains("method") ? cfg.at("method").get<std::string>() : "auto";

  if (method == "demidovich" || (method == "auto" && cfg.contains("P"))) {
    Eigen::MatrixXd P = detail::matrix_from_json(need(cfg, "config", "P"), "config.P");
    double mu = need_positive(cfg, "config", "mu");
    DemidovichResult res = verify_demidovich(built.sys, P, mu, grid);
    nlohmann::json out{{"system", built.sys.name},
                       {"method", "demidovich"},
                       {"pass", res.pass},
                       {"worst_margin", res.worst_margin},
                       {"worst_u", res.worst_u}};
    if (res.pass) out["certificate"] = res.certificate;
    return out;
  }
  if (method == "lure" || (method == "auto" && built.lure)) {
    if (!built.lure) throw ConfigInvalid("config.method: 'lure' needs a feedback system");
    LureCertification cert = lure_certify_full(*built.lure, grid);
    return nlohmann::json{{"system", built.sys.name},
                          {"method", "lure"},
                          {"pass", true},
                          {"certificate", cert.certificate},
                          {"dtbr", cert.dtbr},
                          {"grid_margin", cert.grid_check.worst_margin}};
  }
  if (method == "auto") {
    if (!built.certificate) {
      throw AssumptionFailed("certify: system '" + built.sys.name + "' admits no known certificate");
    }
    DemidovichResult res =
        verify_demidovich(built.sys, built.certificate->P, built.certificate->mu, grid);
    nlohmann::json out{{"system", built.sys.name},
                       {"method", "analytic+grid"},
                       {"pass", res.pass},
                       {"worst_margin", res.worst_margin}};
    if (res.pass) out["certificate"] = res.certificate;
    return out;
  }
  throw ConfigInvalid("config.method: unknown method '" + method + "'");
}

struct LipschitzOverrides {
  double L_f = 0.0;
  double L_g = 0.0;
};

inline LipschitzOverrides lipschitz_from_json(const nlohmann::json& cfg, const std::string& path,
                                              const StateSpaceSystem& sys) {
  LipschitzOverrides out{sys.lipschitz_f_u, sys.lipschitz_g};
  if (!cfg.contains("lipschitz")) return out;
  const nlohmann::json& j = cfg.at("lipschitz");
  expect_fields(j, path + ".lipschitz", {"f", "g"});
  out.L_f = opt_number(j, path, "f", out.L_f);
  out.L_g = opt_number(j, path, "g", out.L_g);
  if (!(out.L_f >= 0.0) || !(out.L_g >= 0.0)) {
    throw ConfigInvalid(path + ".lipschitz: constants must be >= 0");
  }
  return out;
}

inline nlohmann::json run_bounds(const nlohmann::json& cfg, std::uint64_t seed) {
  expect_fields(cfg, "config",
                {"task", "seed", "name", "system", "eps", "delta", "R", "lipschitz", "m_max",
                 "grid"});
  BuiltinSystem built = system_from_json(need(cfg, "config", "system"));
  double eps = need_positive(cfg, "config", "eps");
  double delta = opt_number(cfg, "config", "delta", 0.0);
  double R = need_positive(cfg, "config", "R");
  int m_max = static_cast<int>(opt_integer(cfg, "config", "m_max", 100000));
  GridSpec grid = grid_from_json(cfg, "config", seed);
  DemidovichCertificate cert = certificate_for(built, grid);
  LipschitzOverrides lip = lipschitz_from_json(cfg, "config", built.sys);

  Thm4Bounds thm4 = thm4_bounds(cert.kappa, cert.mu, lip.L_f, lip.L_g, R, eps, delta);
  InvariantBall ball = compute_invariant_ball(built.sys, cert, R);
  BetaFunction beta = cert.induced_beta();
  int thm3_m = thm3_memory_bound(beta, ball.diam(), lip.L_g, eps, m_max);

  return nlohmann::json{{"system", built.sys.name},
                        {"certificate", cert},
                        {"constants", {{"L_f", lip.L_f}, {"L_g", lip.L_g}, {"R", R}}},
                        {"thm4",
                         {{"m_star_bound", thm4.m_star_bound},
                          {"m_star_ceil", thm4.m_star_ceil},
                          {"omega_bound", thm4.omega_bound},
                          {"eps", eps},
                          {"delta", delta}}},
                        {"thm3_m", thm3_m},
                        {"invariant_ball_radius", ball.radius}};
}

inline nlohmann::json run_fit_tcn(const nlohmann::json& cfg, std::uint64_t seed,
                                  TCNModel* out_model = nullptr) {
  expect_fields(cfg, "config", {"task", "seed", "name", "system", "m", "R", "arch", "train"});
  BuiltinSystem built = system_from_json(need(cfg, "config", "system"));
  int m = static_cast<int>(need_integer(cfg, "config", "m"));
  double R = need_positive(cfg, "config", "R");
  TcnArch arch = arch_from_json(cfg, "config");
  TrainSpec train = train_from_json(cfg, "config");
  auto [model, report] = fit_tcn(io_map_of(built.sys), m, R, arch, train, seed);
  if (out_model) *out_model = model;
  return nlohmann::json{{"system", built.sys.name}, {"fit", report}, {"model", model}};
}

inline nlohmann::json run_compare(const nlohmann::json& cfg,
                                  std::vector<std::pair<std::string, std::string>>* tables) {
  expect_fields(cfg, "config", {"task", "seed", "name", "C", "lambda", "R", "eps_grid",
                                "max_degree"});
  double C = need_positive(cfg, "config", "C");
  double lambda = need_positive(cfg, "config", "lambda");
  double R = need_positive(cfg, "config", "R");
  auto eps_grid = need(cfg, "config", "eps_grid").get<std::vector<double>>();
  int max_degree = static_cast<int>(opt_integer(cfg, "config", "max_degree", 200));
  ParsimonyTable table = compare_parsimony(C, lambda, R, eps_grid, max_degree);
  if (tables) {
    std::string csv =
        "eps,tcn_m,tcn_affine_params,volterra_degree,volterra_terms,volterra_ls_error\n";
    for (const auto& row : table.rows) {
      csv += format_cell(row.eps) + "," + std::to_string(row.tcn_m) + "," +
             std::to_string(row.tcn_affine_params) + "," + std::to_string(row.volterra_degree) +
             "," + format_cell(row.volterra_terms) + "," + format_cell(row.volterra_ls_error) +
             "\n";
    }
    tables->push_back({"parsimony.csv", csv});
  }
  return nlohmann::json{{"parsimony", table}};
}

inline nlohmann::json run_check(const nlohmann::json& cfg, std::uint64_t seed) {
  expect_fields(cfg, "config",
                {"task", "seed", "name", "system", "R", "trials", "horizon", "max_shift"});
  BuiltinSystem built = system_from_json(need(cfg, "config", "system"));
  IoMap F = io_map_of(built.sys);
  double R = need_positive(cfg, "config", "R");
  int trials = static_cast<int>(opt_integer(cfg, "config", "trials", 50));
  int horizon = static_cast<int>(opt_integer(cfg, "config", "horizon", 24));
  int max_shift = static_cast<int>(opt_integer(cfg, "config", "max_shift", 8));
  InputBall ball{R};
  CheckReport causality = check_causality(F, ball, trials, horizon, mix64(seed, 0xCA05ULL));
  CheckReport invariance =
      check_time_invariance(F, ball, trials, max_shift, mix64(seed, 0x71B3ULL), horizon);
  return nlohmann::json{{"system", built.sys.name},
                        {"causality", causality},
                        {"time_invariance", invariance}};
}

inline nlohmann::json run_pipeline(const nlohmann::json& cfg, std::uint64_t seed,
                                   std::vector<std::pair<std::string, std::string>>* tables) {
  expect_fields(cfg, "config",
                {"task", "seed", "name", "system", "eps", "eps_grid", "gamma", "delta", "R",
                 "t_max", "lipschitz", "arch", "train", "grid", "fit_m"});
  BuiltinSystem built = system_from_json(need(cfg, "config", "system"));
  double eps = need_positive(cfg, "config", "eps");
  double R = need_positive(cfg, "config", "R");
  double gamma = opt_number(cfg, "config", "gamma", 0.5);
  double delta = opt_number(cfg, "config", "delta", 0.0);
  int t_max = static_cast<int>(opt_integer(cfg, "config", "t_max", 40));
  GridSpec grid = grid_from_json(cfg, "config", seed);
  LipschitzOverrides lip = lipschitz_from_json(cfg, "config", built.sys);
  IoMap F = io_map_of(built.sys);

  // Stage 1: certificate (analytic or feedback pipeline) plus a grid
  // re-verification so downstream constants rest on checked data.
  DemidovichCertificate cert = certificate_for(built, grid);
  DemidovichResult recheck = verify_demidovich(built.sys, cert.P, cert.mu, grid);
  if (!recheck.pass) {
    throw CrossCheckFailed("pipeline: certificate failed grid re-verification, margin " +
                           std::to_string(recheck.worst_margin));
  }

  // Stage 2: certificate-driven bounds.
  Thm4Bounds thm4 = thm4_bounds(cert.kappa, cert.mu, lip.L_f, lip.L_g, R, eps, delta);

  // Stage 3: architecture plan; both callbacks draw on the certificate
  // arithmetic, so the plan is deterministic and sampling-free.
  double kappa = cert.kappa;
  double mu = cert.mu;
  double lf = lip.L_f, lg = lip.L_g;
  auto m_star_cb = [kappa, mu, lf, lg, R](double e) {
    return thm4_bounds(kappa, mu, lf, lg, R, e, 0.0).m_star_ceil;
  };
  auto inv_mod_cb = [kappa, mu, lf, lg, R](int, double e) {
    double denom = std::sqrt(kappa) * lf * lg;
    if (denom <= 0.0) return 2.0 * R;
    return std::min(2.0 * R, e * (1.0 - std::sqrt(mu)) / denom);
  };
  Theorem1PlanTable plan = theorem1_plan(eps, gamma, R, m_star_cb, inv_mod_cb);

  // Stage 4: empirical memory horizon.
  SamplerSpec sampler;
  MemoryEstimate est = estimate_memory_horizon(F, eps, InputBall{R}, t_max, sampler, seed);

  // Stage 5: fit at the empirical horizon and measure the fitted error.
  int fit_m = static_cast<int>(opt_integer(cfg, "config", "fit_m", est.m_hat));
  TcnArch arch = arch_from_json(cfg, "config");
  TrainSpec train = train_from_json(cfg, "config");
  auto [model, fit] = fit_tcn(F, fit_m, R, arch, train, mix64(seed, 0xF17ULL));

  nlohmann::json row{{"eps", eps},
                     {"theoretical_m", thm4.m_star_ceil},
                     {"empirical_m_hat", est.m_hat},
                     {"plan_width", plan.chosen.width},
                     {"plan_log10_depth", plan.chosen.log10_depth_bound},
                     {"fitted_m", fit_m},
                     {"fitted_width", model.net.width()},
                     {"fitted_depth", model.net.depth()},
                     {"holdout_sup", fit.holdout_sup},
                     {"meets_eps", fit.holdout_sup <= eps}};

  nlohmann::json results{{"system", built.sys.name}, {"certificate", cert},
                         {"thm4",
                          {{"m_star_bound", thm4.m_star_bound},
                           {"m_star_ceil", thm4.m_star_ceil},
                           {"omega_bound", thm4.omega_bound}}},
                         {"plan", plan.chosen},
                         {"memory", est},
                         {"fit", fit},
                         {"row", row}};

  if (cfg.contains("eps_grid")) {
    auto eps_grid = cfg.at("eps_grid").get<std::vector<double>>();
    nlohmann::json sweep = nlohmann::json::array();
    std::string csv = "eps,thm4_m_ceil,empirical_m_hat\n";
    for (double e : eps_grid) {
      if (!(e > 0.0)) throw ConfigInvalid("config.eps_grid: entries must be positive");
      Thm4Bounds b = thm4_bounds(cert.kappa, cert.mu, lip.L_f, lip.L_g, R, e, 0.0);
      MemoryEstimate me = estimate_memory_horizon(F, e, InputBall{R}, t_max, sampler, seed);
      sweep.push_back({{"eps", e}, {"thm4_m_ceil", b.m_star_ceil}, {"m_hat", me.m_hat}});
      csv += format_cell(e) + "," + std::to_string(b.m_star_ceil) + "," +
             std::to_string(me.m_hat) + "\n";
    }
    results["sweep"] = sweep;
    if (tables) tables->push_back({"pipeline_sweep.csv", csv});
  }
  if (tables) {
    std::string csv = "gamma,m,width,log10_depth_bound\n";
    for (const auto& p : plan.tradeoff) {
      csv += format_cell(p.gamma) + "," + std::to_string(p.m) + "," + std::to_string(p.width) +
             "," + format_cell(p.log10_depth_bound) + "\n";
    }
    tables->push_back({"plan_tradeoff.csv", csv});
  }
  return results;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigInvalid("config: expected a JSON object");
  if (!doc.contains("task")) throw ConfigInvalid("config: missing field 'task'");
  if (!doc.contains("seed")) throw ConfigInvalid("config: missing field 'seed'");
  if (!doc.at("task").is_string()) throw ConfigInvalid("config.task: expected a string");
  if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
    throw ConfigInvalid("config.seed: expected a nonnegative integer");
  }
  if (doc.at("seed").is_number_integer() && doc.at("seed").get<long long>() < 0) {
    throw ConfigInvalid("config.seed: expected a nonnegative integer");
  }
  ExperimentConfig config;
  config.task = task_from_string(doc.at("task").get<std::string>());
  config.seed = doc.at("seed").get<std::uint64_t>();
  config.raw = doc;
  return config;
}

inline RunReport run_experiment(const nlohmann::json& doc,
                                std::optional<std::uint64_t> seed_override = std::nullopt) {
  ExperimentConfig config = parse_config(doc);
  if (seed_override) config.seed = *seed_override;

  RunReport report;
  report.task = task_name(config.task);
  report.seed = config.seed;
  report.config = doc;

  auto start = std::chrono::steady_clock::now();
  switch (config.task) {
    case Task::simulate:
      report.results = detail::run_simulate(config.raw, config.seed);
      break;
    case Task::memory:
      report.results = detail::run_memory(config.raw, config.seed);
      break;
    case Task::modulus:
      report.results = detail::run_modulus(config.raw, config.seed, &report.csv_tables);
      break;
    case Task::certify:
      report.results = detail::run_certify(config.raw, config.seed);
      break;
    case Task::bounds:
      report.results = detail::run_bounds(config.raw, config.seed);
      break;
    case Task::fit_tcn:
      report.results = detail::run_fit_tcn(config.raw, config.seed);
      break;
    case Task::compare:
      report.results = detail::run_compare(config.raw, &report.csv_tables);
      break;
    case Task::check:
      report.results = detail::run_check(config.raw, config.seed);
      break;
    case Task::pipeline:
      report.results = detail::run_pipeline(config.raw, config.seed, &report.csv_tables);
      break;
  }
  auto stop = std::chrono::steady_clock::now();
  report.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return report;
}

inline void to_json(nlohmann::json& j, const RunReport& report) {
  j = nlohmann::json{{"task", report.task},
                     {"seed", report.seed},
                     {"config", report.config},
                     {"results", report.results},
                     {"versions",
                      {{"afm", kLibraryVersion},
                       {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                     std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                     std::to_string(EIGEN_MINOR_VERSION)}}},
                     {"wall_ms", report.wall_ms}};
}

}  // namespace afm
