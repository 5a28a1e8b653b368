// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Config-driven runner and command line front end. Oracles:
//  - linear system x+ = 0.5x + 0.5u, y = x: rollout from rest on u=(1,1,1)
//    gives y = (0, 0.5, 0.75); memory horizon at eps=0.01 is 7 because the
//    truncation error is exactly 2^{-m}.
//  - thm4 constants kappa=1, mu=0.25, L_f=L_g=R=1, eps=0.01 give
//    arg = 2/(0.25*0.01) = 800 and bound 2*log(800)/log(4) ~ 9.64 -> ceil 10.
//  - invariant ball for the builtin linear system: L_f_u = 0.5, so radius
//    0.5*1/(1-0.5) = 1 and diam 2; exponential tail 4*0.5^m < 0.01 at m=9.
//  - geometric filter C=1, lambda=0.5: tail after m taps is 2^{-m}, so the
//    window length at eps=0.5 is 1 and at eps=0.01 is 7.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "afm/afm.hpp"

using nlohmann::json;

namespace {

json linear_system() {
  return json{{"name", "linear"}, {"a", 0.5}, {"b", 0.5}, {"c", 1.0}};
}

json lure_system(double gamma) {
  return json{{"name", "lure"},
              {"A", {{0.5}}},
              {"B", {1.0}},
              {"C", {1.0}},
              {"gamma", gamma},
              {"psi", {{"kind", "tanh"}, {"gain", 0.2}}}};
}

json memory_config() {
  return json{{"task", "memory"}, {"seed", 11},   {"system", linear_system()},
              {"eps", 0.01},      {"R", 1.0},     {"t_max", 30}};
}

json modulus_config() {
  return json{{"task", "modulus"}, {"seed", 9},  {"system", linear_system()},
              {"t", 12},           {"R", 1.0},   {"grid", {0.25, 0.5, 1.0}},
              {"samples", 40},     {"weight_rho", 0.5}, {"eps", 0.05}};
}

json pipeline_config() {
  return json{{"task", "pipeline"},
              {"seed", 11},
              {"system", linear_system()},
              {"eps", 0.01},
              {"eps_grid", {0.1, 0.01}},
              {"gamma", 0.5},
              {"R", 1.0},
              {"t_max", 30},
              {"lipschitz", {{"f", 1.0}, {"g", 1.0}}},
              {"arch", {{"width", 4}, {"depth", 1}}},
              {"train",
               {{"train_samples", 64},
                {"holdout_samples", 32},
                {"adam_iters", 30},
                {"polish_iters", 60},
                {"restarts", 1}}}};
}

// Returns the ConfigInvalid message, or "" when nothing was thrown.
template <typename Fn>
std::string config_error_of(Fn&& fn) {
  try {
    fn();
  } catch (const afm::ConfigInvalid& e) {
    return e.what();
  }
  return {};
}

bool mentions(const std::string& message, const std::string& needle) {
  return message.find(needle) != std::string::npos;
}

std::string data_path(const char* name) {
  return std::string(AFM_DATA_DIR) + "/" + name;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(AFM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config parsing rejects malformed documents") {
  REQUIRE(mentions(config_error_of([] { afm::parse_config(json::array()); }),
                   "expected a JSON object"));
  REQUIRE(mentions(config_error_of([] { afm::parse_config(json{{"seed", 1}}); }),
                   "missing field 'task'"));
  REQUIRE(mentions(config_error_of([] { afm::parse_config(json{{"task", "memory"}}); }),
                   "missing field 'seed'"));
  REQUIRE(mentions(
      config_error_of([] { afm::parse_config(json{{"task", "memory"}, {"seed", -3}}); }),
      "nonnegative integer"));
  REQUIRE(mentions(
      config_error_of([] { afm::parse_config(json{{"task", "memory"}, {"seed", 1.5}}); }),
      "nonnegative integer"));
  REQUIRE(mentions(
      config_error_of([] { afm::parse_config(json{{"task", "frobnicate"}, {"seed", 0}}); }),
      "unknown task 'frobnicate'"));

  afm::ExperimentConfig ok = afm::parse_config(memory_config());
  REQUIRE(ok.task == afm::Task::memory);
  REQUIRE(ok.seed == 11);
}

TEST_CASE("unknown or invalid fields fail with their path") {
  json extra = memory_config();
  extra["bogus"] = 1;
  REQUIRE(mentions(config_error_of([&] { afm::run_experiment(extra); }),
                   "config: unknown field 'bogus'"));

  json nested{{"task", "certify"}, {"seed", 0},  {"system", linear_system()},
              {"method", "demidovich"}, {"P", {{1.0}}}, {"mu", 0.25},
              {"grid", {{"x_samples", 16}, {"bogus", 2}}}};
  REQUIRE(mentions(config_error_of([&] { afm::run_experiment(nested); }),
                   "config.grid: unknown field 'bogus'"));

  json sys = memory_config();
  sys["system"]["q"] = 3;
  REQUIRE(mentions(config_error_of([&] { afm::run_experiment(sys); }),
                   "system 'linear': unknown field 'q'"));

  json bad_eps = memory_config();
  bad_eps["eps"] = 0.0;
  REQUIRE(mentions(config_error_of([&] { afm::run_experiment(bad_eps); }),
                   "config.eps: must be positive"));

  json missing = memory_config();
  missing.erase("t_max");
  REQUIRE(mentions(config_error_of([&] { afm::run_experiment(missing); }),
                   "missing field 't_max'"));
}

TEST_CASE("simulate reproduces a hand-rolled rollout") {
  json cfg{{"task", "simulate"},
           {"seed", 0},
           {"system", linear_system()},
           {"input", {{"kind", "values"}, {"values", {1.0, 1.0, 1.0}}}}};
  afm::RunReport report = afm::run_experiment(cfg);
  REQUIRE(report.task == "simulate");
  auto y = report.results.at("y").get<std::vector<double>>();
  REQUIRE(y.size() == 3);
  REQUIRE(y[0] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(y[1] == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(y[2] == Catch::Approx(0.75).margin(1e-15));

  json bad = cfg;
  bad["input"] = json{{"kind", "sawtooth"}, {"length", 4}, {"R", 1.0}};
  REQUIRE(mentions(config_error_of([&] { afm::run_experiment(bad); }),
                   "input.kind: unknown kind 'sawtooth'"));
}

TEST_CASE("memory task reports the estimated horizon") {
  afm::RunReport report = afm::run_experiment(memory_config());
  REQUIRE(report.task == "memory");
  REQUIRE(report.seed == 11);
  REQUIRE(report.results.at("estimate").at("m_hat").get<int>() == 7);
  REQUIRE(report.results.at("estimate").at("epsilon").get<double>() == 0.01);
  REQUIRE(report.results.at("estimate").at("worst_deviation").get<double>() ==
          Catch::Approx(std::pow(2.0, -7)).epsilon(1e-9));

  afm::RunReport overridden = afm::run_experiment(memory_config(), 123);
  REQUIRE(overridden.seed == 123);
  REQUIRE(overridden.results.at("estimate").at("m_hat").get<int>() == 7);
}

TEST_CASE("certify task dispatches demidovich, lure, and auto methods") {
  json demi{{"task", "certify"}, {"seed", 3},  {"system", linear_system()},
            {"method", "demidovich"}, {"P", {{1.0}}}, {"mu", 0.25}};
  afm::RunReport r1 = afm::run_experiment(demi);
  REQUIRE(r1.results.at("method") == "demidovich");
  REQUIRE(r1.results.at("pass").get<bool>());
  REQUIRE(r1.results.at("certificate").at("mu").get<double>() == 0.25);
  REQUIRE(r1.results.at("worst_margin").get<double>() <= 1e-12);

  json lure{{"task", "certify"}, {"seed", 5}, {"system", lure_system(0.25)},
            {"method", "lure"}};
  afm::RunReport r2 = afm::run_experiment(lure);
  REQUIRE(r2.results.at("method") == "lure");
  REQUIRE(r2.results.at("pass").get<bool>());
  double mu = r2.results.at("certificate").at("mu").get<double>();
  REQUIRE(mu > 0.25);  // beats rho(A)^2 for A = 0.5
  REQUIRE(mu < 1.0);
  REQUIRE(r2.results.at("grid_margin").get<double>() < 1e-6);

  json lure_auto = lure;
  lure_auto.erase("method");
  REQUIRE(afm::run_experiment(lure_auto).results.at("method") == "lure");

  json linear_auto{{"task", "certify"}, {"seed", 5}, {"system", linear_system()}};
  afm::RunReport r3 = afm::run_experiment(linear_auto);
  REQUIRE(r3.results.at("method") == "analytic+grid");
  REQUIRE(r3.results.at("pass").get<bool>());

  json infeasible{{"task", "certify"}, {"seed", 5}, {"system", lure_system(0.1)},
                  {"method", "lure"}};
  REQUIRE_THROWS_AS(afm::run_experiment(infeasible), afm::AssumptionFailed);
}

TEST_CASE("bounds task assembles certificate constants") {
  json cfg{{"task", "bounds"}, {"seed", 2},   {"system", linear_system()},
           {"eps", 0.01},      {"delta", 0.01}, {"R", 1.0},
           {"lipschitz", {{"f", 1.0}, {"g", 1.0}}}};
  afm::RunReport report = afm::run_experiment(cfg);
  const json& thm4 = report.results.at("thm4");
  REQUIRE(thm4.at("m_star_ceil").get<int>() == 10);
  REQUIRE(thm4.at("m_star_bound").get<double>() ==
          Catch::Approx(2.0 * std::log(800.0) / std::log(4.0)).margin(1e-9));
  REQUIRE(report.results.at("invariant_ball_radius").get<double>() ==
          Catch::Approx(1.0).margin(1e-12));
  REQUIRE(report.results.at("thm3_m").get<int>() == 9);
}

TEST_CASE("modulus task tables and inverse lookups") {
  afm::RunReport report = afm::run_experiment(modulus_config());
  const json& forward = report.results.at("forward");
  auto grid = forward.at("grid").get<std::vector<double>>();
  auto values = forward.at("values").get<std::vector<double>>();
  REQUIRE(grid.size() == 4);  // exact (0, 0) prepended to the request grid
  REQUIRE(grid[0] == 0.0);
  REQUIRE(values[0] == 0.0);
  for (std::size_t i = 1; i < values.size(); ++i) REQUIRE(values[i] >= values[i - 1]);

  REQUIRE(report.results.contains("fading"));
  const json& inverse = report.results.at("inverse");
  REQUIRE(inverse.at("eps").get<double>() == 0.05);
  REQUIRE(inverse.at("forward").get<double>() >= 0.0);
  REQUIRE(inverse.at("fading").get<double>() >= 0.0);

  REQUIRE(report.csv_tables.size() == 2);
  REQUIRE(report.csv_tables[0].first == "modulus_forward.csv");
  REQUIRE(report.csv_tables[1].first == "modulus_fading.csv");
  REQUIRE(mentions(report.csv_tables[0].second, "delta,value"));
}

TEST_CASE("check task passes for a causal time-invariant system") {
  json cfg{{"task", "check"}, {"seed", 4}, {"system", linear_system()}, {"R", 1.0},
           {"trials", 30}};
  afm::RunReport report = afm::run_experiment(cfg);
  const json& causality = report.results.at("causality");
  const json& invariance = report.results.at("time_invariance");
  REQUIRE(causality.at("violation_count").get<int>() == 0);
  REQUIRE(causality.at("pass").get<bool>());
  REQUIRE(invariance.at("violation_count").get<int>() == 0);
  REQUIRE(invariance.at("pass").get<bool>());
}

TEST_CASE("fit-tcn task trains a window model") {
  json cfg{{"task", "fit-tcn"},
           {"seed", 21},
           {"system", {{"name", "tapped_delay"}, {"coeffs", {1.0, 0.5}}, {"relu", false}}},
           {"m", 1},
           {"R", 1.0},
           {"arch", {{"width", 4}, {"depth", 1}}},
           {"train",
            {{"train_samples", 32},
             {"holdout_samples", 16},
             {"adam_iters", 20},
             {"polish_iters", 40},
             {"restarts", 1}}}};
  afm::RunReport report = afm::run_experiment(cfg);
  // The target is affine in the window, so the polish solves it exactly.
  REQUIRE(report.results.at("fit").at("holdout_sup").get<double>() < 1e-8);
  REQUIRE(report.results.at("model").at("m").get<int>() == 1);
  REQUIRE(report.results.at("model").at("zero_at_zero").get<bool>());
}

TEST_CASE("compare task tabulates both model families") {
  json cfg{{"task", "compare"}, {"seed", 0}, {"C", 1.0},
           {"lambda", 0.5},     {"R", 1.0},  {"eps_grid", {0.5, 0.01}}};
  afm::RunReport report = afm::run_experiment(cfg);
  const json& rows = report.results.at("parsimony").at("rows");
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].at("tcn_m").get<int>() == 1);
  REQUIRE(rows[0].at("tcn_affine_params").get<int>() == 3);
  REQUIRE(rows[1].at("tcn_m").get<int>() == 7);
  REQUIRE(rows[1].at("tcn_affine_params").get<int>() == 9);
  REQUIRE(rows[1].at("volterra_degree").get<int>() > rows[0].at("volterra_degree").get<int>());

  REQUIRE(report.csv_tables.size() == 1);
  REQUIRE(report.csv_tables[0].first == "parsimony.csv");
  REQUIRE(mentions(report.csv_tables[0].second, "eps,tcn_m"));
}

TEST_CASE("pipeline runs end to end on the linear benchmark") {
  afm::RunReport report = afm::run_experiment(pipeline_config());
  const json& row = report.results.at("row");
  REQUIRE(row.at("theoretical_m").get<int>() == 10);
  REQUIRE(row.at("empirical_m_hat").get<int>() == 7);
  REQUIRE(row.at("fitted_m").get<int>() == 7);
  REQUIRE(row.at("holdout_sup").get<double>() < 1e-8);
  REQUIRE(row.at("meets_eps").get<bool>());
  REQUIRE(row.at("plan_width").get<int>() == report.results.at("plan").at("width").get<int>());

  const json& sweep = report.results.at("sweep");
  REQUIRE(sweep.size() == 2);
  REQUIRE(sweep[0].at("eps").get<double>() == 0.1);
  REQUIRE(sweep[0].at("thm4_m_ceil").get<int>() == 7);
  REQUIRE(sweep[0].at("m_hat").get<int>() == 4);
  REQUIRE(sweep[1].at("thm4_m_ceil").get<int>() == 10);
  REQUIRE(sweep[1].at("m_hat").get<int>() == 7);

  REQUIRE(report.csv_tables.size() == 2);
  REQUIRE(report.csv_tables[0].first == "pipeline_sweep.csv");
  REQUIRE(report.csv_tables[1].first == "plan_tradeoff.csv");
}

TEST_CASE("identical configs replay to identical reports") {
  afm::RunReport a = afm::run_experiment(modulus_config());
  afm::RunReport b = afm::run_experiment(modulus_config());
  REQUIRE(a.results.dump() == b.results.dump());

  const char* saved = std::getenv("AFM_THREADS");
  std::string saved_value = saved ? saved : "";
  setenv("AFM_THREADS", "1", 1);
  afm::RunReport serial = afm::run_experiment(modulus_config());
  setenv("AFM_THREADS", "3", 1);
  afm::RunReport threaded = afm::run_experiment(modulus_config());
  if (saved) {
    setenv("AFM_THREADS", saved_value.c_str(), 1);
  } else {
    unsetenv("AFM_THREADS");
  }
  REQUIRE(serial.results.dump() == threaded.results.dump());
}

TEST_CASE("command line interface round trip") {
  namespace fs = std::filesystem;
  fs::path out_dir = fs::temp_directory_path() / "afm_cli_roundtrip";
  fs::remove_all(out_dir);

  int code = run_cli("memory --config " + data_path("memory_linear.json") + " --out " +
                     out_dir.string());
  REQUIRE(code == 0);

  std::ifstream in(out_dir / "report.json");
  REQUIRE(in.good());
  json report = json::parse(in);
  REQUIRE(report.at("task") == "memory");
  REQUIRE(report.at("results").at("estimate").at("m_hat").get<int>() == 7);
  REQUIRE(report.at("config").at("seed").get<int>() == 11);
  fs::remove_all(out_dir);

  REQUIRE(run_cli("certify --config " + data_path("certify_lure.json")) == 0);
  REQUIRE(run_cli("compare --config " + data_path("compare_filters.json")) == 0);
  REQUIRE(run_cli("pipeline --config " + data_path("pipeline_linear.json")) == 0);
}

TEST_CASE("command line interface rejects bad usage and configs") {
  // Config task and subcommand must agree.
  REQUIRE(run_cli("simulate --config " + data_path("memory_linear.json")) == 2);
  // Unknown fields, broken syntax, and missing files all fail fast.
  REQUIRE(run_cli("memory --config " + data_path("bad_field.json")) == 2);
  REQUIRE(run_cli("memory --config " + data_path("invalid_syntax.json")) == 2);
  REQUIRE(run_cli("memory --config /nonexistent/nope.json") == 2);
  // Missing required --config flag is a usage error.
  REQUIRE(run_cli("memory") == 2);
}

TEST_CASE("command line interface surfaces task failures") {
  REQUIRE(run_cli("certify --config " + data_path("certify_lure_infeasible.json")) == 3);
}
