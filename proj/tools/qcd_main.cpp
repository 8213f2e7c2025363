// qcd: finite-horizon quickest-change-detection workbench.
//
// Subcommands
//   bounds    latency upper/lower bounds for a distribution pair
//   oracle    exact stopping-time analysis for discrete pairs
//   simulate  Monte Carlo estimation (false alarm, miss, latency)
//   sweep     latency quantities across a horizon list, CSV for plotting
//
// Every run writes a CSV (deterministic given the seed; no timestamps) and a
// JSON manifest holding the resolved configuration, seed, version and start
// time, which is enough to reproduce the stochastic outputs exactly.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qcd/bounds.hpp"
#include "qcd/detector.hpp"
#include "qcd/dist.hpp"
#include "qcd/montecarlo.hpp"
#include "qcd/oracle.hpp"

namespace {

constexpr const char* kToolVersion = "qcd 0.1.0";

using nlohmann::json;

struct DistOptions {
  std::string family = "gaussian";
  double mu = 1.0;
  double sigma = 1.0;
  double p0 = 0.2;
  double p1 = 0.8;
  std::vector<double> table_p0;
  std::vector<double> table_p1;
};

struct PolicyOptions {
  std::string kind = "tvt";
  double delta_f = 0.05;
  double r = 2.0;
  double b = 0.0;
};

struct OutputOptions {
  std::string csv_path;
  std::string manifest_path;  // default: csv path + ".manifest.json"
};

void add_dist_flags(CLI::App* cmd, DistOptions& dist) {
  cmd->add_option("--dist", dist.family, "Distribution family")
      ->check(CLI::IsMember({"gaussian", "bernoulli", "table"}))
      ->capture_default_str();
  cmd->add_option("--mu", dist.mu, "Gaussian post-change mean")->capture_default_str();
  cmd->add_option("--sigma", dist.sigma, "Gaussian standard deviation")->capture_default_str();
  cmd->add_option("--p0", dist.p0, "Bernoulli pre-change success probability")
      ->capture_default_str();
  cmd->add_option("--p1", dist.p1, "Bernoulli post-change success probability")
      ->capture_default_str();
  cmd->add_option("--table-p0", dist.table_p0, "Pre-change mass table")->delimiter(',');
  cmd->add_option("--table-p1", dist.table_p1, "Post-change mass table")->delimiter(',');
}

void add_policy_flags(CLI::App* cmd, PolicyOptions& policy) {
  cmd->add_option("--policy", policy.kind, "Threshold policy")
      ->check(CLI::IsMember({"tvt", "fixed"}))
      ->capture_default_str();
  cmd->add_option("--delta-f", policy.delta_f, "False-alarm budget delta_F")
      ->capture_default_str();
  cmd->add_option("--r", policy.r, "Threshold growth exponent r > 1")->capture_default_str();
  cmd->add_option("--b", policy.b, "Fixed threshold b (policy=fixed)")->capture_default_str();
}

void add_output_flags(CLI::App* cmd, OutputOptions& out) {
  cmd->add_option("--out", out.csv_path, "Output CSV path")->required();
  cmd->add_option("--manifest", out.manifest_path,
                  "Run manifest path (default: <out>.manifest.json)");
}

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

// Flat key=value config support with explicit precedence: command-line flags
// beat config values beat defaults. Keys mirror long flag names without the
// leading dashes; the expansion appends "--key=value" for every key the
// command line left unset.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file path");
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream file(config_path);
  if (!file) throw std::invalid_argument("cannot read config file: " + config_path);
  std::vector<std::string> expanded;
  std::string line;
  while (std::getline(file, line)) {
    const std::string entry = trim(line);
    if (entry.empty() || entry[0] == '#' || entry[0] == ';') continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line is not key=value: " + entry);
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    if (key.empty() || key == "config")
      throw std::invalid_argument("bad config key in line: " + entry);
    const std::string flag = "--" + key;
    bool overridden = false;
    for (const std::string& arg : args)
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) {
        overridden = true;
        break;
      }
    if (!overridden) expanded.push_back(flag + "=" + value);
  }
  args.insert(args.end(), expanded.begin(), expanded.end());
  return args;
}

qcd::DistributionPair make_pair(const DistOptions& dist) {
  if (dist.family == "gaussian") return qcd::DistributionPair::gaussian_mean_shift(dist.mu, dist.sigma);
  if (dist.family == "bernoulli") return qcd::DistributionPair::bernoulli(dist.p0, dist.p1);
  return qcd::DistributionPair::discrete_table(dist.table_p0, dist.table_p1);
}

qcd::ThresholdPolicy make_policy(const PolicyOptions& policy) {
  if (policy.kind == "tvt") return qcd::ThresholdPolicy::time_varying(policy.delta_f, policy.r);
  return qcd::ThresholdPolicy::fixed(policy.b);
}

qcd::ChangePoint parse_change_point(const std::string& text) {
  if (text == "inf" || text == "infinity" || text == "never") return qcd::ChangePoint::never();
  return qcd::ChangePoint::at(std::stoll(text));
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%FT%TZ", std::gmtime(&t));
  return buffer;
}

std::string fmt(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

json dist_json(const DistOptions& dist) {
  json j{{"family", dist.family}};
  if (dist.family == "gaussian") {
    j["mu"] = dist.mu;
    j["sigma"] = dist.sigma;
  } else if (dist.family == "bernoulli") {
    j["p0"] = dist.p0;
    j["p1"] = dist.p1;
  } else {
    j["table_p0"] = dist.table_p0;
    j["table_p1"] = dist.table_p1;
  }
  return j;
}

json policy_json(const PolicyOptions& policy) {
  json j{{"kind", policy.kind}};
  if (policy.kind == "tvt") {
    j["delta_f"] = policy.delta_f;
    j["r"] = policy.r;
  } else {
    j["b"] = policy.b;
  }
  return j;
}

// Writes the manifest next to the CSV. `config` holds all resolved
// parameters; timings stay here so the CSV remains byte-stable across reruns.
void write_manifest(const OutputOptions& out, const json& config, std::uint64_t seed,
                    const std::string& started_at, double wall_time_s, const json& results) {
  json manifest{{"config", config},
                {"resolved_seed", seed},
                {"tool_version", kToolVersion},
                {"started_at", started_at},
                {"wall_time_s", wall_time_s}};
  if (!results.is_null()) manifest["results"] = results;
  const std::string path =
      out.manifest_path.empty() ? out.csv_path + ".manifest.json" : out.manifest_path;
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write manifest: " + path);
  file << manifest.dump(2) << "\n";
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write CSV: " + path);
  return file;
}

std::string policy_cell(const PolicyOptions& policy) {
  return policy.kind == "tvt" ? "tvt(delta_f=" + fmt(policy.delta_f) + ",r=" + fmt(policy.r) + ")"
                              : "fixed(b=" + fmt(policy.b) + ")";
}

std::string dist_cell(const qcd::DistributionPair& pair) { return pair.describe(); }

// ---------------------------------------------------------------- bounds --

int run_bounds(const DistOptions& dist, const OutputOptions& out,
               const std::vector<std::int64_t>& horizons, double delta_f, double delta_d,
               double r, std::uint64_t seed) {
  const std::string started_at = iso_now();
  const auto t0 = std::chrono::steady_clock::now();
  const qcd::DistributionPair pair = make_pair(dist);

  auto csv = open_csv(out.csv_path);
  csv << "dist,T,delta_f,delta_d,r,theta_star,upper_bound_d,comp_log_inv_delta_d,"
         "comp_theta_log_inv_delta_f,comp_r_theta_log_T,comp_theta_log_zeta,lower_bound_d,"
         "lower_valid\n";
  for (const std::int64_t horizon : horizons) {
    const qcd::BoundReport report = qcd::bound_report(pair, horizon, delta_f, delta_d, r);
    csv << dist_cell(pair) << ',' << horizon << ',' << fmt(delta_f) << ',' << fmt(delta_d) << ','
        << fmt(r) << ',' << fmt(report.theta_star) << ',' << fmt(report.upper_bound_d) << ','
        << fmt(report.components.log_inv_delta_d) << ','
        << fmt(report.components.theta_log_inv_delta_f) << ','
        << fmt(report.components.r_theta_log_T) << ',' << fmt(report.components.theta_log_zeta)
        << ',' << (report.valid_lower ? fmt(report.lower_bound_d) : "") << ','
        << (report.valid_lower ? "1" : "0") << '\n';
    std::cout << "T=" << horizon << " theta*=" << fmt(report.theta_star)
              << " upper=" << fmt(report.upper_bound_d)
              << " lower=" << (report.valid_lower ? fmt(report.lower_bound_d) : "n/a") << "\n";
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json config{{"subcommand", "bounds"}, {"dist", dist_json(dist)},   {"horizons", horizons},
              {"delta_f", delta_f},     {"delta_d", delta_d},        {"r", r},
              {"out", out.csv_path}};
  write_manifest(out, config, seed, started_at, wall, json{});
  return 0;
}

// ---------------------------------------------------------------- oracle --

int run_oracle(const DistOptions& dist, const PolicyOptions& policy, const OutputOptions& out,
               std::int64_t horizon, const std::string& nu_text, double delta_d,
               bool want_latency, const std::vector<std::int64_t>& window_ds,
               std::uint64_t seed) {
  const std::string started_at = iso_now();
  const auto t0 = std::chrono::steady_clock::now();
  const qcd::DistributionPair pair = make_pair(dist);
  const qcd::ThresholdPolicy threshold = make_policy(policy);
  const qcd::ChangePoint nu = parse_change_point(nu_text);

  const qcd::OraclePmf pmf = qcd::exact_stopping_distribution(pair, threshold, horizon, nu);

  auto csv = open_csv(out.csv_path);
  csv << "kind,n,probability\n";
  for (std::int64_t n = 1; n <= horizon; ++n)
    csv << "stop," << n << ',' << fmt(pmf.prob_stop_at(n)) << '\n';
  csv << "censored,," << fmt(pmf.p_censored) << '\n';

  json results;
  int exit_code = 0;
  if (!nu.is_finite()) {
    const double fa = 1.0 - pmf.p_censored;
    results["exact_false_alarm"] = fa;
    if (policy.kind == "tvt") {
      const bool pass = fa <= policy.delta_f;
      results["false_alarm_budget"] = policy.delta_f;
      results["verdict"] = pass ? "pass" : "fail";
      std::cout << "exact Pr_inf(tau <= " << horizon << ") = " << fmt(fa)
                << (pass ? " <= " : " > ") << fmt(policy.delta_f)
                << (pass ? ": pass" : ": FAIL") << "\n";
      if (!pass) exit_code = 2;
    } else {
      std::cout << "exact Pr_inf(tau <= " << horizon << ") = " << fmt(fa) << "\n";
    }
  } else {
    std::cout << "exact stopping pmf under nu=" << nu_text << " written to " << out.csv_path
              << "\n";
  }

  if (want_latency) {
    const qcd::LatencyResult latency =
        qcd::exact_high_prob_latency(pair, threshold, horizon, delta_d);
    results["exact_latency"] =
        json{{"feasible", latency.feasible}, {"d", latency.feasible ? latency.d : 0},
             {"delta_d", delta_d}};
    if (latency.feasible)
      std::cout << "exact high-probability latency d = " << latency.d << "\n";
    else
      std::cout << "exact high-probability latency: infeasible within the horizon\n";
  }

  if (!window_ds.empty()) {
    const qcd::OraclePmf pmf_inf =
        nu.is_finite() ? qcd::exact_stopping_distribution(pair, threshold, horizon,
                                                          qcd::ChangePoint::never())
                       : pmf;
    json witnesses = json::array();
    for (const std::int64_t d : window_ds) {
      const qcd::WindowWitness witness =
          qcd::window_bound_witness(pmf_inf, horizon, d, policy.delta_f);
      witnesses.push_back(json{{"d", d},
                               {"nu", witness.nu},
                               {"mass", witness.mass},
                               {"budget", witness.budget}});
      std::cout << "window d=" << d << ": witness nu=" << witness.nu
                << " mass=" << fmt(witness.mass) << " budget=" << fmt(witness.budget) << "\n";
    }
    results["window_witnesses"] = witnesses;
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json config{{"subcommand", "oracle"},  {"dist", dist_json(dist)},
              {"policy", policy_json(policy)}, {"horizon", horizon},
              {"nu", nu_text},           {"delta_d", delta_d},
              {"window_d", window_ds},   {"out", out.csv_path}};
  write_manifest(out, config, seed, started_at, wall, results);
  return exit_code;
}

// -------------------------------------------------------------- simulate --

void write_report_row(std::ofstream& csv, const std::string& mode,
                      const qcd::DistributionPair& pair, const PolicyOptions& policy,
                      std::int64_t horizon, const std::string& nu, const std::string& d,
                      const std::string& delta_d, const qcd::EstimationReport& report) {
  csv << mode << ',' << dist_cell(pair) << ',' << policy_cell(policy) << ',' << horizon << ','
      << nu << ',' << d << ',' << delta_d << ',' << report.trials << ',' << report.successes
      << ',' << fmt(report.point) << ',' << fmt(report.ci_low) << ',' << fmt(report.ci_high)
      << ',' << fmt(report.confidence) << ',' << report.master_seed << '\n';
}

int run_simulate(const DistOptions& dist, const PolicyOptions& policy, const OutputOptions& out,
                 const std::string& mode, std::int64_t horizon, const std::string& nu_text,
                 std::int64_t d, double delta_d, std::vector<std::int64_t> nu_grid,
                 std::int64_t trials, std::uint64_t seed, int threads) {
  const std::string started_at = iso_now();
  const auto t0 = std::chrono::steady_clock::now();
  const qcd::DistributionPair pair = make_pair(dist);
  const qcd::ThresholdPolicy threshold = make_policy(policy);
  qcd::SimOptions options;
  options.workers = threads;

  auto csv = open_csv(out.csv_path);
  csv << "mode,dist,policy,T,nu,d,delta_d,N,k,point,ci_low,ci_high,confidence,seed\n";
  json results;

  if (mode == "fa") {
    const qcd::EstimationReport report =
        qcd::estimate_false_alarm(pair, threshold, horizon, trials, seed, options);
    write_report_row(csv, "fa", pair, policy, horizon, "inf", "", "", report);
    results["false_alarm"] = json{{"point", report.point},
                                  {"ci_low", report.ci_low},
                                  {"ci_high", report.ci_high},
                                  {"k", report.successes}};
    std::cout << "false alarm: " << report.successes << "/" << report.trials << " = "
              << fmt(report.point) << "  ci(" << fmt(report.confidence) << ")=["
              << fmt(report.ci_low) << ", " << fmt(report.ci_high) << "]\n";
  } else if (mode == "miss") {
    if (nu_text == "inf" || nu_text == "infinity" || nu_text == "never")
      throw std::invalid_argument("miss mode requires a finite --nu");
    const qcd::ChangePoint nu = parse_change_point(nu_text);
    const qcd::EstimationReport report =
        qcd::estimate_miss(pair, threshold, horizon, nu.index(), d, trials, seed, options);
    write_report_row(csv, "miss", pair, policy, horizon, std::to_string(nu.index()),
                     std::to_string(d), fmt(delta_d), report);
    results["miss"] = json{{"point", report.point},
                           {"ci_low", report.ci_low},
                           {"ci_high", report.ci_high},
                           {"k", report.successes}};
    std::cout << "miss Pr_nu(tau >= nu+d): " << report.successes << "/" << report.trials << " = "
              << fmt(report.point) << "  ci=[" << fmt(report.ci_low) << ", "
              << fmt(report.ci_high) << "]\n";
  } else {  // latency
    if (nu_grid.empty()) {
      const qcd::UpperBoundResult upper = policy.kind == "tvt"
          ? qcd::latency_upper_bound(pair, horizon, policy.delta_f, delta_d, policy.r)
          : qcd::UpperBoundResult{0.0, 1.0};
      nu_grid = qcd::default_nu_grid(
          horizon, static_cast<std::int64_t>(std::ceil(upper.d_bar)));
    }
    const qcd::LatencyEstimate estimate = qcd::empirical_latency(
        pair, threshold, horizon, delta_d, nu_grid, trials, seed, options);
    if (!estimate.feasible) {
      std::cerr << "empirical latency: no d <= T-1 satisfies the grid constraints\n";
      return 2;
    }
    for (const qcd::NuLatencyReport& nu_report : estimate.per_nu) {
      write_report_row(csv, "latency_nu", pair, policy, horizon, std::to_string(nu_report.nu),
                       std::to_string(std::min(estimate.d_hat, horizon + 1 - nu_report.nu)),
                       fmt(delta_d), nu_report.miss_at_d_hat);
    }
    results["empirical_latency"] =
        json{{"d_hat", estimate.d_hat},
             {"d_ci_low", estimate.d_ci_low},
             {"d_ci_high", estimate.d_ci_high},
             {"nu_grid", nu_grid}};
    json quantiles = json::array();
    for (const qcd::NuLatencyReport& nu_report : estimate.per_nu)
      quantiles.push_back(json{{"nu", nu_report.nu},
                               {"delay_q50", nu_report.delay_q50},
                               {"delay_q90", nu_report.delay_q90},
                               {"delay_q_target", nu_report.delay_q_target}});
    results["per_nu_quantiles"] = quantiles;
    std::cout << "empirical latency d_hat = " << estimate.d_hat << "  bracket=["
              << estimate.d_ci_low << ", " << estimate.d_ci_high << "]\n";
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json config{{"subcommand", "simulate"},
              {"mode", mode},
              {"dist", dist_json(dist)},
              {"policy", policy_json(policy)},
              {"horizon", horizon},
              {"nu", nu_text},
              {"d", d},
              {"delta_d", delta_d},
              {"nu_grid", nu_grid},
              {"trials", trials},
              {"threads", threads},
              {"out", out.csv_path}};
  write_manifest(out, config, seed, started_at, wall, results);
  return 0;
}

// ----------------------------------------------------------------- sweep --

int run_sweep(const DistOptions& dist, const PolicyOptions& policy, const OutputOptions& out,
              const std::vector<std::int64_t>& horizons, double delta_d, std::int64_t trials,
              std::uint64_t seed, int threads, bool with_exact) {
  const std::string started_at = iso_now();
  const auto t0 = std::chrono::steady_clock::now();
  if (horizons.size() < 2)
    throw CLI::ValidationError("--horizons", "sweep needs at least 2 horizons");
  if (policy.kind != "tvt")
    throw CLI::ValidationError("--policy", "sweep compares TVT latency quantities");
  const qcd::DistributionPair pair = make_pair(dist);
  const qcd::ThresholdPolicy threshold = make_policy(policy);
  qcd::SimOptions options;
  options.workers = threads;

  auto csv = open_csv(out.csv_path);
  csv << "T,quantity,value,ci_low,ci_high\n";
  const bool lower_valid = policy.delta_f + delta_d < 1.0;
  for (const std::int64_t horizon : horizons) {
    const qcd::UpperBoundResult upper =
        qcd::latency_upper_bound(pair, horizon, policy.delta_f, delta_d, policy.r);
    const auto d_cap = static_cast<std::int64_t>(std::ceil(upper.d_bar));
    const std::vector<std::int64_t> grid = qcd::default_nu_grid(horizon, d_cap);
    const qcd::LatencyEstimate estimate = qcd::empirical_latency(
        pair, threshold, horizon, delta_d, grid, trials, seed, options);

    if (estimate.feasible)
      csv << horizon << ",empirical_latency," << estimate.d_hat << ',' << estimate.d_ci_low
          << ',' << estimate.d_ci_high << '\n';
    else
      csv << horizon << ",empirical_latency,,,\n";
    csv << horizon << ",upper_bound," << fmt(upper.d_bar) << ",,\n";
    if (lower_valid)
      csv << horizon << ",lower_bound,"
          << fmt(qcd::asymptotic_lower_bound(pair, horizon, policy.delta_f, delta_d)) << ",,\n";
    if (with_exact) {
      const qcd::LatencyResult exact =
          qcd::exact_high_prob_latency(pair, threshold, horizon, delta_d);
      if (exact.feasible) csv << horizon << ",exact_latency," << exact.d << ",,\n";
    }
    std::cout << "T=" << horizon << " d_hat=" << (estimate.feasible ? estimate.d_hat : -1)
              << " upper=" << fmt(upper.d_bar) << "\n";
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json config{{"subcommand", "sweep"},
              {"dist", dist_json(dist)},
              {"policy", policy_json(policy)},
              {"horizons", horizons},
              {"delta_d", delta_d},
              {"trials", trials},
              {"threads", threads},
              {"with_exact", with_exact},
              {"out", out.csv_path}};
  write_manifest(out, config, seed, started_at, wall, json{});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-horizon quickest change detection: TVT-CuSum bounds, exact oracles and "
               "Monte Carlo certification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  DistOptions dist;
  PolicyOptions policy;
  OutputOptions out;
  std::vector<std::int64_t> horizons;
  std::int64_t horizon = 1000;
  double delta_d = 0.05;
  std::string nu_text = "inf";
  std::int64_t d = 1;
  std::vector<std::int64_t> nu_grid;
  std::vector<std::int64_t> window_ds;
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string mode = "fa";
  bool with_exact = false;
  bool want_latency = false;
  std::string config_path_doc;  // consumed before parsing; registered for --help

  CLI::App* bounds_cmd = app.add_subcommand("bounds", "Latency bound computations");
  add_dist_flags(bounds_cmd, dist);
  add_output_flags(bounds_cmd, out);
  bounds_cmd->add_option("--horizon,--horizons", horizons, "Horizon list")
      ->required()
      ->delimiter(',');
  bounds_cmd->add_option("--delta-f", policy.delta_f, "False-alarm budget")
      ->capture_default_str();
  bounds_cmd->add_option("--delta-d", delta_d, "Latency miss budget")->capture_default_str();
  bounds_cmd->add_option("--r", policy.r, "Threshold growth exponent")->capture_default_str();
  bounds_cmd->add_option("--config", config_path_doc, "Flat key=value config file (flags override)");

  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Exact finite-horizon analysis");
  add_dist_flags(oracle_cmd, dist);
  add_policy_flags(oracle_cmd, policy);
  add_output_flags(oracle_cmd, out);
  oracle_cmd->add_option("--horizon", horizon, "Horizon T")->required();
  oracle_cmd->add_option("--nu", nu_text, "Change point (integer or 'inf')")
      ->capture_default_str();
  oracle_cmd->add_flag("--latency", want_latency, "Also compute the exact latency d*");
  oracle_cmd->add_option("--delta-d", delta_d, "Latency miss budget")->capture_default_str();
  oracle_cmd->add_option("--window-d", window_ds, "Window sizes for the witness search")
      ->delimiter(',');
  oracle_cmd->add_option("--config", config_path_doc, "Flat key=value config file (flags override)");

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimation");
  add_dist_flags(simulate_cmd, dist);
  add_policy_flags(simulate_cmd, policy);
  add_output_flags(simulate_cmd, out);
  simulate_cmd->add_option("--mode", mode, "fa | miss | latency")
      ->check(CLI::IsMember({"fa", "miss", "latency"}))
      ->capture_default_str();
  simulate_cmd->add_option("--horizon", horizon, "Horizon T")->required();
  simulate_cmd->add_option("--nu", nu_text, "Change point (miss mode)")->capture_default_str();
  simulate_cmd->add_option("--d", d, "Detection window (miss mode)")->capture_default_str();
  simulate_cmd->add_option("--delta-d", delta_d, "Latency miss budget")->capture_default_str();
  simulate_cmd->add_option("--nu-grid", nu_grid, "Grid of change points (latency mode)")
      ->delimiter(',');
  simulate_cmd->add_option("--trials", trials, "Trials per estimate")->capture_default_str();
  simulate_cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
  simulate_cmd->add_option("--threads", threads, "Worker threads (0 = hardware)")
      ->capture_default_str();
  simulate_cmd->add_option("--config", config_path_doc, "Flat key=value config file (flags override)");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Latency quantities across horizons");
  add_dist_flags(sweep_cmd, dist);
  add_policy_flags(sweep_cmd, policy);
  add_output_flags(sweep_cmd, out);
  sweep_cmd->add_option("--horizons", horizons, "Horizon list (>= 2 entries)")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--delta-d", delta_d, "Latency miss budget")->capture_default_str();
  sweep_cmd->add_option("--trials", trials, "Trials per grid point")->capture_default_str();
  sweep_cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
  sweep_cmd->add_option("--threads", threads, "Worker threads (0 = hardware)")
      ->capture_default_str();
  sweep_cmd->add_flag("--exact", with_exact, "Add exact_latency rows (discrete pairs)");
  sweep_cmd->add_option("--config", config_path_doc, "Flat key=value config file (flags override)");

  try {
    const std::vector<std::string> args = expand_config_args(argc, argv);
    std::vector<const char*> argv_expanded;
    argv_expanded.push_back(argv[0]);
    for (const std::string& arg : args) argv_expanded.push_back(arg.c_str());
    app.parse(static_cast<int>(argv_expanded.size()), argv_expanded.data());
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }

  try {
    // Shared validation; subcommands add their own stricter checks.
    if (policy.kind == "tvt" && !(policy.delta_f > 0.0 && policy.delta_f < 1.0))
      throw std::invalid_argument("delta_f must lie in (0, 1)");
    if (policy.kind == "tvt" && !(policy.r > 1.0))
      throw std::invalid_argument("r must exceed 1");

    if (bounds_cmd->parsed())
      return run_bounds(dist, out, horizons, policy.delta_f, delta_d, policy.r, seed);
    if (oracle_cmd->parsed())
      return run_oracle(dist, policy, out, horizon, nu_text, delta_d, want_latency, window_ds,
                        seed);
    if (simulate_cmd->parsed())
      return run_simulate(dist, policy, out, mode, horizon, nu_text, d, delta_d, nu_grid, trials,
                          seed, threads);
    if (sweep_cmd->parsed())
      return run_sweep(dist, policy, out, horizons, delta_d, trials, seed, threads, with_exact);
  } catch (const qcd::UnsupportedInstanceError& err) {
    std::cerr << "unsupported instance: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
