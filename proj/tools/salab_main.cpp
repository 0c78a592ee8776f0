// salab: stochastic approximation under heavy-tailed and long-range
// dependent noise. Simulation ensembles, finite-time bound evaluation,
// verification suites, rate fitting, figure reproduction, noise dumps.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "salab/experiments.hpp"
#include "salab/suites.hpp"
#include "salab/util.hpp"

using namespace salab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitUsage = 2;

void write_sidecar_manifest(const std::string& path, const std::string& description,
                            std::uint64_t seed) {
  std::ofstream out(path + ".manifest.json");
  out << "{\n  \"tool\": \"salab\",\n  \"version\": \"0.1.0\",\n";
  out << "  \"output\": \"" << path << "\",\n";
  out << "  \"description\": \"" << description << "\",\n";
  out << "  \"seed\": " << seed << "\n}\n";
}

struct SimulateArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int runs = 0;
  int threads = 0;
};

int run_simulate(const SimulateArgs& args) {
  ExperimentConfig config;
  try {
    config = load_config(args.config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (args.seed_set) config.master_seed = args.seed;
  if (args.runs > 0) config.n_runs = args.runs;
  const int threads = args.threads > 0 ? args.threads : default_thread_count();
  try {
    validate(config);
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(args.out_dir);
    ProblemInstance instance = build_instance(config.problem);
    EnsembleStats stats = run_ensemble(config, instance, threads);
    const std::filesystem::path dir(args.out_dir);
    const std::string csv_path = (dir / "ensemble.csv").string();
    write_ensemble_csv(stats, nullptr, csv_path);
    save_instance(instance, (dir / "instance.txt").string());
    std::ofstream cfg_out(dir / "config.ini");
    cfg_out << write_config(config);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_manifest(args.out_dir, config, threads, wall,
                       {csv_path, (dir / "instance.txt").string()});
    std::cout << "runs: " << stats.total_runs << " (" << stats.flagged_runs
              << " flagged)\n";
    std::cout << "final mean moment_q" << format_double(config.moment_orders[0]) << ": "
              << format_double(stats.moment_mean[0].back()) << '\n';
    std::cout << "wrote " << csv_path << '\n';
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kExitVerificationFailure;
  }
}

struct BoundsArgs {
  std::string theorem;
  double mu = 1.0, lip = 1.0, beta = 2.0, sigma = 1.0, k0 = 4.0, r0 = 1.0;
  double p = 1.5, delta = 0.5;
  long k_max = 100000;
  std::string out_path;
};

int run_bounds(const BoundsArgs& args) {
  try {
    TheoremConstants constants;
    if (args.theorem == "standard")
      constants = constants_standard(args.mu, args.lip, args.beta, args.sigma, args.k0, args.r0);
    else if (args.theorem == "heavy")
      constants =
          constants_heavy(args.mu, args.lip, args.beta, args.sigma, args.p, args.k0, args.r0);
    else
      constants =
          constants_lrd(args.mu, args.lip, args.beta, args.sigma, args.delta, args.k0, args.r0);

    std::cout << "stepsize threshold (beta must reach): " << format_double(constants.c_stepsize)
              << (constants.beta_valid ? "  [beta ok]" : "  [WARNING: beta below threshold]")
              << '\n';
    std::cout << "offset threshold (k0 must reach):     " << format_double(constants.c_offset)
              << (constants.k0_valid ? "  [k0 ok]" : "  [WARNING: k0 below threshold]") << '\n';
    std::cout << "bound constant: " << format_double(constants.c_bound)
              << ", decay exponent: " << format_double(constants.rate) << '\n';
    if (!constants.valid())
      std::cout << "note: thresholds unmet; values below are extrapolations, not "
                   "guarantees\n";

    const std::vector<long> grid = checkpoint_grid(args.k_max);
    std::cout << "         k          bound\n";
    for (long k : grid) {
      char line[64];
      std::snprintf(line, sizeof(line), "%10ld  %13.6g\n", k, bound_value(constants, k));
      std::cout << line;
    }
    if (!args.out_path.empty()) {
      std::ofstream out(args.out_path);
      if (!out) throw std::runtime_error("cannot open '" + args.out_path + "'");
      out << "k,bound\n";
      for (long k : grid)
        out << k << ',' << format_double(bound_value(constants, k)) << '\n';
      write_sidecar_manifest(args.out_path, "bound curve (" + args.theorem + ")", 0);
    }
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "bounds error: " << e.what() << '\n';
    return kExitUsage;
  }
}

struct VerifyArgs {
  std::string suite = "all";
  SuiteOptions options;
};

int run_verify(const VerifyArgs& args) {
  std::vector<CheckResult> results;
  SuiteOptions options = args.options;
  options.table_out = &std::cout;
  try {
    if (args.suite == "lemmas")
      results = run_lemma_suite(options);
    else if (args.suite == "noise")
      results = run_noise_suite(options);
    else if (args.suite == "u-moments")
      results = run_u_moment_suite(options);
    else
      results = run_all_suites(options);
  } catch (const std::exception& e) {
    std::cerr << "verify failed to run: " << e.what() << '\n';
    return kExitVerificationFailure;
  }
  std::size_t name_width = 0;
  for (const auto& r : results) name_width = std::max(name_width, r.name.size());
  int failures = 0;
  for (const auto& r : results) {
    const char* status = r.skipped ? "SKIP" : (r.passed ? "pass" : "FAIL");
    if (!r.passed) ++failures;
    std::cout << "[" << status << "] " << r.suite << " | " << r.name;
    for (std::size_t i = r.name.size(); i < name_width + 2; ++i) std::cout << ' ';
    std::cout << r.detail << '\n';
  }
  std::cout << results.size() << " checks, " << failures << " failures\n";
  return failures == 0 ? kExitOk : kExitVerificationFailure;
}

struct RateArgs {
  std::string input;
  std::string column;
  double k_min = 0.0;
  double k_offset = 0.0;
};

int run_rate(const RateArgs& args) {
  try {
    CsvTable table = read_csv(args.input);
    const auto& kcol = table.column("k");
    const auto& vals = table.column(args.column);
    std::vector<long> ks(kcol.size());
    for (std::size_t i = 0; i < kcol.size(); ++i) ks[i] = static_cast<long>(kcol[i]);
    RateFit fit = fit_rate(ks, vals, args.k_min, args.k_offset);
    std::cout << "slope: " << format_double(fit.slope) << '\n';
    std::cout << "intercept: " << format_double(fit.intercept) << '\n';
    std::cout << "r_squared: " << format_double(fit.r_squared) << '\n';
    std::cout << "points: " << fit.points_used << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "rate error: " << e.what() << '\n';
    return kExitUsage;
  }
}

struct FigureArgs {
  std::string id;
  std::string out_dir;
  int runs = 0;
  long horizon = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

int run_figure(const FigureArgs& args) {
  FigureOverrides overrides;
  if (args.runs > 0) overrides.runs = args.runs;
  if (args.horizon > 0) overrides.horizon = args.horizon;
  if (args.seed_set) overrides.seed = args.seed;
  overrides.threads = args.threads > 0 ? args.threads : default_thread_count();
  try {
    const auto files = reproduce_figure(args.id, args.out_dir, overrides);
    for (const auto& f : files) std::cout << "wrote " << f << '\n';
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "figure error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "figure run failed: " << e.what() << '\n';
    return kExitVerificationFailure;
  }
}

struct NoiseDumpArgs {
  std::string kind;
  double std_dev = 1.0;
  double alpha = 1.5;
  double scale = 1.0;
  double hurst = 0.7;
  double c = 0.3;
  int truncation = 500;
  long n = 1000;
  std::uint64_t seed = 1;
  std::string out_path;
};

int run_noise_dump(const NoiseDumpArgs& args) {
  try {
    NoiseModel model;
    if (args.kind == "mds_gaussian")
      model = MdsGaussian{args.std_dev};
    else if (args.kind == "pareto")
      model = ParetoCentered{args.alpha, args.scale};
    else if (args.kind == "alpha_stable")
      model = SymAlphaStable{args.alpha, args.scale};
    else if (args.kind == "fgn")
      model = Fgn{args.hurst, args.scale};
    else
      model = Farima{args.c, args.scale, args.truncation};
    validate(model);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!args.out_path.empty()) {
      file.open(args.out_path);
      if (!file) throw std::runtime_error("cannot open '" + args.out_path + "'");
      out = &file;
    }
    NoiseStream stream(model, 1, args.n, args.seed);
    Eigen::VectorXd v(1);
    *out << "value\n";
    for (long i = 0; i < args.n; ++i) {
      stream.next(v);
      *out << format_double(v[0]) << '\n';
    }
    if (!args.out_path.empty())
      write_sidecar_manifest(args.out_path, "noise dump (" + kind_name(model) + ")",
                             args.seed);
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "noise-dump error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "noise-dump failed: " << e.what() << '\n';
    return kExitVerificationFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic approximation under heavy-tailed and LRD noise"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run a seeded Monte Carlo ensemble");
  simulate->add_option("--config", sim.config_path, "experiment config (INI)")->required();
  simulate->add_option("--out", sim.out_dir, "output directory")->required();
  simulate->add_option("--seed", sim.seed, "master seed override")
      ->each([&](const std::string&) { sim.seed_set = true; });
  simulate->add_option("--runs", sim.runs, "run count override");
  simulate->add_option("--threads", sim.threads,
                       "worker threads (default: SA_LAB_THREADS or hardware)");

  BoundsArgs bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "evaluate finite-time bound constants");
  bounds_cmd->add_option("--theorem", bounds.theorem, "standard | heavy | lrd")
      ->required()
      ->check(CLI::IsMember({"standard", "heavy", "lrd"}));
  bounds_cmd->add_option("--mu", bounds.mu, "strong monotonicity modulus");
  bounds_cmd->add_option("--lip", bounds.lip, "Lipschitz constant");
  bounds_cmd->add_option("--beta", bounds.beta, "stepsize numerator");
  bounds_cmd->add_option("--sigma", bounds.sigma, "noise magnitude");
  bounds_cmd->add_option("--k0", bounds.k0, "stepsize offset");
  bounds_cmd->add_option("--r0", bounds.r0, "initial distance to the root");
  bounds_cmd->add_option("--p", bounds.p, "heavy-tail moment order (1,2)");
  bounds_cmd->add_option("--delta", bounds.delta, "LRD covariance decay (0,1)");
  bounds_cmd->add_option("--k-max", bounds.k_max, "last iteration of the table");
  bounds_cmd->add_option("--out", bounds.out_path, "also write k,bound CSV here");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "run the verification suites");
  verify_cmd->add_option("--suite", verify.suite, "lemmas | noise | u-moments | all")
      ->check(CLI::IsMember({"lemmas", "noise", "u-moments", "all"}));
  verify_cmd->add_option("--seed", verify.options.seed, "suite seed");
  verify_cmd->add_option("--runs", verify.options.n_runs, "Monte Carlo runs");
  verify_cmd->add_option("--horizon", verify.options.horizon, "iterations per run");
  verify_cmd->add_option("--threads", verify.options.threads, "worker threads");
  verify_cmd->add_option("--out", verify.options.csv_dir,
                         "directory for machine-readable CSV twins");
  verify_cmd->add_option("--tamper-hurst", verify.options.tamper_hurst_offset,
                         "negative control: offset the generated Hurst index");

  RateArgs rate;
  auto* rate_cmd = app.add_subcommand("rate", "fit a log-log decay slope to a CSV column");
  rate_cmd->add_option("--input", rate.input, "CSV produced by simulate/figure")->required();
  rate_cmd->add_option("--column", rate.column, "column to fit")->required();
  rate_cmd->add_option("--k-min", rate.k_min, "discard checkpoints below this k");
  rate_cmd->add_option("--k-offset", rate.k_offset, "fit against log(k + offset)");

  FigureArgs figure;
  auto* figure_cmd = app.add_subcommand("figure", "reproduce an experiment sweep");
  figure_cmd->add_option("--id", figure.id, "fig1 | fig2 | fig3a | fig3b")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3a", "fig3b"}));
  figure_cmd->add_option("--out", figure.out_dir, "output directory")->required();
  figure_cmd->add_option("--runs", figure.runs, "runs per sweep value (default 1000)");
  figure_cmd->add_option("--horizon", figure.horizon, "iterations per run (default 1e5)");
  figure_cmd->add_option("--seed", figure.seed, "master seed")
      ->each([&](const std::string&) { figure.seed_set = true; });
  figure_cmd->add_option("--threads", figure.threads, "worker threads");

  NoiseDumpArgs dump;
  auto* dump_cmd = app.add_subcommand("noise-dump", "dump raw scalar noise samples as CSV");
  dump_cmd
      ->add_option("--kind", dump.kind,
                   "mds_gaussian | pareto | alpha_stable | fgn | farima")
      ->required()
      ->check(CLI::IsMember({"mds_gaussian", "pareto", "alpha_stable", "fgn", "farima"}));
  dump_cmd->add_option("--std", dump.std_dev, "gaussian std");
  dump_cmd->add_option("--alpha", dump.alpha, "pareto/stable index");
  dump_cmd->add_option("--scale", dump.scale, "scale parameter");
  dump_cmd->add_option("--hurst", dump.hurst, "fgn Hurst index");
  dump_cmd->add_option("--c", dump.c, "farima memory parameter");
  dump_cmd->add_option("--truncation", dump.truncation, "farima MA truncation");
  dump_cmd->add_option("--n", dump.n, "sample count");
  dump_cmd->add_option("--seed", dump.seed, "stream seed");
  dump_cmd->add_option("--out", dump.out_path, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (simulate->parsed()) return run_simulate(sim);
  if (bounds_cmd->parsed()) return run_bounds(bounds);
  if (verify_cmd->parsed()) return run_verify(verify);
  if (rate_cmd->parsed()) return run_rate(rate);
  if (figure_cmd->parsed()) return run_figure(figure);
  if (dump_cmd->parsed()) return run_noise_dump(dump);
  return kExitUsage;
}
