#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "salab/noise.hpp"
#include "salab/operators.hpp"
#include "salab/sa_core.hpp"
#include "salab/theory.hpp"

namespace salab {

// Problem specs: enough to rebuild an instance deterministically.

struct LinearSpec {
  int d = 1;
  std::vector<double> matrix;  // row-major d*d; empty = identity
};

struct HuberLsqSpec {
  int m = 60;
  int d = 30;
  double delta = 1.0;
  std::uint64_t matrix_seed = 1;
};

struct PowerControlSpec {
  int players = 12;
  int channels = 4;
  GameRanges ranges;
  double noise_floor = 1.0;
  std::uint64_t game_seed = 1;
};

/// A previously persisted instance file.
struct FileProblemSpec {
  std::string path;
};

using ProblemSpec = std::variant<LinearSpec, HuberLsqSpec, PowerControlSpec, FileProblemSpec>;

ProblemInstance build_instance(const ProblemSpec& spec);

struct ExperimentConfig {
  ProblemSpec problem = LinearSpec{};
  NoiseModel noise = MdsGaussian{};
  StepSchedule schedule;
  long horizon = 100000;
  int n_runs = 1000;
  std::vector<double> moment_orders{1.0};
  std::vector<double> quantiles{0.1, 0.9};
  std::uint64_t master_seed = 1;
  bool projected = false;
  double x0_distance = 1.0;
};

/// Throws std::invalid_argument when fields are inconsistent (e.g. a moment
/// order above the noise model's finite-moment ceiling).
void validate(const ExperimentConfig& config);

/// INI-style sections [problem] [noise] [schedule] [run]; floats written in
/// shortest round-trip form so configs survive a write/parse cycle losslessly.
ExperimentConfig parse_config(std::istream& in, const std::string& context = "config");
ExperimentConfig load_config(const std::string& path);
std::string write_config(const ExperimentConfig& config);

struct EnsembleStats {
  std::vector<long> checkpoints;
  std::vector<double> moment_orders;
  std::vector<std::vector<double>> moment_mean;  // [order][checkpoint]
  std::vector<std::vector<double>> moment_se;    // bootstrap, run level
  std::vector<double> quantile_levels;
  std::vector<std::vector<double>> quantile_values;  // [level][checkpoint]
  long flagged_runs = 0;
  long total_runs = 0;
};

/// n_runs independent trajectories, run i seeded hash(master_seed, i);
/// aggregation in ascending run index, so the result is identical for any
/// worker count. Aborts (std::runtime_error) when more than 1% of runs hit
/// non-finite iterates; fewer flagged runs are excluded from the statistics
/// and disclosed via flagged_runs.
EnsembleStats run_ensemble(const ExperimentConfig& config, const ProblemInstance& instance,
                           int threads = 1);
EnsembleStats run_ensemble(const ExperimentConfig& config, int threads = 1);

struct RateFit {
  double slope;
  double intercept;
  double r_squared;
  long points_used;
};

/// Least-squares line on (log(k + k_offset), log value) over checkpoints with
/// k >= k_min. Throws if fewer than 8 checkpoints qualify or a value in the
/// window is nonpositive.
RateFit fit_rate(const std::vector<long>& checkpoints, const std::vector<double>& values,
                 double k_min, double k_offset = 0.0);

/// Header: k, then moment_q{q},se_q{q} per order, then q{p} per quantile,
/// then optionally bound. Shortest round-trip floats; one row per checkpoint.
void write_ensemble_csv(const EnsembleStats& stats, const BoundCurve* bound,
                        std::ostream& out);
void write_ensemble_csv(const EnsembleStats& stats, const BoundCurve* bound,
                        const std::string& path);

/// Parsed CSV: header names plus per-column values (used by the rate CLI and
/// the round-trip tests).
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // [column][row]
  const std::vector<double>& column(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

/// Fingerprint of the canonical config serialization plus seed/runtime info,
/// written as manifest.json next to the CSVs.
void write_run_manifest(const std::string& dir, const ExperimentConfig& config, int threads,
                        double wall_seconds, const std::vector<std::string>& outputs);

struct FigureOverrides {
  std::optional<int> runs;
  std::optional<long> horizon;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

/// Sweep configurations behind the four figure panels:
///   fig1  Huber least squares (m=60, d=30, delta=1), centered Pareto scale 1,
///         alpha sweep, plus a single-run CSV per alpha
///   fig2  same problem, fGn scaled by 20, Hurst sweep, plus single-run CSVs
///   fig3a power control game, symmetric alpha-stable scale 0.2, alpha sweep
///         including alpha = 1, projected
///   fig3b power control game, FARIMA scale 0.2, truncation 500, c sweep,
///         projected
/// beta_k = 1/(k+1) and 1000 runs everywhere, as in the experiments the
/// curves come from. Returns the paths written.
std::vector<std::string> reproduce_figure(const std::string& figure_id,
                                          const std::string& out_dir,
                                          const FigureOverrides& overrides = {});

/// Sweep values used by reproduce_figure (exposed for the acceptance checks).
std::vector<double> figure_sweep(const std::string& figure_id);

}  // namespace salab
