#include "salab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "salab/util.hpp"

namespace salab {

namespace {

constexpr std::uint64_t kDefaultFigureSeed = 1234;

double interpolated_quantile(std::vector<double>& sorted, double level) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = level * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

EnsembleStats run_ensemble(const ExperimentConfig& config, const ProblemInstance& instance,
                           int threads) {
  validate(config);
  const std::vector<long> checkpoints = checkpoint_grid(config.horizon);
  const std::size_t n_cp = checkpoints.size();
  const Eigen::VectorXd x0 = default_x0(instance, config.x0_distance);

  std::vector<std::vector<double>> errors(config.n_runs);
  std::vector<char> flagged(config.n_runs, 0);
  SaOptions options;
  options.projected = config.projected;
  parallel_for_index(config.n_runs, threads, [&](long i) {
    Trajectory traj = run_sa(instance, config.noise, config.schedule, config.horizon, x0,
                             hash_combine(config.master_seed, static_cast<std::uint64_t>(i)),
                             options);
    errors[i] = std::move(traj.errors);
    flagged[i] = traj.flagged ? 1 : 0;
  });

  EnsembleStats stats;
  stats.checkpoints = checkpoints;
  stats.moment_orders = config.moment_orders;
  stats.quantile_levels = config.quantiles;
  stats.total_runs = config.n_runs;
  stats.flagged_runs = std::count(flagged.begin(), flagged.end(), 1);
  if (static_cast<double>(stats.flagged_runs) > 0.01 * config.n_runs)
    throw std::runtime_error("ensemble aborted: " + std::to_string(stats.flagged_runs) +
                             " of " + std::to_string(config.n_runs) +
                             " runs hit non-finite iterates (> 1%)");

  std::vector<const std::vector<double>*> kept;
  kept.reserve(config.n_runs);
  for (int i = 0; i < config.n_runs; ++i)
    if (!flagged[i]) kept.push_back(&errors[i]);
  const std::size_t n_kept = kept.size();
  if (n_kept == 0) throw std::runtime_error("ensemble aborted: no unflagged runs");

  for (double q : config.moment_orders) {
    std::vector<std::vector<double>> powered(n_kept, std::vector<double>(n_cp));
    for (std::size_t i = 0; i < n_kept; ++i)
      for (std::size_t c = 0; c < n_cp; ++c) powered[i][c] = std::pow((*kept[i])[c], q);
    std::vector<double> mean(n_cp, 0.0);
    for (const auto& row : powered)
      for (std::size_t c = 0; c < n_cp; ++c) mean[c] += row[c];
    for (auto& v : mean) v /= static_cast<double>(n_kept);
    stats.moment_mean.push_back(std::move(mean));
    stats.moment_se.push_back(
        bootstrap_se_of_mean(powered, 200, hash_combine(config.master_seed, 0xB007ULL)));
  }

  std::vector<double> column(n_kept);
  for (double level : config.quantiles) {
    std::vector<double> values(n_cp);
    for (std::size_t c = 0; c < n_cp; ++c) {
      for (std::size_t i = 0; i < n_kept; ++i) column[i] = (*kept[i])[c];
      std::sort(column.begin(), column.end());
      values[c] = interpolated_quantile(column, level);
    }
    stats.quantile_values.push_back(std::move(values));
  }
  return stats;
}

EnsembleStats run_ensemble(const ExperimentConfig& config, int threads) {
  return run_ensemble(config, build_instance(config.problem), threads);
}

RateFit fit_rate(const std::vector<long>& checkpoints, const std::vector<double>& values,
                 double k_min, double k_offset) {
  if (checkpoints.size() != values.size())
    throw std::invalid_argument("fit_rate: checkpoint/value size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  long n = 0;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (static_cast<double>(checkpoints[i]) < k_min) continue;
    if (!(values[i] > 0.0))
      throw std::invalid_argument("fit_rate: nonpositive value at k = " +
                                  std::to_string(checkpoints[i]));
    const double x = std::log(static_cast<double>(checkpoints[i]) + k_offset);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++n;
  }
  if (n < 8)
    throw std::invalid_argument("fit_rate: needs at least 8 checkpoints with k >= k_min");
  const double dn = static_cast<double>(n);
  const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / dn;
  const double ss_tot = syy - sy * sy / dn;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (static_cast<double>(checkpoints[i]) < k_min) continue;
    const double x = std::log(static_cast<double>(checkpoints[i]) + k_offset);
    const double r = std::log(values[i]) - (intercept + slope * x);
    ss_res += r * r;
  }
  const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return {slope, intercept, r2, n};
}

void write_ensemble_csv(const EnsembleStats& stats, const BoundCurve* bound,
                        std::ostream& out) {
  if (bound && bound->checkpoints != stats.checkpoints)
    throw std::invalid_argument("bound curve checkpoints do not match the ensemble grid");
  out << 'k';
  for (double q : stats.moment_orders)
    out << ",moment_q" << format_double(q) << ",se_q" << format_double(q);
  for (double level : stats.quantile_levels) out << ",q" << format_double(level);
  if (bound) out << ",bound";
  out << '\n';
  for (std::size_t c = 0; c < stats.checkpoints.size(); ++c) {
    out << stats.checkpoints[c];
    for (std::size_t qi = 0; qi < stats.moment_orders.size(); ++qi)
      out << ',' << format_double(stats.moment_mean[qi][c]) << ','
          << format_double(stats.moment_se[qi][c]);
    for (std::size_t li = 0; li < stats.quantile_levels.size(); ++li)
      out << ',' << format_double(stats.quantile_values[li][c]);
    if (bound) out << ',' << format_double(bound->values[c]);
    out << '\n';
  }
}

void write_ensemble_csv(const EnsembleStats& stats, const BoundCurve* bound,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_ensemble_csv(stats, bound, out);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return values[i];
  throw std::invalid_argument("CSV has no column named '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty CSV");
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  table.values.resize(table.columns.size());
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::stringstream row(line);
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      if (col >= table.columns.size())
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": too many cells");
      table.values[col++].push_back(parse_double(cell));
    }
    if (col != table.columns.size())
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": too few cells");
  }
  return table;
}

void write_run_manifest(const std::string& dir, const ExperimentConfig& config, int threads,
                        double wall_seconds, const std::vector<std::string>& outputs) {
  const std::string canonical = write_config(config);
  std::ostringstream os;
  os << "{\n";
  os << "  \"tool\": \"salab\",\n";
  os << "  \"version\": \"0.1.0\",\n";
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  os << "  \"config_hash\": \"" << hash << "\",\n";
  os << "  \"master_seed\": " << config.master_seed << ",\n";
  os << "  \"runs\": " << config.n_runs << ",\n";
  os << "  \"horizon\": " << config.horizon << ",\n";
  os << "  \"threads\": " << threads << ",\n";
  os << "  \"wall_time_s\": " << format_double(wall_seconds) << ",\n";
  os << "  \"outputs\": [";
  for (std::size_t i = 0; i < outputs.size(); ++i)
    os << (i ? ", " : "") << '"' << outputs[i] << '"';
  os << "]\n}\n";
  std::ofstream out(std::filesystem::path(dir) / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in '" + dir + "'");
  out << os.str();
}

std::vector<double> figure_sweep(const std::string& figure_id) {
  if (figure_id == "fig1") return {1.2, 1.5, 1.8};   // Pareto tail index
  if (figure_id == "fig2") return {0.6, 0.75, 0.9};  // Hurst index
  if (figure_id == "fig3a") return {1.0, 1.5, 2.0};  // stable index, 1 included
  if (figure_id == "fig3b") return {0.0, 0.25, 0.45};  // FARIMA memory
  throw std::invalid_argument("unknown figure id '" + figure_id + "'");
}

std::vector<std::string> reproduce_figure(const std::string& figure_id,
                                          const std::string& out_dir,
                                          const FigureOverrides& overrides) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> sweep = figure_sweep(figure_id);
  std::filesystem::create_directories(out_dir);

  ExperimentConfig base;
  base.schedule = {1.0, 1.0};  // beta_k = 1/(k+1)
  base.horizon = overrides.horizon.value_or(100000);
  base.n_runs = overrides.runs.value_or(1000);
  base.master_seed = overrides.seed.value_or(kDefaultFigureSeed);
  base.moment_orders = {1.0};
  base.quantiles = {0.1, 0.9};

  std::string param_name;
  if (figure_id == "fig1" || figure_id == "fig2") {
    base.problem = HuberLsqSpec{};
    param_name = figure_id == "fig1" ? "alpha" : "hurst";
  } else {
    base.problem = PowerControlSpec{};
    base.projected = true;
    param_name = figure_id == "fig3a" ? "alpha" : "c";
  }

  const ProblemInstance instance = build_instance(base.problem);
  const std::filesystem::path dir(out_dir);
  std::vector<std::string> written;

  const std::string instance_file = (dir / (figure_id + "_instance.txt")).string();
  save_instance(instance, instance_file);
  written.push_back(instance_file);

  for (double value : sweep) {
    ExperimentConfig config = base;
    if (figure_id == "fig1")
      config.noise = ParetoCentered{value, 1.0};
    else if (figure_id == "fig2")
      config.noise = Fgn{value, 20.0};
    else if (figure_id == "fig3a")
      config.noise = SymAlphaStable{value, 0.2};
    else
      config.noise = Farima{value, 0.2, 500};

    const std::string tag = figure_id + "_" + param_name + format_double(value);
    EnsembleStats stats = run_ensemble(config, instance, overrides.threads);
    const std::string ensemble_file = (dir / (tag + ".csv")).string();
    write_ensemble_csv(stats, nullptr, ensemble_file);
    written.push_back(ensemble_file);

    if (figure_id == "fig1" || figure_id == "fig2") {
      ExperimentConfig single = config;
      single.n_runs = 1;
      EnsembleStats single_stats = run_ensemble(single, instance, 1);
      const std::string single_file = (dir / (tag + "_single.csv")).string();
      write_ensemble_csv(single_stats, nullptr, single_file);
      written.push_back(single_file);
    }
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // manifest fingerprints the shared base config; CSV names carry the sweep values
  write_run_manifest(out_dir, base, overrides.threads, wall, written);
  return written;
}

}  // namespace salab
