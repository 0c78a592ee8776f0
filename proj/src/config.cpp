#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "salab/experiments.hpp"
#include "salab/util.hpp"

namespace salab {

namespace {

using Section = std::map<std::string, std::string>;
using Document = std::map<std::string, Section>;

Document parse_ini(std::istream& in, const std::string& context) {
  Document doc;
  std::string line, section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::invalid_argument(context + ":" + std::to_string(line_no) +
                                    ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      doc[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(context + ":" + std::to_string(line_no) +
                                  ": expected key = value");
    doc[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return doc;
}

class SectionReader {
 public:
  SectionReader(const Document& doc, std::string section, std::string context)
      : context_(std::move(context)), section_(std::move(section)) {
    auto it = doc.find(section_);
    if (it == doc.end())
      throw std::invalid_argument(context_ + ": missing section [" + section_ + "]");
    values_ = &it->second;
  }

  const std::string& require(const std::string& key) const {
    auto it = values_->find(key);
    if (it == values_->end())
      throw std::invalid_argument(context_ + ": missing key '" + key + "' in [" + section_ +
                                  "]");
    return it->second;
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_->find(key);
    return it == values_->end() ? fallback : it->second;
  }
  double get_double(const std::string& key, double fallback) const {
    auto it = values_->find(key);
    return it == values_->end() ? fallback : parse_double(it->second);
  }
  long get_long(const std::string& key, long fallback) const {
    auto it = values_->find(key);
    return it == values_->end() ? fallback : parse_long(it->second);
  }
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_->find(key);
    return it == values_->end() ? fallback : parse_u64(it->second);
  }
  bool has(const std::string& key) const { return values_->count(key) != 0; }

 private:
  std::string context_;
  std::string section_;
  const Section* values_;
};

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& tok : split_ws(text)) out.push_back(parse_double(tok));
  return out;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += format_double(values[i]);
  }
  return out;
}

bool parse_bool(const std::string& text, const std::string& context) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw std::invalid_argument(context + ": expected true/false, got '" + text + "'");
}

}  // namespace

ProblemInstance build_instance(const ProblemSpec& spec) {
  return std::visit(
      [](const auto& s) -> ProblemInstance {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LinearSpec>) {
          if (s.matrix.empty()) return make_identity_instance(s.d);
          if (static_cast<long>(s.matrix.size()) != static_cast<long>(s.d) * s.d)
            throw std::invalid_argument("linear matrix needs d*d entries");
          Eigen::MatrixXd m(s.d, s.d);
          std::size_t k = 0;
          for (int i = 0; i < s.d; ++i)
            for (int j = 0; j < s.d; ++j) m(i, j) = s.matrix[k++];
          return make_linear_instance(m);
        } else if constexpr (std::is_same_v<T, HuberLsqSpec>) {
          return make_huber_instance(s.m, s.d, s.delta, s.matrix_seed);
        } else if constexpr (std::is_same_v<T, PowerControlSpec>) {
          return make_power_control_instance(s.players, s.channels, s.ranges, s.noise_floor,
                                             s.game_seed);
        } else {
          return load_instance(s.path);
        }
      },
      spec);
}

void validate(const ExperimentConfig& config) {
  validate(config.noise);
  if (config.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (config.n_runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (config.schedule.beta <= 0.0 || config.schedule.k0 <= 0.0)
    throw std::invalid_argument("schedule needs beta > 0 and k0 > 0");
  if (config.moment_orders.empty())
    throw std::invalid_argument("at least one moment order is required");
  const double ceiling = moment_ceiling(config.noise);
  for (double q : config.moment_orders) {
    if (!(q >= 1.0 && q <= 2.0))
      throw std::invalid_argument("moment orders must lie in [1,2]");
    if (q > ceiling)
      throw std::invalid_argument("moment order " + format_double(q) +
                                  " exceeds the noise model's finite-moment ceiling " +
                                  format_double(ceiling));
  }
  for (double p : config.quantiles)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("quantile levels must lie in [0,1]");
  if (config.x0_distance <= 0.0)
    throw std::invalid_argument("x0 distance must be positive");
}

ExperimentConfig parse_config(std::istream& in, const std::string& context) {
  const Document doc = parse_ini(in, context);
  ExperimentConfig config;

  SectionReader problem(doc, "problem", context);
  const std::string kind = problem.require("kind");
  if (kind == "linear") {
    LinearSpec s;
    s.d = static_cast<int>(problem.get_long("d", 1));
    if (problem.has("matrix")) s.matrix = parse_double_list(problem.require("matrix"));
    config.problem = s;
  } else if (kind == "huber_lsq") {
    HuberLsqSpec s;
    s.m = static_cast<int>(problem.get_long("m", s.m));
    s.d = static_cast<int>(problem.get_long("d", s.d));
    s.delta = problem.get_double("delta", s.delta);
    s.matrix_seed = problem.get_u64("matrix_seed", s.matrix_seed);
    config.problem = s;
  } else if (kind == "power_control") {
    PowerControlSpec s;
    s.players = static_cast<int>(problem.get_long("players", s.players));
    s.channels = static_cast<int>(problem.get_long("channels", s.channels));
    s.ranges.direct_min = problem.get_double("direct_gain_min", s.ranges.direct_min);
    s.ranges.direct_max = problem.get_double("direct_gain_max", s.ranges.direct_max);
    s.ranges.cross_min = problem.get_double("cross_gain_min", s.ranges.cross_min);
    s.ranges.cross_max = problem.get_double("cross_gain_max", s.ranges.cross_max);
    s.noise_floor = problem.get_double("noise_floor", s.noise_floor);
    s.game_seed = problem.get_u64("game_seed", s.game_seed);
    config.problem = s;
  } else if (kind == "file") {
    config.problem = FileProblemSpec{problem.require("path")};
  } else {
    throw std::invalid_argument(context + ": unknown problem kind '" + kind + "'");
  }

  SectionReader noise(doc, "noise", context);
  const std::string nkind = noise.require("kind");
  if (nkind == "mds_gaussian") {
    config.noise = MdsGaussian{noise.get_double("std", 1.0)};
  } else if (nkind == "pareto") {
    config.noise = ParetoCentered{parse_double(noise.require("alpha")),
                                  noise.get_double("scale", 1.0)};
  } else if (nkind == "alpha_stable") {
    config.noise = SymAlphaStable{parse_double(noise.require("alpha")),
                                  noise.get_double("scale", 1.0)};
  } else if (nkind == "fgn") {
    config.noise = Fgn{parse_double(noise.require("hurst")), noise.get_double("scale", 1.0)};
  } else if (nkind == "farima") {
    config.noise = Farima{parse_double(noise.require("c")), noise.get_double("scale", 1.0),
                          static_cast<int>(noise.get_long("truncation", 500))};
  } else {
    throw std::invalid_argument(context + ": unknown noise kind '" + nkind + "'");
  }

  SectionReader schedule(doc, "schedule", context);
  config.schedule.beta = parse_double(schedule.require("beta"));
  config.schedule.k0 = parse_double(schedule.require("k0"));

  SectionReader run(doc, "run", context);
  config.horizon = run.get_long("horizon", config.horizon);
  config.n_runs = static_cast<int>(run.get_long("runs", config.n_runs));
  if (run.has("moment_orders"))
    config.moment_orders = parse_double_list(run.require("moment_orders"));
  if (run.has("quantiles")) config.quantiles = parse_double_list(run.require("quantiles"));
  config.master_seed = run.get_u64("master_seed", config.master_seed);
  if (run.has("projected")) config.projected = parse_bool(run.require("projected"), context);
  config.x0_distance = run.get_double("x0_distance", config.x0_distance);

  validate(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

std::string write_config(const ExperimentConfig& config) {
  std::ostringstream os;
  os << "[problem]\n";
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LinearSpec>) {
          os << "kind = linear\n";
          os << "d = " << s.d << '\n';
          if (!s.matrix.empty()) os << "matrix = " << join_doubles(s.matrix) << '\n';
        } else if constexpr (std::is_same_v<T, HuberLsqSpec>) {
          os << "kind = huber_lsq\n";
          os << "m = " << s.m << '\n';
          os << "d = " << s.d << '\n';
          os << "delta = " << format_double(s.delta) << '\n';
          os << "matrix_seed = " << s.matrix_seed << '\n';
        } else if constexpr (std::is_same_v<T, PowerControlSpec>) {
          os << "kind = power_control\n";
          os << "players = " << s.players << '\n';
          os << "channels = " << s.channels << '\n';
          os << "direct_gain_min = " << format_double(s.ranges.direct_min) << '\n';
          os << "direct_gain_max = " << format_double(s.ranges.direct_max) << '\n';
          os << "cross_gain_min = " << format_double(s.ranges.cross_min) << '\n';
          os << "cross_gain_max = " << format_double(s.ranges.cross_max) << '\n';
          os << "noise_floor = " << format_double(s.noise_floor) << '\n';
          os << "game_seed = " << s.game_seed << '\n';
        } else {
          os << "kind = file\n";
          os << "path = " << s.path << '\n';
        }
      },
      config.problem);

  os << "\n[noise]\n";
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MdsGaussian>) {
          os << "kind = mds_gaussian\n";
          os << "std = " << format_double(m.std_dev) << '\n';
        } else if constexpr (std::is_same_v<T, ParetoCentered>) {
          os << "kind = pareto\n";
          os << "alpha = " << format_double(m.alpha) << '\n';
          os << "scale = " << format_double(m.scale) << '\n';
        } else if constexpr (std::is_same_v<T, SymAlphaStable>) {
          os << "kind = alpha_stable\n";
          os << "alpha = " << format_double(m.alpha) << '\n';
          os << "scale = " << format_double(m.scale) << '\n';
        } else if constexpr (std::is_same_v<T, Fgn>) {
          os << "kind = fgn\n";
          os << "hurst = " << format_double(m.hurst) << '\n';
          os << "scale = " << format_double(m.scale) << '\n';
        } else {
          os << "kind = farima\n";
          os << "c = " << format_double(m.c) << '\n';
          os << "scale = " << format_double(m.scale) << '\n';
          os << "truncation = " << m.truncation << '\n';
        }
      },
      config.noise);

  os << "\n[schedule]\n";
  os << "beta = " << format_double(config.schedule.beta) << '\n';
  os << "k0 = " << format_double(config.schedule.k0) << '\n';

  os << "\n[run]\n";
  os << "horizon = " << config.horizon << '\n';
  os << "runs = " << config.n_runs << '\n';
  os << "moment_orders = " << join_doubles(config.moment_orders) << '\n';
  os << "quantiles = " << join_doubles(config.quantiles) << '\n';
  os << "master_seed = " << config.master_seed << '\n';
  os << "projected = " << (config.projected ? "true" : "false") << '\n';
  os << "x0_distance = " << format_double(config.x0_distance) << '\n';
  return os.str();
}

}  // namespace salab
