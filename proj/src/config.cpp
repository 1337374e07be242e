#include "neardgd/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "neardgd/format.hpp"

namespace neardgd {

std::string to_string(TopologyKind t) {
  return t == TopologyKind::kCirculant ? "circulant" : "complete";
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  const auto b = s.find_last_not_of(" \t");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("config: bad value '" + value + "' for key '" + key + "'");
}

}  // namespace

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  cfg.cases.clear();
  cfg.costs.clear();

  std::map<std::string, bool> seen;
  auto once = [&seen](const std::string& key) {
    if (seen[key]) throw std::invalid_argument("config: duplicate key '" + key + "'");
    seen[key] = true;
  };

  bool problem_is_piecewise = false;
  bool saw_s = false, saw_scale = false, saw_radius = false;

  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config: empty key or value in '" + line + "'");

    if (key == "problem") {
      once(key);
      if (value == "regression") {
        cfg.problem = ProblemKind::kRegression;
      } else if (value == "piecewise-quartic") {
        cfg.problem = ProblemKind::kPiecewiseQuartic;
        problem_is_piecewise = true;
      } else {
        bad_value(key, value);
      }
    } else if (key == "p") {
      once(key);
      cfg.p = static_cast<int>(parse_int(value));
    } else if (key == "n") {
      once(key);
      cfg.n = static_cast<int>(parse_int(value));
    } else if (key == "s") {
      once(key);
      saw_s = true;
      cfg.s = static_cast<int>(parse_int(value));
    } else if (key == "seed") {
      once(key);
      cfg.seed = static_cast<std::uint64_t>(parse_int(value));
    } else if (key == "scale") {
      once(key);
      saw_scale = true;
      if (value == "normalized") {
        cfg.normalize = true;
      } else {
        cfg.scale = parse_double(value);
        if (!(cfg.scale > 0.0)) bad_value(key, value);
      }
    } else if (key == "topology") {
      once(key);
      if (value == "circulant")
        cfg.topology = TopologyKind::kCirculant;
      else if (value == "complete")
        cfg.topology = TopologyKind::kComplete;
      else
        bad_value(key, value);
    } else if (key == "radius") {
      once(key);
      saw_radius = true;
      cfg.radius = static_cast<int>(parse_int(value));
    } else if (key == "weights") {
      once(key);
      if (value == "lazy-metropolis")
        cfg.weights = WeightScheme::kLazyMetropolis;
      else if (value == "uniform-neighbor")
        cfg.weights = WeightScheme::kUniformNeighbor;
      else
        bad_value(key, value);
    } else if (key == "mu") {
      once(key);
      cfg.mu = parse_double(value);
    } else if (key == "steps") {
      once(key);
      cfg.steps = parse_int(value);
    } else if (key == "case") {
      cfg.cases.push_back(parse_schedule(value));
    } else if (key == "cost") {
      std::istringstream ss(value);
      std::string g, c, extra;
      if (!(ss >> g >> c) || (ss >> extra))
        throw std::invalid_argument("config: cost needs exactly two weights, got '" + value + "'");
      CostPair pair{parse_double(g), parse_double(c)};
      if (pair.c_g < 0.0 || pair.c_c < 0.0) bad_value(key, value);
      cfg.costs.push_back(pair);
    } else if (key == "out") {
      once(key);
      cfg.out = value;
    } else if (key == "metric") {
      once(key);
      if (value == "optimal-set")
        cfg.metric = MetricMode::kOptimalSet;
      else if (value == "minimizer")
        cfg.metric = MetricMode::kMinimizer;
      else
        bad_value(key, value);
    } else if (key == "admissibility") {
      once(key);
      if (value == "strict")
        cfg.strict_admissibility = true;
      else if (value == "warn")
        cfg.strict_admissibility = false;
      else
        bad_value(key, value);
    } else if (key == "cost-granularity") {
      once(key);
      if (value == "per-agent")
        cfg.per_agent_costs = true;
      else if (value == "network")
        cfg.per_agent_costs = false;
      else
        bad_value(key, value);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }

  if (problem_is_piecewise) {
    if (saw_s) throw std::invalid_argument("config: 's' applies to regression only");
    if (saw_scale) throw std::invalid_argument("config: 'scale' applies to regression only");
    cfg.p = seen["p"] ? cfg.p : 1;
    cfg.s = 0;
    cfg.scale = 1.0;
  }
  if (cfg.topology == TopologyKind::kComplete && saw_radius)
    throw std::invalid_argument("config: 'radius' applies to the circulant topology only");
  if (cfg.topology == TopologyKind::kComplete) cfg.radius = 0;
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  return parse_config(is);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  const bool regression = cfg.problem == ProblemKind::kRegression;
  os << "problem = " << (regression ? "regression" : "piecewise-quartic") << "\n";
  os << "p = " << cfg.p << "\n";
  os << "n = " << cfg.n << "\n";
  if (regression) {
    os << "s = " << cfg.s << "\n";
    if (cfg.normalize)
      os << "scale = normalized\n";
    else
      os << "scale = " << format_double(cfg.scale) << "\n";
  }
  os << "seed = " << cfg.seed << "\n";
  os << "topology = " << to_string(cfg.topology) << "\n";
  if (cfg.topology == TopologyKind::kCirculant) os << "radius = " << cfg.radius << "\n";
  os << "weights = " << to_string(cfg.weights) << "\n";
  os << "mu = " << format_double(cfg.mu) << "\n";
  os << "steps = " << cfg.steps << "\n";
  for (const Schedule& s : cfg.cases) os << "case = " << to_string(s) << "\n";
  for (const CostPair& c : cfg.costs)
    os << "cost = " << format_double(c.c_g) << " " << format_double(c.c_c) << "\n";
  os << "out = " << cfg.out << "\n";
  if (cfg.metric)
    os << "metric = " << (*cfg.metric == MetricMode::kOptimalSet ? "optimal-set" : "minimizer")
       << "\n";
  os << "admissibility = " << (cfg.strict_admissibility ? "strict" : "warn") << "\n";
  os << "cost-granularity = " << (cfg.per_agent_costs ? "per-agent" : "network") << "\n";
  return os.str();
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (cfg.p < 1) throw std::invalid_argument("config: p must be >= 1");
  if (cfg.problem == ProblemKind::kRegression && cfg.s < 1)
    throw std::invalid_argument("config: s must be >= 1");
  if (cfg.problem == ProblemKind::kPiecewiseQuartic && cfg.p != 1)
    throw std::invalid_argument("config: the piecewise problem lives on the line (p = 1)");
  if (!(cfg.mu > 0.0)) throw std::invalid_argument("config: mu must be positive");
  if (cfg.steps < 0) throw std::invalid_argument("config: steps must be >= 0");
  if (cfg.topology == TopologyKind::kCirculant && cfg.radius < 1)
    throw std::invalid_argument("config: circulant radius must be >= 1");
  if (cfg.out.empty()) throw std::invalid_argument("config: out must not be empty");
}

Problem build_problem(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.problem == ProblemKind::kPiecewiseQuartic)
    return make_piecewise_quartic(cfg.n, cfg.seed);
  if (cfg.normalize) return make_regression_normalized(cfg.p, cfg.n, cfg.s, cfg.seed);
  return make_regression(cfg.p, cfg.n, cfg.s, cfg.seed, cfg.scale);
}

ConsensusMatrix build_graph(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Topology g = cfg.topology == TopologyKind::kCirculant
                         ? build_circulant(cfg.n, cfg.radius)
                         : build_complete(cfg.n);
  return consensus_matrix(g, cfg.weights);
}

}  // namespace neardgd
