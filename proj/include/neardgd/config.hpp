#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "neardgd/consensus.hpp"
#include "neardgd/dynamics.hpp"
#include "neardgd/graph.hpp"
#include "neardgd/problem.hpp"
#include "neardgd/schedule.hpp"

namespace neardgd {

enum class TopologyKind { kCirculant, kComplete };

// Cost weights in the order (gradient, communication).
struct CostPair {
  double c_g = 1.0;
  double c_c = 1.0;

  bool operator==(const CostPair&) const = default;
};

// One experiment: a problem instance, a mixing graph, a step size, a list of
// consensus schedules to sweep, and the cost weights to report under.
// Text form is flat `key = value` lines with '#' comments; the keys `case`
// and `cost` repeat, everything else appears at most once, and unknown keys
// are errors.
struct ExperimentConfig {
  ProblemKind problem = ProblemKind::kRegression;
  int p = 50;
  int n = 8;
  int s = 7;
  std::uint64_t seed = 1729;
  double scale = 1.0;
  bool normalize = false;  // rescale the data to unit aggregate spectral norm

  TopologyKind topology = TopologyKind::kCirculant;
  int radius = 3;
  WeightScheme weights = WeightScheme::kLazyMetropolis;

  double mu = 0.1;
  long steps = 10000;
  std::vector<Schedule> cases;
  std::vector<CostPair> costs;

  std::string out = "out";
  std::optional<MetricMode> metric;
  bool strict_admissibility = false;  // error instead of warn on an oversized step
  bool per_agent_costs = false;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_file(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

// Structural checks beyond parsing (dimensions positive, schedule list
// entries valid, radius meaningful for the topology). Throws on violation.
void validate_config(const ExperimentConfig& cfg);

// Instantiate the pieces an experiment runs on.
Problem build_problem(const ExperimentConfig& cfg);
ConsensusMatrix build_graph(const ExperimentConfig& cfg);

std::string to_string(TopologyKind t);

}  // namespace neardgd
