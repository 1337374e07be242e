#include "neardgd/experiment.hpp"

namespace neardgd {

namespace {

std::vector<Schedule> standard_cases() {
  return {Schedule::log_floor(0.5), Schedule::log_floor(1.0), Schedule::log_floor(3.0),
          Schedule::linear_floor(100), Schedule::identity()};
}

}  // namespace

ExperimentConfig preset_regression() {
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::kRegression;
  cfg.p = 50;
  cfg.n = 8;
  cfg.s = 7;
  cfg.seed = 1729;
  cfg.normalize = true;
  cfg.topology = TopologyKind::kCirculant;
  cfg.radius = 3;
  cfg.weights = WeightScheme::kLazyMetropolis;
  cfg.mu = 0.1;
  cfg.steps = 10000;
  cfg.cases = standard_cases();
  cfg.costs = {{1.0, 0.2}, {1.0, 0.02}, {0.02, 1.0}};
  cfg.out = "out";
  return cfg;
}

ExperimentConfig preset_piecewise() {
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::kPiecewiseQuartic;
  cfg.p = 1;
  cfg.n = 8;
  cfg.s = 0;
  cfg.seed = 1729;
  cfg.topology = TopologyKind::kCirculant;
  cfg.radius = 3;
  cfg.weights = WeightScheme::kLazyMetropolis;
  cfg.mu = 0.5;
  cfg.steps = 10000;
  cfg.cases = standard_cases();
  cfg.costs = {{1.0, 0.2}};
  cfg.out = "out";
  return cfg;
}

}  // namespace neardgd
