#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "neardgd/consensus.hpp"
#include "neardgd/problem.hpp"
#include "neardgd/schedule.hpp"
#include "neardgd/types.hpp"

namespace neardgd {

// Stacked iterate: row i is agent i's copy of the decision variable.
struct StackedState {
  BlockMatrix x;         // n x p
  long k = 0;            // iteration index
  long comm_rounds = 0;  // cumulative consensus applications, sum of t(j) for j < k
  long grad_rounds = 0;  // cumulative gradient evaluations, equals k
};

// Which distance the A-column measures. Problems with a known composite
// structure use the distance to the optimal set; otherwise a designated
// minimizer is required.
enum class MetricMode { kOptimalSet, kMinimizer };

struct TrajectoryPoint {
  long k = 0;
  int t_k = 0;
  double A = 0.0;            // sqrt(n) * distance of the average iterate
  double B = 0.0;            // Frobenius distance of the stack from its average
  double regret = 0.0;       // (1/n) sum_i (f(x_i) - f*)
  double ergodic_gap = 0.0;  // f(mean of xbar_0..xbar_k) - f*
  long cum_comm = 0;
  long cum_grad = 0;
  // Closed-form trajectory bounds, filled by the harness when the step size
  // admits them; absent cells stay empty in the CSV.
  std::optional<double> bound_fixed;
  std::optional<double> bound_nondecreasing;
};

struct MonitorCheck {
  std::string name;
  bool active = false;
  long steps_checked = 0;
  long violations = 0;
  double worst_slack = 0.0;  // most negative margin seen (0 when clean)
  long worst_k = -1;

  bool pass() const { return violations == 0; }
};

struct MonitorReport {
  MonitorCheck convex_recursion;     // per-step two-term envelope, convex runs
  MonitorCheck composite_recursion;  // contraction envelope, composite runs
  MonitorCheck average_consistency;  // consensus preserves the block average

  bool all_pass() const;
};

struct RunOptions {
  double mu = 0.0;
  long steps = 0;  // number of gradient steps; the trajectory has one row per step
  std::optional<BlockMatrix> init;
  std::uint64_t init_seed = 0;  // used when init is absent: entries uniform [0,1]
  std::optional<MetricMode> metric;  // default: optimal set when composite, else minimizer
  double divergence_guard = 1e12;
  double monitor_slack = 1e-8;
  double drift_tol = 1e-8;
  bool check_average = true;
};

struct RunResult {
  std::vector<TrajectoryPoint> trajectory;  // rows k = 0..steps-1 (pre-step state)
  BlockMatrix final_state;                  // x after the last step
  Vector final_average;
  Vector ergodic_average;  // mean of xbar_0..xbar_{steps-1}
  MonitorReport monitors;
  MetricMode metric = MetricMode::kMinimizer;
  double D = 0.0;  // stacked gradient norm at the reference optimum
};

// Seeded default initialization: entries uniform on [0,1].
BlockMatrix initial_state(int n, int p, std::uint64_t seed);

// One recursion step: consensus applied to the gradient update,
// x' = W^{t(k)} (x - mu * stacked gradient). Throws on dimension mismatch or
// non-finite gradients (the message carries the iterate norms).
StackedState near_dgd_step(const StackedState& state, const ConsensusMatrix& W,
                           const Schedule& schedule, double mu, const Problem& prob);

// The induced recursion on the block average: xbar - mu * mean of local
// gradients at the individual iterates. Cross-check, not a second algorithm.
Vector averaged_step(const Vector& xbar, double mu, const Problem& prob,
                     const BlockMatrix& x_full);

// Execute opt.steps recursion steps, recording one row per pre-step state and
// running the per-step inequality monitors. Throws if the iterate norm passes
// opt.divergence_guard.
RunResult run(const Problem& prob, const ConsensusMatrix& W, const Schedule& schedule,
              const RunOptions& opt);

// Cumulative cost series: cost[m] = c_c * (comm rounds before step m) +
// c_g * m, for m = 0..K (one entry past the last row, covering the executed
// final step). agents > 1 switches to per-agent counting, multiplying both
// counts by that factor.
std::vector<double> cost_series(const std::vector<TrajectoryPoint>& trajectory, double c_c,
                                double c_g, int agents = 1);

}  // namespace neardgd
