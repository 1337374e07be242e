#include "neardgd/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "neardgd/rng.hpp"

namespace neardgd {

bool MonitorReport::all_pass() const {
  return convex_recursion.pass() && composite_recursion.pass() && average_consistency.pass();
}

BlockMatrix initial_state(int n, int p, std::uint64_t seed) {
  return Rng::stream(seed, "init").matrix(n, p, 0.0, 1.0);
}

namespace {

std::string iterate_dump(const BlockMatrix& x, long k) {
  std::ostringstream os;
  os << "at step " << k << ", stack norm " << x.norm() << ", agent norms";
  for (Index i = 0; i < x.rows(); ++i) os << ' ' << x.row(i).norm();
  return os.str();
}

void check_dimensions(const StackedState& state, const ConsensusMatrix& W, const Problem& prob) {
  if (state.x.rows() != prob.n || state.x.cols() != prob.p)
    throw std::invalid_argument("near_dgd_step: state must be n x p for the problem");
  if (W.n() != prob.n) throw std::invalid_argument("near_dgd_step: mixing matrix size mismatch");
}

// Tracks one elementwise two-term inequality (A', B') <= M (A, B) + Y + tol.
void record_margin(MonitorCheck& check, double margin, long k, double tol) {
  check.steps_checked += 1;
  if (check.steps_checked == 1 || margin < check.worst_slack) {
    check.worst_slack = margin;
    check.worst_k = k;
  }
  if (margin < -tol) check.violations += 1;
}

}  // namespace

StackedState near_dgd_step(const StackedState& state, const ConsensusMatrix& W,
                           const Schedule& schedule, double mu, const Problem& prob) {
  check_dimensions(state, W, prob);
  const BlockMatrix grad = prob.stacked_grad(state.x);
  if (!grad.allFinite())
    throw std::runtime_error("near_dgd_step: non-finite gradient " + iterate_dump(state.x, state.k));
  const int t = schedule.t(state.k);
  StackedState next;
  next.x = apply_consensus(W, state.x - mu * grad, t);
  next.k = state.k + 1;
  next.comm_rounds = state.comm_rounds + t;
  next.grad_rounds = state.grad_rounds + 1;
  return next;
}

Vector averaged_step(const Vector& xbar, double mu, const Problem& prob,
                     const BlockMatrix& x_full) {
  return xbar - mu * prob.stacked_grad(x_full).colwise().mean().transpose();
}

RunResult run(const Problem& prob, const ConsensusMatrix& W, const Schedule& schedule,
              const RunOptions& opt) {
  if (opt.steps < 0) throw std::invalid_argument("run: steps must be nonnegative");
  if (!(opt.mu >= 0.0)) throw std::invalid_argument("run: mu must be nonnegative");

  RunResult res;
  res.metric = opt.metric.value_or(prob.composite ? MetricMode::kOptimalSet
                                                  : MetricMode::kMinimizer);
  if (res.metric == MetricMode::kOptimalSet && !prob.composite)
    throw std::invalid_argument("run: optimal-set metric needs a composite problem");
  if (res.metric == MetricMode::kMinimizer && !prob.minimizer)
    throw std::invalid_argument("run: minimizer metric needs a designated minimizer");

  StackedState state;
  state.x = opt.init ? *opt.init : initial_state(prob.n, prob.p, opt.init_seed);
  if (state.x.rows() != prob.n || state.x.cols() != prob.p)
    throw std::invalid_argument("run: init must be n x p for the problem");

  const Vector x_ref = res.metric == MetricMode::kMinimizer ? *prob.minimizer
                                                            : prob.composite->x_hat;
  res.D = prob.stacked_grad(x_ref.transpose().replicate(prob.n, 1)).norm();

  const double root_n = std::sqrt(static_cast<double>(prob.n));
  auto metric_A = [&](const Vector& xbar) {
    if (res.metric == MetricMode::kMinimizer) return root_n * (xbar - x_ref).norm();
    return root_n * (xbar - project_to_optimal(*prob.composite, xbar)).norm();
  };
  auto metric_B = [&](const BlockMatrix& x, const Vector& xbar) {
    return (x - xbar.transpose().replicate(prob.n, 1)).norm();
  };

  MonitorReport& mon = res.monitors;
  mon.convex_recursion.name = "convex-recursion";
  mon.composite_recursion.name = "composite-recursion";
  mon.average_consistency.name = "average-consistency";
  const double L = prob.L;
  mon.convex_recursion.active =
      res.metric == MetricMode::kMinimizer && opt.mu > 0.0 && opt.mu <= 2.0 / L;
  double q = 0.0;
  if (prob.composite) {
    const CompositeStructure& cs = *prob.composite;
    const double cap = 2.0 * cs.C_H / (cs.L_g + cs.alpha);
    mon.composite_recursion.active =
        res.metric == MetricMode::kOptimalSet && opt.mu > 0.0 && opt.mu <= cap;
    if (mon.composite_recursion.active) {
      const double C2 = 2.0 * cs.L_g * cs.alpha * cs.c_hoffman / (cs.L_g + cs.alpha);
      q = std::sqrt(std::max(0.0, 1.0 - C2 * opt.mu));
    }
  }
  mon.average_consistency.active = opt.check_average;

  res.trajectory.reserve(static_cast<std::size_t>(opt.steps));
  Vector xbar = state.x.colwise().mean().transpose();
  Vector ergodic_sum = Vector::Zero(prob.p);
  double A = metric_A(xbar);
  double B = metric_B(state.x, xbar);

  for (long k = 0; k < opt.steps; ++k) {
    ergodic_sum += xbar;
    const Vector ergodic_avg = ergodic_sum / static_cast<double>(k + 1);

    TrajectoryPoint row;
    row.k = k;
    row.t_k = schedule.t(k);
    row.A = A;
    row.B = B;
    double regret = 0.0;
    for (int i = 0; i < prob.n; ++i)
      regret += prob.value(state.x.row(i).transpose()) - prob.f_star;
    row.regret = regret / prob.n;
    row.ergodic_gap = prob.value(ergodic_avg) - prob.f_star;
    row.cum_comm = state.comm_rounds;
    row.cum_grad = state.grad_rounds;
    res.trajectory.push_back(row);

    const Vector xbar_pred = averaged_step(xbar, opt.mu, prob, state.x);
    state = near_dgd_step(state, W, schedule, opt.mu, prob);
    if (state.x.norm() > opt.divergence_guard)
      throw std::runtime_error("run: iterate norm passed the divergence guard " +
                               iterate_dump(state.x, state.k));

    xbar = state.x.colwise().mean().transpose();
    const double A_next = metric_A(xbar);
    const double B_next = metric_B(state.x, xbar);
    const double bt = std::pow(W.beta, row.t_k);

    if (mon.average_consistency.active)
      record_margin(mon.average_consistency, opt.drift_tol - (xbar - xbar_pred).norm(), k,
                    0.0);
    if (mon.convex_recursion.active) {
      const double margin_a = A + opt.mu * L * B - A_next;
      const double margin_b =
          opt.mu * L * bt * A + (1.0 + opt.mu * L) * bt * B + bt * opt.mu * res.D - B_next;
      record_margin(mon.convex_recursion, std::min(margin_a, margin_b), k, opt.monitor_slack);
    }
    if (mon.composite_recursion.active) {
      const double c0 = 1.0 + opt.mu * L;
      const double margin_a = q * A + opt.mu * L * B - A_next;
      const double margin_b = c0 * bt * A + c0 * bt * B + bt * opt.mu * res.D - B_next;
      record_margin(mon.composite_recursion, std::min(margin_a, margin_b), k,
                    opt.monitor_slack);
    }

    A = A_next;
    B = B_next;
  }

  res.final_state = state.x;
  res.final_average = xbar;
  res.ergodic_average = opt.steps > 0 ? Vector(ergodic_sum / static_cast<double>(opt.steps))
                                      : xbar;
  return res;
}

std::vector<double> cost_series(const std::vector<TrajectoryPoint>& trajectory, double c_c,
                                double c_g, int agents) {
  if (c_c < 0.0 || c_g < 0.0) throw std::invalid_argument("cost_series: weights must be >= 0");
  if (agents < 1) throw std::invalid_argument("cost_series: agent factor must be >= 1");
  std::vector<double> cost;
  cost.reserve(trajectory.size() + 1);
  for (const TrajectoryPoint& row : trajectory)
    cost.push_back(agents * (c_c * static_cast<double>(row.cum_comm) +
                             c_g * static_cast<double>(row.cum_grad)));
  const long final_comm =
      trajectory.empty() ? 0 : trajectory.back().cum_comm + trajectory.back().t_k;
  const long final_grad = trajectory.empty() ? 0 : trajectory.back().cum_grad + 1;
  cost.push_back(agents * (c_c * static_cast<double>(final_comm) +
                           c_g * static_cast<double>(final_grad)));
  return cost;
}

}  // namespace neardgd
