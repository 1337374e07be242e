#include "neardgd/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "neardgd/csv.hpp"
#include "neardgd/format.hpp"
#include "neardgd/theory.hpp"

namespace neardgd {

namespace {

// Fills the closed-form bound columns when the step size admits them.
// Returns false (leaving rows untouched) when it does not.
bool attach_bounds(std::vector<TrajectoryPoint>& rows, const Problem& prob, double beta,
                   const Schedule& schedule, double mu) {
  if (!prob.composite || rows.empty()) return false;
  const TheoryConstants tc = TheoryConstants::from(prob, beta);
  BoundInputs in;
  try {
    in = make_bound_inputs(rows[0].A, rows[0].B, mu, tc, schedule.t(0));
  } catch (const std::invalid_argument&) {
    return false;
  }
  if (schedule.kind == Schedule::Kind::kConstant)
    for (TrajectoryPoint& row : rows) row.bound_fixed = bound_fixed_schedule(in, row.k).A;
  NondecreasingBound nd(in, schedule);
  for (TrajectoryPoint& row : rows)
    if (row.k >= 3) row.bound_nondecreasing = nd.A(row.k);
  return true;
}

double report_decay_rate(const std::vector<TrajectoryPoint>& rows) {
  if (rows.size() < 20) return 0.0;
  std::vector<double> a;
  a.reserve(rows.size());
  for (const TrajectoryPoint& row : rows) a.push_back(row.A);
  const std::size_t k0 = rows.size() / 10;
  const std::size_t k1 = rows.size() / 2;
  try {
    return fitted_decay_rate(a, k0, k1, 1e-13 * (1.0 + a[0]));
  } catch (const std::invalid_argument&) {
    return 0.0;
  }
}

std::string monitor_summary(const MonitorReport& mon) {
  std::string out;
  for (const MonitorCheck* check :
       {&mon.convex_recursion, &mon.composite_recursion, &mon.average_consistency}) {
    if (!check->active) continue;
    if (!out.empty()) out += ", ";
    out += check->name;
    out += check->pass() ? ": ok" : ": " + std::to_string(check->violations) + " violations";
  }
  return out.empty() ? "none active" : out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log,
                                int case_filter) {
  validate_config(cfg);
  if (cfg.cases.empty()) throw std::invalid_argument("run_experiment: no cases");
  if (cfg.costs.empty()) throw std::invalid_argument("run_experiment: no cost weights");
  if (case_filter < 0 || case_filter > static_cast<int>(cfg.cases.size()))
    throw std::invalid_argument("run_experiment: case index out of range");

  const Problem prob = build_problem(cfg);
  const ConsensusMatrix W = build_graph(cfg);

  // Step-size admissibility, per case because the caps depend on t(0).
  std::vector<std::string> warnings;
  if (prob.composite) {
    const TheoryConstants tc = TheoryConstants::from(prob, W.beta);
    for (std::size_t i = 0; i < cfg.cases.size(); ++i) {
      const StepsizeCaps caps = stepsize_caps(tc, W.beta, cfg.cases[i].t(0));
      if (!caps.admissible_composite(cfg.mu)) {
        std::ostringstream os;
        os << "case " << i + 1 << " (" << to_string(cfg.cases[i]) << "): mu = "
           << format_double(cfg.mu) << " exceeds the composite cap "
           << format_double(caps.composite_cap) << "; trajectory bounds stay empty";
        warnings.push_back(os.str());
      }
    }
  } else {
    if (cfg.mu > 2.0 / prob.L)
      warnings.push_back("mu exceeds the monotone convex cap " + format_double(2.0 / prob.L));
    else if (cfg.mu > 1.0 / prob.L)
      warnings.push_back("mu exceeds the ergodic convex cap " + format_double(1.0 / prob.L) +
                         "; ergodic-rate claims are not checked");
  }
  for (const std::string& w : warnings) {
    if (cfg.strict_admissibility) throw std::invalid_argument("run_experiment: " + w);
    log << "warning: " << w << "\n";
  }

  std::filesystem::create_directories(cfg.out);

  auto run_case = [&](std::size_t i) {
    CaseResult result;
    result.index = i + 1;
    result.schedule = cfg.cases[i];
    RunOptions opt;
    opt.mu = cfg.mu;
    opt.steps = cfg.steps;
    opt.init_seed = cfg.seed;
    opt.metric = cfg.metric;
    result.run = run(prob, W, cfg.cases[i], opt);
    result.bounds_attached =
        attach_bounds(result.run.trajectory, prob, W.beta, cfg.cases[i], cfg.mu);
    result.fitted_rate = report_decay_rate(result.run.trajectory);
    for (std::size_t j = 0; j < cfg.costs.size(); ++j) {
      const std::vector<double> cost =
          cost_series(result.run.trajectory, cfg.costs[j].c_c, cfg.costs[j].c_g,
                      cfg.per_agent_costs ? cfg.n : 1);
      std::ostringstream name;
      name << "case" << result.index << "-" << schedule_slug(cfg.cases[i]) << "-cost" << j + 1
           << ".csv";
      const std::string path = (std::filesystem::path(cfg.out) / name.str()).string();
      write_trajectory_csv(path, result.run.trajectory, cost);
      result.files.push_back(path);
    }
    return result;
  };

  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < cfg.cases.size(); ++i)
    if (case_filter == 0 || static_cast<std::size_t>(case_filter) == i + 1) selected.push_back(i);

  std::vector<std::future<CaseResult>> futures;
  futures.reserve(selected.size());
  for (std::size_t i : selected)
    futures.push_back(std::async(std::launch::async, run_case, i));

  ExperimentResult res;
  for (auto& f : futures) res.cases.push_back(f.get());
  for (const CaseResult& c : res.cases) res.monitors_ok &= c.run.monitors.all_pass();

  std::ostringstream sum;
  sum << "problem: " << (prob.kind == ProblemKind::kRegression ? "regression" : "piecewise-quartic")
      << "  n=" << prob.n << "  p=" << prob.p;
  if (prob.kind == ProblemKind::kRegression) sum << "  s=" << prob.s;
  sum << "  seed=" << cfg.seed << "\n";
  sum << "graph: " << to_string(cfg.topology) << "  weights=" << to_string(cfg.weights)
      << "  beta=" << format_double(W.beta) << "\n";
  sum << "mu=" << format_double(cfg.mu) << "  steps=" << cfg.steps << "\n";
  if (prob.composite) {
    const CompositeStructure& cs = *prob.composite;
    sum << "composite: L=" << format_double(prob.L) << "  c_H=" << format_double(cs.c_hoffman)
        << "  C_H=" << format_double(cs.C_H) << "  D=" << format_double(cs.D)
        << "  rank=" << cs.rank << "/" << prob.p << "\n";
  }
  for (const std::string& w : warnings) sum << "warning: " << w << "\n";
  sum << "\n";
  sum << std::left << std::setw(6) << "case" << std::setw(18) << "schedule" << std::setw(14)
      << "final A" << std::setw(14) << "final B" << std::setw(14) << "final regret"
      << std::setw(12) << "rate" << "monitors\n";
  for (const CaseResult& c : res.cases) {
    const TrajectoryPoint* last = c.run.trajectory.empty() ? nullptr : &c.run.trajectory.back();
    std::ostringstream a, b, r;
    if (last) {
      a << std::scientific << std::setprecision(3) << last->A;
      b << std::scientific << std::setprecision(3) << last->B;
      r << std::scientific << std::setprecision(3) << last->regret;
    }
    std::ostringstream rate;
    rate << std::fixed << std::setprecision(5) << c.fitted_rate;
    sum << std::left << std::setw(6) << c.index << std::setw(18) << to_string(c.schedule)
        << std::setw(14) << a.str() << std::setw(14) << b.str() << std::setw(14) << r.str()
        << std::setw(12) << rate.str() << monitor_summary(c.run.monitors) << "\n";
  }
  sum << "\nfiles:\n";
  for (const CaseResult& c : res.cases)
    for (const std::string& f : c.files) sum << "  " << f << "\n";
  res.summary = sum.str();

  std::ofstream summary_file(std::filesystem::path(cfg.out) / "summary.txt");
  if (!summary_file) throw std::runtime_error("run_experiment: cannot write the summary");
  summary_file << res.summary;
  return res;
}

std::string inspect_report(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Problem prob = build_problem(cfg);
  const ConsensusMatrix W = build_graph(cfg);

  const MetricMode metric = cfg.metric.value_or(prob.composite ? MetricMode::kOptimalSet
                                                               : MetricMode::kMinimizer);
  const BlockMatrix init = initial_state(prob.n, prob.p, cfg.seed);
  const Vector xbar = init.colwise().mean().transpose();
  const Vector x_ref = metric == MetricMode::kMinimizer
                           ? *prob.minimizer
                           : prob.composite->x_hat;
  const double root_n = std::sqrt(static_cast<double>(prob.n));
  const double A0 = metric == MetricMode::kMinimizer
                        ? root_n * (xbar - x_ref).norm()
                        : root_n * (xbar - project_to_optimal(*prob.composite, xbar)).norm();
  const double B0 = (init - xbar.transpose().replicate(prob.n, 1)).norm();

  std::ostringstream os;
  os << "graph: n=" << prob.n << " " << to_string(cfg.topology)
     << " weights=" << to_string(cfg.weights) << "\n";
  os << "beta = " << format_double(W.beta) << "\n";
  os << "L = " << format_double(prob.L) << "\n";
  os << "mu = " << format_double(cfg.mu) << "\n";
  os << "A_0 = " << format_double(A0) << "  B_0 = " << format_double(B0) << "\n";
  os << "convex caps: monotone 2/L = " << format_double(2.0 / prob.L)
     << ", ergodic 1/L = " << format_double(1.0 / prob.L) << "\n";
  if (!prob.composite) {
    os << "no composite structure; contraction constants unavailable\n";
    return os.str();
  }

  const TheoryConstants tc = TheoryConstants::from(prob, W.beta);
  const CompositeStructure& cs = *prob.composite;
  os << "alpha = " << format_double(tc.alpha) << "  smoothness of the outer cost = "
     << format_double(tc.L_g) << "\n";
  os << "c_H = " << format_double(tc.c_H) << "  C_H = " << format_double(tc.C_H) << "\n";
  os << "C_2 = " << format_double(tc.C2) << "  D = " << format_double(tc.D) << "\n";
  os << "rank = " << cs.rank << "/" << prob.p
     << (cs.rank_deficient() ? "  (deficient: optimal set is affine)" : "  (full rank)") << "\n";
  os << "coercivity cap = " << format_double(2.0 * tc.C_H / (tc.L_g + tc.alpha)) << "\n";
  for (std::size_t i = 0; i < cfg.cases.size(); ++i) {
    const int J = cfg.cases[i].t(0);
    const StepsizeCaps caps = stepsize_caps(tc, W.beta, J);
    os << "case " << i + 1 << " (" << to_string(cfg.cases[i]) << "): J=" << J
       << "  schedule cap = " << format_double(caps.schedule_cap)
       << "  composite cap = " << format_double(caps.composite_cap)
       << (caps.admissible_composite(cfg.mu) ? "  mu admissible" : "  mu NOT admissible");
    if (caps.admissible_composite(cfg.mu)) {
      try {
        const BoundInputs in = make_bound_inputs(A0, B0, cfg.mu, tc, J);
        os << "  gamma = " << format_double(in.gamma) << "  R = " << format_double(in.R);
      } catch (const std::invalid_argument& e) {
        os << "  (radius undefined: " << e.what() << ")";
      }
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace neardgd
