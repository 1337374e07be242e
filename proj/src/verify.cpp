#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "neardgd/csv.hpp"
#include "neardgd/experiment.hpp"
#include "neardgd/format.hpp"
#include "neardgd/rng.hpp"
#include "neardgd/theory.hpp"

namespace neardgd {

namespace {

struct CheckResult {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

ConsensusMatrix ring8() { return consensus_matrix(build_circulant(8, 3), WeightScheme::kLazyMetropolis); }

CheckResult check_mixing_assumptions(std::uint64_t) {
  CheckResult r;
  const ValidationReport ring = validate_assumptions(ring8().W);
  if (!ring.all_pass()) r.fail("circulant matrix failed an assumption");
  const ValidationReport full =
      validate_assumptions(consensus_matrix(build_complete(8), WeightScheme::kUniformNeighbor).W);
  if (!full.all_pass()) r.fail("complete-graph matrix failed an assumption");
  r.detail = "ring beta = " + format_double(ring.beta);
  return r;
}

CheckResult check_consensus_contraction(std::uint64_t seed) {
  CheckResult r;
  Rng rng = Rng::stream(seed, "contraction");
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(15));
    Topology g;
    if (n >= 4 && rng.below(2) == 0)
      g = build_circulant(n, 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>((n - 1) / 2))));
    else
      g = build_complete(n);
    const WeightScheme scheme =
        rng.below(2) == 0 ? WeightScheme::kLazyMetropolis : WeightScheme::kUniformNeighbor;
    const ConsensusMatrix W = consensus_matrix(g, scheme);
    const int p = 1 + static_cast<int>(rng.below(5));
    const BlockMatrix x = rng.matrix(n, p, -2.0, 2.0);
    const BlockMatrix xbar = block_average(x);
    const int t = static_cast<int>(rng.below(5));
    const double lhs = (apply_consensus(W, x, t) - xbar).norm();
    const double rhs = std::pow(W.beta, t) * (x - xbar).norm() + 1e-9;
    if (lhs > rhs) ++failures;
  }
  if (failures > 0) r.fail(std::to_string(failures) + " of 100 contractions violated");
  return r;
}

CheckResult check_spectral_fixtures(std::uint64_t) {
  CheckResult r;
  for (int n : {2, 5, 8}) {
    const double beta =
        consensus_matrix(build_complete(n), WeightScheme::kUniformNeighbor).beta;
    if (beta > 1e-12) r.fail("complete graph n=" + std::to_string(n) + " has beta > 0");
  }
  Matrix two(2, 2);
  two << 0.75, 0.25, 0.25, 0.75;
  if (std::abs(spectral_gap(two).beta - 0.5) > 1e-12) r.fail("two-node fixture beta != 0.5");
  const double ring_beta = ring8().beta;
  if (!(ring_beta > 0.0 && ring_beta < 1.0)) r.fail("ring beta outside (0,1)");
  std::string note = "ring beta = " + format_double(ring_beta) +
                     " (reported value 0.577 kept as a reference; its weight rule is unstated)";
  r.detail = r.detail.empty() ? note : r.detail + "; " + note;
  return r;
}

CheckResult check_gradient_oracles(std::uint64_t seed) {
  CheckResult r;
  Rng rng = Rng::stream(seed, "gradients");
  const Problem reg = make_regression(6, 3, 2, seed ^ 0x9e37);
  const Problem quartic = make_piecewise_quartic(5, seed ^ 0x79b9);
  const double h = 1e-6;
  for (int trial = 0; trial < 25; ++trial) {
    for (const Problem* prob : {&reg, &quartic}) {
      const Vector x = rng.vector(prob->p, -2.0, 2.0);
      const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(prob->n)));
      const Vector g = prob->local_grad(i, x);
      for (Index d = 0; d < prob->p; ++d) {
        Vector e = Vector::Zero(prob->p);
        e[d] = h;
        const double fd = (prob->local_value(i, x + e) - prob->local_value(i, x - e)) / (2 * h);
        if (std::abs(fd - g[d]) > 1e-5 * (1.0 + std::abs(g[d]))) {
          r.fail("finite differences disagree with a local gradient");
          return r;
        }
      }
    }
    // aggregate gradient of the regression matches the composite form
    const Vector x = rng.vector(reg.p, -2.0, 2.0);
    const CompositeStructure& cs = *reg.composite;
    const Vector composite_grad = 2.0 * cs.H.transpose() * (cs.H * x - cs.y);
    if ((reg.grad(x) - composite_grad).norm() > 1e-12 * (1.0 + composite_grad.norm())) {
      r.fail("aggregate gradient disagrees with the composite form");
      return r;
    }
  }
  return r;
}

CheckResult check_strong_coercivity(std::uint64_t seed) {
  CheckResult r;
  Rng rng = Rng::stream(seed, "strong-coercivity");
  const int p = 6;
  long violations = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const double alpha = 0.5 + rng.uniform(0.0, 1.5);
    const double L = alpha + 0.5 + rng.uniform(0.0, 3.0);
    Vector eigs(p);
    eigs[0] = alpha;
    eigs[p - 1] = L;
    for (int i = 1; i < p - 1; ++i) eigs[i] = rng.uniform(alpha, L);
    const Matrix raw = rng.matrix(p, p, -1.0, 1.0);
    const Matrix V = Eigen::HouseholderQR<Matrix>(raw).householderQ();
    const Matrix Q = V * eigs.asDiagonal() * V.transpose();
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector x = rng.vector(p, -3.0, 3.0);
      const Vector y = rng.vector(p, -3.0, 3.0);
      if (strong_coercivity_slack(alpha, L, x, y, Q * x, Q * y) < -1e-9) ++violations;
    }
  }
  // equality instance: squared norm, both constants equal 2
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector x = rng.vector(p, -3.0, 3.0);
    const Vector y = rng.vector(p, -3.0, 3.0);
    worst = std::max(worst,
                     std::abs(strong_coercivity_slack(2.0, 2.0, x, y, 2.0 * x, 2.0 * y)));
  }
  if (violations > 0) r.fail(std::to_string(violations) + " negative slacks");
  if (worst > 1e-10) r.fail("equality case drifted to " + format_double(worst));
  return r;
}

CheckResult check_composite_coercivity(std::uint64_t seed) {
  CheckResult r;
  Rng rng = Rng::stream(seed, "composite-coercivity");
  long violations = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const int p = 4 + static_cast<int>(rng.below(6));
    const int n = 2 + static_cast<int>(rng.below(4));
    const bool deficient = rng.below(2) == 0;
    const int s = deficient ? 1 : (p + n - 1) / n + 1;
    const Problem prob = make_regression(p, n, s, seed + 31 * inst + 7);
    const CompositeStructure& cs = *prob.composite;
    const double span = 3.0 * (1.0 + cs.x_hat.norm());
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector x = rng.vector(p, -span, span);
      if (coercivity_slack(prob, cs, x) < -1e-9) ++violations;
    }
  }
  if (violations > 0) r.fail(std::to_string(violations) + " negative slacks");
  return r;
}

CheckResult check_hoffman_sandwich(std::uint64_t seed) {
  CheckResult r;
  if (std::abs(hoffman_constant(Matrix::Identity(5, 5)) - 1.0) > 1e-12)
    r.fail("identity constant != 1");
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 2.0;
  if (std::abs(hoffman_constant(diag) - 4.0) > 1e-12) r.fail("singular diagonal constant != 4");

  Rng rng = Rng::stream(seed, "hoffman");
  for (int inst = 0; inst < 6; ++inst) {
    const int p = 5 + static_cast<int>(rng.below(5));
    const int n = 2 + static_cast<int>(rng.below(3));
    const int s = inst % 2 == 0 ? 1 : (p + n) / n;
    const Problem prob = make_regression(p, n, s, seed + 11 * inst + 3);
    const CompositeStructure& cs = *prob.composite;
    const double smax2 = cs.sigma_max * cs.sigma_max;

    Eigen::JacobiSVD<Matrix> svd(cs.H, Eigen::ComputeFullV);
    const Vector v_min = svd.matrixV().col(cs.rank - 1);

    double min_ratio = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial <= 1000; ++trial) {
      Vector z = rng.vector(p, -2.0, 2.0);
      if (trial == 0) z = cs.x_hat + v_min;  // hits the smallest nonzero direction
      const Vector d = z - project_to_optimal(cs, z);
      const double dn = d.squaredNorm();
      if (dn < 1e-20) continue;
      const double ratio = (cs.H * d).squaredNorm() / dn;
      min_ratio = std::min(min_ratio, ratio);
      if (ratio < cs.c_hoffman - 1e-9 * smax2 || ratio > smax2 + 1e-9 * smax2) {
        r.fail("sandwich violated on instance " + std::to_string(inst));
        return r;
      }
    }
    if (min_ratio > 1.05 * cs.c_hoffman)
      r.fail("sampled minimum missed the smallest curvature on instance " + std::to_string(inst));
  }
  return r;
}

CheckResult check_projection(std::uint64_t seed) {
  CheckResult r;
  Rng rng = Rng::stream(seed, "projection");
  const Problem prob = make_regression(10, 3, 1, seed ^ 0x51f3);  // wide kernel
  const CompositeStructure& cs = *prob.composite;
  for (int trial = 0; trial < 200; ++trial) {
    const Vector z = rng.vector(prob.p, -4.0, 4.0);
    const Vector pz = project_to_optimal(cs, z);
    const double f_at_proj = (cs.H * pz - cs.y).squaredNorm();
    if (std::abs(f_at_proj - prob.f_star) > 1e-10 * (1.0 + prob.f_star))
      r.fail("projection left the optimal set");
    if ((project_to_optimal(cs, pz) - pz).norm() > 1e-10) r.fail("projection not idempotent");
    const Vector d = z - pz;
    if (cs.kernel_basis.cols() > 0 &&
        (cs.kernel_basis.transpose() * d).norm() > 1e-9 * (1.0 + d.norm()))
      r.fail("offset not orthogonal to the flat directions");
    if (!r.pass) return r;
  }
  return r;
}

CheckResult check_product_bound(std::uint64_t seed) {
  CheckResult r;
  Rng rng = Rng::stream(seed, "product");
  int failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const double rfac = 0.1 + rng.uniform(0.0, 2.9);
    const double rho = rng.uniform(0.5, 0.95);
    std::vector<double> alpha(50);
    double scale = rng.uniform(0.0, 1.0);
    for (std::size_t k = 0; k < alpha.size(); ++k)
      alpha[k] = scale * std::pow(rho, static_cast<double>(k));
    if (!product_bound_check(rfac, alpha, 0, alpha.size() - 1).pass()) ++failures;
  }
  if (failures > 0) r.fail(std::to_string(failures) + " of 50 products exceeded the bound");
  return r;
}

CheckResult check_trajectory_bounds(std::uint64_t seed) {
  CheckResult r;
  const Problem prob = make_regression(12, 4, 1, seed ^ 0xabcd);
  const ConsensusMatrix W = consensus_matrix(build_circulant(4, 1), WeightScheme::kLazyMetropolis);
  const TheoryConstants tc = TheoryConstants::from(prob, W.beta);
  const int J = 2;
  const StepsizeCaps caps = stepsize_caps(tc, W.beta, J);
  const double mu = 0.9 * caps.composite_cap;
  const BoundInputs in = make_bound_inputs(1.0, 1.0, mu, tc, J);

  // The closed form must dominate the exactly-iterated two-term recursion it
  // was derived from.
  const double bJ = std::pow(W.beta, J);
  double A = in.A0, B = in.B0;
  for (long k = 0; k <= 300; ++k) {
    const BoundPair bound = bound_fixed_schedule(in, k);
    if (A > bound.A + 1e-12 * (1.0 + bound.A) || B > bound.B + 1e-12 * (1.0 + bound.B)) {
      r.fail("closed form fell below the recursion at k=" + std::to_string(k));
      return r;
    }
    const double A_next = in.q * A + mu * tc.L * B;
    const double B_next = bJ * (mu * tc.L * A + (1.0 + mu * tc.L) * B) + mu * tc.D * bJ;
    A = A_next;
    B = B_next;
  }

  // Large-k limit collapses onto the floor term; the all-zero instance
  // collapses to zero outright.
  const double floor_term = mu * tc.L * bJ / (1.0 - bJ) *
                            (mu * (2.0 * tc.L * in.R + tc.D) / (1.0 - in.q) + in.B0);
  if (std::abs(bound_fixed_schedule(in, 2000000).A - floor_term) > 1e-12 * (1.0 + floor_term))
    r.fail("large-k value missed the floor term");
  TheoryConstants quiet = tc;
  quiet.D = 0.0;
  const BoundInputs zero = make_bound_inputs(0.0, 0.0, mu, quiet, J);
  const BoundPair at_zero = bound_fixed_schedule(zero, 50);
  if (at_zero.A != 0.0 || at_zero.B != 0.0) r.fail("all-zero instance gave a nonzero bound");

  // Nondecreasing form against a direct per-term summation on the identity
  // schedule.
  const Schedule ident = Schedule::identity();
  const BoundInputs in1 = make_bound_inputs(1.0, 1.0, 0.9 * stepsize_caps(tc, W.beta, 1).composite_cap,
                                            tc, 1);
  NondecreasingBound nd(in1, ident);
  for (long m : {3L, 7L, 20L, 51L}) {
    const long k = m - 1;
    const long half = k / 2;
    const double drive1 = in1.mu * (2.0 * in1.L * in1.R + in1.D);
    double sum_bt = 0.0, sum_bj = 0.0;
    for (long l = 0; l < half; ++l) {
      sum_bt += std::pow(in1.beta, ident.t(l));
      sum_bj += std::pow(in1.beta, static_cast<double>(l + 1) * in1.J);
    }
    const double muL = in1.mu * in1.L;
    const double direct =
        std::pow(in1.q, static_cast<double>(k)) * (in1.A0 + muL * in1.B0) +
        muL / (1.0 - in1.q) *
            (drive1 * std::pow(in1.beta, ident.t(half)) +
             in1.B0 * std::pow(in1.beta, static_cast<double>(half + 1) * in1.J)) +
        muL * std::pow(in1.q, static_cast<double>(half)) * (drive1 * sum_bt + in1.B0 * sum_bj);
    if (std::abs(nd.A(m) - direct) > 1e-12 * (1.0 + direct))
      r.fail("nondecreasing form disagrees with direct summation at m=" + std::to_string(m));
  }
  return r;
}

CheckResult check_single_agent(std::uint64_t seed) {
  CheckResult r;
  const Problem prob = make_regression(4, 1, 3, seed ^ 0x1111);
  const ConsensusMatrix W = consensus_matrix(build_complete(1), WeightScheme::kLazyMetropolis);
  const Schedule sched = Schedule::identity();
  const double mu = 0.4 / prob.L;
  StackedState state;
  state.x = initial_state(1, 4, seed);
  Vector gd = state.x.row(0).transpose();
  for (int k = 0; k < 500; ++k) {
    state = near_dgd_step(state, W, sched, mu, prob);
    gd = gd - mu * prob.grad(gd);
    if ((state.x.row(0).transpose() - gd).norm() > 1e-12 * (1.0 + gd.norm())) {
      r.fail("single-agent path diverged from plain descent at k=" + std::to_string(k));
      return r;
    }
  }
  return r;
}

CheckResult check_determinism(std::uint64_t seed) {
  CheckResult r;
  const Problem prob = make_regression(5, 4, 2, seed ^ 0x7777);
  const ConsensusMatrix W = consensus_matrix(build_complete(4), WeightScheme::kUniformNeighbor);
  RunOptions opt;
  opt.mu = 0.3 / prob.L;
  opt.steps = 40;
  opt.init_seed = seed;
  std::string first;
  for (int rep = 0; rep < 2; ++rep) {
    const RunResult res = run(prob, W, Schedule::log_floor(1.0), opt);
    std::ostringstream os;
    write_trajectory_csv(os, res.trajectory, cost_series(res.trajectory, 0.2, 1.0));
    if (rep == 0)
      first = os.str();
    else if (first != os.str())
      r.fail("identical runs produced different CSV bytes");
  }
  return r;
}

}  // namespace

bool run_verify(std::uint64_t seed, std::ostream& os) {
  const std::vector<std::pair<std::string, std::function<CheckResult(std::uint64_t)>>> checks = {
      {"mixing-assumptions", check_mixing_assumptions},
      {"consensus-contraction", check_consensus_contraction},
      {"spectral-fixtures", check_spectral_fixtures},
      {"gradient-oracles", check_gradient_oracles},
      {"strong-coercivity", check_strong_coercivity},
      {"composite-coercivity", check_composite_coercivity},
      {"hoffman-sandwich", check_hoffman_sandwich},
      {"projection-optimality", check_projection},
      {"product-bound", check_product_bound},
      {"trajectory-bounds", check_trajectory_bounds},
      {"single-agent-reduction", check_single_agent},
      {"determinism", check_determinism},
  };

  bool all = true;
  for (const auto& [name, fn] : checks) {
    CheckResult result;
    try {
      result = fn(seed);
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    all &= result.pass;
    os << (result.pass ? "[PASS] " : "[FAIL] ") << std::left << std::setw(26) << name;
    if (!result.detail.empty()) os << " " << result.detail;
    os << "\n";
  }
  os << (all ? "all checks passed\n" : "some checks FAILED\n");
  return all;
}

}  // namespace neardgd
