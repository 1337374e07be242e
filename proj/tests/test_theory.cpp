#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <doctest.h>
#include <vector>

#include "neardgd/consensus.hpp"
#include "neardgd/problem.hpp"
#include "neardgd/rng.hpp"
#include "neardgd/theory.hpp"

using namespace neardgd;

namespace {

// identity-design reference point: alpha = L_g = 2, c_H = C_H = 1, so C2 = 2
TheoryConstants identity_constants(double beta) {
  TheoryConstants tc;
  tc.alpha = 2.0;
  tc.L_g = 2.0;
  tc.c_H = 1.0;
  tc.C_H = 1.0;
  tc.C2 = 2.0;
  tc.L = 2.0;
  tc.D = 1.0;
  tc.beta = beta;
  return tc;
}

// the two-variable worst-case recursion the closed forms are built from
struct RecursionState {
  double A;
  double B;
};

RecursionState step_recursion(const RecursionState& s, const BoundInputs& in, double bt) {
  const double muL = in.mu * in.L;
  return {in.q * s.A + muL * s.B, bt * (muL * s.A + (1.0 + muL) * s.B) + in.mu * in.D * bt};
}

}  // namespace

TEST_CASE("theory constants from a problem") {
  const Problem prob = make_regression(6, 3, 1, 7);
  const TheoryConstants tc = TheoryConstants::from(prob, 0.25);
  CHECK(tc.alpha == prob.composite->alpha);
  CHECK(tc.L_g == prob.composite->L_g);
  CHECK(tc.c_H == prob.composite->c_hoffman);
  CHECK(tc.C_H == prob.composite->C_H);
  CHECK(tc.L == prob.L);
  CHECK(tc.D == prob.composite->D);
  CHECK(tc.beta == 0.25);
  CHECK(tc.C2 == doctest::Approx(2.0 * tc.L_g * tc.alpha * tc.c_H / (tc.L_g + tc.alpha))
                     .epsilon(1e-14));

  CHECK_THROWS_AS(TheoryConstants::from(make_piecewise_quartic(4, 7), 0.25),
                  std::invalid_argument);
}

TEST_CASE("step size caps at the identity design") {
  const TheoryConstants tc = identity_constants(0.5);
  const StepsizeCaps caps = stepsize_caps(tc, 0.5, 1);
  CHECK(caps.coercivity_cap == doctest::Approx(0.5).epsilon(1e-14));
  // schedule cap [C2/(C2 + L(1+sqrt 2))] (1-beta)/(L beta) = (2 - sqrt 2)/2 * 1/2
  const double expected = (1.0 - std::sqrt(2.0) / 2.0) * 0.5;
  CHECK(caps.schedule_cap == doctest::Approx(expected).epsilon(1e-12));
  CHECK(caps.schedule_cap_defined);
  CHECK(caps.composite_cap == doctest::Approx(expected).epsilon(1e-12));
  CHECK(caps.convex_monotone_cap == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(caps.convex_ergodic_cap == doctest::Approx(0.5).epsilon(1e-14));

  CHECK(caps.admissible_composite(expected * 0.99));
  CHECK_FALSE(caps.admissible_composite(expected * 1.01));
  CHECK_FALSE(caps.admissible_composite(0.0));

  // doubling J relaxes the schedule cap: (1-b^2)/(L b^2) grows as b^J shrinks
  const StepsizeCaps caps2 = stepsize_caps(tc, 0.5, 2);
  CHECK(caps2.schedule_cap > caps.schedule_cap);
  CHECK(caps2.schedule_cap ==
        doctest::Approx((1.0 - std::sqrt(2.0) / 2.0) * (0.75 / 0.5)).epsilon(1e-12));
}

TEST_CASE("step size caps at the spectral extremes") {
  const TheoryConstants tc0 = identity_constants(0.0);
  const StepsizeCaps caps0 = stepsize_caps(tc0, 0.0, 3);
  CHECK(caps0.schedule_cap_defined);
  CHECK(caps0.schedule_cap == std::numeric_limits<double>::infinity());
  CHECK(caps0.composite_cap == doctest::Approx(caps0.coercivity_cap).epsilon(1e-14));

  const StepsizeCaps caps1 = stepsize_caps(identity_constants(1.0), 1.0, 2);
  CHECK_FALSE(caps1.schedule_cap_defined);
  CHECK_FALSE(caps1.admissible_composite(1e-6));
}

TEST_CASE("bound inputs at a hand-checked point") {
  const TheoryConstants tc = identity_constants(0.5);
  const BoundInputs in = make_bound_inputs(1.0, 1.0, 0.1, tc, 1);
  CHECK(in.q == doctest::Approx(std::sqrt(0.8)).epsilon(1e-15));
  CHECK(in.gamma == doctest::Approx((1.0 - std::sqrt(0.8)) / 0.2).epsilon(1e-14));
  // 1/gamma = L (1 + q) / C2, so B0/gamma = 1 + q here
  CHECK(in.R == doctest::Approx(1.0 + std::sqrt(0.8)).epsilon(1e-13));
  CHECK(in.J == 1);
  CHECK(in.beta == 0.5);
}

TEST_CASE("bound inputs validation") {
  const TheoryConstants tc = identity_constants(0.5);
  CHECK_THROWS_AS(make_bound_inputs(1.0, 1.0, 0.1, tc, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_bound_inputs(1.0, 1.0, 0.0, tc, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_bound_inputs(-1.0, 1.0, 0.1, tc, 1), std::invalid_argument);
  // above the coercivity cap 0.5
  CHECK_THROWS_AS(make_bound_inputs(1.0, 1.0, 0.6, tc, 1), std::invalid_argument);

  // beta close to 1 makes the radius denominator negative at this step size
  const TheoryConstants tight = identity_constants(0.9);
  CHECK_THROWS_AS(make_bound_inputs(1.0, 1.0, 0.1, tight, 1), std::invalid_argument);

  // the boundary mu = coercivity cap gives q = 0 and is accepted when the
  // graph mixes fast enough
  const TheoryConstants fast = identity_constants(0.01);
  const BoundInputs edge = make_bound_inputs(1.0, 1.0, 0.5, fast, 1);
  CHECK(edge.q == 0.0);
  CHECK(edge.gamma == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("the schedule cap keeps the radius denominator positive") {
  // sufficiency of the cap, checked on a grid of spectra and round counts
  for (double beta : {0.1, 0.3, 0.5, 0.7}) {
    for (int J : {1, 2, 4}) {
      const TheoryConstants tc = identity_constants(beta);
      const StepsizeCaps caps = stepsize_caps(tc, beta, J);
      const double mu = std::min(caps.composite_cap, caps.coercivity_cap);
      const BoundInputs in = make_bound_inputs(1.0, 2.0, mu, tc, J);
      const double bJ = std::pow(beta, J);
      CHECK(in.gamma - (mu * tc.L + in.gamma * (1.0 + mu * tc.L)) * bJ > 0.0);
      // both published spellings of the denominator agree
      CHECK(in.gamma - (mu * tc.L + in.gamma * (1.0 + mu * tc.L)) * bJ ==
            doctest::Approx(in.gamma - (in.gamma + (1.0 + in.gamma) * mu * tc.L) * bJ)
                .epsilon(1e-13));
    }
  }
}

TEST_CASE("fixed-schedule bound values") {
  const TheoryConstants tc = identity_constants(0.5);
  const BoundInputs in = make_bound_inputs(1.0, 1.0, 0.1, tc, 1);
  const double muL = 0.2;
  const double bJ = 0.5;

  // k = 0 returns the initial metrics themselves
  const BoundPair at0 = bound_fixed_schedule(in, 0);
  CHECK(at0.A == 1.0);
  CHECK(at0.B == doctest::Approx(1.0 * 1.0 + in.mu * bJ * (2 * tc.L * in.R + tc.D) / (1 - bJ))
                     .epsilon(1e-13));

  // k = 1 spelled out by hand
  const double floor_term = muL * bJ / (1 - bJ) * (in.mu * (2 * tc.L * in.R + tc.D) / (1 - in.q) + 1.0);
  const BoundPair at1 = bound_fixed_schedule(in, 1);
  CHECK(at1.A == doctest::Approx((1.0 + muL) + floor_term).epsilon(1e-13));

  const BoundPair at5 = bound_fixed_schedule(in, 5);
  CHECK(at5.A == doctest::Approx(std::pow(in.q, 4) * (1.0 + muL) + floor_term).epsilon(1e-13));
  CHECK(at5.B == doctest::Approx(std::pow(bJ, 5) + in.mu * bJ * (2 * tc.L * in.R + tc.D) / (1 - bJ))
                     .epsilon(1e-13));

  // far out the geometric part dies and only the floor survives
  const BoundPair far = bound_fixed_schedule(in, 4000000);
  CHECK(far.A == doctest::Approx(floor_term).epsilon(1e-12));
  CHECK(far.B == doctest::Approx(in.mu * bJ * (2 * tc.L * in.R + tc.D) / (1 - bJ)).epsilon(1e-12));

  CHECK_THROWS_AS(bound_fixed_schedule(in, -1), std::invalid_argument);
}

TEST_CASE("perfect mixing collapses the fixed bound to the geometric term") {
  const TheoryConstants tc = identity_constants(0.0);
  const BoundInputs in = make_bound_inputs(2.0, 3.0, 0.25, tc, 2);
  for (long k = 1; k <= 6; ++k) {
    const BoundPair b = bound_fixed_schedule(in, k);
    CHECK(b.A == doctest::Approx(std::pow(in.q, k - 1) * (2.0 + 0.5 * 3.0)).epsilon(1e-14));
    CHECK(b.B == 0.0);
  }
}

TEST_CASE("zero at the optimum stays zero") {
  TheoryConstants tc = identity_constants(0.25);
  tc.D = 0.0;
  const BoundInputs in = make_bound_inputs(0.0, 0.0, 0.2, tc, 1);
  CHECK(in.R == 0.0);
  for (long k : {0L, 1L, 7L}) {
    const BoundPair b = bound_fixed_schedule(in, k);
    CHECK(b.A == 0.0);
    CHECK(b.B == 0.0);
  }
}

TEST_CASE("fixed bound dominates the worst-case recursion") {
  for (double beta : {0.2, 0.5}) {
    for (int J : {1, 2}) {
      const TheoryConstants tc = identity_constants(beta);
      const double mu = 0.9 * stepsize_caps(tc, beta, J).composite_cap;
      const BoundInputs in = make_bound_inputs(1.0, 1.0, mu, tc, J);
      RecursionState s{1.0, 1.0};
      const double bJ = std::pow(beta, J);
      for (long k = 0; k <= 200; ++k) {
        const BoundPair bound = bound_fixed_schedule(in, k);
        CHECK(s.A <= bound.A * (1 + 1e-12) + 1e-15);
        CHECK(s.B <= bound.B * (1 + 1e-12) + 1e-15);
        s = step_recursion(s, in, bJ);
      }
    }
  }
}

TEST_CASE("nondecreasing bound rejects a mismatched first round count") {
  const TheoryConstants tc = identity_constants(0.5);
  const BoundInputs in = make_bound_inputs(1.0, 1.0, 0.05, tc, 2);  // J = 2
  CHECK_THROWS_AS(NondecreasingBound(in, Schedule::identity()), std::invalid_argument);
  CHECK_NOTHROW(NondecreasingBound(in, Schedule::constant(2)));
}

TEST_CASE("nondecreasing bound matches direct summation") {
  const TheoryConstants tc = identity_constants(0.4);
  const BoundInputs in = make_bound_inputs(1.5, 0.8, 0.05, tc, 1);
  const Schedule sched = Schedule::identity();
  NondecreasingBound bound(in, sched);

  const double muL = in.mu * in.L;
  const double drive = in.mu * (2 * tc.L * in.R + tc.D);
  for (long m : {3L, 7L, 20L, 51L}) {
    const long k = m - 1;
    const long half = k / 2;
    double sum_bt = 0.0, sum_bj = 0.0;
    for (long l = 0; l < half; ++l) {
      sum_bt += std::pow(in.beta, sched.t(l));
      sum_bj += std::pow(in.beta, (l + 1) * in.J);
    }
    const double direct =
        std::pow(in.q, k) * (in.A0 + muL * in.B0) +
        muL / (1 - in.q) *
            (drive * std::pow(in.beta, sched.t(half)) + in.B0 * std::pow(in.beta, (half + 1) * in.J)) +
        muL * std::pow(in.q, half) * (drive * sum_bt + in.B0 * sum_bj);
    CHECK(bound.A(m) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(bound.B(m) ==
          doctest::Approx(std::pow(in.beta, m * in.J) * in.B0 + drive * std::pow(in.beta, sched.t(m - 1)))
              .epsilon(1e-12));
  }
  CHECK_THROWS_AS(bound.A(2), std::invalid_argument);
  CHECK_NOTHROW(bound.B(1));
}

TEST_CASE("nondecreasing bound dominates the recursion it summarizes") {
  const TheoryConstants tc = identity_constants(0.3);
  for (const Schedule& sched :
       {Schedule::identity(), Schedule::log_floor(1.0), Schedule::constant(1)}) {
    const double mu = 0.9 * stepsize_caps(tc, 0.3, 1).composite_cap;
    const BoundInputs in = make_bound_inputs(1.0, 1.0, mu, tc, 1);
    NondecreasingBound bound(in, sched);
    RecursionState s{1.0, 1.0};
    std::vector<RecursionState> states{s};
    for (long k = 0; k < 120; ++k) {
      s = step_recursion(s, in, std::pow(in.beta, sched.t(k)));
      states.push_back(s);
    }
    for (long m = 3; m <= 120; ++m) {
      CHECK(states[static_cast<size_t>(m)].A <= bound.A(m) * (1 + 1e-12) + 1e-15);
    }
  }
}

TEST_CASE("two-term decay envelope") {
  // constant rounds: the schedule term is beta^J for every horizon
  const Main2Envelope c = main2_envelope(Schedule::constant(3), 0.5, 2.0, 0.1, 10);
  CHECK(c.schedule_term == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(c.geometric_term == doctest::Approx(std::pow(0.8, 5.0)).epsilon(1e-14));

  // growing rounds push the schedule term down with the horizon
  const Main2Envelope e10 = main2_envelope(Schedule::identity(), 0.5, 2.0, 0.1, 10);
  const Main2Envelope e20 = main2_envelope(Schedule::identity(), 0.5, 2.0, 0.1, 20);
  // t(j0) with j0 = (T+1)/2: T=10 -> j0=5, t=6; T=20 -> j0=10, t=11
  CHECK(e10.schedule_term == doctest::Approx(std::pow(0.5, 6)).epsilon(1e-14));
  CHECK(e20.schedule_term == doctest::Approx(std::pow(0.5, 11)).epsilon(1e-14));
  CHECK(e20.value() < e10.value());

  CHECK_THROWS_AS(main2_envelope(Schedule::identity(), 0.5, 2.0, 0.1, 0), std::invalid_argument);
}

TEST_CASE("envelope constant fitting") {
  const Schedule sched = Schedule::constant(2);
  const double beta = 0.5, C2 = 2.0, mu = 0.1;
  std::vector<double> A(31), B(31, 0.0);
  for (long T = 0; T + 1 <= 30; ++T)
    A[static_cast<size_t>(T + 1)] = 2.0 * main2_envelope(sched, beta, C2, mu, std::max(T, 1L)).value();
  const double C = fit_envelope_constant(A, B, sched, beta, C2, mu, 1, 29);
  CHECK(C == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(fit_envelope_constant(A, B, sched, beta, C2, mu, 1, 30), std::invalid_argument);
  CHECK_THROWS_AS(fit_envelope_constant(A, std::vector<double>(3), sched, beta, C2, mu, 1, 2),
                  std::invalid_argument);
}

TEST_CASE("weighted norms") {
  CHECK(weighted_norm(3.0, -2.0, 0.5) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(weighted_norm(-1.0, 0.0, 7.0) == 1.0);

  Eigen::Matrix2d M;
  M << 1.0, 0.5, 0.25, -0.75;
  const double c = 2.0;
  const double norm = weighted_operator_norm(M, c);
  CHECK(norm == doctest::Approx(std::max(1.0 + 2.0 * 0.25, (0.5 + 2.0 * 0.75) / 2.0)).epsilon(1e-14));

  // no sampled point of the unit sphere maps outside the reported norm
  Rng rng = Rng::stream(3, "opnorm");
  double best = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    double x = rng.uniform(-1.0, 1.0);
    double y = rng.uniform(-1.0, 1.0);
    const double scale = weighted_norm(x, y, c);
    if (scale < 1e-12) continue;
    x /= scale;
    y /= scale;
    const double image = weighted_norm(M(0, 0) * x + M(0, 1) * y, M(1, 0) * x + M(1, 1) * y, c);
    CHECK(image <= norm + 1e-12);
    best = std::max(best, image);
  }
  CHECK(best == doctest::Approx(norm).epsilon(1e-2));

  CHECK_THROWS_AS(weighted_operator_norm(M, 0.0), std::invalid_argument);
}

TEST_CASE("matrix product norm bound") {
  // all-zero factors leave a projection of weighted norm exactly one
  const ProductBoundCheck zero = product_bound_check(2.0, std::vector<double>(5, 0.0), 0, 4);
  CHECK(zero.product_norm == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(zero.bound == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(zero.pass());

  // single factor: norm 1 + c alpha against exp(c alpha)
  const ProductBoundCheck one = product_bound_check(1.0, {0.5}, 0, 0);
  CHECK(one.c == 1.0);
  CHECK(one.product_norm == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(one.bound == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
  CHECK(one.pass());

  // random sequences with summable factors
  Rng rng = Rng::stream(9, "products");
  for (int trial = 0; trial < 50; ++trial) {
    const double r = rng.uniform(0.1, 3.0);
    const double rho = rng.uniform(0.3, 0.95);
    const double scale = rng.uniform(0.1, 2.0);
    std::vector<double> alpha(50);
    for (size_t k = 0; k < alpha.size(); ++k) alpha[k] = scale * std::pow(rho, k);
    const ProductBoundCheck chk = product_bound_check(r, alpha, 0, alpha.size() - 1);
    CHECK(chk.pass());
    // subranges hold as well
    const ProductBoundCheck sub = product_bound_check(r, alpha, 10, 30);
    CHECK(sub.pass());
  }
  CHECK_THROWS_AS(product_bound_check(0.0, {0.1}, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(product_bound_check(1.0, {0.1}, 0, 5), std::invalid_argument);
  CHECK_THROWS_AS(product_bound_check(1.0, {-0.1}, 0, 0), std::invalid_argument);
}

TEST_CASE("convex recursion envelope") {
  // perfect mixing: consensus error dies after one step and the averaged
  // distance settles at exactly A0 + muL B0
  const ConvexEnvelope perfect = convex_envelope(1.0, 2.0, 0.1, 3.0, 1.0, 0.0, Schedule::constant(1), 50);
  CHECK(perfect.sup_A == doctest::Approx(1.0 + 0.3 * 2.0).epsilon(1e-14));
  CHECK(perfect.sup_norm >= perfect.sup_A);
  CHECK(perfect.product_bound >= perfect.sup_norm * (1 - 1e-12));

  // geometric consensus decay keeps every norm below the closed-form bound
  for (const Schedule& sched : {Schedule::constant(2), Schedule::identity(), Schedule::log_floor(1.0)}) {
    const ConvexEnvelope env = convex_envelope(0.5, 1.0, 0.2, 3.0, 0.7, 0.4, sched, 400);
    CHECK(env.sup_A <= env.sup_norm);
    CHECK(env.sup_norm <= env.product_bound * (1 + 1e-12));
    CHECK(std::isfinite(env.product_bound));
  }

  CHECK_THROWS_AS(convex_envelope(-1.0, 0.0, 0.1, 1.0, 0.0, 0.5, Schedule::identity(), 5),
                  std::invalid_argument);
}

TEST_CASE("decay rate fitting") {
  std::vector<double> series(60);
  for (size_t k = 0; k < series.size(); ++k) series[k] = 3.0 * std::pow(0.9, k);
  CHECK(fitted_decay_rate(series, 5, 55) == doctest::Approx(0.9).epsilon(1e-12));

  // entries at the floor are skipped without poisoning the fit
  std::vector<double> noisy = series;
  noisy[10] = 0.0;
  noisy[11] = 0.0;
  CHECK(fitted_decay_rate(noisy, 5, 55, 0.0) == doctest::Approx(0.9).epsilon(1e-3));

  CHECK_THROWS_AS(fitted_decay_rate(series, 5, 6), std::invalid_argument);
  CHECK_THROWS_AS(fitted_decay_rate(std::vector<double>(10, 0.0), 0, 10, 0.0),
                  std::invalid_argument);
}

TEST_CASE("strong coercivity slack is zero for the quadratic equality case") {
  Rng rng = Rng::stream(13, "slack");
  for (int trial = 0; trial < 30; ++trial) {
    const Vector x = rng.vector(5, -2.0, 2.0);
    const Vector y = rng.vector(5, -2.0, 2.0);
    CHECK(std::abs(strong_coercivity_slack(2.0, 2.0, x, y, 2.0 * x, 2.0 * y)) < 1e-10);
  }
}
