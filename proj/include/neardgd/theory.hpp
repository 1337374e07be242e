#pragma once

#include <vector>

#include "neardgd/problem.hpp"
#include "neardgd/schedule.hpp"
#include "neardgd/types.hpp"

namespace neardgd {

// Constants of the composite convergence theory for one problem instance on
// one graph: f = g(Hx) with g alpha-strongly convex and L_g-smooth, local
// smoothness L, Hoffman constant c_H, inverse spectral bound C_H, and the
// contraction rate C2 = 2 L_g alpha c_H / (L_g + alpha).
struct TheoryConstants {
  double alpha = 0.0;
  double L_g = 0.0;
  double c_H = 0.0;
  double C_H = 0.0;
  double C2 = 0.0;
  double L = 0.0;   // max over local smoothness constants
  double D = 0.0;   // stacked gradient norm on the optimal set
  double beta = 0.0;

  static TheoryConstants from(const Problem& prob, double beta);
};

struct StepsizeCaps {
  double coercivity_cap = 0.0;      // keeps the contraction coefficient real
  double schedule_cap = 0.0;        // keeps the uniform-boundedness radius finite
  bool schedule_cap_defined = true; // false when beta^J reaches 1
  double composite_cap = 0.0;       // min of the two above
  double convex_monotone_cap = 0.0; // 2/L
  double convex_ergodic_cap = 0.0;  // 1/L

  bool admissible_composite(double mu) const {
    return schedule_cap_defined && mu > 0.0 && mu <= composite_cap;
  }
};

StepsizeCaps stepsize_caps(const TheoryConstants& tc, double beta, int J);

// Inputs of the closed-form trajectory bounds: initial metrics, step size,
// the derived contraction factor q, the ratio gamma = (1-q)/(mu L), and the
// uniform radius R = max{A0, B0/gamma, mu D beta^J / denom} whose denominator
// gamma - (mu L + gamma(1+mu L)) beta^J must be positive.
struct BoundInputs {
  double A0 = 0.0;
  double B0 = 0.0;
  double mu = 0.0;
  double L = 0.0;
  double C2 = 0.0;
  double beta = 0.0;
  double D = 0.0;
  int J = 1;
  double q = 0.0;
  double gamma = 0.0;
  double R = 0.0;
};

// Validates admissibility (mu within the coercivity cap, positive radius
// denominator, C2*mu < 1) and fills the derived fields; throws otherwise.
BoundInputs make_bound_inputs(double A0, double B0, double mu, const TheoryConstants& tc, int J);

struct BoundPair {
  double A = 0.0;
  double B = 0.0;
};

// Constant-schedule trajectory bound. A(k) for k >= 1 is
//   q^{k-1} (A0 + mu L B0) + [mu L beta^J / (1 - beta^J)] (mu(2LR+D)/(1-q) + B0);
// A(0) is the trivial bound A0. B(k) = beta^{Jk} B0 + mu beta^J (2LR+D)/(1-beta^J).
BoundPair bound_fixed_schedule(const BoundInputs& in, long k);

// Nondecreasing-schedule bound. A(m) bounds the averaged-iterate distance at
// row m >= 3 via three terms indexed by k = m-1: a geometric term q^k, a tail
// term at beta^{t(floor(k/2))}, and a head term carrying exact partial sums of
// beta^{t(l)}. B(m) = beta^{mJ} B0 + mu(2LR+D) beta^{t(m-1)} for m >= 1.
// Prefix sums grow lazily; instances are not safe to share across threads.
class NondecreasingBound {
 public:
  NondecreasingBound(const BoundInputs& in, const Schedule& schedule);

  double A(long m);
  double B(long m) const;
  const BoundInputs& inputs() const { return in_; }

 private:
  void extend(std::size_t upto);

  BoundInputs in_;
  Schedule schedule_;
  std::vector<double> sum_bt_;  // sum_bt_[i] = sum_{l<i} beta^{t(l)}
  std::vector<double> sum_bj_;  // sum_bj_[i] = sum_{l<i} beta^{(l+1)J}
};

// Two-term decay envelope for runs with summable consensus error: the
// schedule term max_{ceil(T/2) <= j <= T} beta^{t(j)} plus the geometric term
// (1 - C2 mu)^{T/2}. The leading constant is unspecified upstream, so the
// envelope is only ever fitted against observed data, never asserted.
struct Main2Envelope {
  double schedule_term = 0.0;
  double geometric_term = 0.0;

  double value() const { return schedule_term + geometric_term; }
};

Main2Envelope main2_envelope(const Schedule& schedule, double beta, double C2, double mu, long T);

// Smallest constant C with hypot(A_{T+1}, B_{T+1}) <= C * envelope(T) over
// T in [T_lo, T_hi], given the per-row A and B series.
double fit_envelope_constant(const std::vector<double>& A, const std::vector<double>& B,
                             const Schedule& schedule, double beta, double C2, double mu,
                             long T_lo, long T_hi);

// Weighted norm |x| + c|y| and the exactly-evaluated operator norm of a 2x2
// matrix under it (the maximum over the signed extreme points of the ball).
double weighted_norm(double x, double y, double c);
double weighted_operator_norm(const Eigen::Matrix2d& M, double c);

struct ProductBoundCheck {
  double product_norm = 0.0;
  double bound = 0.0;
  double c = 0.0;

  bool pass() const { return product_norm <= bound; }
};

// Product of factors M_k = [[1, r], [alpha_k, alpha_k]] for k in [a, b]: the
// weighted operator norm with c = max{r, 1} never exceeds exp(c * sum alpha_k).
ProductBoundCheck product_bound_check(double r, const std::vector<double>& alpha, std::size_t a,
                                      std::size_t b);

// Worst-case envelope of the convex two-term recursion along a schedule:
// iterates the dominating system from (A0, B0) for K steps and reports the
// supremum of the first component, together with the closed-form product
// bound that certifies finiteness whenever sum beta^{t(k)} converges.
struct ConvexEnvelope {
  double sup_A = 0.0;
  double sup_norm = 0.0;      // sup of the weighted norm along the recursion
  double product_bound = 0.0; // closed-form bound on that supremum
  double c = 0.0;
};

ConvexEnvelope convex_envelope(double A0, double B0, double mu, double L, double D, double beta,
                               const Schedule& schedule, long K);

// Slack of the strong-convexity coercivity inequality
//   <gx - gy, x - y> >= [L a/(L+a)] |x-y|^2 + [1/(L+a)] |gx-gy|^2,
// nonnegative for any a-strongly convex, L-smooth gradient pair.
double strong_coercivity_slack(double alpha, double L, const Vector& x, const Vector& y,
                               const Vector& gx, const Vector& gy);

// Per-step geometric decay factor fitted to log(values[k]) over [k0, k1) by
// least squares; entries at or below the floor threshold are skipped.
double fitted_decay_rate(const std::vector<double>& values, std::size_t k0, std::size_t k1,
                         double floor = 0.0);

}  // namespace neardgd
