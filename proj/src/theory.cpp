#include "neardgd/theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace neardgd {

TheoryConstants TheoryConstants::from(const Problem& prob, double beta) {
  if (!prob.composite)
    throw std::invalid_argument("theory_constants: problem has no composite structure");
  const CompositeStructure& cs = *prob.composite;
  TheoryConstants tc;
  tc.alpha = cs.alpha;
  tc.L_g = cs.L_g;
  tc.c_H = cs.c_hoffman;
  tc.C_H = cs.C_H;
  tc.C2 = 2.0 * cs.L_g * cs.alpha * cs.c_hoffman / (cs.L_g + cs.alpha);
  tc.L = prob.L;
  tc.D = cs.D;
  tc.beta = beta;
  return tc;
}

StepsizeCaps stepsize_caps(const TheoryConstants& tc, double beta, int J) {
  if (J < 1) throw std::invalid_argument("stepsize_caps: J must be >= 1");
  if (beta < 0.0) throw std::invalid_argument("stepsize_caps: beta must be nonnegative");
  StepsizeCaps caps;
  caps.coercivity_cap = 2.0 * tc.C_H / (tc.L_g + tc.alpha);
  const double bJ = std::pow(beta, J);
  if (bJ >= 1.0) {
    caps.schedule_cap_defined = false;
    caps.schedule_cap = 0.0;
    caps.composite_cap = 0.0;
  } else if (bJ == 0.0) {
    caps.schedule_cap = std::numeric_limits<double>::infinity();
    caps.composite_cap = caps.coercivity_cap;
  } else {
    caps.schedule_cap =
        tc.C2 / (tc.C2 + tc.L * (1.0 + std::sqrt(2.0))) * (1.0 - bJ) / (tc.L * bJ);
    caps.composite_cap = std::min(caps.coercivity_cap, caps.schedule_cap);
  }
  caps.convex_monotone_cap = 2.0 / tc.L;
  caps.convex_ergodic_cap = 1.0 / tc.L;
  return caps;
}

BoundInputs make_bound_inputs(double A0, double B0, double mu, const TheoryConstants& tc,
                              int J) {
  if (J < 1) throw std::invalid_argument("bound inputs: J must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("bound inputs: mu must be positive");
  if (A0 < 0.0 || B0 < 0.0) throw std::invalid_argument("bound inputs: metrics must be >= 0");
  const double cap = 2.0 * tc.C_H / (tc.L_g + tc.alpha);
  if (mu > cap) throw std::invalid_argument("bound inputs: mu exceeds the coercivity cap");
  if (tc.C2 * mu > 1.0)
    throw std::invalid_argument("bound inputs: contraction factor not real");

  BoundInputs in;
  in.A0 = A0;
  in.B0 = B0;
  in.mu = mu;
  in.L = tc.L;
  in.C2 = tc.C2;
  in.beta = tc.beta;
  in.D = tc.D;
  in.J = J;
  in.q = std::sqrt(1.0 - tc.C2 * mu);
  in.gamma = (1.0 - in.q) / (mu * tc.L);
  const double bJ = std::pow(tc.beta, J);
  const double denom = in.gamma - (mu * tc.L + in.gamma * (1.0 + mu * tc.L)) * bJ;
  if (!(denom > 0.0))
    throw std::invalid_argument("bound inputs: mu too large for the schedule (radius undefined)");
  in.R = std::max({A0, B0 / in.gamma, mu * tc.D * bJ / denom});
  return in;
}

BoundPair bound_fixed_schedule(const BoundInputs& in, long k) {
  if (k < 0) throw std::invalid_argument("bound: k must be >= 0");
  const double bJ = std::pow(in.beta, in.J);
  const double drive = in.mu * (2.0 * in.L * in.R + in.D);
  BoundPair out;
  out.B = std::pow(bJ, static_cast<double>(k)) * in.B0 + in.mu * bJ *
              (2.0 * in.L * in.R + in.D) / (1.0 - bJ);
  if (k == 0) {
    out.A = in.A0;
    return out;
  }
  out.A = std::pow(in.q, static_cast<double>(k - 1)) * (in.A0 + in.mu * in.L * in.B0) +
          in.mu * in.L * bJ / (1.0 - bJ) * (drive / (1.0 - in.q) + in.B0);
  return out;
}

NondecreasingBound::NondecreasingBound(const BoundInputs& in, const Schedule& schedule)
    : in_(in), schedule_(schedule) {
  if (schedule.t(0) != in.J)
    throw std::invalid_argument("bound: J must equal the schedule's first value");
  sum_bt_.push_back(0.0);
  sum_bj_.push_back(0.0);
}

void NondecreasingBound::extend(std::size_t upto) {
  const double bJ = std::pow(in_.beta, in_.J);
  while (sum_bt_.size() <= upto) {
    const std::size_t l = sum_bt_.size() - 1;
    sum_bt_.push_back(sum_bt_.back() + std::pow(in_.beta, schedule_.t(static_cast<long>(l))));
    sum_bj_.push_back(sum_bj_.back() + std::pow(bJ, static_cast<double>(l + 1)));
  }
}

double NondecreasingBound::A(long m) {
  if (m < 3) throw std::invalid_argument("bound: nondecreasing form needs a row index >= 3");
  const long k = m - 1;
  const long half = k / 2;
  extend(static_cast<std::size_t>(half));
  const double drive = in_.mu * (2.0 * in_.L * in_.R + in_.D);
  const double muL = in_.mu * in_.L;
  const double bJ = std::pow(in_.beta, in_.J);
  const double geometric =
      std::pow(in_.q, static_cast<double>(k)) * (in_.A0 + muL * in_.B0);
  const double tail = muL / (1.0 - in_.q) *
                      (drive * std::pow(in_.beta, schedule_.t(half)) +
                       in_.B0 * std::pow(bJ, static_cast<double>(half + 1)));
  const double head = muL * std::pow(in_.q, static_cast<double>(half)) *
                      (drive * sum_bt_[static_cast<std::size_t>(half)] +
                       in_.B0 * sum_bj_[static_cast<std::size_t>(half)]);
  return geometric + tail + head;
}

double NondecreasingBound::B(long m) const {
  if (m < 1) throw std::invalid_argument("bound: row index must be >= 1");
  const double drive = in_.mu * (2.0 * in_.L * in_.R + in_.D);
  return std::pow(in_.beta, static_cast<double>(m) * in_.J) * in_.B0 +
         drive * std::pow(in_.beta, schedule_.t(m - 1));
}

Main2Envelope main2_envelope(const Schedule& schedule, double beta, double C2, double mu,
                             long T) {
  if (T < 1) throw std::invalid_argument("envelope: horizon must be >= 1");
  Main2Envelope env;
  const long j0 = (T + 1) / 2;  // schedules are nondecreasing, the max sits at the left end
  env.schedule_term = std::pow(beta, schedule.t(j0));
  env.geometric_term = std::pow(1.0 - C2 * mu, static_cast<double>(T) / 2.0);
  return env;
}

double fit_envelope_constant(const std::vector<double>& A, const std::vector<double>& B,
                             const Schedule& schedule, double beta, double C2, double mu,
                             long T_lo, long T_hi) {
  if (A.size() != B.size()) throw std::invalid_argument("envelope fit: series length mismatch");
  if (T_lo < 1 || T_hi < T_lo) throw std::invalid_argument("envelope fit: bad horizon range");
  if (static_cast<std::size_t>(T_hi + 1) >= A.size())
    throw std::invalid_argument("envelope fit: series too short for the horizon");
  double C = 0.0;
  for (long T = T_lo; T <= T_hi; ++T) {
    const double observed = std::hypot(A[static_cast<std::size_t>(T + 1)],
                                       B[static_cast<std::size_t>(T + 1)]);
    C = std::max(C, observed / main2_envelope(schedule, beta, C2, mu, T).value());
  }
  return C;
}

double weighted_norm(double x, double y, double c) { return std::abs(x) + c * std::abs(y); }

double weighted_operator_norm(const Eigen::Matrix2d& M, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("weighted norm: c must be positive");
  // Extreme points of the unit ball are (+-1, 0) and (0, +-1/c).
  const double on_x = weighted_norm(M(0, 0), M(1, 0), c);
  const double on_y = weighted_norm(M(0, 1), M(1, 1), c) / c;
  return std::max(on_x, on_y);
}

ProductBoundCheck product_bound_check(double r, const std::vector<double>& alpha, std::size_t a,
                                      std::size_t b) {
  if (!(r > 0.0)) throw std::invalid_argument("product bound: r must be positive");
  if (b >= alpha.size() || a > b) throw std::invalid_argument("product bound: bad index range");
  ProductBoundCheck out;
  out.c = std::max(r, 1.0);
  Eigen::Matrix2d P = Eigen::Matrix2d::Identity();
  double sum = 0.0;
  for (std::size_t k = a; k <= b; ++k) {
    if (alpha[k] < 0.0) throw std::invalid_argument("product bound: factors must be >= 0");
    Eigen::Matrix2d M;
    M << 1.0, r, alpha[k], alpha[k];
    P = M * P;
    sum += alpha[k];
  }
  out.product_norm = weighted_operator_norm(P, out.c);
  out.bound = std::exp(out.c * sum);
  return out;
}

ConvexEnvelope convex_envelope(double A0, double B0, double mu, double L, double D, double beta,
                               const Schedule& schedule, long K) {
  if (A0 < 0.0 || B0 < 0.0 || mu < 0.0 || L <= 0.0 || D < 0.0 || beta < 0.0 || K < 0)
    throw std::invalid_argument("convex envelope: bad inputs");
  ConvexEnvelope env;
  const double muL = mu * L;
  env.c = std::max(muL, 1.0);

  double a = A0, b = B0;
  env.sup_A = a;
  env.sup_norm = weighted_norm(a, b, env.c);
  std::vector<double> alpha(static_cast<std::size_t>(K));
  for (long k = 0; k < K; ++k) {
    const double bt = std::pow(beta, schedule.t(k));
    alpha[static_cast<std::size_t>(k)] = (1.0 + muL) * bt;
    const double a_next = a + muL * b;
    const double b_next = muL * bt * a + (1.0 + muL) * bt * b + mu * D * bt;
    a = a_next;
    b = b_next;
    env.sup_A = std::max(env.sup_A, a);
    env.sup_norm = std::max(env.sup_norm, weighted_norm(a, b, env.c));
  }

  // Closed form: exp(c sum alpha) on the initial state plus each forcing term
  // carried through the remaining factors.
  double suffix = 0.0;  // sum of alpha_l for l > j while scanning j downward
  double forcing = 0.0;
  for (long j = K - 1; j >= 0; --j) {
    forcing += env.c * mu * D * std::pow(beta, schedule.t(j)) * std::exp(env.c * suffix);
    suffix += alpha[static_cast<std::size_t>(j)];
  }
  env.product_bound = std::exp(env.c * suffix) * weighted_norm(A0, B0, env.c) + forcing;
  return env;
}

double strong_coercivity_slack(double alpha, double L, const Vector& x, const Vector& y,
                               const Vector& gx, const Vector& gy) {
  if (!(L >= alpha && alpha > 0.0))
    throw std::invalid_argument("coercivity: need 0 < alpha <= L");
  const Vector dx = x - y;
  const Vector dg = gx - gy;
  return dg.dot(dx) - L * alpha / (L + alpha) * dx.squaredNorm() -
         dg.squaredNorm() / (L + alpha);
}

double fitted_decay_rate(const std::vector<double>& values, std::size_t k0, std::size_t k1,
                         double floor) {
  if (k1 > values.size() || k0 + 2 > k1)
    throw std::invalid_argument("decay fit: need at least two samples in range");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  long count = 0;
  for (std::size_t k = k0; k < k1; ++k) {
    if (!(values[k] > floor)) continue;
    const double x = static_cast<double>(k);
    const double y = std::log(values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) throw std::invalid_argument("decay fit: too few positive samples");
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("decay fit: degenerate sample range");
  return std::exp((count * sxy - sx * sy) / denom);
}

}  // namespace neardgd
