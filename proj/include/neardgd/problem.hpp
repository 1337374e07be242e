#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "neardgd/types.hpp"

namespace neardgd {

enum class ProblemKind { kRegression, kPiecewiseQuartic };

// Composite description f(x) = g(Hx), g(z) = ||z - y||^2, covering the
// aggregate cost f = (1/n) sum_i f_i. H already carries the 1/sqrt(n)
// aggregation factor, so alpha and L_g stay at 2 regardless of n.
struct CompositeStructure {
  Matrix H;            // m x p
  Vector y;            // m
  double alpha = 2.0;  // strong convexity of g
  double L_g = 2.0;    // smoothness of g
  double sigma_max = 0.0;   // ||H||_2
  double c_hoffman = 0.0;   // smallest nonzero singular value of H, squared
  double C_H = 0.0;         // 1 / ||H||_2^2
  int rank = 0;
  Matrix kernel_basis;  // p x d orthonormal basis of ker(H); d = 0 when full rank
  Vector x_hat;         // minimum-norm minimizer of ||Hx - y||^2
  double D = 0.0;       // sqrt(sum_j ||grad f_j||^2), constant on the optimal set

  bool rank_deficient() const { return kernel_basis.cols() > 0; }
};

struct RegressionData {
  std::vector<Matrix> h;  // per-agent p x s design blocks
  std::vector<Vector> y;  // per-agent targets, length s
};

struct Problem {
  ProblemKind kind = ProblemKind::kRegression;
  int p = 0;
  int n = 0;
  std::vector<double> L_local;  // per-agent smoothness constants
  double L = 0.0;               // max_i L_local[i]

  std::function<double(int, const Vector&)> local_value;
  std::function<Vector(int, const Vector&)> local_grad;

  std::optional<CompositeStructure> composite;
  std::optional<Vector> minimizer;  // known optimum, used by convex-mode metrics
  double f_star = 0.0;

  // generation record, kept for fixtures and config echo
  std::uint64_t seed = 0;
  int s = 0;
  double scale = 1.0;
  std::shared_ptr<const RegressionData> regression;  // null for non-regression kinds
  Vector quartic_offsets;                            // b_i for the piecewise kind

  double value(const Vector& x) const;  // aggregate (1/n) sum_i f_i(x)
  Vector grad(const Vector& x) const;
  // Row i holds grad f_i at row i of X (the stacked gradient, never 1/n scaled).
  BlockMatrix stacked_grad(const BlockMatrix& X) const;
};

// Distributed least squares: f_i(x) = ||h_i^T x - y_i||^2 with h_i in R^{p x s}
// sampled entrywise from scale * U[0,1] and targets planted per agent.
Problem make_regression(int p, int n, int s, std::uint64_t seed, double scale = 1.0);

// Same sampling law, rescaled so the aggregate design matrix has unit
// spectral norm; keeps the usual step sizes stable for raw U[0,1] data.
Problem make_regression_normalized(int p, int n, int s, std::uint64_t seed);

// Variant planting one shared point, so every residual vanishes at the
// optimum and the stacked gradient norm there is zero.
Problem make_regression_interpolating(int p, int n, int s, std::uint64_t seed, double scale = 1.0);

// f_i(x) = u(x) + b_i x on the line, u quartic inside [-1,1] and affine
// outside, with the b_i recentred to sum to zero; the aggregate is u itself.
Problem make_piecewise_quartic(int n, std::uint64_t seed);

inline double quartic_hinge(double x) {
  return std::abs(x) <= 1.0 ? 0.25 * x * x * x * x : std::abs(x) - 0.75;
}
inline double quartic_hinge_deriv(double x) {
  return std::abs(x) <= 1.0 ? x * x * x : (x > 0.0 ? 1.0 : -1.0);
}

// Euclidean projection onto the optimal set {x_hat + v : v in ker(H)}.
Vector project_to_optimal(const CompositeStructure& cs, const Vector& z);

// Smallest nonzero singular value squared (threshold 1e-10 relative to the
// largest); the best constant in ||H(z - [z])||^2 >= c ||z - [z]||^2.
double hoffman_constant(const Matrix& H);

// sqrt(sum_j ||grad f_j(x_hat)||^2) after verifying the local costs are
// invariant along sampled kernel directions (throws otherwise).
double constant_D(const Problem& prob, const CompositeStructure& cs);

// Slack of the restricted coercivity inequality at x against [x]; nonnegative
// in exact arithmetic for composite quadratics.
double coercivity_slack(const Problem& prob, const CompositeStructure& cs, const Vector& x);

// Text fixtures carrying the raw data blocks, so an instance reloads
// bit-identically even if the sampling code evolves.
void save_fixture(const Problem& prob, const std::string& path);
Problem load_fixture(const std::string& path);

}  // namespace neardgd
