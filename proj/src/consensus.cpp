#include "neardgd/consensus.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace neardgd {

std::string to_string(WeightScheme scheme) {
  return scheme == WeightScheme::kUniformNeighbor ? "uniform-neighbor" : "lazy-metropolis";
}

ConsensusMatrix consensus_matrix(const Topology& g, WeightScheme scheme) {
  if (g.n < 1) throw std::invalid_argument("consensus_matrix: empty topology");
  if (!is_connected(g)) throw std::invalid_argument("consensus_matrix: topology must be connected");
  const int n = g.n;
  Matrix W = Matrix::Zero(n, n);

  if (scheme == WeightScheme::kUniformNeighbor) {
    if (!g.regular())
      throw std::invalid_argument(
          "consensus_matrix: uniform-neighbor weights require a regular graph "
          "(irregular degrees break column stochasticity)");
    for (int i = 0; i < n; ++i) {
      const double w = 1.0 / (g.degree(i) + 1.0);
      W(i, i) = w;
      for (int j : g.neighbors[i]) W(i, j) = w;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double off = 0.0;
      for (int j : g.neighbors[i]) {
        const double w = 1.0 / (1.0 + std::max(g.degree(i), g.degree(j)));
        W(i, j) = w;
        off += w;
      }
      W(i, i) = 1.0 - off;
    }
  }

  ConsensusMatrix cm;
  cm.W = std::move(W);
  cm.scheme = scheme;
  const SpectralGap gap = spectral_gap(cm.W);
  cm.beta = gap.beta;
  cm.lambda2 = gap.lambda2;
  return cm;
}

namespace {

void require_doubly_stochastic(const Matrix& W) {
  if (W.rows() != W.cols() || W.rows() == 0)
    throw std::invalid_argument("spectral_gap: W must be square and nonempty");
  const double row_res = (W.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col_res = (W.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (row_res > 1e-12 || col_res > 1e-12)
    throw std::invalid_argument("spectral_gap: W is not doubly stochastic (tolerance 1e-12)");
  if (W.minCoeff() < -1e-15)
    throw std::invalid_argument("spectral_gap: W has negative entries");
}

}  // namespace

SpectralGap spectral_gap(const Matrix& W) {
  require_doubly_stochastic(W);
  const Index n = W.rows();
  if (n == 1) return {0.0, 0.0};
  Eigen::SelfAdjointEigenSolver<Matrix> es(W.transpose() * W, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();  // ascending
  SpectralGap gap;
  gap.lambda2 = ev(n - 2);
  // The solver reports eigenvalues of an exactly-averaging matrix as O(n*eps)
  // noise; taking the square root would inflate that to ~1e-8, so values below
  // the noise floor are treated as exact zeros.
  if (gap.lambda2 < 1e-13) gap.lambda2 = 0.0;
  gap.beta = std::sqrt(gap.lambda2);
  return gap;
}

ValidationReport validate_assumptions(const Matrix& W) {
  ValidationReport rep;
  if (W.rows() != W.cols() || W.rows() == 0)
    throw std::invalid_argument("validate_assumptions: W must be square and nonempty");
  const Index n = W.rows();

  const double row_res = (W.rowwise().sum().array() - 1.0).abs().maxCoeff();
  rep.items.push_back({"row-stochastic", row_res <= 1e-12, row_res});
  const double col_res = (W.colwise().sum().array() - 1.0).abs().maxCoeff();
  rep.items.push_back({"column-stochastic", col_res <= 1e-12, col_res});
  const double min_entry = W.minCoeff();
  rep.items.push_back({"nonnegative", min_entry >= -1e-15, min_entry});
  const double min_diag = W.diagonal().minCoeff();
  rep.items.push_back({"self-loops", min_diag > 0.0, min_diag});

  // Strong connectivity of the support, forward and backward reach from node 0.
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<Index> stack{0};
    seen[0] = 1;
    Index count = 1;
    while (!stack.empty()) {
      Index u = stack.back();
      stack.pop_back();
      for (Index v = 0; v < n; ++v) {
        const double w = transpose ? W(v, u) : W(u, v);
        if (w > 0.0 && !seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  const bool connected = reaches_all(false) && reaches_all(true);
  rep.items.push_back({"strongly-connected", connected, connected ? 1.0 : 0.0});

  if (n == 1) {
    rep.items.push_back({"unit-top-eigenvalue", true, 0.0});
    rep.items.push_back({"beta-below-one", true, 0.0});
    rep.beta = 0.0;
    return rep;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(W.transpose() * W, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double top = ev(n - 1);
  const double second = ev(n - 2);
  rep.items.push_back({"unit-top-eigenvalue", std::abs(top - 1.0) <= 1e-10, std::abs(top - 1.0)});
  rep.beta = std::sqrt(std::max(0.0, second));
  rep.items.push_back({"beta-below-one", second <= 1.0 - 1e-10, rep.beta});
  return rep;
}

BlockMatrix apply_consensus(const Matrix& W, const BlockMatrix& blocks, int t) {
  if (t < 0) throw std::invalid_argument("apply_consensus: t must be >= 0");
  if (blocks.rows() != W.rows())
    throw std::invalid_argument("apply_consensus: state has wrong number of agent rows");
  BlockMatrix x = blocks;
  for (int r = 0; r < t; ++r) x = W * x;
  return x;
}

BlockMatrix apply_consensus(const ConsensusMatrix& W, const BlockMatrix& blocks, int t) {
  return apply_consensus(W.W, blocks, t);
}

BlockMatrix block_average(const BlockMatrix& blocks) {
  Eigen::RowVectorXd mean = blocks.colwise().mean();
  return mean.replicate(blocks.rows(), 1);
}

}  // namespace neardgd
