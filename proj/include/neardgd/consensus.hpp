#pragma once

#include <string>
#include <vector>

#include "neardgd/graph.hpp"
#include "neardgd/types.hpp"

namespace neardgd {

enum class WeightScheme {
  kUniformNeighbor,  // w_ij = 1/(deg(i)+1) over the closed neighborhood; regular graphs only
  kLazyMetropolis,   // w_ij = 1/(1+max(deg_i,deg_j)) off-diagonal, diagonal absorbs the rest
};

std::string to_string(WeightScheme scheme);

struct SpectralGap {
  double beta = 0.0;     // ||W - (1/n) 1 1^T||_2
  double lambda2 = 0.0;  // second-largest eigenvalue of W^T W
};

struct ConsensusMatrix {
  Matrix W;
  double beta = 0.0;
  double lambda2 = 0.0;
  WeightScheme scheme = WeightScheme::kLazyMetropolis;

  int n() const { return static_cast<int>(W.rows()); }
};

// Builds the mixing matrix for a connected topology. Uniform-neighbor weights
// are rejected on irregular graphs (rows would not be column-stochastic).
ConsensusMatrix consensus_matrix(const Topology& g, WeightScheme scheme);

// beta = sqrt(lambda_2(W^T W)) for a doubly stochastic W; throws if W is not
// square or row/column sums deviate from 1 by more than 1e-12.
SpectralGap spectral_gap(const Matrix& W);

struct ValidationItem {
  std::string name;
  bool pass = false;
  double value = 0.0;  // residual or measured quantity, for the report
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  double beta = 0.0;
  bool all_pass() const {
    for (const auto& it : items)
      if (!it.pass) return false;
    return true;
  }
};

// Checks every standing assumption on W: double stochasticity (1e-12),
// nonnegativity, positive diagonal, strong connectivity of the support,
// and that 1 is a simple eigenvalue of W^T W with beta < 1.
ValidationReport validate_assumptions(const Matrix& W);

// t rounds of mixing applied to row-stacked agent states (n x p). The
// Kronecker-lifted operator is never materialized.
BlockMatrix apply_consensus(const ConsensusMatrix& W, const BlockMatrix& blocks, int t);
BlockMatrix apply_consensus(const Matrix& W, const BlockMatrix& blocks, int t);

// Row-wise mean lifted back to every row: the projection (1/n) 1 1^T (x) I.
BlockMatrix block_average(const BlockMatrix& blocks);

}  // namespace neardgd
