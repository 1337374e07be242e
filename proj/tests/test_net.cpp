#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <doctest.h>

#include "neardgd/consensus.hpp"
#include "neardgd/graph.hpp"
#include "neardgd/rng.hpp"

using namespace neardgd;

namespace {

Topology path3() {
  Topology g;
  g.n = 3;
  g.neighbors = {{1}, {0, 2}, {1}};
  return g;
}

}  // namespace

TEST_CASE("circulant topology shape") {
  const Topology g = build_circulant(8, 3);
  CHECK(g.n == 8);
  CHECK(g.regular());
  CHECK(is_connected(g));
  for (int i = 0; i < 8; ++i) CHECK(g.degree(i) == 6);
  // node 0 talks to +-1, +-2, +-3 mod 8
  CHECK(g.neighbors[0] == std::vector<int>{1, 2, 3, 5, 6, 7});

  const Topology ring = build_circulant(4, 1);
  CHECK(ring.neighbors[0] == std::vector<int>{1, 3});
  CHECK(ring.neighbors[2] == std::vector<int>{1, 3});
}

TEST_CASE("degenerate and invalid graphs") {
  CHECK_THROWS_AS(build_circulant(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_circulant(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_circulant(6, 3), std::invalid_argument);  // offsets wrap
  CHECK_THROWS_AS(build_complete(0), std::invalid_argument);

  const Topology lone = build_circulant(1, 1);
  CHECK(lone.n == 1);
  CHECK(lone.degree(0) == 0);
  CHECK(is_connected(lone));
  CHECK(build_complete(1).degree(0) == 0);

  Topology split;
  split.n = 4;
  split.neighbors = {{1}, {0}, {3}, {2}};
  CHECK_FALSE(is_connected(split));
}

TEST_CASE("uniform-neighbor weights on a regular graph") {
  const ConsensusMatrix cm = consensus_matrix(build_circulant(8, 3), WeightScheme::kUniformNeighbor);
  // closed neighborhood of size 7 everywhere: every positive entry is 1/7
  for (int i = 0; i < 8; ++i) {
    CHECK(cm.W(i, i) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
    CHECK(cm.W.row(i).sum() == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(cm.W(0, 4) == 0.0);  // offset 4 is not an edge

  // on a regular graph lazy-metropolis collapses to the same matrix
  const ConsensusMatrix lazy = consensus_matrix(build_circulant(8, 3), WeightScheme::kLazyMetropolis);
  CHECK((cm.W - lazy.W).cwiseAbs().maxCoeff() < 1e-15);  // diagonals differ by one rounding step
}

TEST_CASE("uniform-neighbor weights rejected on irregular graphs") {
  CHECK_THROWS_AS(consensus_matrix(path3(), WeightScheme::kUniformNeighbor), std::invalid_argument);
}

TEST_CASE("lazy-metropolis on an irregular path") {
  const ConsensusMatrix cm = consensus_matrix(path3(), WeightScheme::kLazyMetropolis);
  Matrix expected(3, 3);
  expected << 2.0 / 3, 1.0 / 3, 0.0,
              1.0 / 3, 1.0 / 3, 1.0 / 3,
              0.0, 1.0 / 3, 2.0 / 3;
  CHECK((cm.W - expected).cwiseAbs().maxCoeff() < 1e-15);
  // spectrum {1, 2/3, 0} so beta = 2/3
  CHECK(cm.beta == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("spectral gap fixtures") {
  // exact averaging: complete graph with uniform weights has beta = 0
  for (int n : {2, 5, 8}) {
    const ConsensusMatrix cm = consensus_matrix(build_complete(n), WeightScheme::kUniformNeighbor);
    CHECK(cm.beta == 0.0);
  }
  // lazy-metropolis on the complete graph also averages exactly
  CHECK(consensus_matrix(build_complete(6), WeightScheme::kLazyMetropolis).beta == 0.0);

  Matrix two(2, 2);
  two << 0.75, 0.25, 0.25, 0.75;
  CHECK(spectral_gap(two).beta == doctest::Approx(0.5).epsilon(1e-14));

  // circulant(8,3), lazy: W = (I + A)/7 with eigenvalues {1, 0, -2/7...}
  // shifted onto {1, +-1/7}; beta = 1/7
  const ConsensusMatrix ring8 = consensus_matrix(build_circulant(8, 3), WeightScheme::kLazyMetropolis);
  CHECK(ring8.beta == doctest::Approx(1.0 / 7.0).epsilon(1e-12));

  // 4-cycle, lazy: spectrum {1, 1/3, -1/3, 1/3}; beta = 1/3
  const ConsensusMatrix ring4 = consensus_matrix(build_circulant(4, 1), WeightScheme::kLazyMetropolis);
  CHECK(ring4.beta == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("spectral gap input validation") {
  Matrix bad(2, 2);
  bad << 0.8, 0.1, 0.1, 0.8;  // rows sum to 0.9
  CHECK_THROWS_AS(spectral_gap(bad), std::invalid_argument);
  CHECK_THROWS_AS(spectral_gap(Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("spectral gap power identity") {
  const ConsensusMatrix ring8 = consensus_matrix(build_circulant(8, 3), WeightScheme::kLazyMetropolis);
  Matrix Wt = ring8.W;
  for (int t = 1; t <= 3; ++t) {
    CHECK(spectral_gap(Wt).beta == doctest::Approx(std::pow(ring8.beta, t)).epsilon(1e-8));
    Wt = Wt * ring8.W;
  }
}

TEST_CASE("validate_assumptions accepts the standard matrices") {
  for (const auto& cm : {consensus_matrix(build_circulant(8, 3), WeightScheme::kLazyMetropolis),
                         consensus_matrix(build_complete(8), WeightScheme::kUniformNeighbor),
                         consensus_matrix(path3(), WeightScheme::kLazyMetropolis)}) {
    const ValidationReport rep = validate_assumptions(cm.W);
    CHECK(rep.all_pass());
    CHECK(rep.items.size() == 7);
  }
}

TEST_CASE("validate_assumptions flags broken matrices") {
  // stochasticity violated
  Matrix bad = consensus_matrix(build_circulant(8, 3), WeightScheme::kLazyMetropolis).W;
  bad(0, 1) += 1e-6;
  CHECK_FALSE(validate_assumptions(bad).all_pass());

  // disconnected support: block-diagonal of two averaging blocks
  Matrix disc = Matrix::Zero(4, 4);
  disc.topLeftCorner(2, 2).setConstant(0.5);
  disc.bottomRightCorner(2, 2).setConstant(0.5);
  const ValidationReport rep = validate_assumptions(disc);
  CHECK_FALSE(rep.all_pass());
  bool connected_failed = false;
  bool beta_failed = false;
  for (const auto& it : rep.items) {
    if (it.name == "strongly-connected" && !it.pass) connected_failed = true;
    if (it.name == "beta-below-one" && !it.pass) beta_failed = true;
  }
  CHECK(connected_failed);
  CHECK(beta_failed);  // 1 is a double eigenvalue here

  // no self-loops: permutation-like swap
  Matrix swap(2, 2);
  swap << 0.0, 1.0, 1.0, 0.0;
  bool selfloop_failed = false;
  for (const auto& it : validate_assumptions(swap).items)
    if (it.name == "self-loops" && !it.pass) selfloop_failed = true;
  CHECK(selfloop_failed);
}

TEST_CASE("apply_consensus matches the dense product") {
  const ConsensusMatrix cm = consensus_matrix(build_circulant(8, 3), WeightScheme::kLazyMetropolis);
  Rng rng = Rng::stream(7, "net-test");
  const BlockMatrix x = rng.matrix(8, 5, -1.0, 1.0);

  CHECK((apply_consensus(cm, x, 0) - x).cwiseAbs().maxCoeff() == 0.0);
  const BlockMatrix w3x = cm.W * (cm.W * (cm.W * x));
  CHECK((apply_consensus(cm, x, 3) - w3x).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(apply_consensus(cm, BlockMatrix(5, 3), 1), std::invalid_argument);
  CHECK_THROWS_AS(apply_consensus(cm, x, -1), std::invalid_argument);
}

TEST_CASE("mixing preserves the block average") {
  const ConsensusMatrix cm = consensus_matrix(build_circulant(8, 3), WeightScheme::kLazyMetropolis);
  Rng rng = Rng::stream(11, "net-test");
  const BlockMatrix x = rng.matrix(8, 4, -3.0, 3.0);
  const BlockMatrix xbar = block_average(x);
  CHECK((block_average(apply_consensus(cm, x, 4)) - xbar).cwiseAbs().maxCoeff() < 1e-12);
  // block_average is idempotent and row-constant
  CHECK((block_average(xbar) - xbar).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 1; i < 8; ++i) CHECK((xbar.row(i) - xbar.row(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("consensus contraction sweep") {
  Rng rng = Rng::stream(3, "net-sweep");
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(15));
    Topology g;
    if (n >= 5 && rng.below(2) == 0)
      g = build_circulant(n, 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>((n - 1) / 2))));
    else
      g = build_complete(n);
    const WeightScheme scheme =
        rng.below(2) == 0 ? WeightScheme::kLazyMetropolis : WeightScheme::kUniformNeighbor;
    const ConsensusMatrix cm = consensus_matrix(g, scheme);
    const int p = 1 + static_cast<int>(rng.below(4));
    const BlockMatrix x = rng.matrix(n, p, -2.0, 2.0);
    const BlockMatrix xbar = block_average(x);
    const int t = static_cast<int>(rng.below(4));
    const double lhs = (apply_consensus(cm, x, t) - xbar).norm();
    CHECK(lhs <= std::pow(cm.beta, t) * (x - xbar).norm() + 1e-9);
  }
}
