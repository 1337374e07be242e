#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace neardgd {

// Undirected communication graph. Self-loops are implicit: every mixing
// matrix built from a Topology places positive weight on the diagonal.
struct Topology {
  int n = 0;
  std::vector<std::vector<int>> neighbors;  // sorted, without the node itself

  int degree(int i) const { return static_cast<int>(neighbors.at(i).size()); }

  bool regular() const {
    for (int i = 1; i < n; ++i)
      if (degree(i) != degree(0)) return false;
    return true;
  }
};

// Ring-circulant: node i talks to i +- 1, ..., i +- radius (mod n).
inline Topology build_circulant(int n, int radius) {
  if (n < 1) throw std::invalid_argument("build_circulant: n must be >= 1");
  if (radius < 1) throw std::invalid_argument("build_circulant: radius must be >= 1");
  if (n > 1 && 2 * radius >= n)
    throw std::invalid_argument("build_circulant: 2*radius must be < n (offsets would wrap onto each other)");
  Topology g;
  g.n = n;
  g.neighbors.resize(n);
  if (n == 1) return g;  // single node with its self-loop
  for (int i = 0; i < n; ++i) {
    for (int d = 1; d <= radius; ++d) {
      g.neighbors[i].push_back((i + d) % n);
      g.neighbors[i].push_back(((i - d) % n + n) % n);
    }
    std::sort(g.neighbors[i].begin(), g.neighbors[i].end());
  }
  return g;
}

inline Topology build_complete(int n) {
  if (n < 1) throw std::invalid_argument("build_complete: n must be >= 1");
  Topology g;
  g.n = n;
  g.neighbors.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i) g.neighbors[i].push_back(j);
  return g;
}

inline bool is_connected(const Topology& g) {
  if (g.n == 0) return false;
  std::vector<char> seen(g.n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : g.neighbors[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
  }
  return count == g.n;
}

}  // namespace neardgd
