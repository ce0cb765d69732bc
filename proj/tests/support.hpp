// Random instance generators shared by the test binaries.
#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "sofdim/core.hpp"
#include "sofdim/graphcoh.hpp"
#include "sofdim/graphings.hpp"

namespace testsupport {

using Rng = std::mt19937_64;
using sofdim::FinRel;
using sofdim::Graph;
using sofdim::Graphing;
using sofdim::Model;
using sofdim::PartialMap;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline double uniform_real(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::VectorXd random_vector(Rng& rng, int k, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::VectorXd v(k);
  for (int i = 0; i < k; ++i) v[i] = n(rng);
  return v;
}

inline Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline PartialMap random_permutation(Rng& rng, int d) {
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < d; ++i) pairs.emplace_back(i, perm[i]);
  return PartialMap(d, pairs);
}

// Random injective partial map: a random permutation restricted to a random
// domain of about `density * d` points.
inline PartialMap random_partial_map(Rng& rng, int d, double density = 0.7) {
  const PartialMap perm = random_permutation(rng, d);
  std::vector<std::pair<int, int>> pairs;
  for (auto pr : perm.pairs())
    if (uniform_real(rng) < density) pairs.push_back(pr);
  return PartialMap(d, pairs);
}

// Orbits of the given sizes, consecutive atom indices, orbit masses
// proportional to `orbit_mass` (uniform inside each orbit). One generator
// cycling every orbit.
inline Model cyclic_model(const std::vector<int>& sizes, std::vector<double> orbit_mass = {}) {
  const bool uniform = orbit_mass.empty();
  if (uniform) {
    int total = 0;
    for (int s : sizes) total += s;
    for (int s : sizes) orbit_mass.push_back(static_cast<double>(s) / total);
  }
  double sum = 0;
  for (double m : orbit_mass) sum += m;
  std::vector<double> weights;
  std::vector<std::vector<int>> blocks;
  std::vector<std::pair<int, int>> cycle;
  int next = 0;
  for (std::size_t o = 0; o < sizes.size(); ++o) {
    std::vector<int> blk;
    for (int k = 0; k < sizes[o]; ++k) {
      weights.push_back(orbit_mass[o] / sum / sizes[o]);
      blk.push_back(next + k);
      if (sizes[o] > 1) cycle.emplace_back(next + k, next + (k + 1) % sizes[o]);
    }
    next += sizes[o];
    blocks.push_back(blk);
  }
  // Renormalize against rounding so the weights sum to 1 within 1e-12.
  double total = 0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  Model m;
  // Default masses are proportional to orbit size, which is the uniform
  // measure; keep it exact.
  m.rel = FinRel(uniform ? sofdim::AtomSpace::uniform(next) : sofdim::AtomSpace(weights), blocks);
  m.generators.push_back(PartialMap(next, cycle));
  return m;
}

// Random orbit sizes in [1, max_size] with every atom of weight 1/#atoms,
// so exact models need no weight rounding.
inline Model random_uniform_model(Rng& rng, int orbits, int max_size) {
  std::vector<int> sizes;
  for (int o = 0; o < orbits; ++o) sizes.push_back(uniform_int(rng, 1, max_size));
  return cyclic_model(sizes, {});
}

// Simple graph on n vertices: random spanning tree plus extra edges with
// probability `extra`.
inline Graph random_connected_graph(Rng& rng, int n, double extra) {
  std::vector<std::pair<int, int>> edges;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<bool>> has(n, std::vector<bool>(n, false));
  for (int i = 1; i < n; ++i) {
    const int u = order[i], v = order[uniform_int(rng, 0, i - 1)];
    edges.emplace_back(u, v);
    has[u][v] = has[v][u] = true;
  }
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (!has[u][v] && uniform_real(rng) < extra) {
        edges.emplace_back(u, v);
        has[u][v] = has[v][u] = true;
      }
  return Graph(n, edges);
}

// Union of random connected pieces (so no vertex is isolated).
inline Graph random_graph(Rng& rng, int n, double extra) {
  std::vector<std::pair<int, int>> edges;
  int start = 0;
  while (start < n) {
    int size = std::min(n - start, uniform_int(rng, 2, std::max(2, n / 2)));
    if (n - start - size == 1) ++size;  // never leave a single vertex behind
    const Graph piece = random_connected_graph(rng, size, extra);
    for (auto [u, v] : piece.edge_list()) edges.emplace_back(u + start, v + start);
    start += size;
  }
  return Graph(n, edges);
}

// Generating graphing of the relation: random spanning tree per orbit plus
// extra random pairs, dealt into `pieces` partial morphisms. Each morphism
// stays injective because every atom is used at most once as a source and
// once as a target inside it.
inline Graphing random_generating_graphing(Rng& rng, const FinRel& rel, int pieces, double extra) {
  const int n = rel.atoms();
  std::vector<std::pair<int, int>> pairs;
  for (const auto& blk : rel.blocks()) {
    const int k = static_cast<int>(blk.size());
    const Graph tree = random_connected_graph(rng, k, 0.0);
    if (k > 1)
      for (auto [u, v] : tree.edge_list()) pairs.emplace_back(blk[u], blk[v]);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        if (a != b && uniform_real(rng) < extra) pairs.emplace_back(blk[a], blk[b]);
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  std::vector<std::vector<std::pair<int, int>>> buckets(static_cast<std::size_t>(pieces));
  std::vector<std::vector<bool>> used_src(buckets.size(), std::vector<bool>(n, false));
  std::vector<std::vector<bool>> used_dst = used_src;
  for (auto [s, t] : pairs) {
    std::size_t chosen = buckets.size();
    const std::size_t start = static_cast<std::size_t>(uniform_int(rng, 0, pieces - 1));
    for (std::size_t k = 0; k < buckets.size(); ++k) {
      const std::size_t b = (start + k) % buckets.size();
      if (!used_src[b][s] && !used_dst[b][t]) {
        chosen = b;
        break;
      }
    }
    if (chosen == buckets.size()) {
      buckets.emplace_back();
      used_src.emplace_back(n, false);
      used_dst.emplace_back(n, false);
    }
    buckets[chosen].emplace_back(s, t);
    used_src[chosen][s] = used_dst[chosen][t] = true;
  }
  Graphing phi;
  phi.rel = rel;
  for (auto& bk : buckets)
    if (!bk.empty()) phi.morphisms.emplace_back(n, bk);
  return phi;
}

}  // namespace testsupport
