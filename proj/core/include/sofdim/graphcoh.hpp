// Chains and cochains on finite graphs.
//
// Edges are stored once with the reference orientation min -> max. An edge
// function holds the value on that orientation; reading (v,u) negates it.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sofdim/core.hpp"

namespace sofdim {

class Graph {
 public:
  Graph() = default;
  // Rejects self-loops and out-of-range endpoints. Duplicate edges are merged
  // when `merge_duplicates` is set and rejected otherwise.
  Graph(int vertices, std::vector<std::pair<int, int>> edges, bool merge_duplicates = false);

  int vertices() const { return n_; }
  int edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edge_list() const { return edges_; }
  const std::vector<std::pair<int, int>>& incident(int v) const { return adj_[v]; }  // (neighbor, edge)
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  int max_degree() const;
  // Edge index of {u,v} and the sign of the (u,v) orientation.
  std::optional<std::pair<int, int>> find_edge(int u, int v) const;
  std::vector<int> component_of() const;  // component id per vertex
  int components() const;

  bool operator==(const Graph& o) const { return n_ == o.n_ && edges_ == o.edges_; }

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
};

using EdgeFunction = Eigen::VectorXd;
using VertexFunction = Eigen::VectorXd;
using PathChain = std::vector<int>;

double edge_value(const Graph& g, const EdgeFunction& f, int u, int v);  // f(u,v)

// delta g (u,v) = g(v) - g(u).
EdgeFunction delta(const Graph& g, const VertexFunction& h);
// (bd f)(v) = sum_{w ~ v} f(v,w), so that <bd f, h> = -<f, delta h>.
VertexFunction boundary(const Graph& g, const EdgeFunction& f);

double path_integral(const Graph& g, const EdgeFunction& f, const PathChain& path);
// Indicator chain of a path: +1 per traversed orientation, accumulated.
EdgeFunction path_chain(const Graph& g, const PathChain& path);

// Fundamental cycles of a breadth-first spanning forest.
std::vector<EdgeFunction> cycle_space_basis(const Graph& g);
// Tree path from the component root to v (breadth-first forest).
PathChain tree_path(const Graph& g, int v);
// h(v) = integral of f along the tree path from the component root to v.
VertexFunction potential(const Graph& g, const EdgeFunction& f);
// f integrates to zero along every fundamental cycle.
bool is_cocycle(const Graph& g, const EdgeFunction& f, double tol = 1e-10);

struct HodgeParts {
  EdgeFunction cycle_part;
  EdgeFunction cut_part;
};
// cut_part = delta h with h the minimum-norm solution of (delta^T delta) h = delta^T f.
HodgeParts hodge_project(const Graph& g, const EdgeFunction& f);
// Dense orthogonal projector onto the cut space (image of delta).
Eigen::MatrixXd cut_projector(const Graph& g);
// Orthonormal basis (columns) of the cut space.
Eigen::MatrixXd cut_space_basis(const Graph& g);

struct NeumannResult {
  VertexFunction h;     // full vertex function, 0 on grounded vertices
  int iterations = 0;   // number of series terms summed
  double rate = 0;      // last observed term ratio
};
// Solves (A_U - id) h = b off the grounded set, where A_U averages over
// neighbors with grounded values fixed at 0, by h = -sum_k A_U^k b. Stops
// when ||A_U^k b||_{l^p(V,deg)} < tol * ||b||. `b` has one entry per vertex
// (grounded entries ignored).
NeumannResult neumann_inverse(const Graph& g, const std::vector<int>& grounded, const VertexFunction& b,
                              double p = 2.0, double tol = 1e-12, int max_iterations = 1000000);
// Direct sparse solve of the same Dirichlet problem.
VertexFunction dirichlet_solve(const Graph& g, const std::vector<int>& grounded, const VertexFunction& b);
// 1 - (spectral radius of the grounded averaging operator on l^2(V,deg)).
double amenability_margin(const Graph& g, const std::vector<int>& grounded);

}  // namespace sofdim
