#include "sofdim/graphcoh.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>

namespace sofdim {

Graph::Graph(int vertices, std::vector<std::pair<int, int>> edges, bool merge_duplicates) : n_(vertices) {
  if (vertices < 0) throw DimensionError("graph: vertex count must be nonnegative");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto& [u, v] = edges[i];
    if (u < 0 || v < 0 || u >= vertices || v >= vertices)
      throw ModelError("edges[" + std::to_string(i) + "]: endpoint out of range");
    if (u == v) throw ModelError("edges[" + std::to_string(i) + "]: self-loop at vertex " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::vector<std::pair<int, int>> sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end() && !merge_duplicates)
    throw ModelError("edges: duplicate edge {" + std::to_string(dup->first) + "," + std::to_string(dup->second) + "}");
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  edges_ = std::move(sorted);
  adj_.assign(n_, {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    adj_[edges_[e].first].emplace_back(edges_[e].second, static_cast<int>(e));
    adj_[edges_[e].second].emplace_back(edges_[e].first, static_cast<int>(e));
  }
}

int Graph::max_degree() const {
  int m = 0;
  for (const auto& a : adj_) m = std::max(m, static_cast<int>(a.size()));
  return m;
}

std::optional<std::pair<int, int>> Graph::find_edge(int u, int v) const {
  if (u < 0 || v < 0 || u >= n_ || v >= n_ || u == v) return std::nullopt;
  const std::pair<int, int> key{std::min(u, v), std::max(u, v)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return std::make_pair(static_cast<int>(it - edges_.begin()), u < v ? 1 : -1);
}

std::vector<int> Graph::component_of() const {
  std::vector<int> comp(n_, -1);
  int c = 0;
  for (int s = 0; s < n_; ++s) {
    if (comp[s] >= 0) continue;
    std::deque<int> q{s};
    comp[s] = c;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (auto [w, e] : adj_[u])
        if (comp[w] < 0) {
          comp[w] = c;
          q.push_back(w);
        }
    }
    ++c;
  }
  return comp;
}

int Graph::components() const {
  const auto c = component_of();
  return c.empty() ? 0 : *std::max_element(c.begin(), c.end()) + 1;
}

namespace {

void check_edge_fn(const Graph& g, const EdgeFunction& f) {
  if (f.size() != g.edges()) throw DimensionError("edge function length differs from the edge count");
}
void check_vertex_fn(const Graph& g, const VertexFunction& h) {
  if (h.size() != g.vertices()) throw DimensionError("vertex function length differs from the vertex count");
}

struct Forest {
  std::vector<int> parent;       // -1 at roots
  std::vector<int> parent_edge;  // edge to parent
  std::vector<int> depth;
  std::vector<char> tree_edge;
};

Forest bfs_forest(const Graph& g) {
  const int n = g.vertices();
  Forest f{std::vector<int>(n, -1), std::vector<int>(n, -1), std::vector<int>(n, -1),
           std::vector<char>(g.edges(), 0)};
  for (int s = 0; s < n; ++s) {
    if (f.depth[s] >= 0) continue;
    f.depth[s] = 0;
    std::deque<int> q{s};
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (auto [w, e] : g.incident(u))
        if (f.depth[w] < 0) {
          f.depth[w] = f.depth[u] + 1;
          f.parent[w] = u;
          f.parent_edge[w] = e;
          f.tree_edge[e] = 1;
          q.push_back(w);
        }
    }
  }
  return f;
}

// Adds the chain of the tree path a -> b (same component) to `chain`.
void add_tree_path(const Graph& g, const Forest& f, int a, int b, EdgeFunction& chain) {
  std::vector<int> up_b;
  while (f.depth[a] > f.depth[b]) {
    const int e = f.parent_edge[a];
    chain[e] += (g.edge_list()[e].first == a) ? 1.0 : -1.0;  // traverse a -> parent
    a = f.parent[a];
  }
  while (f.depth[b] > f.depth[a]) {
    up_b.push_back(b);
    b = f.parent[b];
  }
  while (a != b) {
    const int e = f.parent_edge[a];
    chain[e] += (g.edge_list()[e].first == a) ? 1.0 : -1.0;
    a = f.parent[a];
    up_b.push_back(b);
    b = f.parent[b];
  }
  // Descend from the meeting point to the original b.
  for (auto it = up_b.rbegin(); it != up_b.rend(); ++it) {
    const int v = *it;
    const int e = f.parent_edge[v];
    chain[e] += (g.edge_list()[e].second == v) ? 1.0 : -1.0;  // traverse parent -> v
  }
}

std::vector<char> grounded_mask(const Graph& g, const std::vector<int>& grounded) {
  std::vector<char> mask(g.vertices(), 0);
  for (int v : grounded) {
    if (v < 0 || v >= g.vertices()) throw ModelError("grounded vertex out of range");
    mask[v] = 1;
  }
  return mask;
}

void check_groundable(const Graph& g, const std::vector<char>& mask) {
  for (int v = 0; v < g.vertices(); ++v)
    if (!mask[v] && g.degree(v) == 0) throw ModelError("vertex " + std::to_string(v) + " is isolated");
  const auto comp = g.component_of();
  std::vector<char> has(g.components(), 0);
  for (int v = 0; v < g.vertices(); ++v)
    if (mask[v]) has[comp[v]] = 1;
  for (int v = 0; v < g.vertices(); ++v)
    if (!has[comp[v]])
      throw SpectralError("component of vertex " + std::to_string(v) +
                          " has no grounded vertex; the averaging operator has norm 1");
}

double weighted_norm(const Graph& g, const VertexFunction& h, const std::vector<char>& mask, double p) {
  double s = 0;
  for (int v = 0; v < g.vertices(); ++v)
    if (!mask[v]) s += g.degree(v) * (p == 2.0 ? h[v] * h[v] : std::pow(std::abs(h[v]), p));
  return std::pow(s, 1.0 / p);
}

VertexFunction average(const Graph& g, const VertexFunction& h, const std::vector<char>& mask) {
  VertexFunction out = VertexFunction::Zero(g.vertices());
  for (int v = 0; v < g.vertices(); ++v) {
    if (mask[v]) continue;
    double s = 0;
    for (auto [w, e] : g.incident(v))
      if (!mask[w]) s += h[w];
    out[v] = s / g.degree(v);
  }
  return out;
}

}  // namespace

double edge_value(const Graph& g, const EdgeFunction& f, int u, int v) {
  check_edge_fn(g, f);
  auto e = g.find_edge(u, v);
  if (!e) throw PathError("no edge {" + std::to_string(u) + "," + std::to_string(v) + "}");
  return e->second * f[e->first];
}

EdgeFunction delta(const Graph& g, const VertexFunction& h) {
  check_vertex_fn(g, h);
  EdgeFunction f(g.edges());
  for (int e = 0; e < g.edges(); ++e) f[e] = h[g.edge_list()[e].second] - h[g.edge_list()[e].first];
  return f;
}

VertexFunction boundary(const Graph& g, const EdgeFunction& f) {
  check_edge_fn(g, f);
  VertexFunction b = VertexFunction::Zero(g.vertices());
  for (int e = 0; e < g.edges(); ++e) {
    b[g.edge_list()[e].first] += f[e];
    b[g.edge_list()[e].second] -= f[e];
  }
  return b;
}

double path_integral(const Graph& g, const EdgeFunction& f, const PathChain& path) {
  check_edge_fn(g, f);
  double s = 0;
  for (std::size_t j = 1; j < path.size(); ++j) {
    auto e = g.find_edge(path[j - 1], path[j]);
    if (!e)
      throw PathError("path step " + std::to_string(j) + ": {" + std::to_string(path[j - 1]) + "," +
                      std::to_string(path[j]) + "} is not an edge");
    s += e->second * f[e->first];
  }
  return s;
}

EdgeFunction path_chain(const Graph& g, const PathChain& path) {
  EdgeFunction c = EdgeFunction::Zero(g.edges());
  for (std::size_t j = 1; j < path.size(); ++j) {
    auto e = g.find_edge(path[j - 1], path[j]);
    if (!e) throw PathError("path step " + std::to_string(j) + " is not an edge");
    c[e->first] += e->second;
  }
  return c;
}

std::vector<EdgeFunction> cycle_space_basis(const Graph& g) {
  const Forest f = bfs_forest(g);
  std::vector<EdgeFunction> basis;
  for (int e = 0; e < g.edges(); ++e) {
    if (f.tree_edge[e]) continue;
    auto [u, v] = g.edge_list()[e];
    EdgeFunction c = EdgeFunction::Zero(g.edges());
    c[e] = 1.0;                    // u -> v
    add_tree_path(g, f, v, u, c);  // back to u through the tree
    basis.push_back(std::move(c));
  }
  return basis;
}

PathChain tree_path(const Graph& g, int v) {
  if (v < 0 || v >= g.vertices()) throw PathError("tree_path: vertex out of range");
  const Forest f = bfs_forest(g);
  PathChain p{v};
  while (f.parent[v] >= 0) {
    v = f.parent[v];
    p.push_back(v);
  }
  std::reverse(p.begin(), p.end());
  return p;
}

VertexFunction potential(const Graph& g, const EdgeFunction& f) {
  check_edge_fn(g, f);
  const Forest fo = bfs_forest(g);
  VertexFunction h = VertexFunction::Zero(g.vertices());
  std::vector<int> order(g.vertices());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fo.depth[a] < fo.depth[b]; });
  for (int v : order)
    if (fo.parent[v] >= 0) h[v] = h[fo.parent[v]] + edge_value(g, f, fo.parent[v], v);
  return h;
}

bool is_cocycle(const Graph& g, const EdgeFunction& f, double tol) {
  check_edge_fn(g, f);
  for (const auto& c : cycle_space_basis(g))
    if (std::abs(c.dot(f)) > tol) return false;
  return true;
}

HodgeParts hodge_project(const Graph& g, const EdgeFunction& f) {
  check_edge_fn(g, f);
  const int n = g.vertices();
  const auto comp = g.component_of();
  // Pin the first vertex of each component; index the rest.
  std::vector<int> idx(n, -1);
  std::vector<char> pinned_comp(g.components(), 0);
  int m = 0;
  for (int v = 0; v < n; ++v) {
    if (!pinned_comp[comp[v]]) {
      pinned_comp[comp[v]] = 1;
      continue;
    }
    idx[v] = m++;
  }
  // delta^T delta h = delta^T f, with delta^T f = -boundary(f).
  const VertexFunction rhs_full = -boundary(g, f);
  VertexFunction h = VertexFunction::Zero(n);
  if (m > 0) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int v = 0; v < n; ++v)
      if (idx[v] >= 0) trip.emplace_back(idx[v], idx[v], g.degree(v));
    for (auto [u, v] : g.edge_list())
      if (idx[u] >= 0 && idx[v] >= 0) {
        trip.emplace_back(idx[u], idx[v], -1.0);
        trip.emplace_back(idx[v], idx[u], -1.0);
      }
    Eigen::SparseMatrix<double> L(m, m);
    L.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs(m);
    for (int v = 0; v < n; ++v)
      if (idx[v] >= 0) rhs[idx[v]] = rhs_full[v];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
    if (solver.info() != Eigen::Success) throw SpectralError("hodge_project: Laplacian factorization failed");
    const Eigen::VectorXd x = solver.solve(rhs);
    for (int v = 0; v < n; ++v)
      if (idx[v] >= 0) h[v] = x[idx[v]];
  }
  // Mean zero per component (does not change delta h).
  std::vector<double> sum(g.components(), 0.0);
  std::vector<int> cnt(g.components(), 0);
  for (int v = 0; v < n; ++v) {
    sum[comp[v]] += h[v];
    ++cnt[comp[v]];
  }
  for (int v = 0; v < n; ++v) h[v] -= sum[comp[v]] / cnt[comp[v]];
  HodgeParts parts;
  parts.cut_part = delta(g, h);
  parts.cycle_part = f - parts.cut_part;
  return parts;
}

Eigen::MatrixXd cut_space_basis(const Graph& g) {
  const int r = g.vertices() - g.components();
  if (r == 0 || g.edges() == 0) return Eigen::MatrixXd(g.edges(), 0);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(g.edges(), g.vertices());
  for (int e = 0; e < g.edges(); ++e) {
    B(e, g.edge_list()[e].first) = -1.0;
    B(e, g.edge_list()[e].second) = 1.0;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(r);
}

Eigen::MatrixXd cut_projector(const Graph& g) {
  const Eigen::MatrixXd Q = cut_space_basis(g);
  return Q * Q.transpose();
}

NeumannResult neumann_inverse(const Graph& g, const std::vector<int>& grounded, const VertexFunction& b,
                              double p, double tol, int max_iterations) {
  check_vertex_fn(g, b);
  if (!(p >= 1)) throw ParameterError("neumann_inverse: p must be >= 1");
  if (!(tol > 0)) throw ParameterError("neumann_inverse: tol must be positive");
  const auto mask = grounded_mask(g, grounded);
  check_groundable(g, mask);
  NeumannResult res;
  res.h = VertexFunction::Zero(g.vertices());
  VertexFunction term = b;
  for (int v = 0; v < g.vertices(); ++v)
    if (mask[v]) term[v] = 0;
  const double b_norm = weighted_norm(g, term, mask, p);
  if (b_norm == 0) return res;
  std::vector<double> history;
  double norm = b_norm;
  while (norm >= tol * b_norm) {
    if (res.iterations >= max_iterations)
      throw SpectralError("neumann_inverse: no convergence after " + std::to_string(max_iterations) +
                          " terms (term ratio " + std::to_string(res.rate) + ")");
    res.h -= term;
    ++res.iterations;
    history.push_back(norm);
    if (history.size() > 10 && norm > history[history.size() - 11] * (1 + 1e-12)) {
      const double est = std::pow(norm / history[history.size() - 11], 0.1);
      throw SpectralError("neumann_inverse: series diverges, measured ||A|| ~ " + std::to_string(est));
    }
    term = average(g, term, mask);
    const double next = weighted_norm(g, term, mask, p);
    res.rate = next / norm;
    norm = next;
  }
  return res;
}

VertexFunction dirichlet_solve(const Graph& g, const std::vector<int>& grounded, const VertexFunction& b) {
  check_vertex_fn(g, b);
  const auto mask = grounded_mask(g, grounded);
  check_groundable(g, mask);
  const int n = g.vertices();
  std::vector<int> idx(n, -1);
  int m = 0;
  for (int v = 0; v < n; ++v)
    if (!mask[v]) idx[v] = m++;
  VertexFunction h = VertexFunction::Zero(n);
  if (m == 0) return h;
  // (A_U - id) h = b  <=>  (D - Adj_U) h = -D b
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs(m);
  for (int v = 0; v < n; ++v) {
    if (idx[v] < 0) continue;
    trip.emplace_back(idx[v], idx[v], g.degree(v));
    for (auto [w, e] : g.incident(v))
      if (idx[w] >= 0) trip.emplace_back(idx[v], idx[w], -1.0);
    rhs[idx[v]] = -g.degree(v) * b[v];
  }
  Eigen::SparseMatrix<double> M(m, m);
  M.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(M);
  if (solver.info() != Eigen::Success) throw SpectralError("dirichlet_solve: factorization failed");
  const Eigen::VectorXd x = solver.solve(rhs);
  for (int v = 0; v < n; ++v)
    if (idx[v] >= 0) h[v] = x[idx[v]];
  return h;
}

double amenability_margin(const Graph& g, const std::vector<int>& grounded) {
  const auto mask = grounded_mask(g, grounded);
  const int n = g.vertices();
  for (int v = 0; v < n; ++v)
    if (!mask[v] && g.degree(v) == 0) throw ModelError("vertex " + std::to_string(v) + " is isolated");
  std::vector<int> idx(n, -1);
  int m = 0;
  for (int v = 0; v < n; ++v)
    if (!mask[v]) idx[v] = m++;
  if (m == 0) return 1.0;
  // S = D^{-1/2} Adj_U D^{-1/2} is similar to A_U and symmetric.
  if (m <= 1500) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
    for (auto [u, v] : g.edge_list())
      if (idx[u] >= 0 && idx[v] >= 0) {
        const double w = 1.0 / std::sqrt(static_cast<double>(g.degree(u)) * g.degree(v));
        S(idx[u], idx[v]) = w;
        S(idx[v], idx[u]) = w;
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    const double rho = std::max(std::abs(es.eigenvalues().minCoeff()), std::abs(es.eigenvalues().maxCoeff()));
    return std::max(0.0, 1.0 - rho);
  }
  // Large graphs: inverse iteration on I - S and I + S. The top eigenvalue of
  // (I -/+ S)^{-1} is 1 / (1 -/+ lambda), and its gap ratio stays well below 1
  // even when the spectrum of S crowds near +-1.
  {
    const auto comp = g.component_of();
    std::vector<char> grounded_comp(g.components(), 0);
    for (int v = 0; v < n; ++v)
      if (mask[v]) grounded_comp[comp[v]] = 1;
    for (int v = 0; v < n; ++v)
      if (!grounded_comp[comp[v]]) return 0.0;
  }
  double margin = 1.0;
  for (double sign : {-1.0, 1.0}) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m; ++i) trip.emplace_back(i, i, 1.0);
    for (auto [u, v] : g.edge_list())
      if (idx[u] >= 0 && idx[v] >= 0) {
        const double w = sign / std::sqrt(static_cast<double>(g.degree(u)) * g.degree(v));
        trip.emplace_back(idx[u], idx[v], w);
        trip.emplace_back(idx[v], idx[u], w);
      }
    Eigen::SparseMatrix<double> M(m, m);
    M.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(M);
    if (solver.info() != Eigen::Success) return 0.0;  // singular: an eigenvalue at +-1
    std::mt19937_64 eng(0x6d617267u);
    std::normal_distribution<double> normal;
    Eigen::VectorXd x(m);
    for (int i = 0; i < m; ++i) x[i] = normal(eng);
    x.normalize();
    double mu = 0;
    for (int it = 0; it < 10000; ++it) {
      const Eigen::VectorXd y = solver.solve(x);
      const double next = x.dot(y);
      x = y / y.norm();
      const bool done = std::abs(next - mu) <= 1e-14 * next;
      mu = next;
      if (done) break;
    }
    if (!(mu > 0) || !std::isfinite(mu)) return 0.0;
    margin = std::min(margin, 1.0 / mu);
  }
  return std::clamp(margin, 0.0, 1.0);
}

}  // namespace sofdim
