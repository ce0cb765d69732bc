#include "sofdim/graphings.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace sofdim {

void Graphing::validate() const {
  const int n = rel.atoms();
  for (std::size_t i = 0; i < morphisms.size(); ++i) {
    const auto& g = morphisms[i];
    const std::string tag = "morphisms[" + std::to_string(i) + "]";
    if (g.size() != n) throw ModelError(tag + ": size differs from the atom count");
    for (auto [s, t] : g.pairs()) {
      if (!rel.related(s, t))
        throw ModelError(tag + ": pair (" + std::to_string(s) + "," + std::to_string(t) + ") leaves its orbit");
      if (std::abs(rel.space().weight(s) - rel.space().weight(t)) > 1e-12)
        throw ModelError(tag + ": pair (" + std::to_string(s) + "," + std::to_string(t) +
                         ") joins atoms of different mass");
    }
  }
}

CostResult cost(const Graphing& phi) {
  phi.validate();
  const auto& space = phi.rel.space();
  CostResult r;
  Rational dom_exact = 0;
  std::vector<int> deg(phi.rel.atoms(), 0);
  for (const auto& m : phi.morphisms)
    for (auto [s, t] : m.pairs()) {
      r.value += space.weight(s);
      dom_exact += space.exact_weight(s);
      ++deg[s];
      ++deg[t];
    }
  Rational half_exact = 0;
  for (int x = 0; x < phi.rel.atoms(); ++x) {
    r.half_degree += 0.5 * space.weight(x) * deg[x];
    half_exact += space.exact_weight(x) * deg[x];
  }
  half_exact /= 2;
  if (std::abs(r.value - r.half_degree) > 1e-12)
    throw ConsistencyError("cost: domain-mass sum " + std::to_string(r.value) + " differs from half degree integral " +
                           std::to_string(r.half_degree));
  if (dom_exact != half_exact)
    throw ConsistencyError("cost: domain-mass sum " + to_string(dom_exact) +
                           " differs exactly from half degree integral " + to_string(half_exact));
  r.exact = dom_exact;
  return r;
}

namespace {

std::vector<int> local_index(const FinRel& rel) {
  std::vector<int> loc(rel.atoms());
  for (const auto& b : rel.blocks())
    for (std::size_t i = 0; i < b.size(); ++i) loc[b[i]] = static_cast<int>(i);
  return loc;
}

}  // namespace

Graph fiber_graph(const Graphing& phi, int block) {
  if (block < 0 || block >= static_cast<int>(phi.rel.blocks().size()))
    throw LookupError("fiber_graph: block index out of range");
  const auto& b = phi.rel.blocks()[block];
  const auto loc = local_index(phi.rel);
  std::vector<std::pair<int, int>> edges;
  for (const auto& m : phi.morphisms)
    for (auto [s, t] : m.pairs())
      if (s != t && phi.rel.orbit_of(s) == block) edges.emplace_back(loc[s], loc[t]);
  return Graph(static_cast<int>(b.size()), std::move(edges), /*merge_duplicates=*/true);
}

bool generates(const Graphing& phi) {
  for (std::size_t o = 0; o < phi.rel.blocks().size(); ++o)
    if (fiber_graph(phi, static_cast<int>(o)).components() != 1) return false;
  return true;
}

bool is_treeing(const Graphing& phi) {
  for (std::size_t o = 0; o < phi.rel.blocks().size(); ++o) {
    const Graph g = fiber_graph(phi, static_cast<int>(o));
    int multi = 0;
    for (const auto& m : phi.morphisms)
      for (auto [s, t] : m.pairs())
        if (phi.rel.orbit_of(s) == static_cast<int>(o)) ++multi;
    if (multi != g.vertices() - g.components()) return false;
  }
  return true;
}

C1Exact c1_exact_finite(const Graphing& phi) {
  phi.validate();
  C1Exact r;
  r.exact = 0;
  for (std::size_t o = 0; o < phi.rel.blocks().size(); ++o) {
    const Graph g = fiber_graph(phi, static_cast<int>(o));
    const int size = g.vertices();
    const int comp = g.components();
    if (comp != 1) r.generates = false;
    Rational mass = 0;
    for (int x : phi.rel.blocks()[o]) mass += phi.rel.space().exact_weight(x);
    r.exact += mass * (size - comp) / size;
  }
  r.value = to_double(r.exact);
  return r;
}

GeneratingSpec edge_spec(const Graphing& phi) {
  phi.validate();
  const FinRel& rel = phi.rel;
  const auto loc = local_index(rel);
  std::vector<Graph> graphs;
  for (std::size_t o = 0; o < rel.blocks().size(); ++o) graphs.push_back(fiber_graph(phi, static_cast<int>(o)));
  GeneratingSpec spec;
  spec.model = phi.as_model();
  spec.profile.rel = rel;
  for (int x = 0; x < rel.atoms(); ++x) spec.profile.dims.push_back(graphs[rel.orbit_of(x)].edges());
  for (const auto& m : phi.morphisms) {
    std::vector<Eigen::VectorXd> fib;
    for (int x = 0; x < rel.atoms(); ++x) fib.push_back(Eigen::VectorXd::Zero(spec.profile.dims[x]));
    for (auto [s, t] : m.pairs()) {
      if (s == t) continue;
      const auto e = graphs[rel.orbit_of(s)].find_edge(loc[s], loc[t]);
      fib[s][e->first] = e->second;
    }
    spec.fields.emplace_back(rel.space(), std::move(fib));
  }
  return spec;
}

std::vector<Eigen::MatrixXd> cycle_subspaces(const Graphing& phi) {
  std::vector<Eigen::MatrixXd> per_orbit;
  for (std::size_t o = 0; o < phi.rel.blocks().size(); ++o) {
    const Graph g = fiber_graph(phi, static_cast<int>(o));
    const auto cycles = cycle_space_basis(g);
    if (cycles.empty()) {
      per_orbit.emplace_back(g.edges(), 0);
      continue;
    }
    Eigen::MatrixXd C(g.edges(), static_cast<Eigen::Index>(cycles.size()));
    for (std::size_t i = 0; i < cycles.size(); ++i) C.col(static_cast<Eigen::Index>(i)) = cycles[i];
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
    per_orbit.push_back(qr.householderQ() * Eigen::MatrixXd::Identity(C.rows(), C.cols()));
  }
  std::vector<Eigen::MatrixXd> out;
  for (int x = 0; x < phi.rel.atoms(); ++x) out.push_back(per_orbit[phi.rel.orbit_of(x)]);
  return out;
}

GeneratingSpec c1_spec(const Graphing& phi) { return quotient_spec(edge_spec(phi), cycle_subspaces(phi)); }

DimEstimate c1_estimate(const Graphing& phi, const std::vector<SoficApprox>& sigmas, const EstimateGrid& grid,
                        const EstimateOptions& options) {
  return estimate_dim(c1_spec(phi), sigmas, grid, options);
}

namespace {

PathChain bfs_path(const Graph& g, int from, int to) {
  std::vector<int> prev(g.vertices(), -2);
  prev[from] = -1;
  std::deque<int> q{from};
  while (!q.empty()) {
    const int u = q.front();
    q.pop_front();
    if (u == to) break;
    std::vector<int> nbrs;
    for (auto [w, e] : g.incident(u)) nbrs.push_back(w);
    std::sort(nbrs.begin(), nbrs.end());
    for (int w : nbrs)
      if (prev[w] == -2) {
        prev[w] = u;
        q.push_back(w);
      }
  }
  if (prev[to] == -2)
    throw FamilyError("no path from " + std::to_string(from) + " to " + std::to_string(to) + " in the target graph");
  PathChain p;
  for (int v = to; v != -1; v = prev[v]) p.push_back(v);
  std::reverse(p.begin(), p.end());
  return p;
}

}  // namespace

PathFamily bfs_paths(const Graph& source, const Graph& target) {
  if (source.vertices() != target.vertices()) throw FamilyError("graphs have different vertex sets");
  PathFamily fam;
  for (auto [y, z] : source.edge_list()) fam[{y, z}] = bfs_path(target, y, z);
  return fam;
}

Eigen::MatrixXd transfer_operator(const Graph& source, const Graph& target, const PathFamily& paths) {
  if (source.vertices() != target.vertices()) throw FamilyError("graphs have different vertex sets");
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(target.edges(), source.edges());
  for (int e = 0; e < source.edges(); ++e) {
    const auto key = source.edge_list()[e];
    auto it = paths.find(key);
    if (it == paths.end())
      throw FamilyError("missing path for edge {" + std::to_string(key.first) + "," + std::to_string(key.second) + "}");
    const PathChain& p = it->second;
    if (p.empty() || p.front() != key.first || p.back() != key.second)
      throw PathError("path for edge {" + std::to_string(key.first) + "," + std::to_string(key.second) +
                      "} has wrong endpoints");
    T.col(e) = path_chain(target, p);
  }
  return T;
}

TransferCheck transfer_rank_identity(const Graph& source, const Graph& target, const std::vector<EdgeFunction>& loops) {
  const std::vector<EdgeFunction> L = loops.empty() ? cycle_space_basis(source) : loops;
  const Eigen::MatrixXd T = transfer_operator(source, target, bfs_paths(source, target));
  const PathFamily back = bfs_paths(target, source);
  std::vector<EdgeFunction> gens;
  for (const auto& l : L) {
    if (l.size() != source.edges()) throw DimensionError("loop length differs from the source edge count");
    gens.push_back(T * l);
  }
  for (int e = 0; e < target.edges(); ++e) {
    const EdgeFunction gamma = path_chain(source, back.at(target.edge_list()[e]));
    EdgeFunction v = T * gamma;
    v[e] -= 1.0;
    gens.push_back(std::move(v));
  }
  TransferCheck r;
  r.cycle_rank = target.edges() - target.vertices() + target.components();
  RationalMatrix M;
  for (const auto& v : gens) {
    if (boundary(target, v).cwiseAbs().maxCoeff() > 0) r.closed = false;
    std::vector<Rational> row;
    for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(to_rational(v[i]));
    M.push_back(std::move(row));
  }
  r.generator_rank = M.empty() ? 0 : rational_rank(std::move(M));
  r.holds = r.closed && r.generator_rank == r.cycle_rank;
  return r;
}

PresentationReport presentation_mass(const Graphing& phi, const std::vector<LoopField>& loops) {
  phi.validate();
  const FinRel& rel = phi.rel;
  const auto loc = local_index(rel);
  const int nb = static_cast<int>(rel.blocks().size());
  std::vector<Graph> graphs;
  for (int o = 0; o < nb; ++o) graphs.push_back(fiber_graph(phi, o));
  std::vector<RationalMatrix> rows(nb);
  PresentationReport rep;
  for (std::size_t j = 0; j < loops.size(); ++j) {
    const auto& field = loops[j];
    if (static_cast<int>(field.size()) != rel.atoms())
      throw DimensionError("loops[" + std::to_string(j) + "]: one path per atom required");
    for (int x = 0; x < rel.atoms(); ++x) {
      const PathChain& path = field[x];
      if (path.empty()) continue;
      if (path.front() != path.back())
        throw PathError("loops[" + std::to_string(j) + "] at atom " + std::to_string(x) + ": path is not closed");
      const int o = rel.orbit_of(x);
      PathChain local;
      for (int a : path) {
        if (a < 0 || a >= rel.atoms() || rel.orbit_of(a) != o)
          throw PathError("loops[" + std::to_string(j) + "] at atom " + std::to_string(x) + ": leaves the orbit");
        local.push_back(loc[a]);
      }
      const EdgeFunction chain = path_chain(graphs[o], local);
      if (chain.cwiseAbs().maxCoeff() > 0) {
        rep.mass += rel.space().weight(x);
        std::vector<Rational> row;
        for (Eigen::Index i = 0; i < chain.size(); ++i) row.push_back(to_rational(chain[i]));
        rows[o].push_back(std::move(row));
      }
    }
  }
  for (int o = 0; o < nb; ++o) {
    const int cyc = graphs[o].edges() - graphs[o].vertices() + graphs[o].components();
    const int have = rows[o].empty() ? 0 : rational_rank(rows[o]);
    rep.deficiency.push_back(cyc - have);
    if (cyc != have) rep.spanning = false;
  }
  return rep;
}

}  // namespace sofdim
