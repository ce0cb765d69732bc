// Graphings of finite relations: fiber graphs, cost, first l^p cohomology
// dimension (exact orbit formula and estimator), transfer operators.
#pragma once

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sofdim/core.hpp"
#include "sofdim/exact.hpp"
#include "sofdim/graphcoh.hpp"
#include "sofdim/homdim.hpp"

namespace sofdim {

struct Graphing {
  FinRel rel;
  std::vector<PartialMap> morphisms;

  // Throws ModelError naming "morphisms[i]".
  void validate() const;
  Model as_model() const { return Model{rel, morphisms}; }
};

struct CostResult {
  double value = 0;          // sum_j mu(dom phi_j)
  double half_degree = 0;    // (1/2) sum_x mu(x) deg(x), multiplicity counted
  Rational exact;            // both formulas agree exactly
};
// Throws ConsistencyError if the two formulas disagree (beyond 1e-12 in
// floating point, or at all in exact arithmetic).
CostResult cost(const Graphing& phi);

// Graph on the atoms of one orbit (local index = position in the sorted
// block), parallel edges merged and fixed points dropped.
Graph fiber_graph(const Graphing& phi, int block);

// Every fiber graph is connected.
bool generates(const Graphing& phi);
// Fiber multigraphs (with multiplicity and fixed points) have no cycles.
bool is_treeing(const Graphing& phi);

struct C1Exact {
  double value = 0;
  Rational exact;
  bool generates = true;
};
// sum_o mu(o) (|o| - #components(fiber graph of o)) / |o|.
C1Exact c1_exact_finite(const Graphing& phi);

// Edge representation: fiber l^2(E(fiber graph)) with trivial transport,
// generated by the edge indicators of the morphisms.
GeneratingSpec edge_spec(const Graphing& phi);
// Orthonormal cycle-space basis (columns) per atom, for quotienting edge_spec.
std::vector<Eigen::MatrixXd> cycle_subspaces(const Graphing& phi);
// Edge representation modulo the cycle space.
GeneratingSpec c1_spec(const Graphing& phi);

DimEstimate c1_estimate(const Graphing& phi, const std::vector<SoficApprox>& sigmas, const EstimateGrid& grid,
                        const EstimateOptions& options);

// Path family between two graphs on the same vertex set: for each reference
// edge {y<z} of the first graph, a path y -> z in the second. The opposite
// orientation uses the reversed path.
using PathFamily = std::map<std::pair<int, int>, PathChain>;

// Shortest paths by breadth-first search, ties broken by smallest neighbor.
PathFamily bfs_paths(const Graph& source, const Graph& target);

// Matrix (target edges x source edges) of f -> sum_{[y,z]} f(y,z) sigma_{yz}.
// Throws FamilyError for a missing path, PathError for an invalid one.
Eigen::MatrixXd transfer_operator(const Graph& source, const Graph& target, const PathFamily& paths);

struct TransferCheck {
  int generator_rank = 0;  // rank of {T L_j} together with {T gamma_vw - E_vw}
  int cycle_rank = 0;      // dim of the target cycle space
  bool closed = true;      // every generator has zero boundary
  bool holds = false;
};
// Exact rational rank check of the cycle-space identity for the target graph.
// `loops` span the source cycle space (the fundamental cycles by default).
TransferCheck transfer_rank_identity(const Graph& source, const Graph& target,
                                     const std::vector<EdgeFunction>& loops = {});

// A loop field: per atom, a closed path of atoms in that atom's orbit (empty
// path = no loop at that atom).
using LoopField = std::vector<PathChain>;

struct PresentationReport {
  double mass = 0;                  // sum_j mu(supp L_j)
  bool spanning = true;
  std::vector<int> deficiency;      // per orbit: cycle rank - provided rank
};
PresentationReport presentation_mass(const Graphing& phi, const std::vector<LoopField>& loops);

}  // namespace sofdim
