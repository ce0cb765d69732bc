#include <cmath>

#include "doctest.h"
#include "sofdim/graphcoh.hpp"
#include "support.hpp"

using namespace sofdim;
using testsupport::Rng;
using Eigen::VectorXd;

namespace {

Graph complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return Graph(n, e);
}

Graph path(int n) {
  std::vector<std::pair<int, int>> e;
  for (int v = 0; v + 1 < n; ++v) e.emplace_back(v, v + 1);
  return Graph(n, e);
}

Graph star(int leaves) {
  std::vector<std::pair<int, int>> e;
  for (int l = 1; l <= leaves; ++l) e.emplace_back(0, l);
  return Graph(leaves + 1, e);
}

VectorXd ones(int n) { return VectorXd::Ones(n); }

// Random vertex subset containing at least one vertex per component.
std::vector<int> random_grounding(Rng& rng, const Graph& g) {
  const auto comp = g.component_of();
  std::vector<int> first(g.components(), -1), out;
  for (int v = 0; v < g.vertices(); ++v) {
    if (first[comp[v]] < 0) {
      first[comp[v]] = v;
      out.push_back(v);
    } else if (testsupport::uniform_real(rng) < 0.15) {
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("graph construction") {
  const Graph g(4, {{2, 1}, {0, 3}});
  // Edges are stored sorted, each as (min, max).
  CHECK(g.edge_list() == std::vector<std::pair<int, int>>{{0, 3}, {1, 2}});
  CHECK(g.find_edge(2, 1) == std::make_pair(1, -1));
  CHECK(g.find_edge(1, 2) == std::make_pair(1, 1));
  CHECK_FALSE(g.find_edge(0, 1).has_value());
  CHECK(g.components() == 2);
  CHECK(g.max_degree() == 1);
  CHECK_THROWS_AS(Graph(3, {{1, 1}}), ModelError);
  CHECK_THROWS_AS(Graph(3, {{0, 3}}), ModelError);
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), ModelError);
  CHECK(Graph(3, {{0, 1}, {1, 0}}, true).edges() == 1);
  CHECK_THROWS_AS(Graph(-1, {}), DimensionError);
  CHECK(Graph(5, {}).components() == 5);
}

TEST_CASE("delta and boundary") {
  const Graph g = path(3);
  VectorXd h(3);
  h << 1, 4, 9;
  const EdgeFunction dh = delta(g, h);
  CHECK(dh[0] == 3.0);
  CHECK(dh[1] == 5.0);
  CHECK(edge_value(g, dh, 1, 0) == -3.0);
  CHECK_THROWS_AS(edge_value(g, dh, 0, 2), PathError);

  const Graph e(2, {{0, 1}});
  const VertexFunction b = boundary(e, ones(1));
  CHECK(b[0] == 1.0);
  CHECK(b[1] == -1.0);
  CHECK(boundary(g, delta(g, ones(3))).isZero(0.0));
  CHECK_THROWS_AS(delta(g, ones(2)), DimensionError);
  CHECK_THROWS_AS(boundary(g, ones(3)), DimensionError);
}

TEST_CASE("path integrals") {
  const Graph g = complete(4);
  VectorXd h(4);
  h << 0.5, -2, 3, 7;
  const EdgeFunction dh = delta(g, h);
  CHECK(path_integral(g, dh, {0, 2, 1, 3}) == doctest::Approx(h[3] - h[0]));
  CHECK(path_integral(g, dh, {1, 2, 3, 1}) == doctest::Approx(0.0));
  CHECK(path_integral(g, dh, {2}) == 0.0);
  CHECK_THROWS_AS(path_integral(path(3), delta(path(3), ones(3)), {0, 2}), PathError);
  // The chain of a closed walk has zero boundary.
  CHECK(boundary(g, path_chain(g, {0, 1, 2, 0})).isZero(0.0));
  const EdgeFunction back_and_forth = path_chain(g, {0, 1, 0});
  CHECK(back_and_forth.isZero(0.0));
}

TEST_CASE("cycle space and potentials") {
  CHECK(cycle_space_basis(complete(4)).size() == 3);
  CHECK(cycle_space_basis(path(6)).empty());
  CHECK(cycle_space_basis(star(5)).empty());
  const Graph c6(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
  const auto basis = cycle_space_basis(c6);
  REQUIRE(basis.size() == 1);
  CHECK(basis[0].cwiseAbs().sum() == 6.0);

  // The circulation around the hexagon is not a cocycle.
  EdgeFunction circ = path_chain(c6, {0, 1, 2, 3, 4, 5, 0});
  CHECK_FALSE(is_cocycle(c6, circ));
  VectorXd h(6);
  h << 3, 1, 4, 1, 5, 9;
  CHECK(is_cocycle(c6, delta(c6, h)));
  const VertexFunction pot = potential(c6, delta(c6, h));
  CHECK((pot - (h - VectorXd::Constant(6, h[0]))).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(tree_path(c6, 0) == PathChain{0});
  CHECK(tree_path(c6, 3).size() == 4);
  CHECK_THROWS_AS(tree_path(c6, 6), PathError);
}

TEST_CASE("hodge decomposition") {
  const Graph g = complete(4);
  const EdgeFunction f = path_chain(g, {0, 1, 2, 0}) + 0.5 * delta(g, VectorXd::LinSpaced(4, 0, 3));
  const HodgeParts parts = hodge_project(g, f);
  CHECK((parts.cycle_part + parts.cut_part - f).norm() < 1e-12);
  CHECK(std::abs(parts.cycle_part.dot(parts.cut_part)) < 1e-12);
  CHECK(boundary(g, parts.cycle_part).norm() < 1e-12);
  CHECK(is_cocycle(g, parts.cut_part));
  CHECK((parts.cut_part - 0.5 * delta(g, VectorXd::LinSpaced(4, 0, 3))).norm() < 1e-12);

  const Eigen::MatrixXd P = cut_projector(g);
  CHECK((P * P - P).norm() < 1e-12);
  CHECK((P - P.transpose()).norm() < 1e-12);
  CHECK(P.trace() == doctest::Approx(3.0));
  const Eigen::MatrixXd B = cut_space_basis(g);
  CHECK(B.cols() == 3);
  CHECK((B.transpose() * B - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
  CHECK(hodge_project(Graph(3, {}), EdgeFunction(0)).cut_part.size() == 0);
}

TEST_CASE("neumann_inverse closed forms") {
  SUBCASE("path grounded at both ends: h(v) = v (v - L)") {
    const int L = 8;
    const Graph g = path(L + 1);
    const NeumannResult r = neumann_inverse(g, {0, L}, ones(L + 1));
    for (int v = 0; v <= L; ++v) CHECK(r.h[v] == doctest::Approx(double(v) * (v - L)).epsilon(1e-9));
    CHECK(r.iterations > 0);
  }
  SUBCASE("star grounded at a leaf") {
    for (int n = 2; n <= 6; ++n) {
      const Graph g = star(n);
      const NeumannResult r = neumann_inverse(g, {1}, ones(n + 1));
      CHECK(r.h[0] == doctest::Approx(-(2.0 * n - 1)).epsilon(1e-9));
      CHECK(r.h[1] == 0.0);
      for (int l = 2; l <= n; ++l) CHECK(r.h[l] == doctest::Approx(-2.0 * n).epsilon(1e-9));
    }
  }
  SUBCASE("star grounded at the center needs one term") {
    const NeumannResult r = neumann_inverse(star(4), {0}, ones(5));
    CHECK(r.iterations == 1);
    CHECK(r.h[3] == -1.0);
  }
  SUBCASE("zero source") {
    const NeumannResult r = neumann_inverse(complete(5), {0}, VectorXd::Zero(5));
    CHECK(r.h.isZero(0.0));
    CHECK(r.iterations == 0);
    // Grounded entries of b are ignored.
    VectorXd b = VectorXd::Zero(5);
    b[0] = 7;
    CHECK(neumann_inverse(complete(5), {0}, b).h.isZero(0.0));
  }
  SUBCASE("other p converge to the same solution") {
    const Graph g = complete(6);
    const VertexFunction direct = dirichlet_solve(g, {0, 1}, ones(6));
    for (double p : {1.0, 1.5, 3.0}) CHECK((neumann_inverse(g, {0, 1}, ones(6), p).h - direct).norm() < 1e-9);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(neumann_inverse(path(4), {}, ones(4)), SpectralError);
    CHECK_THROWS_AS(neumann_inverse(Graph(4, {{0, 1}, {2, 3}}), {0}, ones(4)), SpectralError);
    CHECK_THROWS_AS(neumann_inverse(Graph(3, {{0, 1}}), {0}, ones(3)), ModelError);
    CHECK_NOTHROW(neumann_inverse(Graph(3, {{0, 1}}), {0, 2}, ones(3)));
    CHECK_THROWS_AS(neumann_inverse(path(4), {9}, ones(4)), ModelError);
    CHECK_THROWS_AS(neumann_inverse(path(4), {0}, ones(3)), DimensionError);
    CHECK_THROWS_AS(neumann_inverse(path(4), {0}, ones(4), 0.5), ParameterError);
    CHECK_THROWS_AS(neumann_inverse(path(4), {0}, ones(4), 2.0, 0.0), ParameterError);
    CHECK_THROWS_AS(neumann_inverse(path(40), {0}, ones(40), 2.0, 1e-12, 3), SpectralError);
  }
}

TEST_CASE("amenability_margin") {
  CHECK(amenability_margin(star(4), {0}) == doctest::Approx(1.0));
  CHECK(amenability_margin(path(3), {0, 1, 2}) == 1.0);
  double prev = 2;
  for (int n = 2; n <= 30; ++n) {
    const double m = amenability_margin(star(n), {1});
    CHECK(m == doctest::Approx(1 - std::sqrt((n - 1.0) / n)).epsilon(1e-10));
    CHECK(m < prev);
    prev = m;
  }
  // Ungrounded components leave norm 1 and margin 0.
  CHECK(amenability_margin(complete(4), {}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(amenability_margin(Graph(2, {}), {0}), ModelError);
  CHECK_THROWS_AS(amenability_margin(path(3), {5}), ModelError);
}

TEST_CASE("amenability_margin above the dense cutoff") {
  // Oracle: dense eigenvalues of the grounded averaging operator written as
  // D^{-1/2} Adj D^{-1/2} on the free vertices.
  const auto oracle = [](const Graph& g, const std::vector<int>& grounded) {
    std::vector<int> idx(g.vertices(), 0);
    for (int v : grounded) idx[v] = -1;
    int m = 0;
    for (int& i : idx)
      if (i == 0) i = m++;
      else i = -1;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
    for (auto [u, v] : g.edge_list())
      if (idx[u] >= 0 && idx[v] >= 0)
        S(idx[u], idx[v]) = S(idx[v], idx[u]) = 1.0 / std::sqrt(double(g.degree(u)) * g.degree(v));
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues();
    return 1.0 - std::max(-ev.minCoeff(), ev.maxCoeff());
  };
  SUBCASE("a long path grounded at one end mixes slowly") {
    const Graph g = path(1700);
    const double m = amenability_margin(g, {0});
    CHECK(m < 1e-5);
    CHECK(m == doctest::Approx(oracle(g, {0})).epsilon(1e-6));
  }
  SUBCASE("a sparse random graph") {
    Rng rng(65);
    const Graph g = testsupport::random_connected_graph(rng, 1600, 0.002);
    const std::vector<int> grounded{0, 1, 2};
    CHECK(amenability_margin(g, grounded) == doctest::Approx(oracle(g, grounded)).epsilon(1e-8));
  }
  SUBCASE("an ungrounded component") {
    std::vector<std::pair<int, int>> e;
    for (int v = 0; v + 1 < 1600; ++v)
      if (v != 799) e.emplace_back(v, v + 1);
    CHECK(amenability_margin(Graph(1600, e), {0}) == 0.0);
  }
}

TEST_CASE("property: boundary is minus the adjoint of delta") {
  Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = testsupport::random_graph(rng, testsupport::uniform_int(rng, 2, 15), 0.3);
    const VectorXd h = testsupport::random_vector(rng, g.vertices());
    const VectorXd f = testsupport::random_vector(rng, g.edges());
    CHECK(boundary(g, f).dot(h) == doctest::Approx(-f.dot(delta(g, h))).epsilon(1e-12));
  }
}

TEST_CASE("property: cycle space dimension and orthogonality") {
  Rng rng(62);
  for (int trial = 0; trial < 60; ++trial) {
    const Graph g = testsupport::random_graph(rng, testsupport::uniform_int(rng, 2, 14), 0.35);
    const auto basis = cycle_space_basis(g);
    CHECK(static_cast<int>(basis.size()) == g.edges() - g.vertices() + g.components());
    const VectorXd h = testsupport::random_vector(rng, g.vertices());
    for (const auto& c : basis) {
      CHECK(boundary(g, c).norm() < 1e-12);
      CHECK(std::abs(c.dot(delta(g, h))) < 1e-10);
    }
    CHECK(cut_space_basis(g).cols() == g.vertices() - g.components());
  }
}

TEST_CASE("property: cocycles are exactly the coboundaries") {
  Rng rng(63);
  for (int trial = 0; trial < 60; ++trial) {
    const Graph g = testsupport::random_graph(rng, testsupport::uniform_int(rng, 2, 12), 0.4);
    const VectorXd h = testsupport::random_vector(rng, g.vertices());
    const EdgeFunction dh = delta(g, h);
    REQUIRE(is_cocycle(g, dh));
    CHECK((delta(g, potential(g, dh)) - dh).norm() < 1e-10);
    const HodgeParts parts = hodge_project(g, testsupport::random_vector(rng, g.edges()));
    CHECK(is_cocycle(g, parts.cut_part, 1e-9));
    CHECK(boundary(g, parts.cycle_part).norm() < 1e-9);
  }
}

TEST_CASE("property: neumann series matches the direct solve within the iteration bound") {
  Rng rng(64);
  for (int trial = 0; trial < 40; ++trial) {
    const Graph g = testsupport::random_graph(rng, testsupport::uniform_int(rng, 3, 25), 0.2);
    const std::vector<int> grounded = random_grounding(rng, g);
    const VectorXd b = testsupport::random_vector(rng, g.vertices());
    const double tol = 1e-10;
    const NeumannResult r = neumann_inverse(g, grounded, b, 2.0, tol);
    const VertexFunction direct = dirichlet_solve(g, grounded, b);
    CHECK((r.h - direct).norm() <= 1e-6 * std::max(1.0, direct.norm()));
    const double margin = amenability_margin(g, grounded);
    REQUIRE(margin > 0);
    if (margin < 1) {
      const double bound = std::ceil(std::log(tol) / std::log(1 - margin)) + 1;
      CHECK(r.iterations <= bound);
      CHECK(r.rate <= 1 - margin + 1e-9);
    }
  }
}
