// Acceptance battery: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Data files are read from SOFDIM_DATA_DIR.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "sofdim/covering.hpp"
#include "sofdim/graphcoh.hpp"
#include "sofdim/graphings.hpp"
#include "sofdim/homdim.hpp"
#include "sofdim/io.hpp"
#include "sofdim/sofic.hpp"
#include "support.hpp"

using namespace sofdim;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using testsupport::Rng;

namespace {

const std::string kData = SOFDIM_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string bracket(const DimEstimate& e) { return "[" + fmt("%.4f", e.lower) + ", " + fmt("%.4f", e.upper) + "]"; }

std::vector<int> all_atoms(const Model& m) {
  std::vector<int> a(m.rel.atoms());
  for (int i = 0; i < m.rel.atoms(); ++i) a[i] = i;
  return a;
}

std::vector<SoficApprox> exact_sigmas(const Model& m, const std::vector<int>& copies) {
  std::vector<SoficApprox> out;
  for (int c : copies) out.push_back(exact_model(m, c).sigma);
  return out;
}

EstimateOptions options(int samples, std::uint64_t seed, SamplerKind sampler) {
  EstimateOptions o;
  o.samples = samples;
  o.seed = seed;
  o.sampler = sampler;
  return o;
}

// Orbits of size 4, fiber dimension 2 everywhere: true dimension 2/4.
Outcome finite_orbit_formula() {
  const auto start = std::chrono::steady_clock::now();
  const Model m = load_model(kData + "/four_periodic.json");
  const GeneratingSpec spec = constant_fiber_spec(m, {2, 2});
  const double truth = orbit_dimension(spec.profile);
  EstimateGrid grid;
  grid.eps = {0.05, 0.1, 0.2};
  const DimEstimate e =
      estimate_dim(spec, exact_sigmas(m, {15, 30, 60}), grid, options(2000, 1, SamplerKind::Transversal));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = e.upper <= 0.55 && e.lower >= 0.35 && e.lower <= truth && truth <= e.upper && seconds <= 600;
  return {ok, "bracket " + bracket(e) + " for " + fmt("%.2f", truth) + ", " + fmt("%.0f s", seconds)};
}

// L^2 of the 4-periodic relation, dimension 1.
Outcome regular_representation() {
  const Model m = load_model(kData + "/four_periodic.json");
  const GeneratingSpec spec = regular_spec(m, all_atoms(m));
  EstimateGrid grid;
  grid.eps = {0.05, 0.1, 0.2};
  grid.delta = {0.1};
  const DimEstimate e = estimate_dim(spec, exact_sigmas(m, {60}), grid, options(500, 2, SamplerKind::Regular));
  double alpha = 0;
  for (const ScaleRow& r : e.per_scale)
    if (r.d == 480 && r.delta == 0.1) alpha = std::max(alpha, r.alpha_hat);
  const bool ok = e.support_bound <= 1.0 && e.upper <= 1.0 && alpha > 0.5 && e.lower >= 0.6;
  return {ok, "support " + fmt("%.3f", e.support_bound) + ", bracket " + bracket(e) + ", alpha_hat " +
                  fmt("%.3f", alpha)};
}

// L^2(R) q for a diagonal projection of trace 1/4.
Outcome projection_trace() {
  const Model m = load_model(kData + "/four_periodic.json");
  const std::vector<int> points{0, 4};
  const double trace = m.rel.space().mass(points);
  const GeneratingSpec spec = regular_spec(m, points);
  EstimateGrid grid;
  grid.eps = {0.05, 0.1, 0.2};
  const DimEstimate e = estimate_dim(spec, exact_sigmas(m, {60}), grid, options(500, 3, SamplerKind::Regular));
  const bool ok = e.lower <= trace && trace <= e.upper && e.upper - e.lower <= 0.3;
  return {ok, "trace " + fmt("%.2f", trace) + ", bracket " + bracket(e)};
}

// Five models, five generating graphings each.
Outcome c1_independence() {
  Rng rng(401);
  int models_ok = 0;
  double worst_gap = 0;
  for (int model = 0; model < 5; ++model) {
    const Model m = testsupport::random_uniform_model(rng, testsupport::uniform_int(rng, 2, 3), 4);
    bool same = true;
    Rational first;
    for (int g = 0; g < 5; ++g) {
      const Graphing phi = testsupport::random_generating_graphing(rng, m.rel, testsupport::uniform_int(rng, 1, 3), 0.3);
      const C1Exact c = c1_exact_finite(phi);
      if (g == 0) first = c.exact;
      same = same && c.generates && c.exact == first;
      EstimateGrid grid;
      grid.eps = {0.05, 0.1};
      const DimEstimate e = c1_estimate(phi, exact_sigmas(phi.as_model(), {8}), grid,
                                        options(150, 10 + g, SamplerKind::Transversal));
      const double gap = std::max({0.0, e.lower - c.value, c.value - e.upper});
      worst_gap = std::max(worst_gap, gap);
      same = same && gap <= 0.1;
    }
    models_ok += same;
  }
  return {models_ok == 5, std::to_string(models_ok) + "/5 models constant and bracketed, worst gap " +
                              fmt("%.3g", worst_gap)};
}

Outcome hodge_suite() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(501);
  double idem = 0, orth = 0, recomp = 0, closed = 0, dual = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = testsupport::uniform_int(rng, 2, 200);
    const Graph g = testsupport::random_graph(rng, n, 2.0 / n);
    const MatrixXd P = cut_projector(g);
    idem = std::max(idem, (P * P - P).norm());
    const EdgeFunction f = testsupport::random_vector(rng, g.edges());
    const HodgeParts parts = hodge_project(g, f);
    orth = std::max(orth, std::abs(parts.cycle_part.dot(parts.cut_part)));
    recomp = std::max(recomp, (parts.cycle_part + parts.cut_part - f).cwiseAbs().maxCoeff());
    closed = std::max(closed, boundary(g, parts.cycle_part).norm());
    for (int pair = 0; pair < 5; ++pair) {
      const EdgeFunction e = testsupport::random_vector(rng, g.edges());
      const VertexFunction h = testsupport::random_vector(rng, g.vertices());
      dual = std::max(dual, std::abs(boundary(g, e).dot(h) + e.dot(delta(g, h))));
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = idem <= 1e-10 && orth <= 1e-10 && recomp <= 1e-12 && closed <= 1e-10 && dual <= 1e-12 && seconds <= 60;
  return {ok, "idempotency " + fmt("%.1e", idem) + ", orthogonality " + fmt("%.1e", orth) + ", recomposition " +
                  fmt("%.1e", recomp) + ", cycle boundary " + fmt("%.1e", closed) + ", duality " + fmt("%.1e", dual) +
                  ", " + fmt("%.1f s", seconds)};
}

Outcome neumann_vs_direct() {
  Rng rng(601);
  const double tol = 1e-13;
  double worst_diff = 0;
  int bound_violations = 0, graphs = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = testsupport::uniform_int(rng, 5, 500);
    const Graph g = testsupport::random_connected_graph(rng, n, 4.0 / n);
    std::vector<int> grounded;
    for (int v = 0; v < n; ++v)
      if (v == 0 || testsupport::uniform_real(rng) < 0.05) grounded.push_back(v);
    const VectorXd b = testsupport::random_vector(rng, n);
    const NeumannResult r = neumann_inverse(g, grounded, b, 2.0, tol, 1000000);
    const VertexFunction direct = dirichlet_solve(g, grounded, b);
    worst_diff = std::max(worst_diff, (r.h - direct).cwiseAbs().maxCoeff());
    const double margin = amenability_margin(g, grounded);
    if (margin < 1 && r.iterations > std::log(tol) / std::log(1 - margin) + 2) ++bound_violations;
    ++graphs;
  }
  return {worst_diff <= 1e-8 && bound_violations == 0,
          std::to_string(graphs) + " graphs, max difference " + fmt("%.1e", worst_diff) + ", iteration bound violations " +
              std::to_string(bound_violations)};
}

// Volume-packing bound on point clouds drawn from a thickened subspace of the
// unit ball; the volume fraction of that set is measured by Monte Carlo.
Outcome packing_consistency() {
  Rng rng(701);
  const NormSelector rho = NormSelector::lp(2);
  int violations = 0, trials = 0;
  double worst = 1;
  for (int d = 4; d <= 6; ++d)
    for (double eps : {0.05, 0.1, 0.2})
      for (int trial = 0; trial < 50; ++trial) {
        const int k = testsupport::uniform_int(rng, 1, d);
        const double thickness = testsupport::uniform_real(rng, 0.05, 1.0);
        Eigen::HouseholderQR<MatrixXd> qr(testsupport::random_matrix(rng, d, k));
        const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(d, k);
        const auto inside = [&](const VectorXd& x) {
          return (x - Q * (Q.transpose() * x)).norm() / std::sqrt(double(d)) <= thickness;
        };
        std::vector<VectorXd> cloud;
        int hits = 0;
        const int draws = 4000;
        for (int s = 0; s < draws; ++s) {
          const VectorXd x = sample_ball(d, 1, 7000 + trials, s);
          if (!inside(x)) continue;
          ++hits;
          if (cloud.size() < 12) cloud.push_back(x);
        }
        ++trials;
        if (hits == 0) continue;
        const double alpha = std::pow(double(hits) / draws, 1.0 / d);
        PointCloud c;
        c.d = d;
        c.points = cloud;
        const double ratio = double(d_eps_exact(c, eps, rho)) / d;
        const double margin = ratio - (kappa(alpha * 0.9, eps, 2).value - 0.15);
        worst = std::min(worst, margin);
        if (margin < 0) ++violations;
      }
  const double limit = kappa(0.5, 1e-4, 2).value;
  const bool ok = violations == 0 && limit >= 0.99;
  return {ok, std::to_string(trials - violations) + "/" + std::to_string(trials) + " clouds satisfy the bound (worst slack " +
                  fmt("%.3f", worst) + "); kappa(0.5, 1e-4) = " + fmt("%.4f", limit) + " against 0.99"};
}

std::vector<Model> bundled_models() {
  return {load_model(kData + "/four_periodic.json"), load_model(kData + "/finite_orbits.json"),
          load_graphing(kData + "/treeing.json").as_model(), load_graphing(kData + "/cycle_graphing.json").as_model()};
}

// Subadditivity over a subrepresentation and rescaling under compression.
Outcome subadditivity_compression() {
  int exact_fail = 0, estimate_fail = 0, checks = 0;
  for (const Model& m : bundled_models()) {
    const GeneratingSpec spec = constant_fiber_spec(m, std::vector<int>(m.rel.blocks().size(), 2));
    const std::vector<MatrixXd> first(m.rel.atoms(), MatrixXd::Identity(2, 1));
    const GeneratingSpec sub = subrepresentation_spec(spec, first), quo = quotient_spec(spec, first);
    std::vector<int> A;
    for (const auto& b : m.rel.blocks()) A.push_back(b.front());
    const CompressedSpec comp = compress_spec(spec, A);
    const Rational mass = m.rel.space().exact_mass(A);

    const Rational full = orbit_dimension_exact(spec.profile);
    if (!(full <= orbit_dimension_exact(sub.profile) + orbit_dimension_exact(quo.profile))) ++exact_fail;
    if (orbit_dimension_exact(comp.spec.profile) * mass != full) ++exact_fail;

    EstimateGrid grid;
    grid.eps = {0.1};
    const EstimateOptions opt = options(200, 5, SamplerKind::Transversal);
    const auto est = [&](const GeneratingSpec& s) { return estimate_dim(s, exact_sigmas(s.model, {12}), grid, opt); };
    const DimEstimate ev = est(spec), es = est(sub), eq = est(quo), ec = est(comp.spec);
    if (ev.lower > es.upper + eq.upper + 0.1) ++estimate_fail;
    if (ec.lower * comp.mass > ev.upper + 0.1 || ev.lower > ec.upper * comp.mass + 0.1) ++estimate_fail;
    checks += 2;
  }
  return {exact_fail == 0 && estimate_fail == 0,
          std::to_string(checks) + " exact and " + std::to_string(checks) + " estimated inequalities, failures " +
              std::to_string(exact_fail) + " exact, " + std::to_string(estimate_fail) + " estimated"};
}

Outcome cost_identities() {
  std::vector<Graphing> graphings{load_graphing(kData + "/treeing.json"), load_graphing(kData + "/cycle_graphing.json")};
  for (const std::string file : {"/four_periodic.json", "/finite_orbits.json"}) {
    const Model m = load_model(kData + file);
    graphings.push_back(Graphing{m.rel, m.generators});
  }
  int failures = 0, treeings = 0;
  for (const Graphing& phi : graphings) {
    const CostResult c = cost(phi);  // throws if the two formulas differ
    if (std::abs(c.value - c.half_degree) > 1e-12) ++failures;
    if (!is_treeing(phi)) continue;
    ++treeings;
    const C1Exact c1 = c1_exact_finite(phi);
    bool no_cycles = true;
    for (const MatrixXd& z : cycle_subspaces(phi)) no_cycles = no_cycles && z.cols() == 0;
    EstimateGrid grid;
    grid.eps = {0.05, 0.1};
    const DimEstimate e = c1_estimate(phi, exact_sigmas(phi.as_model(), {20}), grid, options(200, 9, SamplerKind::Transversal));
    const double value = static_cast<double>(c.exact);
    if (c1.exact != c.exact || !no_cycles || e.lower > value || e.upper < value) ++failures;
  }
  return {failures == 0 && treeings > 0, std::to_string(graphings.size()) + " graphings, " + std::to_string(treeings) +
                                              " treeings, failures " + std::to_string(failures)};
}

Outcome transfer_identity() {
  Rng rng(1001);
  int holds = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = testsupport::uniform_int(rng, 2, 12);
    const Graph a = testsupport::random_connected_graph(rng, n, testsupport::uniform_real(rng, 0.0, 0.6));
    const Graph b = testsupport::random_connected_graph(rng, n, testsupport::uniform_real(rng, 0.0, 0.6));
    holds += transfer_rank_identity(a, b).holds;
  }
  return {holds == 50, std::to_string(holds) + "/50 pairs"};
}

// Same relation under two generating sequences, two product-norm weightings,
// and two generator sets.
Outcome invariance_battery() {
  const Model base = load_model(kData + "/four_periodic.json");
  Model other = base;
  // g0^2 together with an involution swapping neighbours also generates every orbit.
  other.generators = {compose(base.generators[0], base.generators[0]),
                      PartialMap(8, {{0, 1}, {1, 0}, {2, 3}, {3, 2}, {4, 5}, {5, 4}, {6, 7}, {7, 6}})};
  std::vector<DimEstimate> runs;
  for (const Model& m : {base, other})
    for (int seq = 0; seq < 2; ++seq)
      for (double ratio : {2.0, 4.0}) {
        GeneratingSpec spec = constant_fiber_spec(m, {1, 1});
        if (seq == 1) {
          // Fields on the last atom of each orbit, with a second redundant field.
          std::vector<VectorXd> f1(8, VectorXd::Zero(1)), f2(8, VectorXd::Zero(1));
          f1[3][0] = f1[7][0] = 1;
          f2[1][0] = 0.5;
          f2[6][0] = -2;
          spec.fields = {VectorField(m.rel.space(), f1), VectorField(m.rel.space(), f2)};
          spec.validate();
        }
        EstimateGrid grid;
        grid.eps = {0.05, 0.1, 0.2};
        grid.ratio = ratio;
        runs.push_back(estimate_dim(spec, exact_sigmas(m, {15}), grid, options(200, 11, SamplerKind::Transversal)));
      }
  double max_lower = 0, min_upper = 1e9;
  for (const DimEstimate& e : runs) {
    max_lower = std::max(max_lower, e.lower);
    min_upper = std::min(min_upper, e.upper);
  }
  return {max_lower <= min_upper, std::to_string(runs.size()) + " brackets, max lower " + fmt("%.4f", max_lower) +
                                      ", min upper " + fmt("%.4f", min_upper)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"finite-orbit dimension formula", finite_orbit_formula},
      {"regular representation dimension", regular_representation},
      {"projection trace dimension", projection_trace},
      {"c1 graphing independence", c1_independence},
      {"Hodge decomposition suite", hodge_suite},
      {"Neumann series against direct solve", neumann_vs_direct},
      {"packing bound consistency", packing_consistency},
      {"subadditivity and compression", subadditivity_compression},
      {"cost identities", cost_identities},
      {"transfer rank identity", transfer_identity},
      {"invariance battery", invariance_battery},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
