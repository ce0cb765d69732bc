// sofdim: command-line driver.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "json.hpp"
#include "sofdim/exact.hpp"
#include "sofdim/graphcoh.hpp"
#include "sofdim/graphings.hpp"
#include "sofdim/io.hpp"
#include "sofdim/rng.hpp"
#include "sofdim/version.hpp"

using nlohmann::ordered_json;
using namespace sofdim;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty())
    std::cout << text;
  else
    write_atomic(g.out, text);
}

ordered_json header(const std::string& command, const std::string& input) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["version"] = kVersion;
  j["command"] = command;
  j["input"] = input;
  return j;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

int cmd_validate(const std::string& path) {
  const std::string text = read_file(path);
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (!j.is_discarded() && j.is_object() && j.contains("images")) {
    const SoficApprox s = parse_sofic(text, path);
    std::cout << "ok: sofic approximation, d = " << s.d << ", " << s.images.size() << " images\n";
  } else if (!j.is_discarded() && j.is_object() && j.contains("edges")) {
    const Graph g = parse_graph(text, path);
    std::cout << "ok: graph, " << g.vertices() << " vertices, " << g.edges() << " edges\n";
  } else if (!j.is_discarded() && j.is_object() && j.contains("morphisms")) {
    const Graphing phi = parse_graphing(text, path);
    std::cout << "ok: graphing, " << phi.rel.atoms() << " atoms, " << phi.rel.blocks().size() << " orbits, "
              << phi.morphisms.size() << " morphisms\n";
  } else {
    const Model m = parse_model(text, path);
    std::cout << "ok: model, " << m.rel.atoms() << " atoms, " << m.rel.blocks().size() << " orbits, "
              << m.generators.size() << " generators\n";
  }
  return 0;
}

int cmd_experiment(const std::string& task, const std::string& path, const Globals& g) {
  cli::ExperimentConfig c = cli::load_config(path);
  c.task = task;
  if (g.seed) c.options.seed = *g.seed;
  if (!g.out.empty()) c.output = g.out;
  c.options.threads = g.threads;
  const cli::Report r = cli::run_experiment(c);
  if (c.output.empty()) {
    std::cout << r.json;
    return 0;
  }
  write_atomic(c.output, r.json);
  if (!r.csv.empty()) write_atomic(cli::csv_path_for(c.output), r.csv);
  return 0;
}

EdgeFunction random_edge_function(const Graph& graph, std::uint64_t seed) {
  auto eng = make_engine(seed, 0xC0, 0);
  std::normal_distribution<double> n(0.0, 1.0);
  EdgeFunction f(graph.edges());
  for (int e = 0; e < graph.edges(); ++e) f[e] = n(eng);
  return f;
}

int cmd_hodge(const std::string& path, const std::string& field_path, const Globals& g) {
  const Graph graph = load_graph(path);
  EdgeFunction f;
  if (field_path.empty()) {
    f = random_edge_function(graph, g.seed.value_or(0));
  } else {
    const auto j = nlohmann::json::parse(read_file(field_path));
    const auto vals = j.at("values").get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != graph.edges())
      throw DimensionError("values: expected one entry per edge");
    f = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  }
  const HodgeParts parts = hodge_project(graph, f);
  ordered_json j = header("coh hodge", path);
  j["seed"] = g.seed.value_or(0);
  ordered_json r;
  r["norm"] = f.norm();
  r["cut_norm"] = parts.cut_part.norm();
  r["cycle_norm"] = parts.cycle_part.norm();
  r["orthogonality"] = std::abs(parts.cut_part.dot(parts.cycle_part));
  r["reconstruction"] = (parts.cut_part + parts.cycle_part - f).norm();
  r["cycle_boundary"] = boundary(graph, parts.cycle_part).norm();
  r["cut_is_cocycle"] = is_cocycle(graph, parts.cut_part);
  r["cycle_part"] = to_vec(parts.cycle_part);
  j["result"] = r;
  emit(g, j.dump(2) + "\n");
  return 0;
}

std::vector<int> grounded_or_default(const std::vector<int>& grounded) {
  return grounded.empty() ? std::vector<int>{0} : grounded;
}

int cmd_neumann(const std::string& path, std::vector<int> grounded, double p, double tol, const Globals& g) {
  const Graph graph = load_graph(path);
  grounded = grounded_or_default(grounded);
  // Unit source on every non-grounded vertex.
  for (int v : grounded)
    if (v < 0 || v >= graph.vertices()) throw ModelError("grounded: vertex out of range");
  const VertexFunction b = VertexFunction::Ones(graph.vertices());
  const NeumannResult nr = neumann_inverse(graph, grounded, b, p, tol);
  const VertexFunction direct = dirichlet_solve(graph, grounded, b);
  ordered_json j = header("coh neumann", path);
  ordered_json r;
  r["grounded"] = grounded;
  r["iterations"] = nr.iterations;
  r["rate"] = nr.rate;
  r["direct_difference"] = (nr.h - direct).lpNorm<Eigen::Infinity>();
  r["h"] = to_vec(nr.h);
  j["result"] = r;
  emit(g, j.dump(2) + "\n");
  return 0;
}

int cmd_margin(const std::string& path, std::vector<int> grounded, const Globals& g) {
  const Graph graph = load_graph(path);
  grounded = grounded_or_default(grounded);
  ordered_json j = header("coh margin", path);
  ordered_json r;
  r["grounded"] = grounded;
  r["margin"] = amenability_margin(graph, grounded);
  j["result"] = r;
  emit(g, j.dump(2) + "\n");
  return 0;
}

int cmd_cost(const std::string& path, const Globals& g) {
  const Graphing phi = load_graphing(path);
  const CostResult cr = cost(phi);
  const C1Exact c1 = c1_exact_finite(phi);
  ordered_json j = header("graphing cost", path);
  ordered_json r;
  r["cost"] = cr.value;
  r["half_degree"] = cr.half_degree;
  r["exact"] = to_string(cr.exact);
  r["treeing"] = is_treeing(phi);
  r["generates"] = generates(phi);
  r["c1"] = c1.value;
  r["c1_exact"] = to_string(c1.exact);
  j["result"] = r;
  emit(g, j.dump(2) + "\n");
  return 0;
}

int cmd_c1(const std::string& path, const Globals& g) {
  const Graphing phi = load_graphing(path);
  const C1Exact c1 = c1_exact_finite(phi);
  ordered_json j = header("graphing c1", path);
  ordered_json r;
  r["c1"] = c1.value;
  r["exact"] = to_string(c1.exact);
  r["generates"] = c1.generates;
  j["result"] = r;
  emit(g, j.dump(2) + "\n");
  return 0;
}

// Compares fiber graphs orbit by orbit; without a second graphing the target
// is the complete graph on each orbit.
int cmd_transfer(const std::string& path, const std::string& other, const Globals& g) {
  const Graphing phi = load_graphing(path);
  std::optional<Graphing> psi;
  if (!other.empty()) {
    psi = load_graphing(other);
    if (psi->rel.blocks() != phi.rel.blocks() || psi->rel.space().weights() != phi.rel.space().weights())
      throw ModelError(other + ": relation differs from " + path);
  }
  ordered_json j = header("graphing transfer-check", path);
  ordered_json rows = ordered_json::array();
  bool all = true;
  for (std::size_t b = 0; b < phi.rel.blocks().size(); ++b) {
    const Graph source = fiber_graph(phi, static_cast<int>(b));
    Graph target;
    if (psi) {
      target = fiber_graph(*psi, static_cast<int>(b));
    } else {
      const int n = source.vertices();
      std::vector<std::pair<int, int>> edges;
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
      target = Graph(n, edges);
    }
    ordered_json row;
    row["orbit"] = b;
    if (source.components() != 1 || target.components() != 1) {
      row["skipped"] = "fiber graph not connected";
      all = false;
    } else {
      const TransferCheck tc = transfer_rank_identity(source, target);
      row["generator_rank"] = tc.generator_rank;
      row["cycle_rank"] = tc.cycle_rank;
      row["closed"] = tc.closed;
      row["holds"] = tc.holds;
      all = all && tc.holds;
    }
    rows.push_back(row);
  }
  j["result"] = ordered_json{{"orbits", rows}, {"holds", all}};
  emit(g, j.dump(2) + "\n");
  return all ? 0 : 1;
}

int cmd_quality(const std::string& model_path, const std::string& sofic_path, int length, const Globals& g) {
  const Model model = load_model(model_path);
  const SoficApprox sigma = load_sofic(sofic_path);
  const QualityReport q = quality_report(sigma, model, length, 20000, g.seed.value_or(0));
  ordered_json j = header("quality", sofic_path);
  j["model"] = model_path;
  ordered_json r;
  r["d"] = sigma.d;
  r["word_length"] = length;
  r["mult_defect"] = q.mult_defect;
  r["adj_defect"] = q.adj_defect;
  r["trace_defect"] = q.trace_defect;
  r["op_norm_bound"] = q.op_norm_bound;
  r["words_checked"] = q.words_checked;
  r["sampled"] = q.sampled;
  j["result"] = r;
  emit(g, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sofic l^p dimension and graph cohomology toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Random seed (overrides configs)");
  app.add_option("--out", g.out, "Write the report atomically to this path");
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);

  std::function<int()> action;

  std::string path, path2;
  auto* validate = app.add_subcommand("validate", "Check a model, graphing, graph, or sofic file");
  validate->add_option("file", path)->required();
  validate->callback([&] { action = [&] { return cmd_validate(path); }; });

  auto* dim = app.add_subcommand("dim", "Estimate the l^p dimension from an experiment config");
  dim->add_option("config", path)->required();
  dim->callback([&] { action = [&] { return cmd_experiment("dim", path, g); }; });

  auto* c1 = app.add_subcommand("c1", "Estimate the first l^p cohomology dimension of a graphing");
  c1->add_option("config", path)->required();
  c1->callback([&] { action = [&] { return cmd_experiment("c1", path, g); }; });

  auto* coh = app.add_subcommand("coh", "Graph cohomology tools");
  coh->require_subcommand(1);
  coh->fallthrough();
  std::string field_path;
  std::vector<int> grounded;
  double p = 2.0, tol = 1e-12;
  auto* hodge = coh->add_subcommand("hodge", "Split an edge function into cut and cycle parts");
  hodge->add_option("graph", path)->required();
  hodge->add_option("--field", field_path, "JSON {\"values\": [...]} aligned with the edge list");
  hodge->callback([&] { action = [&] { return cmd_hodge(path, field_path, g); }; });
  auto* neumann = coh->add_subcommand("neumann", "Neumann-series solve of the grounded Laplacian");
  neumann->add_option("graph", path)->required();
  neumann->add_option("--grounded", grounded, "Grounded vertices (default: 0)")->delimiter(',');
  neumann->add_option("--p", p, "Exponent of the stopping norm")->check(CLI::Range(1.0, 1e9));
  neumann->add_option("--tol", tol, "Relative tolerance");
  neumann->callback([&] { action = [&] { return cmd_neumann(path, grounded, p, tol, g); }; });
  auto* margin = coh->add_subcommand("margin", "Spectral margin of the grounded averaging operator");
  margin->add_option("graph", path)->required();
  margin->add_option("--grounded", grounded, "Grounded vertices (default: 0)")->delimiter(',');
  margin->callback([&] { action = [&] { return cmd_margin(path, grounded, g); }; });

  auto* graphing = app.add_subcommand("graphing", "Graphing tools");
  graphing->require_subcommand(1);
  graphing->fallthrough();
  auto* gcost = graphing->add_subcommand("cost", "Exact cost and treeing check");
  gcost->add_option("graphing", path)->required();
  gcost->callback([&] { action = [&] { return cmd_cost(path, g); }; });
  auto* gc1 = graphing->add_subcommand("c1", "Exact first cohomology dimension for finite orbits");
  gc1->add_option("graphing", path)->required();
  gc1->callback([&] { action = [&] { return cmd_c1(path, g); }; });
  auto* gtransfer = graphing->add_subcommand("transfer-check", "Cycle-space identity for transfer operators");
  gtransfer->add_option("graphing", path)->required();
  gtransfer->add_option("other", path2, "Second graphing on the same relation");
  gtransfer->callback([&] { action = [&] { return cmd_transfer(path, path2, g); }; });

  int length = 2;
  auto* quality = app.add_subcommand("quality", "Defects of a sofic approximation");
  quality->add_option("model", path)->required();
  quality->add_option("sofic", path2)->required();
  quality->add_option("--length", length, "Maximal word length")->check(CLI::PositiveNumber);
  quality->callback([&] { action = [&] { return cmd_quality(path, path2, length, g); }; });

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed_value;
  try {
    return action ? action() : 1;
  } catch (const Error& e) {
    std::cerr << "sofdim: " << e.kind() << " error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "sofdim: io error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "sofdim: error: " << e.what() << "\n";
    return 1;
  }
}
