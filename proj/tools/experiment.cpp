#include "experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "sofdim/exact.hpp"
#include "sofdim/graphings.hpp"
#include "sofdim/io.hpp"
#include "sofdim/version.hpp"

namespace sofdim::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

template <class T>
std::vector<T> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ModelError(path + ": expected an array");
  if (j.empty()) throw ModelError(path + ": must be nonempty");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if constexpr (std::is_integral_v<T>) {
      if (!j[i].is_number_integer()) throw ModelError(index_path(path, i) + ": expected an integer");
    } else {
      if (!j[i].is_number()) throw ModelError(index_path(path, i) + ": expected a number");
    }
    out.push_back(j[i].get<T>());
  }
  return out;
}

SamplerKind sampler_from(const std::string& name) {
  if (name == "regular") return SamplerKind::Regular;
  if (name == "transversal") return SamplerKind::Transversal;
  if (name == "periodic") return SamplerKind::Periodic;
  throw ModelError("sampler: unknown sampler '" + name + "'");
}

std::string sampler_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::Regular: return "regular";
    case SamplerKind::Transversal: return "transversal";
    case SamplerKind::Periodic: return "periodic";
  }
  return "?";
}

ordered_json echo_config(const ExperimentConfig& c) {
  ordered_json j;
  j["model"] = c.model_path;
  j["task"] = c.task;
  ordered_json rep;
  rep["kind"] = c.representation.kind;
  if (!c.representation.points.empty()) rep["points"] = c.representation.points;
  if (!c.representation.dims.empty()) rep["dims"] = c.representation.dims;
  if (!c.representation.field_texts.empty()) {
    rep["fields"] = ordered_json::array();
    for (const auto& t : c.representation.field_texts) rep["fields"].push_back(ordered_json::parse(t));
  }
  j["representation"] = rep;
  ordered_json grid;
  grid["eps"] = c.grid.eps;
  grid["F"] = c.grid.F;
  grid["m"] = c.grid.m;
  grid["delta"] = c.grid.delta;
  grid["p"] = c.grid.p;
  grid["ratio"] = c.grid.ratio;
  j["grid"] = grid;
  j["copies"] = c.copies;
  j["samples"] = c.options.samples;
  j["seed"] = c.options.seed;
  j["sampler"] = sampler_name(c.options.sampler);
  if (c.options.sampler == SamplerKind::Periodic) {
    j["period_label"] = c.options.period_label;
    j["period_blocks"] = c.options.period_blocks;
  }
  j["per_scale_covering"] = c.options.per_scale_covering;
  j["word_length"] = c.word_length;
  j["output"] = c.output;
  return j;
}

GeneratingSpec build_spec(const ExperimentConfig& c, const Model& model) {
  const auto& r = c.representation;
  if (r.kind == "regular") {
    std::vector<int> points = r.points;
    if (points.empty())
      for (int x = 0; x < model.rel.atoms(); ++x) points.push_back(x);
    return regular_spec(model, points);
  }
  if (r.kind == "constant_fiber") return constant_fiber_spec(model, r.dims);
  if (r.kind == "fields") {
    GeneratingSpec spec;
    spec.model = model;
    spec.profile = FieldProfile{model.rel, r.dims, {}};
    for (std::size_t i = 0; i < r.field_texts.size(); ++i)
      spec.fields.push_back(
          parse_vector_field(r.field_texts[i], model.rel.space(), index_path("representation.fields", i)));
    spec.validate();
    return spec;
  }
  throw ModelError("representation.kind: unknown kind '" + r.kind + "'");
}

std::vector<SoficApprox> build_sofics(const ExperimentConfig& c, const Model& model) {
  std::vector<SoficApprox> out;
  for (int n : c.copies) out.push_back(exact_model(model, n).sigma);
  return out;
}

ordered_json estimate_json(const DimEstimate& e) {
  ordered_json j;
  j["upper"] = e.upper;
  j["lower"] = e.lower;
  j["support_bound"] = e.support_bound;
  j["rank_bound"] = e.rank_bound;
  j["lower_clamped"] = e.lower_clamped;
  j["alpha_hat"] = e.alpha_hat;
  j["kappa_raw"] = e.kappa_raw;
  j["mass_factor"] = e.mass_factor;
  j["diagnostic"] = e.diagnostic;
  ordered_json rows = ordered_json::array();
  for (const auto& r : e.per_scale) {
    ordered_json row;
    row["d"] = r.d;
    row["epsilon"] = r.eps;
    row["F_size"] = r.F_size;
    row["m"] = r.m;
    row["delta"] = r.delta;
    row["deps_over_d"] = r.deps_over_d;
    row["alpha_hat"] = r.alpha_hat;
    row["kappa_raw"] = r.kappa_raw;
    row["mass_factor"] = r.mass_factor;
    row["kappa_lower"] = r.kappa_lower;
    row["rank_over_d"] = r.rank_over_d;
    row["successes"] = r.successes;
    row["samples"] = r.samples;
    row["mean_norm"] = r.mean_norm;
    rows.push_back(row);
  }
  j["per_scale"] = rows;
  return j;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(source + ": JSON syntax error at byte " + std::to_string(e.byte));
  }
  if (!j.is_object()) throw ModelError(source + ": expected an object");
  ExperimentConfig c;
  c.source = source;
  try {
    if (!j.contains("model") || !j["model"].is_string()) throw ModelError("model: missing path");
    const std::filesystem::path base = std::filesystem::path(source).parent_path();
    const std::filesystem::path mp(j["model"].get<std::string>());
    c.model_path = (mp.is_absolute() || base.empty()) ? mp.string() : (base / mp).string();
    if (!std::filesystem::exists(c.model_path))
      throw ModelError("model: file '" + c.model_path + "' does not exist");

    c.task = j.value("task", std::string("dim"));
    if (c.task != "dim" && c.task != "c1" && c.task != "quality" && c.task != "cost")
      throw ModelError("task: unknown task '" + c.task + "'");

    if (j.contains("representation")) {
      const json& r = j["representation"];
      if (!r.is_object()) throw ModelError("representation: expected an object");
      c.representation.kind = r.value("kind", std::string("regular"));
      if (r.contains("points")) c.representation.points = number_list<int>(r["points"], "representation.points");
      if (r.contains("dims")) c.representation.dims = number_list<int>(r["dims"], "representation.dims");
      if (r.contains("fields")) {
        if (!r["fields"].is_array()) throw ModelError("representation.fields: expected an array");
        for (const auto& f : r["fields"]) c.representation.field_texts.push_back(f.dump());
      }
    }

    if (j.contains("grid")) {
      const json& g = j["grid"];
      if (!g.is_object()) throw ModelError("grid: expected an object");
      if (g.contains("eps")) c.grid.eps = number_list<double>(g["eps"], "grid.eps");
      if (g.contains("m")) c.grid.m = number_list<int>(g["m"], "grid.m");
      if (g.contains("delta")) c.grid.delta = number_list<double>(g["delta"], "grid.delta");
      if (g.contains("F")) {
        const json& f = g["F"];
        if (!f.is_array() || f.empty()) throw ModelError("grid.F: expected a nonempty array of label lists");
        c.grid.F.clear();
        for (std::size_t i = 0; i < f.size(); ++i) {
          if (!f[i].is_array()) throw ModelError(index_path("grid.F", i) + ": expected an array of labels");
          std::vector<std::string> labels;
          for (std::size_t k = 0; k < f[i].size(); ++k) {
            if (!f[i][k].is_string()) throw ModelError(index_path(index_path("grid.F", i), k) + ": expected a label");
            labels.push_back(f[i][k].get<std::string>());
          }
          c.grid.F.push_back(std::move(labels));
        }
      }
      if (g.contains("p")) c.grid.p = g["p"].get<double>();
      if (g.contains("ratio")) c.grid.ratio = g["ratio"].get<double>();
    }
    try {
      c.grid.validate();
    } catch (const Error& e) {
      throw ModelError(std::string("grid: ") + e.what());
    }

    if (j.contains("copies")) c.copies = number_list<int>(j["copies"], "copies");
    if (j.contains("d")) {
      if (!c.copies.empty()) throw ModelError("d: give either d or copies");
      c.copies = number_list<int>(j["d"], "d");
      c.copies.insert(c.copies.begin(), -1);  // marker: resolved against the model below
    }
    if (c.copies.empty()) c.copies = {10};

    if (j.contains("samples")) {
      if (!j["samples"].is_number_integer() || j["samples"].get<int>() < 1)
        throw ModelError("samples: expected a positive integer");
      c.options.samples = j["samples"].get<int>();
    }
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) throw ModelError("seed: expected a nonnegative integer");
      c.options.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("sampler")) c.options.sampler = sampler_from(j["sampler"].get<std::string>());
    c.options.period_label = j.value("period_label", c.options.period_label);
    c.options.period_blocks = j.value("period_blocks", c.options.period_blocks);
    c.options.per_scale_covering = j.value("per_scale_covering", c.options.per_scale_covering);
    c.word_length = j.value("word_length", c.word_length);
    c.output = j.value("output", std::string());
  } catch (const json::exception& e) {
    throw ModelError(source + ": wrong value type (" + std::string(e.what()) + ")");
  } catch (const Error& e) {
    throw ModelError(source + ": " + e.what());
  }

  // A "d" list is converted to copies once the atom count is known.
  if (!c.copies.empty() && c.copies.front() == -1) {
    c.copies.erase(c.copies.begin());
    const Model m = load_model(c.model_path);
    const int atoms = m.rel.atoms();
    for (std::size_t i = 0; i < c.copies.size(); ++i) {
      if (c.copies[i] < atoms || c.copies[i] % atoms != 0)
        throw ModelError(source + ": " + index_path("d", i) + ": must be a multiple of the atom count " +
                         std::to_string(atoms));
      c.copies[i] /= atoms;
    }
  }
  for (std::size_t i = 0; i < c.copies.size(); ++i)
    if (c.copies[i] < 1) throw ModelError(source + ": " + index_path("copies", i) + ": must be positive");
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path), path); }

std::string per_scale_csv(const std::vector<ScaleRow>& rows) {
  std::ostringstream os;
  os << "# sofdim per-scale table, schema " << kReportSchemaVersion << "\n";
  os << "d,epsilon,F_size,m,delta,deps_over_d,alpha_hat,kappa_lower\n";
  for (const auto& r : rows)
    os << r.d << ',' << fmt(r.eps) << ',' << r.F_size << ',' << r.m << ',' << fmt(r.delta) << ','
       << fmt(r.deps_over_d) << ',' << fmt(r.alpha_hat) << ',' << fmt(r.kappa_lower) << '\n';
  return os.str();
}

std::string csv_path_for(const std::string& report_path) {
  std::filesystem::path p(report_path);
  p.replace_extension(".csv");
  return p.string();
}

Report run_experiment(const ExperimentConfig& c) {
  ordered_json out;
  out["schema_version"] = kReportSchemaVersion;
  out["version"] = kVersion;
  out["task"] = c.task;
  out["seed"] = c.options.seed;
  out["config"] = echo_config(c);
  Report report;

  if (c.task == "dim") {
    const Model model = load_model(c.model_path);
    const GeneratingSpec spec = build_spec(c, model);
    const DimEstimate e = estimate_dim(spec, build_sofics(c, model), c.grid, c.options);
    out["result"] = estimate_json(e);
    report.csv = per_scale_csv(e.per_scale);
  } else if (c.task == "c1") {
    const Graphing phi = load_graphing(c.model_path);
    const C1Exact exact = c1_exact_finite(phi);
    const DimEstimate e = c1_estimate(phi, build_sofics(c, phi.as_model()), c.grid, c.options);
    ordered_json r = estimate_json(e);
    r["exact"] = exact.value;
    r["exact_rational"] = to_string(exact.exact);
    r["generates"] = exact.generates;
    out["result"] = r;
    report.csv = per_scale_csv(e.per_scale);
  } else if (c.task == "cost") {
    const Graphing phi = load_graphing(c.model_path);
    const CostResult cr = cost(phi);
    ordered_json r;
    r["cost"] = cr.value;
    r["half_degree"] = cr.half_degree;
    r["exact"] = to_string(cr.exact);
    r["treeing"] = is_treeing(phi);
    r["generates"] = generates(phi);
    out["result"] = r;
  } else {  // quality
    const Model model = load_model(c.model_path);
    ordered_json rows = ordered_json::array();
    for (int n : c.copies) {
      const ExactModel em = exact_model(model, n);
      const QualityReport q = quality_report(em.sigma, model, c.word_length, 20000, c.options.seed);
      ordered_json r;
      r["d"] = em.sigma.d;
      r["mult_defect"] = q.mult_defect;
      r["adj_defect"] = q.adj_defect;
      r["trace_defect"] = q.trace_defect;
      r["op_norm_bound"] = q.op_norm_bound;
      r["words_checked"] = q.words_checked;
      r["sampled"] = q.sampled;
      r["weight_discrepancy"] = em.weight_discrepancy;
      rows.push_back(r);
    }
    out["result"] = ordered_json{{"scales", rows}};
  }
  report.json = out.dump(2) + "\n";
  return report;
}

}  // namespace sofdim::cli
