#include "sofdim/io.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sofdim {

using nlohmann::json;

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(source + ":" + line_col(text, e.byte) + ": JSON syntax error");
  }
}

const json& member(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ModelError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ModelError((path.empty() ? "" : path + ".") + key + ": missing");
  return *it;
}

const json& array_at(const json& j, const std::string& path) {
  if (!j.is_array()) throw ModelError(path + ": expected an array");
  return j;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ModelError(path + ": expected an integer");
  return j.get<int>();
}

// "p/q" or "p" with decimal integers; nullopt for anything else.
std::optional<Rational> exact_fraction(const std::string& text) {
  const auto slash = text.find('/');
  const std::string a = text.substr(0, slash);
  const std::string b = slash == std::string::npos ? "1" : text.substr(slash + 1);
  const auto digits = [](const std::string& s, bool sign) {
    std::size_t i = sign && !s.empty() && s[0] == '-' ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  if (!digits(a, true) || !digits(b, false)) return std::nullopt;
  const boost::multiprecision::cpp_int den(b);
  if (den == 0) return std::nullopt;
  return Rational(boost::multiprecision::cpp_int(a), den);
}

double as_number(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return parse_rational_text(j.get<std::string>());
    } catch (const Error&) {
      throw ModelError(path + ": malformed rational '" + j.get<std::string>() + "'");
    }
  }
  throw ModelError(path + ": expected a number or \"p/q\" string");
}

std::vector<std::pair<int, int>> parse_pairs(const json& j, const std::string& path) {
  std::vector<std::pair<int, int>> out;
  const json& arr = array_at(j, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!arr[i].is_array() || arr[i].size() != 2) throw ModelError(p + ": expected [src, dst]");
    out.emplace_back(as_int(arr[i][0], p + "[0]"), as_int(arr[i][1], p + "[1]"));
  }
  return out;
}

PartialMap parse_map(const json& j, int size, const std::string& path) {
  auto pairs = parse_pairs(member(j, "pairs", path), path + ".pairs");
  try {
    return PartialMap(size, std::move(pairs));
  } catch (const Error& e) {
    throw ModelError(path + ": " + e.what());
  }
}

std::vector<PartialMap> parse_maps(const json& j, int size, const std::string& key) {
  std::vector<PartialMap> out;
  const json& arr = array_at(j, key);
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(parse_map(arr[i], size, key + "[" + std::to_string(i) + "]"));
  return out;
}

FinRel parse_rel(const json& j) {
  const json& w = array_at(member(j, "weights", ""), "weights");
  std::vector<double> weights;
  for (std::size_t i = 0; i < w.size(); ++i) weights.push_back(as_number(w[i], "weights[" + std::to_string(i) + "]"));
  // Integer fractions throughout keep the weights exact.
  std::vector<Rational> exact;
  for (const auto& x : w) {
    const auto q = x.is_string() ? exact_fraction(x.get<std::string>()) : std::nullopt;
    if (!q) break;
    exact.push_back(*q);
  }
  std::vector<std::vector<int>> blocks;
  const json& b = array_at(member(j, "blocks", ""), "blocks");
  for (std::size_t i = 0; i < b.size(); ++i) {
    const std::string p = "blocks[" + std::to_string(i) + "]";
    std::vector<int> blk;
    for (std::size_t k = 0; k < array_at(b[i], p).size(); ++k)
      blk.push_back(as_int(b[i][k], p + "[" + std::to_string(k) + "]"));
    blocks.push_back(std::move(blk));
  }
  if (!exact.empty() && exact.size() == w.size()) {
    Rational sum = 0;
    for (const auto& q : exact) sum += q;
    if (sum == 1) return FinRel(AtomSpace::exact(std::move(exact)), std::move(blocks));
  }
  return FinRel(AtomSpace(std::move(weights)), std::move(blocks));
}

template <class F>
auto with_source(const std::string& source, F fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.rfind(source + ":", 0) == 0) throw;
    throw ModelError(source + ": " + what);
  }
}

json pairs_json(const PartialMap& m) {
  json arr = json::array();
  for (auto [s, t] : m.pairs()) arr.push_back({s, t});
  return json{{"pairs", arr}};
}

json rel_json(const FinRel& rel) {
  json j;
  if (rel.space().has_exact()) {
    json w = json::array();
    for (int x = 0; x < rel.atoms(); ++x) w.push_back(to_string(rel.space().exact_weight(x)));
    j["weights"] = w;
  } else {
    j["weights"] = rel.space().weights();
  }
  j["blocks"] = rel.blocks();
  return j;
}

}  // namespace

double parse_rational_text(const std::string& text) {
  const auto slash = text.find('/');
  std::size_t used = 0;
  try {
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    }
    const std::string a = text.substr(0, slash), b = text.substr(slash + 1);
    std::size_t ua = 0, ub = 0;
    const double num = std::stod(a, &ua), den = std::stod(b, &ub);
    if (ua != a.size() || ub != b.size() || den == 0) throw std::invalid_argument(text);
    return num / den;
  } catch (const std::exception&) {
    throw ParameterError("malformed rational '" + text + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw LookupError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw LookupError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw LookupError("cannot rename onto '" + path + "': " + ec.message());
  }
}

Model parse_model(const std::string& text, const std::string& source) {
  return with_source(source, [&] {
    const json j = parse_json(text, source);
    Model m;
    m.rel = parse_rel(j);
    if (j.contains("generators")) m.generators = parse_maps(j["generators"], m.rel.atoms(), "generators");
    m.validate();
    return m;
  });
}

Graphing parse_graphing(const std::string& text, const std::string& source) {
  return with_source(source, [&] {
    const json j = parse_json(text, source);
    Graphing g;
    g.rel = parse_rel(j);
    if (j.contains("morphisms"))
      g.morphisms = parse_maps(j["morphisms"], g.rel.atoms(), "morphisms");
    else if (j.contains("generators"))
      g.morphisms = parse_maps(j["generators"], g.rel.atoms(), "generators");
    g.validate();
    return g;
  });
}

Graph parse_graph(const std::string& text, const std::string& source) {
  return with_source(source, [&] {
    const json j = parse_json(text, source);
    const int n = as_int(member(j, "n", ""), "n");
    if (n < 1) throw ModelError("n: must be positive");
    auto edges = parse_pairs(member(j, "edges", ""), "edges");
    Graph g(n, std::move(edges));
    for (int v = 0; v < n; ++v)
      if (g.degree(v) == 0) throw ModelError("edges: vertex " + std::to_string(v) + " is isolated");
    return g;
  });
}

SoficApprox parse_sofic(const std::string& text, const std::string& source) {
  return with_source(source, [&] {
    const json j = parse_json(text, source);
    SoficApprox s;
    s.d = as_int(member(j, "d", ""), "d");
    if (s.d < 1) throw ModelError("d: must be positive");
    const json& imgs = member(j, "images", "");
    if (!imgs.is_object()) throw ModelError("images: expected an object");
    for (auto it = imgs.begin(); it != imgs.end(); ++it) {
      const std::string p = "images." + it.key();
      if (it->contains("pairs")) {
        s.images.emplace(it.key(), parse_map(*it, s.d, p));
      } else if (it->contains("diag")) {
        const json& dj = array_at((*it)["diag"], p + ".diag");
        if (static_cast<int>(dj.size()) != s.d) throw ModelError(p + ".diag: length differs from d");
        DiagImage diag;
        for (std::size_t k = 0; k < dj.size(); ++k) {
          const int v = as_int(dj[k], p + ".diag[" + std::to_string(k) + "]");
          if (v != 0 && v != 1) throw ModelError(p + ".diag[" + std::to_string(k) + "]: expected 0 or 1");
          diag.push_back(static_cast<std::uint8_t>(v));
        }
        s.images.emplace(it.key(), std::move(diag));
      } else {
        throw ModelError(p + ": expected \"pairs\" or \"diag\"");
      }
    }
    s.validate();
    return s;
  });
}

VectorField parse_vector_field(const std::string& text, const AtomSpace& space, const std::string& source) {
  return with_source(source, [&] {
    const json j = parse_json(text, source);
    const json& f = array_at(member(j, "fibers", ""), "fibers");
    if (static_cast<int>(f.size()) != space.size()) throw ModelError("fibers: one entry per atom required");
    std::vector<Eigen::VectorXd> fibers;
    for (std::size_t x = 0; x < f.size(); ++x) {
      const std::string p = "fibers[" + std::to_string(x) + "]";
      const json& v = array_at(f[x], p);
      Eigen::VectorXd vec(static_cast<Eigen::Index>(v.size()));
      for (std::size_t k = 0; k < v.size(); ++k) vec[static_cast<Eigen::Index>(k)] = as_number(v[k], p + "[" + std::to_string(k) + "]");
      fibers.push_back(std::move(vec));
    }
    return VectorField(space, std::move(fibers));
  });
}

Model load_model(const std::string& path) { return parse_model(read_file(path), path); }
Graphing load_graphing(const std::string& path) { return parse_graphing(read_file(path), path); }
Graph load_graph(const std::string& path) { return parse_graph(read_file(path), path); }
SoficApprox load_sofic(const std::string& path) { return parse_sofic(read_file(path), path); }

std::string to_json(const Model& model) {
  json j = rel_json(model.rel);
  j["generators"] = json::array();
  for (const auto& g : model.generators) j["generators"].push_back(pairs_json(g));
  return j.dump(2);
}

std::string to_json(const Graphing& graphing) {
  json j = rel_json(graphing.rel);
  j["morphisms"] = json::array();
  for (const auto& g : graphing.morphisms) j["morphisms"].push_back(pairs_json(g));
  return j.dump(2);
}

std::string to_json(const Graph& graph) {
  json j;
  j["n"] = graph.vertices();
  j["edges"] = json::array();
  for (auto [u, v] : graph.edge_list()) j["edges"].push_back({u, v});
  return j.dump(2);
}

std::string to_json(const SoficApprox& sigma) {
  json j;
  j["d"] = sigma.d;
  j["images"] = json::object();
  for (const auto& [label, img] : sigma.images) {
    if (const auto* pm = std::get_if<PartialMap>(&img))
      j["images"][label] = pairs_json(*pm);
    else
      j["images"][label] = json{{"diag", std::get<DiagImage>(img)}};
  }
  return j.dump(2);
}

}  // namespace sofdim
