// JSON loading and saving with field-path diagnostics.
//
// Model:    { "weights": [..], "blocks": [[..],..], "generators": [ {"pairs": [[s,t],..]}, .. ] }
//           weights may be numbers or "p/q" strings.
// Graphing: model schema plus "morphisms": [ {"pairs": ..}, .. ] (falls back to generators).
// Graph:    { "n": v, "edges": [[u,v],..] }  (isolated vertices rejected)
// Sofic:    { "d": n, "images": { "label": {"pairs": ..} | {"diag": [0/1,..]} } }
// Field:    { "fibers": [[..],..] }
#pragma once

#include <string>
#include <vector>

#include "sofdim/core.hpp"
#include "sofdim/graphcoh.hpp"
#include "sofdim/graphings.hpp"
#include "sofdim/lp.hpp"
#include "sofdim/sofic.hpp"

namespace sofdim {

std::string read_file(const std::string& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

Model parse_model(const std::string& text, const std::string& source = "<input>");
Graphing parse_graphing(const std::string& text, const std::string& source = "<input>");
Graph parse_graph(const std::string& text, const std::string& source = "<input>");
SoficApprox parse_sofic(const std::string& text, const std::string& source = "<input>");
VectorField parse_vector_field(const std::string& text, const AtomSpace& space,
                               const std::string& source = "<input>");

Model load_model(const std::string& path);
Graphing load_graphing(const std::string& path);
Graph load_graph(const std::string& path);
SoficApprox load_sofic(const std::string& path);

std::string to_json(const Model& model);
std::string to_json(const Graphing& graphing);
std::string to_json(const Graph& graph);
std::string to_json(const SoficApprox& sigma);

// "p/q" or decimal text to double.
double parse_rational_text(const std::string& text);

}  // namespace sofdim
