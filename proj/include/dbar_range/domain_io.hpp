#pragma once

// Domain documents (UTF-8 JSON):
//
//   {
//     "window":   [x0, x1, y0, y1],
//     "mesh":     h,                      optional, default window diagonal / 512
//     "symmetry": "none" | "translation-x" | "translation",   optional
//     "tree":     node
//   }
//
//   node := {"prim": "disc",      "params": {"center": [x, y], "radius": r}}
//         | {"prim": "halfplane", "params": {"a": [re, im], "b": [re, im]}}    Re(a z + b) < 0
//         | {"prim": "rect",      "params": {"x0": .., "x1": .., "y0": .., "y1": ..}}
//         | {"prim": "strip",     "params": {"x": [...], "lo": [...], "hi": [...]}}
//         | {"op": "union" | "intersect", "children": [node, ...]}
//         | {"op": "complement", "children": [node]}

#include <string>

#include <json.hpp>

#include "dbar_range/planar_geometry.hpp"

namespace dbr {

using json = nlohmann::json;

Shape shape_from_json(const json& j);
json shape_to_json(const Shape& s);

PlanarDomain domain_from_json(const json& j);
json domain_to_json(const PlanarDomain& d);

/// Parses a document; syntax errors report line and column.
json parse_json_text(const std::string& text);

PlanarDomain parse_domain(const std::string& text);
PlanarDomain load_domain(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace dbr
