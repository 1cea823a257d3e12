#include "dbar_range/domain_io.hpp"

#include <fstream>
#include <sstream>

#include "dbar_range/errors.hpp"

namespace dbr {

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  fail(ErrorKind::Parse, (where.empty() ? std::string("document") : where) + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) schema_error(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema_error(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where, "expected a number");
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& where, std::size_t exact = 0) {
  if (!j.is_array()) schema_error(where, "expected an array of numbers");
  if (exact && j.size() != exact) schema_error(where, "expected " + std::to_string(exact) + " numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

cplx point(const json& j, const std::string& where) {
  const auto v = numbers(j, where, 2);
  return {v[0], v[1]};
}

json point_json(cplx z) { return json::array({z.real(), z.imag()}); }

Shape parse_node(const json& j, const std::string& where) {
  if (!j.is_object()) schema_error(where, "expected a tree node object");
  const bool has_prim = j.contains("prim"), has_op = j.contains("op");
  if (has_prim == has_op) schema_error(where, "node needs exactly one of 'prim' or 'op'");
  if (has_prim) {
    const json& pj = j["prim"];
    if (!pj.is_string()) schema_error(where + ".prim", "expected a string");
    const std::string prim = pj.get<std::string>();
    const std::string pw = where + ".params";
    const json& p = member(j, "params", where);
    if (prim == "disc") {
      Disc d{point(member(p, "center", pw), pw + ".center"), number(member(p, "radius", pw), pw + ".radius")};
      if (!(d.radius > 0.0)) schema_error(pw + ".radius", "radius must be positive");
      return Shape{d};
    }
    if (prim == "halfplane") {
      HalfPlane h{point(member(p, "a", pw), pw + ".a"), point(member(p, "b", pw), pw + ".b")};
      return Shape{h};
    }
    if (prim == "rect") {
      Rect r{number(member(p, "x0", pw), pw + ".x0"), number(member(p, "x1", pw), pw + ".x1"),
             number(member(p, "y0", pw), pw + ".y0"), number(member(p, "y1", pw), pw + ".y1")};
      if (!(r.x0 < r.x1 && r.y0 < r.y1)) schema_error(pw, "rect needs x0 < x1 and y0 < y1");
      return Shape{r};
    }
    if (prim == "strip") {
      auto xs = numbers(member(p, "x", pw), pw + ".x");
      auto lo = numbers(member(p, "lo", pw), pw + ".lo");
      auto hi = numbers(member(p, "hi", pw), pw + ".hi");
      if (xs.empty() || xs.size() != lo.size() || xs.size() != hi.size())
        schema_error(pw, "strip arrays x, lo, hi must be non-empty and of equal length");
      for (std::size_t k = 1; k < xs.size(); ++k)
        if (!(xs[k] > xs[k - 1])) schema_error(pw + ".x", "sample abscissae must be strictly increasing");
      return Shape{GraphStrip{Pchip(xs, std::move(lo)), Pchip(xs, std::move(hi))}};
    }
    schema_error(where + ".prim", "unknown primitive '" + prim + "'");
  }
  const json& oj = j["op"];
  if (!oj.is_string()) schema_error(where + ".op", "expected a string");
  const std::string op = oj.get<std::string>();
  const json& cj = member(j, "children", where);
  if (!cj.is_array() || cj.empty()) schema_error(where + ".children", "expected a non-empty array");
  std::vector<Shape> kids;
  for (std::size_t k = 0; k < cj.size(); ++k)
    kids.push_back(parse_node(cj[k], where + ".children[" + std::to_string(k) + "]"));
  if (op == "union") return make_union(std::move(kids));
  if (op == "intersect") return make_intersect(std::move(kids));
  if (op == "complement") {
    if (kids.size() != 1) schema_error(where + ".children", "complement takes exactly one child");
    return make_complement(std::move(kids.front()));
  }
  schema_error(where + ".op", "unknown operator '" + op + "'");
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Shape shape_from_json(const json& j) { return parse_node(j, "tree"); }

json shape_to_json(const Shape& s) {
  auto children = [](const std::vector<Shape>& v) {
    json a = json::array();
    for (const auto& c : v) a.push_back(shape_to_json(c));
    return a;
  };
  return std::visit(
      overloaded{
          [](const Disc& d) {
            return json{{"prim", "disc"}, {"params", {{"center", point_json(d.center)}, {"radius", d.radius}}}};
          },
          [](const HalfPlane& h) {
            return json{{"prim", "halfplane"}, {"params", {{"a", point_json(h.a)}, {"b", point_json(h.b)}}}};
          },
          [](const Rect& r) {
            return json{{"prim", "rect"}, {"params", {{"x0", r.x0}, {"x1", r.x1}, {"y0", r.y0}, {"y1", r.y1}}}};
          },
          [](const GraphStrip& g) {
            return json{{"prim", "strip"}, {"params", {{"x", g.lo.xs()}, {"lo", g.lo.ys()}, {"hi", g.hi.ys()}}}};
          },
          [&](const Union& u) { return json{{"op", "union"}, {"children", children(u.children)}}; },
          [&](const Intersect& u) { return json{{"op", "intersect"}, {"children", children(u.children)}}; },
          [&](const Complement& c) { return json{{"op", "complement"}, {"children", children(c.child)}}; },
      },
      s.node);
}

PlanarDomain domain_from_json(const json& j) {
  if (!j.is_object()) schema_error("", "expected a JSON object at top level");
  const auto w = numbers(member(j, "window", ""), "window", 4);
  Window win{w[0], w[1], w[2], w[3]};
  if (!(win.x0 < win.x1 && win.y0 < win.y1)) schema_error("window", "need x0 < x1 and y0 < y1");
  double mesh = PlanarDomain::default_mesh(win);
  if (j.contains("mesh") && !j["mesh"].is_null()) {
    mesh = number(j["mesh"], "mesh");
    if (!(mesh > 0.0)) schema_error("mesh", "mesh must be positive");
  }
  Symmetry sym = Symmetry::None;
  if (j.contains("symmetry")) {
    if (!j["symmetry"].is_string()) schema_error("symmetry", "expected a string");
    sym = symmetry_from_string(j["symmetry"].get<std::string>());
  }
  return PlanarDomain(win, mesh, shape_from_json(member(j, "tree", "")), sym);
}

json domain_to_json(const PlanarDomain& d) {
  const Window& w = d.window();
  return json{{"window", {w.x0, w.x1, w.y0, w.y1}},
              {"mesh", d.mesh()},
              {"symmetry", to_string(d.symmetry())},
              {"tree", shape_to_json(d.tree())}};
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based; locate the line and column of the offending byte.
    const std::size_t at = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < at; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    const auto pos = msg.find("syntax error");
    fail(ErrorKind::Parse, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                               (pos == std::string::npos ? msg : msg.substr(pos)));
  }
}

PlanarDomain parse_domain(const std::string& text) { return domain_from_json(parse_json_text(text)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PlanarDomain load_domain(const std::string& path) {
  try {
    return parse_domain(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) fail(ErrorKind::Parse, path + ": " + e.what());
    throw;
  }
}

}  // namespace dbr
