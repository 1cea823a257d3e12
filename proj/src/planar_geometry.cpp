#include "dbar_range/planar_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "dbar_range/errors.hpp"
#include "dbar_range/parallel.hpp"

namespace dbr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt_point(cplx z) { return "(" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")"; }

}  // namespace

// ---------------------------------------------------------------------------
// Window / symmetry

double Window::diameter() const noexcept { return std::hypot(width(), height()); }

bool Window::contains(cplx z) const noexcept {
  return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1;
}

double Window::edge_distance(cplx z) const noexcept {
  return std::min({z.real() - x0, x1 - z.real(), z.imag() - y0, y1 - z.imag()});
}

const char* to_string(Symmetry s) noexcept {
  switch (s) {
    case Symmetry::None: return "none";
    case Symmetry::TranslationX: return "translation-x";
    case Symmetry::Translation: return "translation";
  }
  return "none";
}

Symmetry symmetry_from_string(const std::string& s) {
  if (s == "none") return Symmetry::None;
  if (s == "translation-x") return Symmetry::TranslationX;
  if (s == "translation") return Symmetry::Translation;
  fail(ErrorKind::Parse, "unknown symmetry declaration '" + s + "'");
}

// ---------------------------------------------------------------------------
// Pchip

Pchip::Pchip(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
  require(!xs_.empty() && xs_.size() == ys_.size(), ErrorKind::Argument,
          "Pchip: need matching, non-empty sample arrays");
  for (std::size_t k = 1; k < xs_.size(); ++k)
    require(xs_[k] > xs_[k - 1], ErrorKind::Argument, "Pchip: sample abscissae must be strictly increasing");
  constant_ = std::all_of(ys_.begin(), ys_.end(), [&](double y) { return y == ys_.front(); });

  const std::size_t n = xs_.size();
  slopes_.assign(n, 0.0);
  if (n < 2) return;
  std::vector<double> h(n - 1), secant(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = xs_[k + 1] - xs_[k];
    secant[k] = (ys_[k + 1] - ys_[k]) / h[k];
  }
  slopes_[0] = secant[0];
  slopes_[n - 1] = secant[n - 2];
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (secant[k - 1] * secant[k] <= 0.0) {
      slopes_[k] = 0.0;
    } else {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      slopes_[k] = (w1 + w2) / (w1 / secant[k - 1] + w2 / secant[k]);
    }
  }
}

double Pchip::operator()(double x) const {
  if (constant_ || xs_.size() == 1) return ys_.front();
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs_.begin()) - 1;
  const double h = xs_[k + 1] - xs_[k];
  const double t = (x - xs_[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * ys_[k] + h10 * h * slopes_[k] + h01 * ys_[k + 1] + h11 * h * slopes_[k + 1];
}

double Pchip::min_value() const { return *std::min_element(ys_.begin(), ys_.end()); }
double Pchip::max_value() const { return *std::max_element(ys_.begin(), ys_.end()); }

// ---------------------------------------------------------------------------
// Shape

Shape make_union(std::vector<Shape> children) {
  require(!children.empty(), ErrorKind::Argument, "union needs at least one child");
  return Shape{Union{std::move(children)}};
}

Shape make_intersect(std::vector<Shape> children) {
  require(!children.empty(), ErrorKind::Argument, "intersect needs at least one child");
  return Shape{Intersect{std::move(children)}};
}

Shape make_complement(Shape child) {
  std::vector<Shape> one;
  one.push_back(std::move(child));
  return Shape{Complement{std::move(one)}};
}

bool Shape::contains_open(cplx z) const {
  const double x = z.real(), y = z.imag();
  return std::visit(
      overloaded{
          [&](const Disc& d) { return std::norm(z - d.center) < d.radius * d.radius; },
          [&](const HalfPlane& p) { return (p.a * z + p.b).real() < 0.0; },
          [&](const Rect& r) { return x > r.x0 && x < r.x1 && y > r.y0 && y < r.y1; },
          [&](const GraphStrip& s) { return s.lo(x) < y && y < s.hi(x); },
          [&](const Union& u) {
            return std::any_of(u.children.begin(), u.children.end(), [&](const Shape& c) { return c.contains_open(z); });
          },
          [&](const Intersect& u) {
            return std::all_of(u.children.begin(), u.children.end(), [&](const Shape& c) { return c.contains_open(z); });
          },
          [&](const Complement& c) { return !c.child.front().contains_closed(z); },
      },
      node);
}

bool Shape::contains_closed(cplx z) const {
  const double x = z.real(), y = z.imag();
  return std::visit(
      overloaded{
          [&](const Disc& d) { return std::norm(z - d.center) <= d.radius * d.radius; },
          [&](const HalfPlane& p) { return (p.a * z + p.b).real() <= 0.0; },
          [&](const Rect& r) { return x >= r.x0 && x <= r.x1 && y >= r.y0 && y <= r.y1; },
          [&](const GraphStrip& s) { return s.lo(x) <= y && y <= s.hi(x); },
          [&](const Union& u) {
            return std::any_of(u.children.begin(), u.children.end(),
                               [&](const Shape& c) { return c.contains_closed(z); });
          },
          [&](const Intersect& u) {
            return std::all_of(u.children.begin(), u.children.end(),
                               [&](const Shape& c) { return c.contains_closed(z); });
          },
          [&](const Complement& c) { return !c.child.front().contains_open(z); },
      },
      node);
}

std::optional<double> Shape::exact_inradius(cplx z) const {
  const double x = z.real(), y = z.imag();
  return std::visit(
      overloaded{
          [&](const Disc& d) -> std::optional<double> { return d.radius - std::abs(z - d.center); },
          [&](const HalfPlane& p) -> std::optional<double> {
            if (p.a == cplx(0.0)) return std::nullopt;
            return -(p.a * z + p.b).real() / std::abs(p.a);
          },
          [&](const Rect& r) -> std::optional<double> { return std::min({x - r.x0, r.x1 - x, y - r.y0, r.y1 - y}); },
          [&](const GraphStrip& s) -> std::optional<double> {
            if (!s.lo.is_constant() || !s.hi.is_constant()) return std::nullopt;
            return std::min(y - s.lo(x), s.hi(x) - y);
          },
          [&](const Union&) -> std::optional<double> { return std::nullopt; },
          [&](const Intersect& u) -> std::optional<double> {
            double r = kInf;
            for (const auto& c : u.children) {
              auto rc = c.exact_inradius(z);
              if (!rc) return std::nullopt;
              r = std::min(r, *rc);
            }
            return r;
          },
          [&](const Complement&) -> std::optional<double> { return std::nullopt; },
      },
      node);
}

std::pair<double, double> Shape::y_extent() const {
  return std::visit(
      overloaded{
          [](const Disc& d) { return std::pair{d.center.imag() - d.radius, d.center.imag() + d.radius}; },
          [](const HalfPlane& p) {
            // Re(a z + b) = a_r x - a_i y + b_r
            const double ar = p.a.real(), ai = p.a.imag(), br = p.b.real();
            if (ar != 0.0) return std::pair{-kInf, kInf};
            if (ai == 0.0) return br < 0.0 ? std::pair{-kInf, kInf} : std::pair{kInf, -kInf};
            return ai > 0.0 ? std::pair{br / ai, kInf} : std::pair{-kInf, br / ai};
          },
          [](const Rect& r) { return std::pair{r.y0, r.y1}; },
          [](const GraphStrip& s) { return std::pair{s.lo.min_value(), s.hi.max_value()}; },
          [](const Union& u) {
            std::pair<double, double> e{kInf, -kInf};
            for (const auto& c : u.children) {
              auto ce = c.y_extent();
              e.first = std::min(e.first, ce.first);
              e.second = std::max(e.second, ce.second);
            }
            return e;
          },
          [](const Intersect& u) {
            std::pair<double, double> e{-kInf, kInf};
            for (const auto& c : u.children) {
              auto ce = c.y_extent();
              e.first = std::max(e.first, ce.first);
              e.second = std::min(e.second, ce.second);
            }
            return e;
          },
          [](const Complement&) { return std::pair{-kInf, kInf}; },
      },
      node);
}

// ---------------------------------------------------------------------------
// Row-pruned evaluation for rasterization.

namespace {

// Flattened tree; per row, union nodes only visit children whose y-extent
// contains the row. Results are identical to Shape::contains_*.
class RowEvaluator {
 public:
  explicit RowEvaluator(const Shape& root) { root_ = flatten(root); }

  void set_row(double y) {
    for (auto& n : nodes_) n.live = (y >= n.ylo && y <= n.yhi);
    for (auto& n : nodes_) {
      n.active.clear();
      if (n.kind == Kind::Union)
        for (int c : n.children)
          if (nodes_[c].live) n.active.push_back(c);
    }
  }

  bool open(cplx z) const { return eval(root_, z, false); }
  bool closed(cplx z) const { return eval(root_, z, true); }

 private:
  enum class Kind { Prim, Union, Intersect, Complement };
  struct Flat {
    Kind kind;
    const Shape* shape;
    std::vector<int> children;
    std::vector<int> active;
    double ylo, yhi;
    bool live = true;
  };

  int flatten(const Shape& s) {
    const int id = static_cast<int>(nodes_.size());
    auto [lo, hi] = s.y_extent();
    nodes_.push_back(Flat{Kind::Prim, &s, {}, {}, lo, hi});
    std::vector<int> kids;
    Kind kind = Kind::Prim;
    if (auto* u = std::get_if<Union>(&s.node)) {
      kind = Kind::Union;
      for (const auto& c : u->children) kids.push_back(flatten(c));
    } else if (auto* i = std::get_if<Intersect>(&s.node)) {
      kind = Kind::Intersect;
      for (const auto& c : i->children) kids.push_back(flatten(c));
    } else if (auto* c = std::get_if<Complement>(&s.node)) {
      kind = Kind::Complement;
      kids.push_back(flatten(c->child.front()));
    }
    nodes_[id].kind = kind;
    nodes_[id].children = std::move(kids);
    return id;
  }

  bool eval(int id, cplx z, bool closure) const {
    const Flat& n = nodes_[id];
    if (!n.live) return false;
    switch (n.kind) {
      case Kind::Prim: return closure ? n.shape->contains_closed(z) : n.shape->contains_open(z);
      case Kind::Union:
        for (int c : n.active)
          if (eval(c, z, closure)) return true;
        return false;
      case Kind::Intersect:
        for (int c : n.children)
          if (!eval(c, z, closure)) return false;
        return true;
      case Kind::Complement: return !eval(n.children.front(), z, !closure);
    }
    return false;
  }

  std::vector<Flat> nodes_;
  int root_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Raster / domain

std::pair<int, int> Raster::nearest(cplx z) const noexcept {
  int i = static_cast<int>(std::lround((z.real() - x0) / h));
  int j = static_cast<int>(std::lround((z.imag() - y0) / h));
  return {std::clamp(i, 0, nx - 1), std::clamp(j, 0, ny - 1)};
}

Raster make_raster_frame(const Window& w, double h) {
  require(h > 0.0 && std::isfinite(h), ErrorKind::Config, "mesh must be positive");
  require(w.width() > 0.0 && w.height() > 0.0, ErrorKind::Config, "window must have positive extent");
  Raster r;
  r.h = h;
  r.x0 = w.x0;
  r.y0 = w.y0;
  const double nxf = std::floor(w.width() / h + 1e-9) + 1.0;
  const double nyf = std::floor(w.height() / h + 1e-9) + 1.0;
  require(nxf * nyf <= 4.0e9, ErrorKind::Config, "mesh too fine for the window (node count overflow)");
  r.nx = static_cast<int>(nxf);
  r.ny = static_cast<int>(nyf);
  return r;
}

PlanarDomain::PlanarDomain(Window window, double mesh, Shape tree, Symmetry symmetry)
    : window_(window),
      mesh_(mesh),
      tree_(std::move(tree)),
      symmetry_(symmetry),
      once_(std::make_shared<std::once_flag>()) {
  require(window_.x1 > window_.x0 && window_.y1 > window_.y0, ErrorKind::Config, "window must have positive extent");
  require(mesh_ > 0.0 && std::isfinite(mesh_), ErrorKind::Config, "mesh must be positive");
  // Strips must keep lo < hi over the window; checked at the mesh resolution.
  std::vector<const Shape*> stack{&tree_};
  while (!stack.empty()) {
    const Shape* s = stack.back();
    stack.pop_back();
    std::visit(overloaded{
                   [&](const GraphStrip& g) {
                     const int n = static_cast<int>(std::ceil(window_.width() / mesh_)) + 1;
                     for (int k = 0; k <= n; ++k) {
                       const double x = std::min(window_.x0 + k * mesh_, window_.x1);
                       require(g.lo(x) < g.hi(x), ErrorKind::Config,
                               "strip has lo >= hi at x = " + std::to_string(x));
                     }
                     for (double x : g.lo.xs()) require(g.lo(x) < g.hi(x), ErrorKind::Config, "strip crosses itself");
                     for (double x : g.hi.xs()) require(g.lo(x) < g.hi(x), ErrorKind::Config, "strip crosses itself");
                   },
                   [&](const Union& u) {
                     for (const auto& c : u.children) stack.push_back(&c);
                   },
                   [&](const Intersect& u) {
                     for (const auto& c : u.children) stack.push_back(&c);
                   },
                   [&](const Complement& c) { stack.push_back(&c.child.front()); },
                   [](const auto&) {},
               },
               s->node);
  }
}

Raster PlanarDomain::rasterize(double h) const {
  Raster r = make_raster_frame(window_, h);
  r.bits.assign(static_cast<std::size_t>(r.nx) * r.ny, 0);
  parallel_chunks(static_cast<std::size_t>(r.ny), kSweepChunks, [&](std::size_t, std::size_t b, std::size_t e) {
    RowEvaluator ev(tree_);
    for (std::size_t j = b; j < e; ++j) {
      const double y = r.y0 + static_cast<double>(j) * h;
      ev.set_row(y);
      std::uint8_t* row = r.bits.data() + j * r.nx;
      for (int i = 0; i < r.nx; ++i) {
        const cplx z(r.x0 + i * h, y);
        if (ev.open(z))
          row[i] = Raster::kOpen | Raster::kClosed;
        else if (ev.closed(z))
          row[i] = Raster::kClosed;
      }
    }
  });
  return r;
}

const Raster& PlanarDomain::raster() const {
  std::call_once(*once_, [&] { raster_ = std::make_shared<const Raster>(rasterize(mesh_)); });
  return *raster_;
}

// ---------------------------------------------------------------------------
// Queries

bool contains(const PlanarDomain& dom, cplx z) {
  require(dom.window().contains(z), ErrorKind::Query, "point " + fmt_point(z) + " lies outside the window");
  return dom.tree().contains_open(z);
}

double largest_disc_at(const PlanarDomain& dom, cplx z, double cap) {
  require(cap > 0.0, ErrorKind::Argument, "largest_disc_at: cap must be positive");
  require(contains(dom, z), ErrorKind::Query, "largest_disc_at: point " + fmt_point(z) + " is not in the domain");
  if (auto exact = dom.tree().exact_inradius(z)) return std::min(*exact, cap);

  const double h = dom.mesh();
  auto circle_inside = [&](double r) {
    if (r <= 0.0) return true;
    const int n = std::max(32, static_cast<int>(std::ceil(2.0 * std::numbers::pi * r / (0.5 * h))));
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * std::numbers::pi * k / n;
      const cplx p = z + std::polar(r, t);
      if (!dom.window().contains(p) || !dom.tree().contains_open(p)) return false;
    }
    return true;
  };

  double lo = 0.0, hi = cap;
  bool bracketed = false;
  for (double r = std::min(h, cap);; r = std::min(r + h, cap)) {
    if (!circle_inside(r)) {
      hi = r;
      bracketed = true;
      break;
    }
    lo = r;
    if (r >= cap) break;
  }
  if (!bracketed) return cap;
  for (int it = 0; it < 60 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (circle_inside(mid) ? lo : hi) = mid;
  }
  return lo;
}

bool disc_meets_complement(const PlanarDomain& dom, const DiscQuery& q) {
  require(q.radius >= 0.0, ErrorKind::Argument, "disc radius must be nonnegative");
  const Raster& r = dom.raster();
  const int i0 = std::max(0, static_cast<int>(std::floor((q.center.real() - q.radius - r.x0) / r.h)));
  const int i1 = std::min(r.nx - 1, static_cast<int>(std::ceil((q.center.real() + q.radius - r.x0) / r.h)));
  const int j0 = std::max(0, static_cast<int>(std::floor((q.center.imag() - q.radius - r.y0) / r.h)));
  const int j1 = std::min(r.ny - 1, static_cast<int>(std::ceil((q.center.imag() + q.radius - r.y0) / r.h)));
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i)
      if (std::norm(r.node(i, j) - q.center) < q.radius * q.radius && !r.closed(r.index(i, j))) return true;
  return false;
}

double clearance(const PlanarDomain& dom, cplx zstar) {
  require(dom.window().contains(zstar), ErrorKind::Query, "clearance: point " + fmt_point(zstar) + " outside window");
  if (dom.tree().contains_closed(zstar)) return 0.0;
  const Raster& r = dom.raster();
  const auto [ci, cj] = r.nearest(zstar);
  double best = kInf;
  const int kmax = std::max(r.nx, r.ny);
  for (int k = 0; k <= kmax; ++k) {
    if (std::isfinite(best) && (k - 0.5) * r.h > best) break;
    auto visit = [&](int i, int j) {
      if (i < 0 || j < 0 || i >= r.nx || j >= r.ny) return;
      if (r.closed(r.index(i, j))) best = std::min(best, std::abs(r.node(i, j) - zstar));
    };
    if (k == 0) {
      visit(ci, cj);
      continue;
    }
    for (int d = -k; d <= k; ++d) {
      visit(ci + d, cj - k);
      visit(ci + d, cj + k);
    }
    for (int d = -k + 1; d <= k - 1; ++d) {
      visit(ci - k, cj + d);
      visit(ci + k, cj + d);
    }
  }
  return best;
}

}  // namespace dbr
