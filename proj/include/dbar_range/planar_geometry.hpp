#pragma once

// Planar domains Ω ⊂ C built from primitives with boolean operations, plus
// the grid machinery used to discharge "for all z ∈ Ω" quantifiers.
//
// Grid convention: node (i, j) sits at x0 + i*h + 1i*(y0 + j*h), with i
// running over columns and j over rows. Linear index = j * nx + i.

#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dbr {

using cplx = std::complex<double>;

struct Window {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;

  double width() const noexcept { return x1 - x0; }
  double height() const noexcept { return y1 - y0; }
  double diameter() const noexcept;
  bool contains(cplx z) const noexcept;
  /// Distance from an interior point to the window edge (negative outside).
  double edge_distance(cplx z) const noexcept;
};

/// Declared invariance of the domain outside the window. Nothing is ever
/// inferred: certificates on unbounded domains lean on this declaration and say so.
enum class Symmetry { None, TranslationX, Translation };

const char* to_string(Symmetry s) noexcept;
Symmetry symmetry_from_string(const std::string& s);

/// Monotone piecewise-cubic (Fritsch–Carlson) interpolant. Between samples it
/// never leaves the range of its two neighbouring samples; outside the sample
/// range it is extended by the end values.
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> xs, std::vector<double> ys);

  double operator()(double x) const;
  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& ys() const noexcept { return ys_; }
  double min_value() const;
  double max_value() const;
  bool is_constant() const noexcept { return constant_; }

 private:
  std::vector<double> xs_, ys_, slopes_;
  bool constant_ = true;
};

// Primitives. Each is an open set; closures use the non-strict inequalities.

struct Disc {
  cplx center;
  double radius = 0.0;
};

/// {z : Re(a z + b) < 0}
struct HalfPlane {
  cplx a;
  cplx b;
};

struct Rect {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
};

/// {z : lo(Re z) < Im z < hi(Re z)}
struct GraphStrip {
  Pchip lo, hi;
};

struct Shape;

struct Union {
  std::vector<Shape> children;
};
struct Intersect {
  std::vector<Shape> children;
};
struct Complement {
  std::vector<Shape> child;  // exactly one element
};

struct Shape {
  std::variant<Disc, HalfPlane, Rect, GraphStrip, Union, Intersect, Complement> node;

  bool contains_open(cplx z) const;
  bool contains_closed(cplx z) const;
  /// Exact distance from z ∈ Ω to the boundary when the tree allows an exact
  /// answer (single primitives and intersections of them, constant strips).
  std::optional<double> exact_inradius(cplx z) const;
  /// Interval of Im z outside of which the set is empty.
  std::pair<double, double> y_extent() const;
};

Shape make_union(std::vector<Shape> children);
Shape make_intersect(std::vector<Shape> children);
Shape make_complement(Shape child);

/// Node membership of a domain at a fixed mesh. Bit 0: open set, bit 1: closure.
struct Raster {
  int nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0, h = 0.0;
  std::vector<std::uint8_t> bits;

  static constexpr std::uint8_t kOpen = 1;
  static constexpr std::uint8_t kClosed = 2;

  std::size_t size() const noexcept { return bits.size(); }
  std::size_t index(int i, int j) const noexcept { return static_cast<std::size_t>(j) * nx + i; }
  cplx node(int i, int j) const noexcept { return {x0 + i * h, y0 + j * h}; }
  cplx node(std::size_t k) const noexcept { return node(static_cast<int>(k % nx), static_cast<int>(k / nx)); }
  bool open(std::size_t k) const noexcept { return bits[k] & kOpen; }
  bool closed(std::size_t k) const noexcept { return bits[k] & kClosed; }
  /// Nearest node to z, clamped to the grid.
  std::pair<int, int> nearest(cplx z) const noexcept;
};

/// Mesh that fits a window: node count per axis from floor(extent/h) + 1.
Raster make_raster_frame(const Window& w, double h);

class PlanarDomain {
 public:
  PlanarDomain(Window window, double mesh, Shape tree, Symmetry symmetry = Symmetry::None);

  const Window& window() const noexcept { return window_; }
  double mesh() const noexcept { return mesh_; }
  const Shape& tree() const noexcept { return tree_; }
  Symmetry symmetry() const noexcept { return symmetry_; }

  /// Raster at the domain's own mesh, built on first use and then shared.
  const Raster& raster() const;
  /// Raster at an arbitrary mesh over the same window (not cached).
  Raster rasterize(double h) const;

  /// Default mesh when none is configured.
  static double default_mesh(const Window& w) { return w.diameter() / 512.0; }

 private:
  Window window_;
  double mesh_;
  Shape tree_;
  Symmetry symmetry_;
  mutable std::shared_ptr<const Raster> raster_;
  mutable std::shared_ptr<std::once_flag> once_;
};

struct DiscQuery {
  cplx center;
  double radius = 0.0;
};

bool contains(const PlanarDomain& dom, cplx z);

/// sup{r ≤ cap : D(z, r) ⊂ Ω}. Points of the search circles that fall outside
/// the window count as outside Ω.
double largest_disc_at(const PlanarDomain& dom, cplx z, double cap);

/// True if D(center, radius) contains a node outside Ω̄ (grid test).
bool disc_meets_complement(const PlanarDomain& dom, const DiscQuery& q);

/// Distance from z* to the rasterized closure of Ω; 0 when z* ∈ Ω̄, +inf when
/// no node of Ω̄ lies in the window.
double clearance(const PlanarDomain& dom, cplx zstar);

struct Witness {
  cplx z;
  cplx zstar;
};

struct ConditionXCertificate {
  bool holds = false;
  double M = 0.0;
  double delta = 0.0;
  double h = 0.0;
  std::size_t checked_nodes = 0;
  std::size_t failure_count = 0;
  std::vector<cplx> failure_points;  // first failures in row-major order, capped
  std::vector<Witness> witnesses;    // deterministic sample of checked nodes
  bool window_only = false;          // verdict leans on a symmetry declaration

  // Grid state for on-demand witness lookup.
  std::shared_ptr<const std::vector<std::uint8_t>> admissible;  // exterior nodes with clearance > delta
  std::shared_ptr<const std::vector<std::uint8_t>> checked;     // nodes whose witness was required

  /// First admissible node in distance order from z within the open disc D(z, M).
  std::optional<cplx> witness_for(const PlanarDomain& dom, cplx z) const;
};

inline constexpr std::size_t kMaxFailurePoints = 64;
inline constexpr std::size_t kWitnessSample = 256;

ConditionXCertificate condition_x(const PlanarDomain& dom, double M, double delta);

struct LatticeEntry {
  long long a = 0, b = 0;  // w = (a + i b) * M
  cplx w;
  cplx z;       // sampled point of Ω used to pick w*
  cplx wstar;
};

struct LatticeWitnessSet {
  double M = 0.0;
  double delta = 0.0;
  std::vector<LatticeEntry> entries;
};

LatticeWitnessSet build_lattice(const PlanarDomain& dom, const ConditionXCertificate& cert);
LatticeWitnessSet build_lattice(const PlanarDomain& dom, double M, double delta);

struct GridComponent {
  std::vector<std::size_t> nodes;  // sorted linear indices into dom.raster()
};

/// 4-connected components of {nodes of Ω with |z| < j}.
std::vector<GridComponent> exhaust(const PlanarDomain& dom, int j);

/// Squared Euclidean distance transform in node units: out[k] = min over
/// sites s of |k - s|², sites given by mask != 0. Non-site value with no site
/// anywhere is +inf.
std::vector<float> squared_distance_transform(const std::vector<std::uint8_t>& sites, int nx, int ny);

}  // namespace dbr
