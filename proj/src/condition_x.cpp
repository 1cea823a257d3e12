#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>

#include "dbar_range/errors.hpp"
#include "dbar_range/parallel.hpp"
#include "dbar_range/planar_geometry.hpp"

namespace dbr {

namespace {

// One Felzenszwalb–Huttenlocher pass over a line. Sites with f = +inf are
// skipped so the envelope never subtracts infinities.
void envelope_1d(const double* f, int n, double* d, int* v, double* z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s = 0.0;
    while (k >= 0) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s <= z[k])
        --k;
      else
        break;
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
    } else {
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = inf;
    }
  }
  if (k < 0) {
    std::fill(d, d + n, inf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

// Integer offsets inside the open disc of radius r (node units), sorted by
// (distance², dy, dx): the spiral visiting order for witness searches.
std::vector<std::pair<int, int>> disc_offsets(double r) {
  const int R = static_cast<int>(std::ceil(r));
  std::vector<std::pair<int, int>> out;
  for (int dy = -R; dy <= R; ++dy)
    for (int dx = -R; dx <= R; ++dx)
      if (double(dx) * dx + double(dy) * dy < r * r) out.emplace_back(dx, dy);
  std::sort(out.begin(), out.end(), [](auto a, auto b) {
    const long da = long(a.first) * a.first + long(a.second) * a.second;
    const long db = long(b.first) * b.first + long(b.second) * b.second;
    if (da != db) return da < db;
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  return out;
}

std::string pt(cplx z) { return "(" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")"; }

}  // namespace

std::vector<float> squared_distance_transform(const std::vector<std::uint8_t>& sites, int nx, int ny) {
  require(nx > 0 && ny > 0 && sites.size() == std::size_t(nx) * ny, ErrorKind::Argument,
          "distance transform: mask size does not match the grid");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<float> out(sites.size());
  // Row pass first (contiguous), then columns.
  parallel_chunks(std::size_t(ny), kSweepChunks, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<double> f(nx), d(nx), z(nx + 1);
    std::vector<int> v(nx);
    for (std::size_t j = b; j < e; ++j) {
      const std::uint8_t* row = sites.data() + j * nx;
      for (int i = 0; i < nx; ++i) f[i] = row[i] ? 0.0 : inf;
      envelope_1d(f.data(), nx, d.data(), v.data(), z.data());
      float* o = out.data() + j * nx;
      for (int i = 0; i < nx; ++i) o[i] = static_cast<float>(d[i]);
    }
  });
  parallel_chunks(std::size_t(nx), kSweepChunks, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<double> f(ny), d(ny), z(ny + 1);
    std::vector<int> v(ny);
    for (std::size_t i = b; i < e; ++i) {
      for (int j = 0; j < ny; ++j) f[j] = out[std::size_t(j) * nx + i];
      envelope_1d(f.data(), ny, d.data(), v.data(), z.data());
      for (int j = 0; j < ny; ++j) out[std::size_t(j) * nx + i] = static_cast<float>(d[j]);
    }
  });
  return out;
}

std::optional<cplx> ConditionXCertificate::witness_for(const PlanarDomain& dom, cplx z) const {
  require(admissible != nullptr, ErrorKind::Argument, "witness_for: certificate carries no grid state");
  const Raster& r = dom.raster();
  require(r.h == h, ErrorKind::Argument, "witness_for: certificate was computed at a different mesh");
  const auto [ci, cj] = r.nearest(z);
  const auto offsets = disc_offsets(M / h);
  for (auto [dx, dy] : offsets) {
    const int i = ci + dx, j = cj + dy;
    if (i < 0 || j < 0 || i >= r.nx || j >= r.ny) continue;
    if ((*admissible)[r.index(i, j)]) return r.node(i, j);
  }
  return std::nullopt;
}

ConditionXCertificate condition_x(const PlanarDomain& dom, double M, double delta) {
  require(M > 0.0 && delta > 0.0, ErrorKind::Argument, "condition_x: M and delta must be positive");
  const double h = dom.mesh();
  require(h < delta / 4.0, ErrorKind::Config,
          "condition_x: mesh " + std::to_string(h) + " must be below delta/4 = " + std::to_string(delta / 4.0));
  const Raster& r = dom.raster();
  const Window& win = dom.window();
  const std::size_t N = r.size();

  ConditionXCertificate cert;
  cert.M = M;
  cert.delta = delta;
  cert.h = h;
  cert.window_only = dom.symmetry() != Symmetry::None;

  auto checked = std::make_shared<std::vector<std::uint8_t>>(N, 0);
  const double margin = cert.window_only ? M + delta : M;
  for (std::size_t k = 0; k < N; ++k) {
    if (!r.open(k)) continue;
    const double ed = win.edge_distance(r.node(k));
    if (ed >= margin) {
      (*checked)[k] = 1;
    } else if (!cert.window_only) {
      fail(ErrorKind::Config, "condition_x: window too small, the search disc of radius " + std::to_string(M) +
                                  " around " + pt(r.node(k)) + " leaves the window");
    }
  }

  // Admissible z*: outside Ω̄ with grid clearance > delta, away from the window edge.
  std::vector<std::uint8_t> closed_mask(N);
  for (std::size_t k = 0; k < N; ++k) closed_mask[k] = r.closed(k) ? 1 : 0;
  std::vector<float> d_closed = squared_distance_transform(closed_mask, r.nx, r.ny);
  closed_mask.clear();
  closed_mask.shrink_to_fit();

  auto admissible = std::make_shared<std::vector<std::uint8_t>>(N, 0);
  const double dn2 = (delta / h) * (delta / h);
  for (std::size_t k = 0; k < N; ++k) {
    if (r.closed(k)) continue;
    if (double(d_closed[k]) <= dn2) continue;
    if (win.edge_distance(r.node(k)) <= delta) continue;
    (*admissible)[k] = 1;
  }
  d_closed.clear();
  d_closed.shrink_to_fit();

  std::vector<float> d_adm = squared_distance_transform(*admissible, r.nx, r.ny);
  const double mn2 = (M / h) * (M / h);
  std::size_t n_checked = 0;
  for (std::size_t k = 0; k < N; ++k) {
    if (!(*checked)[k]) continue;
    ++n_checked;
    if (double(d_adm[k]) < mn2) continue;
    ++cert.failure_count;
    if (cert.failure_points.size() < kMaxFailurePoints) cert.failure_points.push_back(r.node(k));
  }
  d_adm.clear();
  d_adm.shrink_to_fit();

  cert.checked_nodes = n_checked;
  cert.holds = n_checked > 0 ? cert.failure_count == 0 : true;
  cert.admissible = admissible;
  cert.checked = checked;

  // Deterministic witness sample: evenly strided over checked nodes in row-major order.
  if (n_checked > 0) {
    const std::size_t stride = std::max<std::size_t>(1, n_checked / kWitnessSample);
    std::size_t seen = 0;
    for (std::size_t k = 0; k < N && cert.witnesses.size() < kWitnessSample; ++k) {
      if (!(*checked)[k]) continue;
      if (seen++ % stride != 0) continue;
      if (auto w = cert.witness_for(dom, r.node(k))) cert.witnesses.push_back({r.node(k), *w});
    }
  }
  return cert;
}

LatticeWitnessSet build_lattice(const PlanarDomain& dom, double M, double delta) {
  return build_lattice(dom, condition_x(dom, M, delta));
}

LatticeWitnessSet build_lattice(const PlanarDomain& dom, const ConditionXCertificate& cert) {
  require(cert.holds, ErrorKind::Argument, "build_lattice: condition X does not hold for the given certificate");
  require(cert.checked != nullptr, ErrorKind::Argument, "build_lattice: certificate carries no grid state");
  const Raster& r = dom.raster();
  const double M = cert.M, h = r.h;
  const auto& checked = *cert.checked;
  const auto offsets = disc_offsets(M / h);

  LatticeWitnessSet out;
  out.M = M;
  out.delta = cert.delta;

  // Λ: lattice points whose open M-disc holds a checked node.
  std::set<std::pair<long long, long long>> lattice;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!checked[k]) continue;
    const cplx z = r.node(k);
    const long long a0 = static_cast<long long>(std::floor(z.real() / M));
    const long long b0 = static_cast<long long>(std::floor(z.imag() / M));
    for (long long a = a0 - 1; a <= a0 + 2; ++a)
      for (long long b = b0 - 1; b <= b0 + 2; ++b)
        if (std::norm(z - cplx(a * M, b * M)) < M * M) lattice.insert({a, b});
  }

  auto checked_at = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < r.nx && j < r.ny && checked[r.index(i, j)];
  };

  for (auto [a, b] : lattice) {
    LatticeEntry e;
    e.a = a;
    e.b = b;
    e.w = cplx(a * M, b * M);
    const auto [ci, cj] = r.nearest(e.w);
    const cplx wn = r.node(ci, cj);
    bool found = false;
    if (std::abs(wn - e.w) <= 1e-9 * h && checked_at(ci, cj)) {
      e.z = wn;
      found = true;
    } else {
      for (auto [dx, dy] : offsets) {
        const int i = ci + dx, j = cj + dy;
        if (!checked_at(i, j)) continue;
        const cplx z = r.node(i, j);
        if (std::norm(z - e.w) >= M * M) continue;
        e.z = z;
        found = true;
        break;
      }
    }
    if (!found) fail(ErrorKind::Internal, "build_lattice: clause (a) failed, no point of Ω near " + pt(e.w));
    auto ws = cert.witness_for(dom, e.z);
    if (!ws) fail(ErrorKind::Internal, "build_lattice: no condition-X witness for " + pt(e.z));
    e.wstar = *ws;
    out.entries.push_back(e);
  }

  // Re-verification of every clause before returning.
  for (const auto& e : out.entries) {
    // (a) the disc meets Ω and the complement of Ω̄.
    if (!(std::norm(e.z - e.w) < M * M && dom.tree().contains_open(e.z)))
      fail(ErrorKind::Internal, "build_lattice: clause (a) failed at w = " + pt(e.w) + " (no point of Ω)");
    if (!disc_meets_complement(dom, DiscQuery{e.w, M}))
      fail(ErrorKind::Internal, "build_lattice: clause (a) failed at w = " + pt(e.w) + " (disc inside Ω̄)");
    // (c)(i) clearance of w*.
    if (!(clearance(dom, e.wstar) > cert.delta))
      fail(ErrorKind::Internal, "build_lattice: clause (c)(i) failed, clearance of w* = " + pt(e.wstar) +
                                    " is not above delta");
    // (c)(ii) D(w,M) ⊂ D(w*,3M).
    if (!(std::abs(e.w - e.wstar) <= 2.0 * M))
      fail(ErrorKind::Internal, "build_lattice: clause (c)(ii) failed, |w - w*| > 2M at w = " + pt(e.w));
  }
  // (b) every checked node lies in the disc of its nearest lattice point.
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!checked[k]) continue;
    const cplx z = r.node(k);
    const long long a = std::llround(z.real() / M), b = std::llround(z.imag() / M);
    if (!(std::norm(z - cplx(a * M, b * M)) < M * M) || !lattice.count({a, b}))
      fail(ErrorKind::Internal, "build_lattice: clause (b) failed, " + pt(z) + " is not covered");
  }
  return out;
}

std::vector<GridComponent> exhaust(const PlanarDomain& dom, int j) {
  require(j >= 1, ErrorKind::Argument, "exhaust: j must be >= 1");
  const Raster& r = dom.raster();
  const double j2 = double(j) * j;
  std::vector<std::uint8_t> seen(r.size(), 0);
  auto in_set = [&](int i, int jj) {
    if (i < 0 || jj < 0 || i >= r.nx || jj >= r.ny) return false;
    const std::size_t k = r.index(i, jj);
    return r.open(k) && std::norm(r.node(i, jj)) < j2;
  };
  std::vector<GridComponent> out;
  std::deque<std::pair<int, int>> queue;
  for (int jj = 0; jj < r.ny; ++jj) {
    for (int i = 0; i < r.nx; ++i) {
      if (seen[r.index(i, jj)] || !in_set(i, jj)) continue;
      GridComponent comp;
      seen[r.index(i, jj)] = 1;
      queue.emplace_back(i, jj);
      while (!queue.empty()) {
        auto [ci, cj] = queue.front();
        queue.pop_front();
        comp.nodes.push_back(r.index(ci, cj));
        const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (auto& d : nb) {
          const int ni = ci + d[0], nj = cj + d[1];
          if (!in_set(ni, nj) || seen[r.index(ni, nj)]) continue;
          seen[r.index(ni, nj)] = 1;
          queue.emplace_back(ni, nj);
        }
      }
      std::sort(comp.nodes.begin(), comp.nodes.end());
      out.push_back(std::move(comp));
    }
  }
  return out;
}

}  // namespace dbr
