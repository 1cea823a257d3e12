#include "dbar_range/dbar_discrete.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "dbar_range/errors.hpp"
#include "dbar_range/random.hpp"

namespace dbr {

DbarGrid assemble(const PlanarDomain& dom, double h) {
  require(h > 0.0 && std::isfinite(h), ErrorKind::Argument, "assemble: mesh must be positive");
  const Window& w = dom.window();
  const double side = std::max(w.width(), w.height());
  require(h <= side / 16.0 * (1.0 + 1e-12), ErrorKind::Mesh,
          "assemble: mesh " + std::to_string(h) + " is coarser than window/16 = " + std::to_string(side / 16.0));

  DbarGrid g;
  g.h = h;
  g.raster = (h == dom.mesh()) ? dom.raster() : dom.rasterize(h);
  const Raster& r = g.raster;

  // Cells with all four corners in Ω̄; their corners are the unknowns.
  std::vector<int> unknown_of(r.size(), -1);
  std::vector<std::array<std::size_t, 4>> corner_idx;
  for (int j = 0; j + 1 < r.ny; ++j) {
    for (int i = 0; i + 1 < r.nx; ++i) {
      const std::array<std::size_t, 4> c{r.index(i, j), r.index(i + 1, j), r.index(i, j + 1), r.index(i + 1, j + 1)};
      if (r.closed(c[0]) && r.closed(c[1]) && r.closed(c[2]) && r.closed(c[3])) {
        corner_idx.push_back(c);
        for (auto k : c) unknown_of[k] = 0;
      }
    }
  }
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (unknown_of[k] < 0) continue;
    unknown_of[k] = static_cast<int>(g.nodes.size());
    g.nodes.push_back(k);
  }
  require(g.nodes.size() >= 16, ErrorKind::Mesh,
          "assemble: only " + std::to_string(g.nodes.size()) + " grid nodes in the domain (need at least 16)");

  std::vector<std::uint8_t> interior(g.nodes.size(), 0);
  for (std::size_t u = 0; u < g.nodes.size(); ++u) {
    const std::size_t k = g.nodes[u];
    const int i = static_cast<int>(k % r.nx), j = static_cast<int>(k / r.nx);
    if (i == 0 || j == 0 || i + 1 == r.nx || j + 1 == r.ny) continue;
    if (unknown_of[r.index(i - 1, j)] >= 0 && unknown_of[r.index(i + 1, j)] >= 0 &&
        unknown_of[r.index(i, j - 1)] >= 0 && unknown_of[r.index(i, j + 1)] >= 0) {
      interior[u] = 1;
      g.interior_nodes.push_back(u);
    }
  }

  const double q = 1.0 / (4.0 * h);
  const cplx c00 = cplx(-1.0, -1.0) * q, c10 = cplx(1.0, -1.0) * q, c01 = cplx(-1.0, 1.0) * q,
             c11 = cplx(1.0, 1.0) * q;
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(corner_idx.size() * 4);
  for (std::size_t row = 0; row < corner_idx.size(); ++row) {
    const auto& c = corner_idx[row];
    std::array<int, 4> uk{unknown_of[c[0]], unknown_of[c[1]], unknown_of[c[2]], unknown_of[c[3]]};
    g.cells.push_back(uk);
    g.cell_centers.push_back(r.node(c[0]) + cplx(0.5 * h, 0.5 * h));
    g.collar_cell.push_back(!(interior[uk[0]] && interior[uk[1]] && interior[uk[2]] && interior[uk[3]]));
    const int ri = static_cast<int>(row);
    trips.emplace_back(ri, uk[0], c00);
    trips.emplace_back(ri, uk[1], c10);
    trips.emplace_back(ri, uk[2], c01);
    trips.emplace_back(ri, uk[3], c11);
  }
  g.D.resize(static_cast<Eigen::Index>(g.cells.size()), static_cast<Eigen::Index>(g.nodes.size()));
  g.D.setFromTriplets(trips.begin(), trips.end());
  g.D.makeCompressed();
  return g;
}

Eigen::VectorXcd sample_nodes(const DbarGrid& g, const std::function<cplx(cplx)>& f) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(g.unknowns()));
  for (std::size_t u = 0; u < g.unknowns(); ++u) v[static_cast<Eigen::Index>(u)] = f(g.node_point(u));
  return v;
}

Eigen::VectorXcd sample_cells(const DbarGrid& g, const std::function<cplx(cplx)>& f) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(g.rows()));
  for (std::size_t c = 0; c < g.rows(); ++c) v[static_cast<Eigen::Index>(c)] = f(g.cell_centers[c]);
  return v;
}

double node_norm(const DbarGrid& g, const Eigen::VectorXcd& v) { return g.h * v.norm(); }
double cell_norm(const DbarGrid& g, const Eigen::VectorXcd& a) { return g.h * a.norm(); }

// ---------------------------------------------------------------------------
// LSQR (Paige & Saunders) for complex data. The Golub–Kahan scalars stay real.

LeastNormResult least_norm_solve(const DbarGrid& g, const Eigen::VectorXcd& alpha, double rtol, int max_iterations) {
  require(alpha.size() == static_cast<Eigen::Index>(g.rows()), ErrorKind::Argument,
          "least_norm_solve: alpha must have one value per grid cell");
  const SparseC& A = g.D;
  const Eigen::Index n = A.cols();
  if (max_iterations <= 0) max_iterations = std::max<int>(2000, 8 * static_cast<int>(n));

  LeastNormResult out;
  out.v = Eigen::VectorXcd::Zero(n);
  const double bnorm = alpha.norm();
  out.report.alpha_norm = g.h * bnorm;
  if (bnorm == 0.0) return out;

  Eigen::VectorXcd u = alpha / bnorm;
  double beta = bnorm;
  Eigen::VectorXcd v = A.adjoint() * u;
  double a = v.norm();
  if (a > 0.0) v /= a;
  Eigen::VectorXcd w = v;
  double phibar = beta, rhobar = a;
  Eigen::VectorXcd& x = out.v;

  // ‖A‖ estimate from the bidiagonal entries, for the normal-equation test.
  double anorm2 = a * a;
  int it = 0;
  bool converged = (a == 0.0);
  for (; it < max_iterations && !converged; ++it) {
    u = A * v - a * u;
    beta = u.norm();
    if (beta > 0.0) u /= beta;
    v = A.adjoint() * u - beta * v;
    a = v.norm();
    if (a > 0.0) v /= a;
    anorm2 += beta * beta + a * a;

    const double rho = std::hypot(rhobar, beta);
    const double c = rhobar / rho, s = beta / rho;
    const double theta = s * a;
    rhobar = -c * a;
    const double phi = c * phibar;
    phibar = s * phibar;
    x += (phi / rho) * w;
    w = v - (theta / rho) * w;

    const double rnorm = std::abs(phibar);
    const double arnorm = std::abs(phibar * a * c);
    if (rnorm <= rtol * bnorm) converged = true;
    // Inconsistent right-hand side: stop once the normal equations are solved.
    if (arnorm <= 1e-14 * std::sqrt(anorm2) * std::max(rnorm, 1e-300)) converged = true;
    if (a == 0.0 || beta == 0.0) converged = true;
  }

  const double res = (A * x - alpha).norm();
  out.report.iterations = it;
  out.report.residual = res / bnorm;
  out.report.v_norm = g.h * x.norm();
  out.report.ratio = out.report.v_norm / out.report.alpha_norm;
  if (!converged) {
    std::ostringstream os;
    os << "least_norm_solve: no convergence in " << it << " iterations, relative residual " << std::scientific
       << out.report.residual;
    fail(ErrorKind::Solver, os.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Smallest nonzero singular value

namespace {

constexpr double kKernelRel = 1e-6;  // σ < kKernelRel·σ_max counts as kernel

SigmaReport sigma_dense(const DbarGrid& g) {
  const Eigen::MatrixXcd Dd = Eigen::MatrixXcd(g.D);
  const bool rows_small = Dd.rows() <= Dd.cols();
  const Eigen::MatrixXcd G = rows_small ? Eigen::MatrixXcd(Dd * Dd.adjoint()) : Eigen::MatrixXcd(Dd.adjoint() * Dd);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorKind::Solver, "dense eigen-decomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  SigmaReport rep;
  rep.method = "dense";
  const double lmax = std::max(ev[ev.size() - 1], 0.0);
  rep.sigma_max = std::sqrt(lmax);
  const double thr = kKernelRel * kKernelRel * lmax;
  std::size_t rank = 0;
  double lmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (ev[k] > thr) {
      ++rank;
      lmin = std::min(lmin, ev[k]);
    }
  rep.kernel_dim = static_cast<std::size_t>(Dd.cols()) - rank;
  rep.sigma_min = rank ? std::sqrt(lmin) : 0.0;
  return rep;
}

using SparseCol = Eigen::SparseMatrix<cplx>;

double power_lambda_max(const SparseCol& A, std::mt19937_64& rng) {
  Eigen::VectorXcd x(A.rows());
  for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
  x.normalize();
  double lam = 0.0;
  for (int it = 0; it < 60; ++it) {
    Eigen::VectorXcd y = A * x;
    lam = x.dot(y).real();
    const double ny = y.norm();
    if (ny == 0.0) break;
    x = y / ny;
  }
  return lam;
}

SigmaReport sigma_iterative(const DbarGrid& g) {
  SigmaReport rep;
  rep.method = "iterative";
  const bool rows_small = g.D.rows() <= g.D.cols();
  SparseCol A = rows_small ? SparseCol(g.D * g.D.adjoint()) : SparseCol(g.D.adjoint() * g.D);
  A.makeCompressed();
  const Eigen::Index n = A.rows();
  std::mt19937_64 rng(0x5eed5eedULL);
  // Power iteration under-estimates; inflate slightly for the kernel threshold only.
  const double lmax = power_lambda_max(A, rng) * 1.05;
  rep.sigma_max = std::sqrt(lmax / 1.05);
  const double thr = kKernelRel * kKernelRel * lmax;

  SparseCol S = A;
  for (Eigen::Index k = 0; k < n; ++k) S.coeffRef(k, k) += 1e-14 * lmax;
  Eigen::SimplicialLDLT<SparseCol, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(S);
  require(ldlt.info() == Eigen::Success, ErrorKind::Solver, "iterative sigma_min: factorization failed");

  Eigen::Index p = std::min<Eigen::Index>(6, n);
  Eigen::MatrixXcd X(n, p);
  for (Eigen::Index c = 0; c < p; ++c)
    for (Eigen::Index k = 0; k < n; ++k) X(k, c) = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));

  double prev = std::numeric_limits<double>::infinity();
  constexpr int kMaxIt = 400;
  for (int it = 1; it <= kMaxIt; ++it) {
    Eigen::MatrixXcd Y = ldlt.solve(X);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Y);
    Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, p);
    Eigen::MatrixXcd AQ = A * Q;
    Eigen::MatrixXcd H = Q.adjoint() * AQ;
    H = 0.5 * (H + H.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const Eigen::VectorXd& th = es.eigenvalues();
    X = Q * es.eigenvectors();

    Eigen::Index first = 0;
    while (first < p && th[first] <= thr) ++first;
    if (first == p) {
      // Whole block is kernel: widen it.
      require(p < std::min<Eigen::Index>(64, n), ErrorKind::Solver,
              "iterative sigma_min: kernel exhausts the search block");
      const Eigen::Index np = std::min<Eigen::Index>(2 * p, n);
      Eigen::MatrixXcd Xn(n, np);
      Xn.leftCols(p) = X;
      for (Eigen::Index c = p; c < np; ++c)
        for (Eigen::Index k = 0; k < n; ++k) Xn(k, c) = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
      X = Xn;
      p = np;
      continue;
    }
    const double theta = th[first];
    rep.ritz_history.push_back(std::sqrt(std::max(theta, 0.0)));
    rep.iterations = it;
    const Eigen::VectorXcd x = X.col(first);
    const double resid = (A * x - theta * x).norm();
    const bool settled = std::abs(theta - prev) <= 1e-14 * theta;
    if (resid <= 1e-9 * theta || (settled && resid <= 1e-6 * theta)) {
      rep.sigma_min = std::sqrt(theta);
      return rep;
    }
    prev = theta;
  }
  std::ostringstream os;
  os << "iterative sigma_min stagnated after " << kMaxIt << " iterations; Ritz history (last 10):";
  const std::size_t from = rep.ritz_history.size() > 10 ? rep.ritz_history.size() - 10 : 0;
  os << std::setprecision(12);
  for (std::size_t k = from; k < rep.ritz_history.size(); ++k) os << ' ' << rep.ritz_history[k];
  fail(ErrorKind::Solver, os.str());
}

}  // namespace

SigmaReport closed_range_constant(const DbarGrid& g, SigmaMethod method) {
  require(g.rows() > 0, ErrorKind::Mesh, "closed_range_constant: grid has no cells");
  if (method == SigmaMethod::Auto)
    method = g.unknowns() <= kDenseLimit ? SigmaMethod::Dense : SigmaMethod::Iterative;
  if (method == SigmaMethod::Dense) {
    require(std::min(g.unknowns(), g.rows()) <= 4 * kDenseLimit, ErrorKind::Argument,
            "closed_range_constant: grid too large for the dense path");
    return sigma_dense(g);
  }
  return sigma_iterative(g);
}

// ---------------------------------------------------------------------------

namespace {

double bump(double s2) { return s2 < 1.0 ? std::exp(-1.0 / (1.0 - s2)) : 0.0; }

}  // namespace

VerifyReport verify_certificate(const DbarGrid& g, double C, int trials, std::uint64_t seed, double tol) {
  require(C > 0.0, ErrorKind::Argument, "verify_certificate: C must be positive");
  require(trials >= 0, ErrorKind::Argument, "verify_certificate: trials must be nonnegative");
  VerifyReport rep;
  rep.trials = trials;
  rep.seed = seed;
  rep.C = C;
  rep.tol = tol;
  rep.margin = std::numeric_limits<double>::infinity();
  if (trials == 0) return rep;

  // Radius range tied to the grid's extent.
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (std::size_t u = 0; u < g.unknowns(); ++u) {
    const cplx z = g.node_point(u);
    xmin = std::min(xmin, z.real());
    xmax = std::max(xmax, z.real());
    ymin = std::min(ymin, z.imag());
    ymax = std::max(ymax, z.imag());
  }
  const double rmin = 3.0 * g.h;
  const double rmax = std::max(rmin, 0.25 * std::max(xmax - xmin, ymax - ymin));

  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    const int nb = 1 + static_cast<int>(rng() % 3);
    std::vector<std::tuple<cplx, double, cplx>> parts;
    for (int b = 0; b < nb; ++b) {
      const std::size_t u = static_cast<std::size_t>(rng() % g.unknowns());
      const double r = uniform(rng, rmin, rmax);
      const cplx a(uniform(rng, -1, 1), uniform(rng, -1, 1));
      parts.emplace_back(g.node_point(u), r, a);
    }
    const Eigen::VectorXcd f = sample_nodes(g, [&](cplx z) {
      cplx s = 0.0;
      for (const auto& [c, r, a] : parts) s += a * bump(std::norm(z - c) / (r * r));
      return s;
    });
    const Eigen::VectorXcd alpha = g.D * f;
    if (alpha.norm() == 0.0) {
      rep.ratios.push_back(0.0);
      continue;
    }
    const auto sol = least_norm_solve(g, alpha);
    rep.ratios.push_back(sol.report.ratio);
    rep.max_ratio = std::max(rep.max_ratio, sol.report.ratio);
    rep.worst_residual = std::max(rep.worst_residual, sol.report.residual);
    rep.max_iterations = std::max(rep.max_iterations, sol.report.iterations);
  }
  rep.passed = rep.max_ratio <= C * (1.0 + tol);
  rep.margin = rep.max_ratio > 0.0 ? C / rep.max_ratio : std::numeric_limits<double>::infinity();
  return rep;
}

TwistedReport twisted_quadrature_check(const ScalarField& lambda, const ScalarField& tau, const Eigen::VectorXcd& u,
                                       const DbarGrid& g) {
  require(u.size() == static_cast<Eigen::Index>(g.rows()), ErrorKind::Argument,
          "twisted_quadrature_check: u must have one value per grid cell");
  for (std::size_t c = 0; c < g.rows(); ++c)
    if (g.collar_cell[c] && u[static_cast<Eigen::Index>(c)] != cplx(0.0))
      fail(ErrorKind::Argument, "twisted_quadrature_check: support of u touches the boundary collar");

  const double w = g.weight();
  TwistedReport rep;
  rep.scale = w * u.squaredNorm();
  if (rep.scale == 0.0) return rep;

  // e^{-λ} u on cells, then ϑ_λ u = e^{λ} D^H(e^{-λ} u) on nodes.
  Eigen::VectorXcd eu(u.size());
  double theta_sum = 0.0;
  for (std::size_t c = 0; c < g.rows(); ++c) {
    const Eigen::Index k = static_cast<Eigen::Index>(c);
    if (u[k] == cplx(0.0)) {
      eu[k] = 0.0;
      continue;
    }
    const HermitianField L = lambda(g.cell_centers[c]);
    const HermitianField T = tau(g.cell_centers[c]);
    const double el = std::exp(-L.value);
    eu[k] = el * u[k];
    FormValue f(1, 1);
    f.set(MultiIndex({1}), u[k]);
    theta_sum += theta(L, T, f) * el;
  }
  const Eigen::VectorXcd adj = g.D.adjoint() * eu;
  double adj_sum = 0.0;
  for (std::size_t n = 0; n < g.unknowns(); ++n) {
    const Eigen::Index k = static_cast<Eigen::Index>(n);
    if (adj[k] == cplx(0.0)) continue;
    const cplx z = g.node_point(n);
    const HermitianField L = lambda(z);
    const HermitianField T = tau(z);
    require(T.value > 0.0, ErrorKind::Domain, "twisted_quadrature_check: tau must be positive on the support");
    const cplx vartheta = std::exp(L.value) * adj[k];
    adj_sum += T.value * std::norm(vartheta) * std::exp(-L.value);
  }
  rep.adjoint_term = 2.0 * w * adj_sum;
  rep.theta_term = w * theta_sum;
  rep.slack = rep.adjoint_term - rep.theta_term;
  return rep;
}

void write_node_csv(std::ostream& os, const DbarGrid& g, const Eigen::VectorXcd& v) {
  require(v.size() == static_cast<Eigen::Index>(g.unknowns()), ErrorKind::Argument,
          "write_node_csv: field size does not match the grid");
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf << std::setprecision(17) << "x,y,re,im\n";
  for (std::size_t n = 0; n < g.unknowns(); ++n) {
    const cplx z = g.node_point(n);
    const cplx val = v[static_cast<Eigen::Index>(n)];
    buf << z.real() << ',' << z.imag() << ',' << val.real() << ',' << val.imag() << '\n';
  }
  os << buf.str();
}

}  // namespace dbr
