#pragma once

// Discrete Cauchy–Riemann operator on a rasterized planar domain.
//
// Unknowns live on raster nodes of Ω̄; equations live on grid cells whose four
// corners are all in Ω̄. On a cell with corners u00, u10, u01, u11
//
//   ∂u/∂z̄ ≈ ½(u_x + i u_y),  u_x = (u10 - u00 + u11 - u01)/(2h),
//                             u_y = (u01 - u00 + u11 - u10)/(2h).
//
// This is exact on polynomials in z of degree ≤ 2 and on z̄, and imposes no
// boundary condition on u. Both spaces carry the quadrature weight h², so
// norm ratios equal those of the bare matrix.

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dbar_range/form_algebra.hpp"
#include "dbar_range/planar_geometry.hpp"

namespace dbr {

using SparseC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct DbarGrid {
  double h = 0.0;
  Raster raster;                              // membership at mesh h
  std::vector<std::size_t> nodes;             // unknown -> raster index
  std::vector<std::array<int, 4>> cells;      // (u00, u10, u01, u11) as unknown indices
  std::vector<cplx> cell_centers;
  std::vector<std::size_t> interior_nodes;    // unknowns whose 4 neighbours are unknowns
  std::vector<std::uint8_t> collar_cell;      // cell has a corner outside interior_nodes
  SparseC D;                                  // cells x nodes

  std::size_t unknowns() const noexcept { return nodes.size(); }
  std::size_t rows() const noexcept { return cells.size(); }
  cplx node_point(std::size_t u) const { return raster.node(nodes[u]); }
  double weight() const noexcept { return h * h; }
};

DbarGrid assemble(const PlanarDomain& dom, double h);

/// Node values of f at every unknown.
Eigen::VectorXcd sample_nodes(const DbarGrid& g, const std::function<cplx(cplx)>& f);
/// Cell-centre values of f at every row.
Eigen::VectorXcd sample_cells(const DbarGrid& g, const std::function<cplx(cplx)>& f);

/// L² norms with the h² quadrature weight.
double node_norm(const DbarGrid& g, const Eigen::VectorXcd& v);
double cell_norm(const DbarGrid& g, const Eigen::VectorXcd& a);

struct SolveReport {
  double alpha_norm = 0.0;
  double v_norm = 0.0;
  double ratio = 0.0;
  int iterations = 0;
  double residual = 0.0;  // ‖D v - α‖ / ‖α‖
};

struct LeastNormResult {
  Eigen::VectorXcd v;
  SolveReport report;
};

/// Minimum-norm least-squares solution of D v = α by LSQR started at v = 0.
LeastNormResult least_norm_solve(const DbarGrid& g, const Eigen::VectorXcd& alpha, double rtol = 1e-9,
                                 int max_iterations = 0);

enum class SigmaMethod { Auto, Dense, Iterative };

struct SigmaReport {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  std::size_t kernel_dim = 0;  // dense path only; iterative reports deflated Ritz values
  std::string method;
  int iterations = 0;
  std::vector<double> ritz_history;  // smallest retained Ritz value per iteration (σ units)
};

inline constexpr std::size_t kDenseLimit = 2000;

/// Smallest nonzero singular value of D (so C = 1/sigma_min at the discrete level).
SigmaReport closed_range_constant(const DbarGrid& g, SigmaMethod method = SigmaMethod::Auto);

struct VerifyReport {
  int trials = 0;
  std::uint64_t seed = 0;
  double C = 0.0;
  double tol = 1e-6;
  double max_ratio = 0.0;
  double margin = 0.0;  // C / max_ratio, +inf with no trials
  bool passed = true;
  std::vector<double> ratios;
  double worst_residual = 0.0;
  int max_iterations = 0;
};

/// Random α = D f for seeded bump cocktails f; checks ‖v‖/‖α‖ ≤ C(1 + tol) for the
/// minimum-norm solution v.
VerifyReport verify_certificate(const DbarGrid& g, double C, int trials, std::uint64_t seed, double tol = 1e-6);

/// Scalar field on C with its second-order data (n = 1).
using ScalarField = std::function<HermitianField(cplx)>;

struct TwistedReport {
  double slack = 0.0;
  double adjoint_term = 0.0;  // 2‖√τ ϑ_λ u‖²_λ
  double theta_term = 0.0;    // ∫ Θ_{λ,τ}(u,u) e^{-λ}
  double scale = 0.0;         // ‖u‖²
};

/// Twisted estimate for a (0,1)-form u given on cells. In C¹, ∂̄u = 0 and
/// ϑ_λ u = e^{λ} D^H(e^{-λ} u) with D^H the conjugate transpose (the discrete
/// formal adjoint, ≈ -∂/∂z).
TwistedReport twisted_quadrature_check(const ScalarField& lambda, const ScalarField& tau, const Eigen::VectorXcd& u,
                                       const DbarGrid& g);

/// Writes "x,y,re,im" rows for a node field.
void write_node_csv(std::ostream& os, const DbarGrid& g, const Eigen::VectorXcd& v);

}  // namespace dbr
