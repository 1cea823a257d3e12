#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/SVD>

#include "dbar_range/dbar_discrete.hpp"
#include "dbar_range/errors.hpp"
#include "dbar_range/random.hpp"

using namespace dbr;

namespace {

PlanarDomain unit_disc(double R = 1.0) {
  const double w = 1.5 * R;
  return PlanarDomain(Window{-w, w, -w, w}, R / 64.0, Shape{Disc{cplx(0, 0), R}});
}

PlanarDomain unit_square() { return PlanarDomain(Window{-2, 2, -2, 2}, 0.25, Shape{Rect{0, 1, 0, 1}}); }

Eigen::MatrixXcd dense(const DbarGrid& g) { return Eigen::MatrixXcd(g.D); }

// Smallest nonzero singular value by a full SVD of the dense matrix.
double oracle_sigma_min(const DbarGrid& g) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(dense(g));
  const auto& s = svd.singularValues();
  const double cut = 1e-6 * s(0);
  double best = s(0);
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > cut) best = std::min(best, s(k));
  return best;
}

cplx bump(cplx z, cplx c, double r) {
  const double s = std::norm(z - c) / (r * r);
  return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
}

}  // namespace

TEST_CASE("unit square at h = 1/4") {
  const auto g = assemble(unit_square(), 0.25);
  CHECK(g.unknowns() == 25);
  CHECK(g.rows() == 16);
  CHECK(g.interior_nodes.size() == 9);
  const auto one = sample_nodes(g, [](cplx) { return cplx(1.0); });
  CHECK((g.D * one).norm() <= 1e-13);
}

TEST_CASE("stencil is exact on low-degree polynomials") {
  const auto g = assemble(unit_disc(), 1.0 / 8.0);
  const Eigen::VectorXcd zbar = g.D * sample_nodes(g, [](cplx z) { return std::conj(z); });
  const Eigen::VectorXcd z1 = g.D * sample_nodes(g, [](cplx z) { return z; });
  const Eigen::VectorXcd z2 = g.D * sample_nodes(g, [](cplx z) { return z * z; });
  for (Eigen::Index k = 0; k < zbar.size(); ++k) {
    CHECK(std::abs(zbar(k) - 1.0) <= 1e-12);
    CHECK(std::abs(z1(k)) <= 1e-12);
    CHECK(std::abs(z2(k)) <= 1e-12);
  }
  // |z|² has ∂/∂z̄ = z; the cell value is exact at the centre.
  const Eigen::VectorXcd zz = g.D * sample_nodes(g, [](cplx z) { return std::norm(z); });
  for (std::size_t c = 0; c < g.rows(); ++c) CHECK(std::abs(zz(Eigen::Index(c)) - g.cell_centers[c]) <= 1e-12);
}

TEST_CASE("mesh errors") {
  try {
    assemble(unit_square(), 0.3);
    FAIL("expected a mesh error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Mesh);
  }
  PlanarDomain tiny(Window{-2, 2, -2, 2}, 0.25, Shape{Rect{0, 0.5, 0, 0.5}});
  CHECK_THROWS_AS(assemble(tiny, 0.25), Error);
  CHECK_THROWS_AS(assemble(unit_square(), -1.0), Error);
}

TEST_CASE("least-norm solve matches the dense pseudo-inverse") {
  const auto g = assemble(unit_disc(), 1.0 / 8.0);
  const Eigen::MatrixXcd Dd = dense(g);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(Dd);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 4; ++t) {
    const cplx c(uniform(rng, -0.4, 0.4), uniform(rng, -0.4, 0.4));
    const auto f = sample_nodes(g, [&](cplx z) { return bump(z, c, 0.5); });
    const Eigen::VectorXcd alpha = g.D * f;
    const auto res = least_norm_solve(g, alpha);
    const Eigen::VectorXcd ref = cod.solve(alpha);
    CHECK((res.v - ref).norm() <= 1e-6 * ref.norm());
    CHECK(res.report.residual <= 1e-8);
    CHECK(res.report.ratio <= node_norm(g, f) / cell_norm(g, alpha) * (1 + 1e-9));
  }
  const auto zero = least_norm_solve(g, Eigen::VectorXcd::Zero(Eigen::Index(g.rows())));
  CHECK(zero.v.norm() == 0.0);
  CHECK_THROWS_AS(least_norm_solve(g, Eigen::VectorXcd::Zero(3)), Error);
}

TEST_CASE("solution ratios are bounded by 1/sigma_min for every bump centre") {
  const auto g = assemble(unit_disc(), 1.0 / 8.0);
  const double bound = 1.0 / closed_range_constant(g, SigmaMethod::Dense).sigma_min;
  for (double x : {-0.5, 0.0, 0.3})
    for (double y : {-0.2, 0.4}) {
      const auto f = sample_nodes(g, [&](cplx z) { return bump(z, cplx(x, y), 0.4); });
      const auto res = least_norm_solve(g, g.D * f);
      CHECK(res.report.ratio <= bound * (1 + 1e-6));
    }
}

TEST_CASE("sigma_min against a dense SVD oracle") {
  // A 1 x N ribbon, the unit disc and a two-component set.
  PlanarDomain ribbon(Window{-1, 5, -1, 1}, 0.25, Shape{Rect{0, 4, 0, 0.25}});
  PlanarDomain two(Window{-3, 3, -2, 2}, 0.125,
                   make_union({Shape{Disc{cplx(-1.5, 0), 0.8}}, Shape{Rect{0.5, 2.5, -0.5, 0.5}}}));
  for (const auto* d : {&ribbon, &two}) {
    const auto g = assemble(*d, d->mesh());
    const double ref = oracle_sigma_min(g);
    const auto dn = closed_range_constant(g, SigmaMethod::Dense);
    const auto it = closed_range_constant(g, SigmaMethod::Iterative);
    CHECK(dn.sigma_min == doctest::Approx(ref).epsilon(1e-9));
    CHECK(std::abs(it.sigma_min - ref) <= 1e-6 * ref);
  }
  const auto disc = assemble(unit_disc(), 1.0 / 8.0);
  CHECK(closed_range_constant(disc, SigmaMethod::Dense).sigma_min ==
        doctest::Approx(oracle_sigma_min(disc)).epsilon(1e-9));
}

TEST_CASE("sigma_min on the unit disc is stable in h") {
  const auto a = closed_range_constant(assemble(unit_disc(), 1.0 / 8.0));
  const auto b = closed_range_constant(assemble(unit_disc(), 1.0 / 16.0));
  CHECK(a.method == "dense");
  CHECK(b.method == "dense");
  CHECK(std::abs(a.sigma_min - b.sigma_min) <= 0.1 * a.sigma_min);
}

TEST_CASE("sigma_min on the strip of height 1 changes by under 10% when h halves") {
  PlanarDomain strip(Window{-3, 3, -1, 2}, 0.1, Shape{GraphStrip{Pchip({-3.0}, {0.0}), Pchip({-3.0}, {1.0})}},
                     Symmetry::TranslationX);
  const double a = closed_range_constant(assemble(strip, 0.1)).sigma_min;
  const double b = closed_range_constant(assemble(strip, 0.05)).sigma_min;
  CHECK(std::abs(a - b) <= 0.1 * a);
}

TEST_CASE("verify_certificate") {
  const auto g = assemble(unit_disc(), 1.0 / 8.0);
  const double sigma = closed_range_constant(g, SigmaMethod::Dense).sigma_min;
  const auto ok = verify_certificate(g, 1.0 / sigma, 10, 42);
  CHECK(ok.passed);
  CHECK(ok.ratios.size() == 10);
  CHECK(ok.max_ratio <= 1.0 / sigma);
  CHECK(ok.seed == 42);
  const auto again = verify_certificate(g, 1.0 / sigma, 10, 42);
  CHECK(again.ratios == ok.ratios);
  const auto bad = verify_certificate(g, 1e-9, 3, 1);
  CHECK_FALSE(bad.passed);
  const auto none = verify_certificate(g, 1.0, 0, 1);
  CHECK(none.ratios.empty());
  CHECK(none.passed);
  CHECK(std::isinf(none.margin));
  CHECK_THROWS_AS(verify_certificate(g, 0.0, 1, 1), Error);
}

TEST_CASE("twisted quadrature check") {
  const auto g = assemble(unit_disc(), 1.0 / 16.0);
  const ScalarField zero = [](cplx) { return HermitianField::constant(1, 0.0); };
  const ScalarField one = [](cplx) { return HermitianField::constant(1, 1.0); };
  const ScalarField abs2 = [](cplx z) {
    Eigen::MatrixXcd H(1, 1);
    H(0, 0) = 1.0;
    Eigen::VectorXcd grad(1);
    grad(0) = std::conj(z);
    return HermitianField(H, grad, std::norm(z));
  };
  Eigen::VectorXcd u = sample_cells(g, [](cplx z) { return bump(z, cplx(0.1, -0.1), 0.5) * cplx(1.0, 0.5); });
  const auto flat = twisted_quadrature_check(zero, one, u, g);
  CHECK(flat.theta_term == 0.0);
  CHECK(flat.slack >= 0.0);
  const auto curved = twisted_quadrature_check(abs2, one, u, g);
  CHECK(curved.theta_term > 0.0);
  CHECK(curved.slack >= -1e-2 * curved.scale);
  const auto nothing = twisted_quadrature_check(abs2, one, Eigen::VectorXcd::Zero(u.size()), g);
  CHECK(nothing.slack == 0.0);

  Eigen::VectorXcd edge = Eigen::VectorXcd::Zero(u.size());
  for (std::size_t c = 0; c < g.rows(); ++c)
    if (g.collar_cell[c]) {
      edge(Eigen::Index(c)) = 1.0;
      break;
    }
  CHECK_THROWS_AS(twisted_quadrature_check(zero, one, edge, g), Error);
}

TEST_CASE("node CSV dump") {
  const auto g = assemble(unit_square(), 0.25);
  std::ostringstream os;
  write_node_csv(os, g, sample_nodes(g, [](cplx z) { return z; }));
  const std::string s = os.str();
  CHECK(s.rfind("x,y,re,im\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 26);
  CHECK(s.find(',') != std::string::npos);
}
