#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dbar_range/errors.hpp"
#include "dbar_range/harness.hpp"
#include "dbar_range/pipeline.hpp"
#include "dbar_range/report.hpp"

using namespace dbr;
using nlohmann::json;

namespace {

// Closed-form pieces of the bump on s = |z|², differentiated by hand.
double oracle_a1(double s) {
  const double t = 1.0 - s;
  return -std::exp(-1.0 / t) / (t * t);
}

// Simpson on [0, 1) of the squared radial quantities, with dA = π ds.
std::pair<double, double> oracle_norms(int n) {
  auto f_num = [](double s) { return s * oracle_a1(s) * oracle_a1(s); };
  auto f_den = [](double s) {
    const double t = 1.0 - s;
    const double a = std::exp(-1.0 / t);
    const double a2 = a / std::pow(t, 4) - 2.0 * a / std::pow(t, 3);
    const double v = oracle_a1(s) + s * a2;
    return v * v;
  };
  double sn = 0.0, sd = 0.0;
  const double h = 1.0 / n;
  for (int k = 0; k <= n; ++k) {
    const double s = std::min(k * h, 1.0 - 1e-12);
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    sn += w * f_num(s);
    sd += w * f_den(s);
  }
  return {std::sqrt(std::numbers::pi * sn * h / 3.0), std::sqrt(std::numbers::pi * sd * h / 3.0)};
}

}  // namespace

TEST_CASE("bump profile derivatives") {
  for (double s = 0.05; s < 0.95; s += 0.05) {
    const auto b = bump_profile(s);
    const double e = 1e-6;
    CHECK(b.a == doctest::Approx(std::exp(-1.0 / (1.0 - s))));
    CHECK(b.a1 == doctest::Approx((bump_profile(s + e).a - bump_profile(s - e).a) / (2 * e)).epsilon(1e-6));
    CHECK(b.a2 == doctest::Approx((bump_profile(s + e).a1 - bump_profile(s - e).a1) / (2 * e)).epsilon(1e-5));
  }
  CHECK(bump_profile(1.0).a == 0.0);
  CHECK(bump_profile(2.0).a1 == 0.0);
}

TEST_CASE("analytic scaling path") {
  const auto [num, den] = oracle_norms(200000);
  const auto a1 = scaling_ratio_analytic(1);
  CHECK(a1.num == doctest::Approx(num).epsilon(1e-8));
  CHECK(a1.den == doctest::Approx(den).epsilon(1e-8));
  for (int j : {1, 2, 4, 8}) {
    const auto a = scaling_ratio_analytic(j), b = scaling_ratio_analytic(2 * j);
    CHECK(b.ratio / a.ratio == 2.0);
    CHECK(b.num == a.num);
  }
  CHECK_THROWS_AS(scaling_ratio_analytic(0), Error);
}

TEST_CASE("quadrature scaling path converges") {
  const double exact = scaling_ratio_analytic(1).ratio;
  const double e1 = std::abs(scaling_ratio_quadrature(1, 1.0 / 32).ratio - exact);
  const double e2 = std::abs(scaling_ratio_quadrature(1, 1.0 / 64).ratio - exact);
  CHECK(e1 < 0.01 * exact);
  CHECK(e2 < e1);
  const auto r = scaling_ratio(4);
  CHECK(r.rel_diff < 0.01);
  try {
    scaling_ratio(1, 0.5);
    FAIL("expected a mesh error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Mesh);
  }
}

TEST_CASE("tube factor") {
  CHECK(tube_factor(1) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  CHECK(tube_factor(2) == doctest::Approx(std::numbers::pi * std::numbers::pi / 2).epsilon(1e-15));
  for (int m = 1; m < 8; ++m)
    CHECK(tube_factor(m + 1) / tube_factor(m) == doctest::Approx(std::numbers::pi / (m + 1)).epsilon(1e-14));
  const auto mc = tube_factor_monte_carlo(2, 7, 200000);
  CHECK(mc.samples == 200000);
  CHECK(std::abs(mc.estimate - tube_factor(2)) < 0.02 * tube_factor(2));
  CHECK(tube_factor_monte_carlo(2, 7, 1000).estimate == tube_factor_monte_carlo(2, 7, 1000).estimate);
  CHECK_THROWS_AS(tube_factor(0), Error);
}

TEST_CASE("galleries") {
  const Window w{-8, 8, -8, 8};
  const auto u = make_gallery("uniform", w);
  CHECK(u.spacing == 1.0);
  CHECK(u.min_gap == 0.5);
  for (const auto& b : u.bands) {
    CHECK(b.c_j - b.c_prev == 1.0);
    CHECK(b.hi - b.lo == 0.5);
    CHECK(b.c_prev < b.lo);
    CHECK(b.hi < b.c_j);
  }
  const auto s = make_gallery("shrinking", w);
  CHECK(s.spacing == doctest::Approx(1.5));
  CHECK(s.min_gap < 0.2);
  for (const auto& b : s.bands) CHECK(b.hi - b.lo == doctest::Approx(0.5));
  CHECK_THROWS_AS(make_gallery("spiral", w), Error);
  const auto dom = gallery_domain(u, w, 0.04);
  CHECK(dom.symmetry() == Symmetry::TranslationX);
  CHECK(contains(dom, cplx(0.0, 0.5)));
  CHECK_FALSE(contains(dom, cplx(0.0, 0.0)));
  const auto det = detect_strips(dom);
  REQUIRE(det.has_value());
  CHECK(det->spacing == doctest::Approx(1.0));
}

TEST_CASE("scenarios") {
  const auto sc = run_scenario(json{{"scenario", "scaling"}, {"params", {{"js", {1, 2, 4}}}}});
  CHECK(sc.all_pass());
  CHECK(sc.measured["rows"].size() == 3);
  CHECK(sc.csv.rfind("j,", 0) == 0);

  const auto tube = run_scenario(json{{"scenario", "tube"}, {"params", {{"m", 3}}}, {"seed", 5}});
  CHECK(tube.all_pass());
  CHECK(tube.measured["c_m"].get<double>() == doctest::Approx(std::pow(std::numbers::pi, 3) / 6).epsilon(1e-15));

  const auto gal = run_scenario(json{{"scenario", "gallery"}, {"params", {{"kind", "uniform"}}}});
  CHECK(gal.all_pass());
  CHECK(gal.measured["condition_x"]["holds"].get<bool>());
  CHECK(gal.measured["strip_weight"]["C"].get<double>() == doctest::Approx(2.0 * std::numbers::e));

  const auto shr = run_scenario(json{{"scenario", "gallery"}, {"params", {{"kind", "shrinking"}, {"M", 2.0}, {"delta", 0.2}}}});
  CHECK_FALSE(shr.measured["condition_x"]["holds"].get<bool>());
  CHECK(shr.clauses["strip_zzbar_at_least_half"].get<bool>());

  const auto om = run_scenario(json{{"scenario", "omega_s"}});
  CHECK(om.all_pass());
  CHECK(om.measured["K"].get<double>() >= 1.0);

  CHECK_THROWS_AS(run_scenario(json{{"scenario", "nope"}}), Error);
  CHECK_THROWS_AS(run_scenario(json{{"params", {}}}), Error);
  CHECK_THROWS_AS(run_scenario(json{{"scenario", "scaling"}, {"mesh", -1}}), Error);
}

TEST_CASE("reports replay byte for byte") {
  for (const json& spec : {json{{"scenario", "scaling"}, {"params", {{"js", {1, 2}}}}},
                           json{{"scenario", "tube"}, {"params", {{"m", 2}, {"js", {1, 2}}}}, {"seed", 99}}}) {
    const auto first = run_scenario_command(spec, std::nullopt, std::nullopt);
    const auto again = replay_report(first.report);
    CHECK(dump_report(first.report) == dump_report(again.report));
    CHECK(first.csv == again.csv);
    CHECK(first.report.contains("tool_version"));
    CHECK(first.report["config_hash"].get<std::string>().size() == 16);
  }
  const auto seeded = run_scenario_command(json{{"scenario", "tube"}}, 123, std::nullopt);
  CHECK(seeded.report["seed"].get<std::uint64_t>() == 123);
}

TEST_CASE("report helpers") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(255) == "00000000000000ff");
  CHECK(fmt_double(0.5) == "0.5");
  CHECK(fmt_double(-2.0) == "-2");
  json j{{"b", 1}, {"a", 2}};
  CHECK(dump_report(j).find("\"a\"") < dump_report(j).find("\"b\""));
}
