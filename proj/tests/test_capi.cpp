#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include <json.hpp>

#include "dbar_range/dbar_range.h"

namespace {

const char* kDisc = R"({"window": [-1.5, 1.5, -1.5, 1.5], "mesh": 0.05,
  "tree": {"prim": "disc", "params": {"center": [0, 0], "radius": 1}}})";

std::string take(char* s) {
  std::string out = s ? s : "";
  dbr_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(dbr_version()) > 0);
  CHECK(std::string(dbr_status_name(DBR_E_PARSE)) == "parse");
  CHECK(std::string(dbr_status_name(DBR_OK)) == "ok");
}

TEST_CASE("domain lifecycle and queries") {
  dbr_domain* d = nullptr;
  REQUIRE(dbr_domain_parse(kDisc, &d) == DBR_OK);
  int inside = -1;
  CHECK(dbr_domain_contains(d, 0.0, 0.0, &inside) == DBR_OK);
  CHECK(inside == 1);
  CHECK(dbr_domain_contains(d, 1.2, 0.0, &inside) == DBR_OK);
  CHECK(inside == 0);
  double r = 0.0;
  CHECK(dbr_domain_largest_disc(d, 0.0, 0.0, 2.0, &r) == DBR_OK);
  CHECK(r == doctest::Approx(1.0));
  double cl = -1.0;
  CHECK(dbr_domain_clearance(d, 0.0, 0.0, &cl) == DBR_OK);
  CHECK(cl == 0.0);
  char* text = nullptr;
  CHECK(dbr_domain_to_json(d, &text) == DBR_OK);
  const auto j = nlohmann::json::parse(take(text));
  CHECK(j["tree"]["prim"] == "disc");
  dbr_domain* fine = nullptr;
  CHECK(dbr_domain_with_mesh(d, 0.025, &fine) == DBR_OK);
  double h = 0.0;
  CHECK(dbr_domain_mesh(fine, &h) == DBR_OK);
  CHECK(h == 0.025);
  dbr_domain_free(fine);
  dbr_domain_free(d);
  dbr_domain_free(nullptr);
}

TEST_CASE("errors map to status codes with a message") {
  dbr_domain* d = nullptr;
  CHECK(dbr_domain_parse("{\"window\": [0, 1, 0, 1],\n \"tree\": }", &d) == DBR_E_PARSE);
  CHECK(d == nullptr);
  CHECK(std::string(dbr_last_error()).find("line 2") != std::string::npos);
  CHECK(dbr_domain_load("/nonexistent/file.json", &d) == DBR_E_IO);
  CHECK(dbr_domain_parse(nullptr, &d) == DBR_E_ARGUMENT);
  double C = 0.0;
  CHECK(dbr_certificate_constant("bounded", 1.0, 0.0, &C, nullptr) == DBR_E_ARGUMENT);
  CHECK(std::strlen(dbr_last_error()) > 0);
  CHECK(dbr_certificate_constant("bounded", 1.0, 0.5, &C, nullptr) == DBR_OK);
  CHECK(std::strlen(dbr_last_error()) == 0);
}

TEST_CASE("numeric entry points") {
  double A = 0.0, B = 0.0;
  REQUIRE(dbr_weight_constants(1.0, 1.0, &A, &B) == DBR_OK);
  CHECK(B == 4.0 / 729.0);
  double C = 0.0, lc = 0.0;
  REQUIRE(dbr_certificate_constant("bounded", 1.0, 0.5, &C, &lc) == DBR_OK);
  CHECK(C == doctest::Approx(2.0 * std::exp(1.0)));
  CHECK(dbr_certificate_constant("hormander-like", 2.0, 1.0, &C, nullptr) == DBR_OK);
  CHECK(C == 1.0);
  double c3 = 0.0;
  CHECK(dbr_tube_factor(3, &c3) == DBR_OK);
  CHECK(c3 == doctest::Approx(std::pow(M_PI, 3) / 6.0));
}

TEST_CASE("grid and sigma") {
  dbr_domain* d = nullptr;
  REQUIRE(dbr_domain_parse(kDisc, &d) == DBR_OK);
  dbr_grid* g = nullptr;
  REQUIRE(dbr_grid_assemble(d, 0.125, &g) == DBR_OK);
  size_t n = 0, rows = 0;
  CHECK(dbr_grid_size(g, &n, &rows) == DBR_OK);
  CHECK(n > rows);
  double s1 = 0.0, s2 = 0.0;
  CHECK(dbr_grid_sigma_min(g, 1, &s1) == DBR_OK);
  CHECK(dbr_grid_sigma_min(g, 2, &s2) == DBR_OK);
  CHECK(std::abs(s1 - s2) <= 1e-6 * s1);
  CHECK(dbr_grid_sigma_min(g, 7, &s2) == DBR_E_ARGUMENT);
  dbr_grid_free(g);
  CHECK(dbr_grid_assemble(d, 1.0, &g) == DBR_E_MESH);
  dbr_domain_free(d);
}

TEST_CASE("commands through the C API") {
  dbr_domain* d = nullptr;
  REQUIRE(dbr_domain_parse(kDisc, &d) == DBR_OK);
  int code = -1;
  char* rep = nullptr;
  char* csv = nullptr;
  REQUIRE(dbr_verify(d, 1e-9, 0.125, 3, 1, &code, &rep, &csv) == DBR_OK);
  CHECK(code == DBR_EXIT_VERIFICATION_EXCEEDED);
  const std::string first = take(rep);
  CHECK(take(csv).rfind("trial,ratio", 0) == 0);

  REQUIRE(dbr_replay(first.c_str(), &code, &rep, &csv) == DBR_OK);
  CHECK(take(rep) == first);
  take(csv);

  REQUIRE(dbr_scenario_run(R"({"scenario": "tube", "params": {"m": 2}})", 1, 17, 0.0, &code, &rep, &csv) == DBR_OK);
  CHECK(code == DBR_EXIT_OK);
  const auto j = nlohmann::json::parse(take(rep));
  CHECK(j["seed"] == 17);
  take(csv);
  CHECK(dbr_scenario_run(R"({"scenario": "nope"})", 0, 0, 0.0, &code, &rep, &csv) == DBR_E_CONFIG);
  dbr_domain_free(d);
}
