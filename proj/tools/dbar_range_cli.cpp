// dbar-range: certify, verify, scenario and replay front end over the C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dbar_range/dbar_range.h"

namespace {

struct Globals {
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> mesh;
  int verbose = 0;
};

struct Owned {
  char* p = nullptr;
  ~Owned() { dbr_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct Domain {
  dbr_domain* d = nullptr;
  ~Domain() { dbr_domain_free(d); }
};

int report_error(dbr_status s) {
  std::cerr << "dbar-range: " << dbr_status_name(s) << " error: " << dbr_last_error() << "\n";
  return DBR_EXIT_USAGE;
}

bool read_text(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "dbar-range: cannot open '" << path << "'\n";
    return false;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

bool write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    std::cerr << "dbar-range: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

// Report to --out (or stdout), CSV beside it when there is one.
int publish(const Globals& g, const std::string& stem, int exit_code, const std::string& report,
            const std::string& csv) {
  if (g.out_dir.empty()) {
    std::cout << report;
  } else {
    std::error_code ec;
    std::filesystem::create_directories(g.out_dir, ec);
    const auto base = std::filesystem::path(g.out_dir) / stem;
    if (!write_text(base.string() + ".json", report)) return DBR_EXIT_USAGE;
    if (!csv.empty() && !write_text(base.string() + ".csv", csv)) return DBR_EXIT_USAGE;
    if (g.verbose) std::cerr << "wrote " << base.string() << ".json\n";
  }
  if (g.verbose) std::cerr << stem << ": exit " << exit_code << "\n";
  return exit_code;
}

int load(const Globals& g, const std::string& path, Domain& dom) {
  dbr_domain* raw = nullptr;
  if (auto s = dbr_domain_load(path.c_str(), &raw); s != DBR_OK) return report_error(s);
  dom.d = raw;
  if (g.mesh) {
    dbr_domain* remeshed = nullptr;
    if (auto s = dbr_domain_with_mesh(dom.d, *g.mesh, &remeshed); s != DBR_OK) return report_error(s);
    dbr_domain_free(dom.d);
    dom.d = remeshed;
  }
  return DBR_EXIT_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-range certificates for the d-bar operator on planar domains"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed_value = 0;
  double mesh_value = 0.0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for every stochastic check")->check(CLI::NonNegativeNumber);
  auto* mesh_opt = app.add_option("--mesh", mesh_value, "Grid mesh override")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out_dir, "Directory for reports and CSV dumps");
  app.add_flag("-v,--verbose", g.verbose, "Progress on stderr");
  app.fallthrough();

  std::string domain_path, spec_path, report_path;
  double M = 0.0, delta = 0.0, C = 0.0, verify_mesh = 0.0;
  int trials = 16;

  auto* certify = app.add_subcommand("certify", "Condition X, lattice weight and certificate");
  certify->add_option("--domain", domain_path, "Domain JSON file")->required();
  certify->add_option("--M", M, "Condition X radius")->required()->check(CLI::PositiveNumber);
  certify->add_option("--delta", delta, "Condition X clearance")->required()->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Check ||v|| <= C ||dbar v|| on the discrete operator");
  verify->add_option("--domain", domain_path, "Domain JSON file")->required();
  verify->add_option("--C", C, "Certified constant")->required()->check(CLI::PositiveNumber);
  auto* verify_mesh_opt = verify->add_option("--mesh", verify_mesh, "Grid mesh")->check(CLI::PositiveNumber);
  verify->add_option("--trials", trials, "Random test forms")->check(CLI::NonNegativeNumber);

  auto* scenario = app.add_subcommand("scenario", "Run a scenario spec");
  scenario->add_option("--spec", spec_path, "Scenario JSON file")->required();

  auto* replay = app.add_subcommand("replay", "Rerun a report from its embedded config and compare");
  replay->add_option("--report", report_path, "Report JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return DBR_EXIT_USAGE;
  }
  if (*seed_opt) g.seed = seed_value;
  if (*mesh_opt) g.mesh = mesh_value;
  const std::uint64_t seed = g.seed.value_or(0);

  if (*certify) {
    Domain dom;
    if (int rc = load(g, domain_path, dom); rc != DBR_EXIT_OK) return rc;
    int code = 0;
    Owned rep;
    if (auto s = dbr_certify(dom.d, M, delta, seed, &code, &rep.p); s != DBR_OK) return report_error(s);
    return publish(g, "certify", code, rep.str(), "");
  }

  if (*verify) {
    Domain dom;
    dbr_domain* raw = nullptr;
    if (auto s = dbr_domain_load(domain_path.c_str(), &raw); s != DBR_OK) return report_error(s);
    dom.d = raw;
    double h = 0.0;
    if (*verify_mesh_opt) {
      h = verify_mesh;
    } else if (g.mesh) {
      h = *g.mesh;
    } else if (auto s = dbr_domain_mesh(dom.d, &h); s != DBR_OK) {
      return report_error(s);
    }
    int code = 0;
    Owned rep, csv;
    if (auto s = dbr_verify(dom.d, C, h, trials, seed, &code, &rep.p, &csv.p); s != DBR_OK) return report_error(s);
    return publish(g, "verify", code, rep.str(), csv.str());
  }

  if (*scenario) {
    std::string text;
    if (!read_text(spec_path, text)) return DBR_EXIT_USAGE;
    int code = 0;
    Owned rep, csv;
    const auto s = dbr_scenario_run(text.c_str(), g.seed ? 1 : 0, seed, g.mesh.value_or(0.0), &code, &rep.p, &csv.p);
    if (s != DBR_OK) return report_error(s);
    return publish(g, "scenario", code, rep.str(), csv.str());
  }

  if (*replay) {
    std::string text;
    if (!read_text(report_path, text)) return DBR_EXIT_USAGE;
    int code = 0;
    Owned rep, csv;
    if (auto s = dbr_replay(text.c_str(), &code, &rep.p, &csv.p); s != DBR_OK) return report_error(s);
    const bool same = rep.str() == text;
    std::cerr << (same ? "replay: identical\n" : "replay: report differs from the original\n");
    const int rc = publish(g, "replay", code, rep.str(), csv.str());
    return same ? rc : DBR_EXIT_VERIFICATION_EXCEEDED;
  }
  return DBR_EXIT_USAGE;
}
