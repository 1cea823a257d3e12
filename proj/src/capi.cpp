#include "dbar_range/dbar_range.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "dbar_range/dbar_discrete.hpp"
#include "dbar_range/domain_io.hpp"
#include "dbar_range/errors.hpp"
#include "dbar_range/harness.hpp"
#include "dbar_range/pipeline.hpp"
#include "dbar_range/report.hpp"
#include "dbar_range/weight_builder.hpp"

struct dbr_domain {
  dbr::PlanarDomain dom;
};

struct dbr_grid {
  dbr::DbarGrid grid;
};

namespace {

thread_local std::string g_last_error;

dbr_status status_of(dbr::ErrorKind k) {
  switch (k) {
    case dbr::ErrorKind::Argument: return DBR_E_ARGUMENT;
    case dbr::ErrorKind::Domain: return DBR_E_DOMAIN;
    case dbr::ErrorKind::Query: return DBR_E_QUERY;
    case dbr::ErrorKind::Config: return DBR_E_CONFIG;
    case dbr::ErrorKind::Mesh: return DBR_E_MESH;
    case dbr::ErrorKind::Parse: return DBR_E_PARSE;
    case dbr::ErrorKind::Solver: return DBR_E_SOLVER;
    case dbr::ErrorKind::Internal: return DBR_E_INTERNAL;
    case dbr::ErrorKind::Io: return DBR_E_IO;
  }
  return DBR_E_UNKNOWN;
}

template <class F>
dbr_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return DBR_OK;
  } catch (const dbr::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return DBR_E_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DBR_E_UNKNOWN;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DBR_E_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown error";
    return DBR_E_UNKNOWN;
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (!p) dbr::fail(dbr::ErrorKind::Argument, std::string(what) + " must not be null");
}

void emit(const dbr::CommandOutcome& o, int* exit_code, char** report_json, char** csv) {
  // Allocate everything before publishing so a failure leaks nothing.
  char* r = dup_string(dbr::dump_report(o.report));
  char* c = nullptr;
  if (csv) {
    try {
      c = dup_string(o.csv);
    } catch (...) {
      std::free(r);
      throw;
    }
  }
  *exit_code = o.exit_code;
  *report_json = r;
  if (csv) *csv = c;
}

}  // namespace

extern "C" {

const char* dbr_version(void) { return dbr::kToolVersion; }

const char* dbr_last_error(void) { return g_last_error.c_str(); }

const char* dbr_status_name(dbr_status s) {
  switch (s) {
    case DBR_OK: return "ok";
    case DBR_E_ARGUMENT: return "argument";
    case DBR_E_DOMAIN: return "domain";
    case DBR_E_QUERY: return "query";
    case DBR_E_CONFIG: return "config";
    case DBR_E_MESH: return "mesh";
    case DBR_E_PARSE: return "parse";
    case DBR_E_SOLVER: return "solver";
    case DBR_E_INTERNAL: return "internal";
    case DBR_E_IO: return "io";
    case DBR_E_UNKNOWN: break;
  }
  return "unknown";
}

void dbr_string_free(char* s) { std::free(s); }

dbr_status dbr_domain_load(const char* path, dbr_domain** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new dbr_domain{dbr::load_domain(path)};
  });
}

dbr_status dbr_domain_parse(const char* json_text, dbr_domain** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    *out = new dbr_domain{dbr::parse_domain(json_text)};
  });
}

dbr_status dbr_domain_with_mesh(const dbr_domain* d, double mesh, dbr_domain** out) {
  return guarded([&] {
    need(d, "domain");
    need(out, "out");
    dbr::require(mesh > 0.0, dbr::ErrorKind::Argument, "mesh must be positive");
    *out = new dbr_domain{dbr::PlanarDomain(d->dom.window(), mesh, d->dom.tree(), d->dom.symmetry())};
  });
}

void dbr_domain_free(dbr_domain* d) { delete d; }

dbr_status dbr_domain_to_json(const dbr_domain* d, char** out) {
  return guarded([&] {
    need(d, "domain");
    need(out, "out");
    *out = dup_string(dbr::dump_report(dbr::domain_to_json(d->dom)));
  });
}

dbr_status dbr_domain_mesh(const dbr_domain* d, double* out) {
  return guarded([&] {
    need(d, "domain");
    need(out, "out");
    *out = d->dom.mesh();
  });
}

dbr_status dbr_domain_contains(const dbr_domain* d, double x, double y, int* out) {
  return guarded([&] {
    need(d, "domain");
    need(out, "out");
    *out = dbr::contains(d->dom, {x, y}) ? 1 : 0;
  });
}

dbr_status dbr_domain_largest_disc(const dbr_domain* d, double x, double y, double cap, double* out) {
  return guarded([&] {
    need(d, "domain");
    need(out, "out");
    *out = dbr::largest_disc_at(d->dom, {x, y}, cap);
  });
}

dbr_status dbr_domain_clearance(const dbr_domain* d, double x, double y, double* out) {
  return guarded([&] {
    need(d, "domain");
    need(out, "out");
    *out = dbr::clearance(d->dom, {x, y});
  });
}

dbr_status dbr_grid_assemble(const dbr_domain* d, double h, dbr_grid** out) {
  return guarded([&] {
    need(d, "domain");
    need(out, "out");
    *out = new dbr_grid{dbr::assemble(d->dom, h)};
  });
}

void dbr_grid_free(dbr_grid* g) { delete g; }

dbr_status dbr_grid_size(const dbr_grid* g, size_t* unknowns, size_t* rows) {
  return guarded([&] {
    need(g, "grid");
    if (unknowns) *unknowns = g->grid.unknowns();
    if (rows) *rows = g->grid.rows();
  });
}

dbr_status dbr_grid_sigma_min(const dbr_grid* g, int method, double* sigma_min) {
  return guarded([&] {
    need(g, "grid");
    need(sigma_min, "sigma_min");
    dbr::require(method >= 0 && method <= 2, dbr::ErrorKind::Argument, "method must be 0, 1 or 2");
    const auto m = method == 1 ? dbr::SigmaMethod::Dense
                               : method == 2 ? dbr::SigmaMethod::Iterative : dbr::SigmaMethod::Auto;
    *sigma_min = dbr::closed_range_constant(g->grid, m).sigma_min;
  });
}

dbr_status dbr_weight_constants(double M, double delta, double* A, double* B) {
  return guarded([&] {
    need(A, "A");
    need(B, "B");
    const auto c = dbr::weight_constants(M, delta);
    *A = c.A;
    *B = c.B;
  });
}

dbr_status dbr_certificate_constant(const char* kind, double k1, double k2, double* C, double* log10_C) {
  return guarded([&] {
    need(kind, "kind");
    const auto cert = dbr::certificate(dbr::certificate_kind_from_string(kind), k1, k2);
    if (C) *C = cert.C;
    if (log10_C) *log10_C = cert.log10_C;
  });
}

dbr_status dbr_tube_factor(int m, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = dbr::tube_factor(m);
  });
}

dbr_status dbr_certify(const dbr_domain* d, double M, double delta, uint64_t seed, int* exit_code,
                       char** report_json) {
  return guarded([&] {
    need(d, "domain");
    need(exit_code, "exit_code");
    need(report_json, "report_json");
    emit(dbr::run_certify(d->dom, M, delta, seed), exit_code, report_json, nullptr);
  });
}

dbr_status dbr_verify(const dbr_domain* d, double C, double mesh, int trials, uint64_t seed, int* exit_code,
                      char** report_json, char** csv) {
  return guarded([&] {
    need(d, "domain");
    need(exit_code, "exit_code");
    need(report_json, "report_json");
    emit(dbr::run_verify(d->dom, C, mesh, trials, seed), exit_code, report_json, csv);
  });
}

dbr_status dbr_scenario_run(const char* spec_json, int has_seed, uint64_t seed, double mesh, int* exit_code,
                            char** report_json, char** csv) {
  return guarded([&] {
    need(spec_json, "spec_json");
    need(exit_code, "exit_code");
    need(report_json, "report_json");
    const auto spec = dbr::parse_json_text(spec_json);
    std::optional<std::uint64_t> s;
    std::optional<double> h;
    if (has_seed) s = seed;
    if (mesh > 0.0) h = mesh;
    emit(dbr::run_scenario_command(spec, s, h), exit_code, report_json, csv);
  });
}

dbr_status dbr_replay(const char* report_json_in, int* exit_code, char** report_json, char** csv) {
  return guarded([&] {
    need(report_json_in, "report_json_in");
    need(exit_code, "exit_code");
    need(report_json, "report_json");
    emit(dbr::replay_report(dbr::parse_json_text(report_json_in)), exit_code, report_json, csv);
  });
}

}  // extern "C"
