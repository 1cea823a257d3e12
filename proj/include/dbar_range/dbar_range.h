#ifndef DBAR_RANGE_H
#define DBAR_RANGE_H

/* C interface to the dbar_range library.
 *
 * Every function returns a dbr_status. On failure the message is available
 * from dbr_last_error() on the same thread until the next call. Strings
 * handed out through char** belong to the caller and go back through
 * dbr_string_free. Handles are released with their matching *_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DBR_BUILDING_LIBRARY)
#define DBR_API __declspec(dllexport)
#else
#define DBR_API __declspec(dllimport)
#endif
#else
#define DBR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dbr_status {
  DBR_OK = 0,
  DBR_E_ARGUMENT = 1,
  DBR_E_DOMAIN = 2,
  DBR_E_QUERY = 3,
  DBR_E_CONFIG = 4,
  DBR_E_MESH = 5,
  DBR_E_PARSE = 6,
  DBR_E_SOLVER = 7,
  DBR_E_INTERNAL = 8,
  DBR_E_IO = 9,
  DBR_E_UNKNOWN = 10
} dbr_status;

/* Process exit codes used by the command front end. */
enum {
  DBR_EXIT_OK = 0,
  DBR_EXIT_USAGE = 1,
  DBR_EXIT_CONDITION_FAILS = 2,
  DBR_EXIT_VERIFICATION_EXCEEDED = 3
};

typedef struct dbr_domain dbr_domain;
typedef struct dbr_grid dbr_grid;

DBR_API const char* dbr_version(void);
DBR_API const char* dbr_last_error(void);
DBR_API const char* dbr_status_name(dbr_status s);
DBR_API void dbr_string_free(char* s);

/* Domains */
DBR_API dbr_status dbr_domain_load(const char* path, dbr_domain** out);
DBR_API dbr_status dbr_domain_parse(const char* json_text, dbr_domain** out);
/* Copy with a different raster mesh. */
DBR_API dbr_status dbr_domain_with_mesh(const dbr_domain* d, double mesh, dbr_domain** out);
DBR_API void dbr_domain_free(dbr_domain* d);
DBR_API dbr_status dbr_domain_to_json(const dbr_domain* d, char** out);
DBR_API dbr_status dbr_domain_mesh(const dbr_domain* d, double* out);
DBR_API dbr_status dbr_domain_contains(const dbr_domain* d, double x, double y, int* out);
DBR_API dbr_status dbr_domain_largest_disc(const dbr_domain* d, double x, double y, double cap, double* out);
DBR_API dbr_status dbr_domain_clearance(const dbr_domain* d, double x, double y, double* out);

/* Discrete operator */
DBR_API dbr_status dbr_grid_assemble(const dbr_domain* d, double h, dbr_grid** out);
DBR_API void dbr_grid_free(dbr_grid* g);
DBR_API dbr_status dbr_grid_size(const dbr_grid* g, size_t* unknowns, size_t* rows);
/* method: 0 auto, 1 dense, 2 iterative */
DBR_API dbr_status dbr_grid_sigma_min(const dbr_grid* g, int method, double* sigma_min);

/* Weights and certificates. kind is "hormander-like", "bounded" or "self-bounded". */
DBR_API dbr_status dbr_weight_constants(double M, double delta, double* A, double* B);
DBR_API dbr_status dbr_certificate_constant(const char* kind, double k1, double k2, double* C, double* log10_C);
DBR_API dbr_status dbr_tube_factor(int m, double* out);

/* Commands. Each writes a JSON report (and CSV where the command has plot
 * data, otherwise an empty string) and the exit code the front end uses. */
DBR_API dbr_status dbr_certify(const dbr_domain* d, double M, double delta, uint64_t seed, int* exit_code,
                               char** report_json);
DBR_API dbr_status dbr_verify(const dbr_domain* d, double C, double mesh, int trials, uint64_t seed, int* exit_code,
                              char** report_json, char** csv);
/* has_seed / mesh > 0 override the spec's own values. */
DBR_API dbr_status dbr_scenario_run(const char* spec_json, int has_seed, uint64_t seed, double mesh, int* exit_code,
                                    char** report_json, char** csv);
DBR_API dbr_status dbr_replay(const char* report_json_in, int* exit_code, char** report_json, char** csv);

#ifdef __cplusplus
}
#endif

#endif
