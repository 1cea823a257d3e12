#pragma once

// Command pipelines shared by the C API and the CLI. Each returns a stamped
// report whose "config" member is enough to rerun it.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "dbar_range/harness.hpp"
#include "dbar_range/planar_geometry.hpp"

namespace dbr {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConditionFails = 2,
  kExitVerificationExceeded = 3,
};

struct CommandOutcome {
  int exit_code = kExitOk;
  nlohmann::json report;
  std::string csv;  // empty when the command has no plot data
};

/// Recognises a union of constant-height strips declared invariant in x and
/// returns its bands, with c_j at gap midpoints. Needs at least two strips.
std::optional<Gallery> detect_strips(const PlanarDomain& dom);

/// condition X, lattice, series weight and certificate. Exit 2 when condition X fails.
CommandOutcome run_certify(const PlanarDomain& dom, double M, double delta, std::uint64_t seed);

inline constexpr int kDefaultVerifyTrials = 16;
inline constexpr std::size_t kVerifySigmaLimit = 40000;

/// Assembles at `mesh`, checks ratios against C and, size permitting, reports σ_min.
/// Exit 3 when some ratio exceeds C(1 + tol).
CommandOutcome run_verify(const PlanarDomain& dom, double C, double mesh, int trials, std::uint64_t seed,
                          double tol = 1e-6);

/// Scenario spec with optional seed and mesh overrides. Exit 3 when a clause fails.
CommandOutcome run_scenario_command(const nlohmann::json& spec, std::optional<std::uint64_t> seed,
                                    std::optional<double> mesh);

/// Reruns a report from its embedded config and seed.
CommandOutcome replay_report(const nlohmann::json& report);

}  // namespace dbr
