#pragma once

// End-to-end example families: the scaling obstruction, tube reduction, strip
// galleries and the composite Ω_S weight.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbar_range/planar_geometry.hpp"
#include "dbar_range/weight_builder.hpp"

namespace dbr {

// ---------------------------------------------------------------------------
// Radial bump α(z) = exp(-1/(1 - |z|²)) on the unit disc, as a function of s = |z|².

struct BumpDerivs {
  double a = 0.0, a1 = 0.0, a2 = 0.0;  // α, dα/ds, d²α/ds²
};
BumpDerivs bump_profile(double s);

struct ScalingValues {
  double num = 0.0;    // ‖u_j‖
  double den = 0.0;    // ‖∂̄u_j‖
  double ratio = 0.0;  // num / den
};

/// Closed 1D integrals after the change of variables: num is j-independent,
/// den carries 1/j.
ScalingValues scaling_ratio_analytic(int j);

/// Midpoint quadrature of |u_j|² and |∂̄u_j|² over D(z_j, j) at an absolute mesh,
/// skipping nodes within 1e-3 (in scaled units) of the support circle.
ScalingValues scaling_ratio_quadrature(int j, double mesh, cplx center = {0.0, 0.0});

struct ScalingResult {
  int j = 0;
  ScalingValues analytic, quadrature;
  double rel_diff = 0.0;  // |ratio_q - ratio_a| / ratio_a
};

inline constexpr double kDefaultScalingMesh = 1.0 / 32.0;

/// Both paths; disagreement above 1% is a mesh error.
ScalingResult scaling_ratio(int j, double mesh = kDefaultScalingMesh);

// ---------------------------------------------------------------------------
// Tube over a planar base

/// π^m / m!
double tube_factor(int m);

struct TubeMonteCarlo {
  double estimate = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// π^m · P(s_1 + ... + s_m < 1), s_k = |w_k|² uniform on [0, 1).
TubeMonteCarlo tube_factor_monte_carlo(int m, std::uint64_t seed, std::uint64_t samples = 0);

// ---------------------------------------------------------------------------
// Strip galleries

struct GallerySpec {
  std::string kind = "uniform";  // "uniform" | "shrinking"
  Window window{-8.0, 8.0, -8.0, 8.0};
  double mesh = 0.04;
  double M = 3.0;       // condition X search radius
  double delta = 0.2;   // condition X clearance
};

struct Gallery {
  std::vector<StripBand> bands;  // every strip meeting the window, with its support band
  double spacing = 0.0;          // sup (c_j - c_{j-1})
  double min_gap = 0.0;
};

/// Uniform: S_j = (j - 3/4, j - 1/4), c_j = j. Shrinking: gaps of width
/// 1/max(1, |j|) centred at c_j, strips of height 1/2 between them.
Gallery make_gallery(const std::string& kind, const Window& window);

/// Union of the gallery's strips on the window, declared translation-invariant in x.
PlanarDomain gallery_domain(const Gallery& g, const Window& window, double mesh);

// ---------------------------------------------------------------------------
// Scenario dispatch

struct ScenarioReport {
  std::string id;
  nlohmann::json inputs;
  nlohmann::json measured;
  nlohmann::json clauses;  // name -> bool
  std::uint64_t seed = 0;
  double mesh = 0.0;
  std::string csv;         // plot data, '.' decimals and '\n' endings

  bool all_pass() const;
  nlohmann::json to_json() const;  // stamped with version, config hash, seed, mesh
};

/// spec = {"scenario": "scaling"|"tube"|"gallery"|"omega_s", "params": {...}, "mesh": h, "seed": n}
ScenarioReport run_scenario(const nlohmann::json& spec);

ScenarioReport scenario_scaling(const nlohmann::json& spec);
ScenarioReport scenario_tube(const nlohmann::json& spec);
ScenarioReport scenario_gallery(const nlohmann::json& spec);
ScenarioReport scenario_omega_s(const nlohmann::json& spec);

}  // namespace dbr
