#pragma once

// Bounded weights with uniformly positive Laplacian, and the closed-range
// constants they imply.

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dbar_range/planar_geometry.hpp"

namespace dbr {

struct WeightConstants {
  double A = 0.0;  // sup bound for the lattice series
  double B = 0.0;  // lower bound for its zz̄-derivative
};

/// Upper bound for Σ_{γ ≥ from} γ⁻³: exact partial sum to N, integral bound beyond.
double inv_cube_tail_upper(int from, int N = 10000);

WeightConstants weight_constants(double M, double delta);

/// Per-ring witness-count bounds (2γ+7)², γ = 0..3.
std::array<int, 4> ring_count_bounds();

struct SeriesWeight {
  LatticeWitnessSet witnesses;
  int gamma_max = 64;
  double A = 0.0;
  double B = 0.0;
  double tail_bound = 0.0;  // (56/M⁴)·Σ_{γ>gamma_max} γ⁻³, bounded by 56/(2 γmax² M⁴)

  std::map<std::pair<long long, long long>, std::size_t> by_lattice;  // (a, b) -> entry index
};

SeriesWeight make_series_weight(LatticeWitnessSet witnesses, int gamma_max = 64);

struct SeriesValue {
  double phi = 0.0;              // truncated sum
  double phi_upper = 0.0;        // phi + tail_bound
  double phi_zzbar_lower = 0.0;  // 4|z - w*|⁻⁶ for the covering witness
};

/// Lattice point whose M-disc covers z (the nearest one). nullopt if not in Λ.
std::optional<std::size_t> covering_entry(const SeriesWeight& w, cplx z);

/// Truncated sum only; 0 for an empty witness set.
double series_phi(const SeriesWeight& w, cplx z);

SeriesValue eval_series_weight(const SeriesWeight& w, cplx z);

/// Truncated sum and its exact zz̄-derivative Σ 4|z - w*|⁻⁶ over the same terms.
std::pair<double, double> series_phi_full(const SeriesWeight& w, cplx z);

/// Witness counts per ring γ = 0..3 around the covering lattice point of z.
std::array<int, 4> ring_counts(const SeriesWeight& w, cplx z);

// ---------------------------------------------------------------------------
// Strip weights

/// Smooth step S(t) = f(t)/(f(t)+f(1-t)), f(t) = exp(-1/t) for t > 0, else 0.
/// Returns S, S', S''.
std::array<double, 3> smoothstep(double t);

/// Support band (c_prev, c_j) with the strip S_j = (lo, hi) inside it.
struct StripBand {
  double c_prev = 0.0;
  double c_j = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct WeightValue {
  double value = 0.0;
  double zzbar = 0.0;
};

/// φ_j(z) = (Im z - c_j)² · L(Im z) · U(Im z). L rises from 0 to 1 on
/// [c_prev + (lo - c_prev)/3, lo], U falls from 1 to 0 on [hi, c_j - (c_j - hi)/3].
/// Both are smoothstep ramps, so φ_j = (Im z - c_j)² on [lo, hi].
WeightValue strip_weight(const StripBand& band, cplx z);

// ---------------------------------------------------------------------------
// Composite weight on Ω_S

/// χ(x) = S(|x| - 2): 0 for |x| ≤ 2, 1 for |x| ≥ 3. Returns χ, χ', χ''.
std::array<double, 3> transition_cutoff(double x);

struct CompositeInputs {
  std::vector<StripBand> bands;       // sorted by c_j
  std::vector<cplx> lattice_witnesses;
  double K = 1.0;
};

/// ψ = χ·φ_strip + K·φ_lat and its exact zz̄-derivative at z.
WeightValue composite_weight(const CompositeInputs& in, cplx z);

struct CompositeOutcome {
  bool certified = false;
  double K = 0.0;
  double B_prime = 0.0;   // grid minimum of ψ_zz̄ at the accepted K
  double A_prime = 0.0;   // grid maximum of |ψ|
  int doublings = 0;
  std::vector<std::pair<double, double>> k_history;  // (K, grid min ψ_zz̄)
};

/// Doubling search K = k_start·2^k, k = 0..max_doublings, for a positive grid
/// minimum of ψ_zz̄. The defaults run K = 1, 2, ..., 2⁶⁴.
CompositeOutcome search_composite_K(const CompositeInputs& base, const std::vector<cplx>& samples,
                                    double k_start = 1.0, int max_doublings = 64);

// ---------------------------------------------------------------------------
// Certificates

enum class CertificateKind { HormanderLike, Bounded, SelfBounded };

const char* to_string(CertificateKind k) noexcept;
CertificateKind certificate_kind_from_string(const std::string& s);

struct WeightCertificate {
  CertificateKind kind = CertificateKind::Bounded;
  double k1 = 0.0, k2 = 0.0;  // (c₁, c₂), (A, B) or (D, E)
  double C = 0.0;             // +inf if it overflows a double
  double log10_C = 0.0;
};

WeightCertificate certificate(CertificateKind kind, double k1, double k2);

}  // namespace dbr
