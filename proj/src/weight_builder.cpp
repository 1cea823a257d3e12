#include "dbar_range/weight_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dbar_range/errors.hpp"

namespace dbr {

double inv_cube_tail_upper(int from, int N) {
  require(from >= 1 && N >= from, ErrorKind::Argument, "inv_cube_tail_upper: need 1 <= from <= N");
  double s = 0.0;
  // Smallest terms first.
  for (int g = N; g >= from; --g) s += 1.0 / (double(g) * g * g);
  return s + 1.0 / (2.0 * double(N) * N);
}

WeightConstants weight_constants(double M, double delta) {
  require(M > 0.0 && std::isfinite(M), ErrorKind::Argument, "weight_constants: M must be positive");
  require(delta > 0.0 && std::isfinite(delta), ErrorKind::Argument, "weight_constants: delta must be positive");
  WeightConstants c;
  c.B = 4.0 / std::pow(3.0 * M, 6);
  double inner = 0.0;
  for (int g = 1; g <= 3; ++g) inner += double((2 * g + 7) * (2 * g + 7)) / std::pow(double(g), 4);
  inner += 56.0 * inv_cube_tail_upper(4);
  c.A = 49.0 / std::pow(delta, 4) + inner / std::pow(M, 4);
  return c;
}

std::array<int, 4> ring_count_bounds() { return {49, 81, 121, 169}; }

SeriesWeight make_series_weight(LatticeWitnessSet witnesses, int gamma_max) {
  require(gamma_max >= 4, ErrorKind::Argument, "series weight: gamma_max must be at least 4");
  SeriesWeight w;
  w.gamma_max = gamma_max;
  if (witnesses.M > 0.0 && witnesses.delta > 0.0) {
    const auto c = weight_constants(witnesses.M, witnesses.delta);
    w.A = c.A;
    w.B = c.B;
    w.tail_bound = 56.0 / (2.0 * double(gamma_max) * gamma_max * std::pow(witnesses.M, 4));
  }
  for (std::size_t k = 0; k < witnesses.entries.size(); ++k)
    w.by_lattice[{witnesses.entries[k].a, witnesses.entries[k].b}] = k;
  w.witnesses = std::move(witnesses);
  return w;
}

std::optional<std::size_t> covering_entry(const SeriesWeight& w, cplx z) {
  if (w.witnesses.entries.empty()) return std::nullopt;
  const double M = w.witnesses.M;
  const long long a = std::llround(z.real() / M), b = std::llround(z.imag() / M);
  auto it = w.by_lattice.find({a, b});
  if (it == w.by_lattice.end()) return std::nullopt;
  return it->second;
}

namespace {

// Ring of w* around lattice point w0: smallest γ with w* in the closed square of half-side γM.
long long ring_of(cplx wstar, cplx w0, double M) {
  const double cheb = std::max(std::abs(wstar.real() - w0.real()), std::abs(wstar.imag() - w0.imag()));
  return static_cast<long long>(std::ceil(cheb / M - 1e-12));
}

template <class Fn>
void for_each_term(const SeriesWeight& w, cplx z, Fn&& fn) {
  const auto cover = covering_entry(w, z);
  const double M = w.witnesses.M;
  const cplx w0 = cover ? w.witnesses.entries[*cover].w : cplx(std::llround(z.real() / M) * M,
                                                                 std::llround(z.imag() / M) * M);
  for (const auto& e : w.witnesses.entries)
    if (ring_of(e.wstar, w0, M) <= w.gamma_max) fn(e);
}

}  // namespace

double series_phi(const SeriesWeight& w, cplx z) {
  if (w.witnesses.entries.empty()) return 0.0;
  double s = 0.0;
  for_each_term(w, z, [&](const LatticeEntry& e) {
    const double r2 = std::norm(z - e.wstar);
    s += 1.0 / (r2 * r2);
  });
  return s;
}

std::pair<double, double> series_phi_full(const SeriesWeight& w, cplx z) {
  if (w.witnesses.entries.empty()) return {0.0, 0.0};
  double s = 0.0, d = 0.0;
  for_each_term(w, z, [&](const LatticeEntry& e) {
    const double r2 = std::norm(z - e.wstar);
    s += 1.0 / (r2 * r2);
    d += 4.0 / (r2 * r2 * r2);
  });
  return {s, d};
}

SeriesValue eval_series_weight(const SeriesWeight& w, cplx z) {
  const auto cover = covering_entry(w, z);
  if (!cover)
    fail(ErrorKind::Internal, "series weight: no covering witness for (" + std::to_string(z.real()) + ", " +
                                  std::to_string(z.imag()) + ")");
  SeriesValue v;
  v.phi = series_phi(w, z);
  v.phi_upper = v.phi + w.tail_bound;
  const double r2 = std::norm(z - w.witnesses.entries[*cover].wstar);
  v.phi_zzbar_lower = 4.0 / (r2 * r2 * r2);
  return v;
}

std::array<int, 4> ring_counts(const SeriesWeight& w, cplx z) {
  std::array<int, 4> out{0, 0, 0, 0};
  const auto cover = covering_entry(w, z);
  if (!cover) return out;
  const cplx w0 = w.witnesses.entries[*cover].w;
  for (const auto& e : w.witnesses.entries) {
    const long long g = ring_of(e.wstar, w0, w.witnesses.M);
    if (g <= 3) ++out[static_cast<std::size_t>(g)];
  }
  return out;
}

// ---------------------------------------------------------------------------

std::array<double, 3> smoothstep(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  auto f = [](double s) {
    const double e = std::exp(-1.0 / s);
    const double s2 = s * s;
    return std::array<double, 3>{e, e / s2, e * (1.0 / (s2 * s2) - 2.0 / (s2 * s))};
  };
  const auto a = f(t);
  const auto b = f(1.0 - t);
  const double N = a[0], N1 = a[1], N2 = a[2];
  const double Dn = a[0] + b[0];
  const double Dn1 = a[1] - b[1];
  const double Dn2 = a[2] + b[2];
  const double S = N / Dn;
  const double S1 = (N1 - S * Dn1) / Dn;
  const double S2 = (N2 - 2.0 * S1 * Dn1 - S * Dn2) / Dn;
  return {S, S1, S2};
}

WeightValue strip_weight(const StripBand& band, cplx z) {
  require(band.c_prev < band.lo && band.lo < band.hi && band.hi < band.c_j, ErrorKind::Argument,
          "strip_weight: need c_prev < lo < hi < c_j");
  const double y = z.imag();
  require(y > band.c_prev && y < band.c_j, ErrorKind::Argument,
          "strip_weight: Im z = " + std::to_string(y) + " outside the open band (" + std::to_string(band.c_prev) +
              ", " + std::to_string(band.c_j) + ")");
  const double a = band.c_prev + (band.lo - band.c_prev) / 3.0;
  const double wl = band.lo - a;
  const double b = band.c_j - (band.c_j - band.hi) / 3.0;
  const double wu = b - band.hi;

  const auto sl = smoothstep((y - a) / wl);
  const auto su = smoothstep((b - y) / wu);
  const double L = sl[0], L1 = sl[1] / wl, L2 = sl[2] / (wl * wl);
  const double U = su[0], U1 = -su[1] / wu, U2 = su[2] / (wu * wu);

  const double d = y - band.c_j;
  const double q = d * d, q1 = 2.0 * d, q2 = 2.0;
  const double P = L * U, P1 = L1 * U + L * U1, P2 = L2 * U + 2.0 * L1 * U1 + L * U2;
  return {q * P, 0.25 * (q2 * P + 2.0 * q1 * P1 + q * P2)};
}

std::array<double, 3> transition_cutoff(double x) {
  const auto s = smoothstep(std::abs(x) - 2.0);
  const double sign = x < 0.0 ? -1.0 : 1.0;
  return {s[0], sign * s[1], s[2]};
}

namespace {

// Strip part (χ·φ) of the composite weight: value and zz̄-derivative.
WeightValue composite_strip_part(const CompositeInputs& in, cplx z) {
  const auto chi = transition_cutoff(z.real());
  if (chi[0] == 0.0 && chi[1] == 0.0 && chi[2] == 0.0) return {};
  const double y = z.imag();
  auto it = std::upper_bound(in.bands.begin(), in.bands.end(), y,
                             [](double v, const StripBand& b) { return v < b.c_j; });
  if (it == in.bands.end() || !(y > it->c_prev)) return {};
  const auto phi = strip_weight(*it, z);
  // φ depends on y only: Δ(χφ) = χ''φ + χ φ_yy, and φ_yy = 4 φ_zz̄.
  return {chi[0] * phi.value, 0.25 * chi[2] * phi.value + chi[0] * phi.zzbar};
}

std::pair<double, double> lattice_part(const std::vector<cplx>& ws, cplx z) {
  double s = 0.0, d = 0.0;
  for (const cplx& w : ws) {
    const double r2 = std::norm(z - w);
    s += 1.0 / (r2 * r2);
    d += 4.0 / (r2 * r2 * r2);
  }
  return {s, d};
}

}  // namespace

WeightValue composite_weight(const CompositeInputs& in, cplx z) {
  require(in.K > 0.0, ErrorKind::Argument, "composite_weight: K must be positive");
  const auto sp = composite_strip_part(in, z);
  const auto [lv, lz] = lattice_part(in.lattice_witnesses, z);
  return {sp.value + in.K * lv, sp.zzbar + in.K * lz};
}

CompositeOutcome search_composite_K(const CompositeInputs& base, const std::vector<cplx>& samples, double k_start,
                                    int max_doublings) {
  require(k_start > 0.0 && max_doublings >= 0, ErrorKind::Argument, "search_composite_K: bad search range");
  CompositeOutcome out;
  std::vector<double> sv(samples.size()), sz(samples.size()), lv(samples.size()), lz(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto sp = composite_strip_part(base, samples[i]);
    sv[i] = sp.value;
    sz[i] = sp.zzbar;
    std::tie(lv[i], lz[i]) = lattice_part(base.lattice_witnesses, samples[i]);
  }
  double K = k_start;
  for (int k = 0; k <= max_doublings; ++k, K *= 2.0) {
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples.size(); ++i) mn = std::min(mn, sz[i] + K * lz[i]);
    out.k_history.emplace_back(K, mn);
    out.doublings = k;
    if (mn > 0.0) {
      out.certified = true;
      out.K = K;
      out.B_prime = mn;
      double mx = 0.0;
      for (std::size_t i = 0; i < samples.size(); ++i) mx = std::max(mx, std::abs(sv[i] + K * lv[i]));
      out.A_prime = mx;
      return out;
    }
  }
  out.K = K / 2.0;
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(CertificateKind k) noexcept {
  switch (k) {
    case CertificateKind::HormanderLike: return "hormander-like";
    case CertificateKind::Bounded: return "bounded";
    case CertificateKind::SelfBounded: return "self-bounded";
  }
  return "bounded";
}

CertificateKind certificate_kind_from_string(const std::string& s) {
  if (s == "hormander-like") return CertificateKind::HormanderLike;
  if (s == "bounded") return CertificateKind::Bounded;
  if (s == "self-bounded") return CertificateKind::SelfBounded;
  fail(ErrorKind::Argument, "unknown certificate kind '" + s + "'");
}

WeightCertificate certificate(CertificateKind kind, double k1, double k2) {
  WeightCertificate c;
  c.kind = kind;
  c.k1 = k1;
  c.k2 = k2;
  require(std::isfinite(k1) && std::isfinite(k2), ErrorKind::Argument, "certificate: constants must be finite");
  switch (kind) {
    case CertificateKind::HormanderLike:
      require(k1 > 0.0 && k2 > 0.0, ErrorKind::Argument, "certificate: c1 and c2 must be positive");
      c.C = std::sqrt(2.0 / (k1 * k2));
      c.log10_C = 0.5 * std::log10(2.0 / (k1 * k2));
      break;
    case CertificateKind::Bounded:
      // A bounds |φ|, so A = 0 is admissible.
      require(k1 >= 0.0 && k2 > 0.0, ErrorKind::Argument, "certificate: need A >= 0 and B > 0");
      c.C = std::exp(k1) * std::sqrt(2.0 / k2);
      c.log10_C = k1 / std::numbers::ln10 + 0.5 * std::log10(2.0 / k2);
      break;
    case CertificateKind::SelfBounded:
      require(k1 > 0.0 && k2 > 0.0, ErrorKind::Argument, "certificate: D and E must be positive");
      c.C = std::sqrt(2.0 * k1) / k2;
      c.log10_C = std::log10(c.C);
      break;
  }
  return c;
}

}  // namespace dbr
