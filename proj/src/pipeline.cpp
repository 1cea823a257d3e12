#include "dbar_range/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dbar_range/dbar_discrete.hpp"
#include "dbar_range/domain_io.hpp"
#include "dbar_range/errors.hpp"
#include "dbar_range/parallel.hpp"
#include "dbar_range/report.hpp"
#include "dbar_range/weight_builder.hpp"

namespace dbr {

using nlohmann::json;

namespace {

constexpr const char* kInherentGap =
    "condition X quantifies over an unbounded domain; only the window plus the declared symmetry is checked";

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json points_json(const std::vector<cplx>& pts, std::size_t cap) {
  json a = json::array();
  for (std::size_t k = 0; k < std::min(cap, pts.size()); ++k) a.push_back({pts[k].real(), pts[k].imag()});
  return a;
}

void collect_strips(const Shape& s, std::vector<std::pair<double, double>>& out, bool& ok) {
  if (const auto* g = std::get_if<GraphStrip>(&s.node)) {
    if (!g->lo.is_constant() || !g->hi.is_constant()) {
      ok = false;
      return;
    }
    out.emplace_back(g->lo.ys().front(), g->hi.ys().front());
    return;
  }
  if (const auto* u = std::get_if<Union>(&s.node)) {
    for (const auto& c : u->children) collect_strips(c, out, ok);
    return;
  }
  ok = false;
}

}  // namespace

std::optional<Gallery> detect_strips(const PlanarDomain& dom) {
  if (dom.symmetry() != Symmetry::TranslationX) return std::nullopt;
  std::vector<std::pair<double, double>> s;
  bool ok = true;
  collect_strips(dom.tree(), s, ok);
  if (!ok || s.size() < 2) return std::nullopt;
  std::sort(s.begin(), s.end());
  for (std::size_t k = 0; k + 1 < s.size(); ++k)
    if (!(s[k].second < s[k + 1].first)) return std::nullopt;

  // Gap midpoints; the outermost ones mirror the neighbouring gap.
  std::vector<double> c(s.size() + 1);
  for (std::size_t k = 1; k < s.size(); ++k) c[k] = 0.5 * (s[k - 1].second + s[k].first);
  c[0] = s[0].first - (s[1].first - s[0].second) / 2.0;
  c[s.size()] = s.back().second + (s.back().first - s[s.size() - 2].second) / 2.0;

  Gallery g;
  g.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.size(); ++k) {
    g.bands.push_back({c[k], c[k + 1], s[k].first, s[k].second});
    g.spacing = std::max(g.spacing, c[k + 1] - c[k]);
    if (k + 1 < s.size()) g.min_gap = std::min(g.min_gap, s[k + 1].first - s[k].second);
  }
  return g;
}

CommandOutcome run_certify(const PlanarDomain& dom, double M, double delta, std::uint64_t seed) {
  require(M > 0.0 && delta > 0.0, ErrorKind::Argument, "certify: M and delta must be positive");
  CommandOutcome out;
  json& r = out.report;
  r["command"] = "certify";
  r["M"] = M;
  r["delta"] = delta;
  r["kind"] = to_string(CertificateKind::Bounded);

  const auto cx = condition_x(dom, M, delta);
  r["condition_x"] = {{"holds", cx.holds},
                      {"checked_nodes", cx.checked_nodes},
                      {"failure_count", cx.failure_count},
                      {"failure_points", points_json(cx.failure_points, kMaxFailurePoints)},
                      {"window_only", cx.window_only},
                      {"h", cx.h}};
  r["inherent_gap"] = kInherentGap;

  if (const auto strips = detect_strips(dom)) {
    const double A = strips->spacing * strips->spacing;
    const auto sc = certificate(CertificateKind::Bounded, A, 0.5);
    r["strip_weight"] = {{"strips", strips->bands.size()},
                         {"spacing", strips->spacing},
                         {"A", A},
                         {"B", 0.5},
                         {"C", finite_or_null(sc.C)},
                         {"log10_C", sc.log10_C}};
  } else {
    r["strip_weight"] = nullptr;
  }

  if (!cx.holds) {
    r["certified"] = false;
    out.exit_code = kExitConditionFails;
  } else {
    const auto lat = build_lattice(dom, cx);
    const auto sw = make_series_weight(lat);
    const Raster& ras = dom.raster();
    const auto& chk = *cx.checked;
    std::vector<double> mins(kSweepChunks, std::numeric_limits<double>::infinity()), maxs(kSweepChunks, 0.0);
    parallel_chunks(ras.size(), kSweepChunks, [&](std::size_t c, std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) {
        if (!chk[k]) continue;
        const auto v = eval_series_weight(sw, ras.node(k));
        mins[c] = std::min(mins[c], v.phi_zzbar_lower);
        maxs[c] = std::max(maxs[c], v.phi_upper);
      }
    });
    const double gmin = *std::min_element(mins.begin(), mins.end());
    const double gmax = *std::max_element(maxs.begin(), maxs.end());
    const auto cert = certificate(CertificateKind::Bounded, sw.A, sw.B);
    r["lattice_points"] = lat.entries.size();
    r["gamma_max"] = sw.gamma_max;
    r["A"] = sw.A;
    r["B"] = sw.B;
    r["tail_bound"] = sw.tail_bound;
    r["C"] = finite_or_null(cert.C);
    r["log10_C"] = cert.log10_C;
    r["grid_min_zzbar"] = gmin;
    r["grid_max_phi"] = gmax;
    r["certified"] = gmin >= sw.B && gmax <= sw.A;
    if (!r["certified"].get<bool>())
      fail(ErrorKind::Internal, "certify: series weight violates its own bounds on the grid");
    double best = cert.log10_C;
    if (!r["strip_weight"].is_null()) best = std::min(best, r["strip_weight"]["log10_C"].get<double>());
    r["best_log10_C"] = best;
  }

  json config = {{"command", "certify"}, {"domain", domain_to_json(dom)}, {"M", M}, {"delta", delta}};
  stamp_report(r, config, seed, dom.mesh());
  return out;
}

CommandOutcome run_verify(const PlanarDomain& dom, double C, double mesh, int trials, std::uint64_t seed,
                          double tol) {
  require(C > 0.0, ErrorKind::Argument, "verify: C must be positive");
  require(mesh > 0.0, ErrorKind::Argument, "verify: mesh must be positive");
  CommandOutcome out;
  json& r = out.report;
  const DbarGrid g = assemble(dom, mesh);
  const VerifyReport v = verify_certificate(g, C, trials, seed, tol);
  r["command"] = "verify";
  r["C"] = C;
  r["tol"] = tol;
  r["trials"] = v.trials;
  r["unknowns"] = g.unknowns();
  r["rows"] = g.rows();
  r["max_ratio"] = v.max_ratio;
  r["margin"] = finite_or_null(v.margin);
  r["log10_slack"] = v.max_ratio > 0.0 ? std::log10(C / v.max_ratio) : 0.0;
  r["ratios"] = v.ratios;
  r["worst_residual"] = v.worst_residual;
  r["max_iterations"] = v.max_iterations;
  r["passed"] = v.passed;
  if (g.unknowns() <= kVerifySigmaLimit) {
    const auto s = closed_range_constant(g);
    r["sigma_min"] = s.sigma_min;
    r["sigma_max"] = s.sigma_max;
    r["sigma_method"] = s.method;
    r["discrete_C"] = 1.0 / s.sigma_min;
  } else {
    r["sigma_min"] = nullptr;
    r["sigma_method"] = "skipped: grid too large";
  }
  out.exit_code = v.passed ? kExitOk : kExitVerificationExceeded;

  std::ostringstream csv;
  csv << "trial,ratio\n";
  for (std::size_t k = 0; k < v.ratios.size(); ++k) csv << k << ',' << fmt_double(v.ratios[k]) << '\n';
  out.csv = csv.str();

  json config = {{"command", "verify"},
                 {"domain", domain_to_json(dom)},
                 {"C", C},
                 {"mesh", mesh},
                 {"trials", trials},
                 {"tol", tol}};
  stamp_report(r, config, seed, mesh);
  return out;
}

CommandOutcome run_scenario_command(const json& spec, std::optional<std::uint64_t> seed,
                                    std::optional<double> mesh) {
  json s = spec;
  if (!s.is_object()) fail(ErrorKind::Parse, "scenario spec must be a JSON object");
  if (seed) s["seed"] = *seed;
  if (mesh) s["mesh"] = *mesh;
  const ScenarioReport rep = run_scenario(s);
  CommandOutcome out;
  out.report = rep.to_json();
  out.csv = rep.csv;
  out.exit_code = rep.all_pass() ? kExitOk : kExitVerificationExceeded;
  return out;
}

CommandOutcome replay_report(const json& report) {
  if (!report.is_object() || !report.contains("config") || !report.contains("seed"))
    fail(ErrorKind::Parse, "replay: report lacks 'config' or 'seed'");
  const json& cfg = report["config"];
  const std::uint64_t seed = report["seed"].get<std::uint64_t>();
  if (cfg.contains("scenario")) return run_scenario_command(cfg, seed, std::nullopt);
  const std::string cmd = cfg.value("command", "");
  if (cmd == "certify")
    return run_certify(domain_from_json(cfg.at("domain")), cfg.at("M").get<double>(), cfg.at("delta").get<double>(),
                       seed);
  if (cmd == "verify")
    return run_verify(domain_from_json(cfg.at("domain")), cfg.at("C").get<double>(), cfg.at("mesh").get<double>(),
                      cfg.at("trials").get<int>(), seed, cfg.at("tol").get<double>());
  fail(ErrorKind::Parse, "replay: unknown command in report config");
}

}  // namespace dbr
