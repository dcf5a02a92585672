#include "commands.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "output.hpp"
#include "wgldos/analytic.hpp"
#include "wgldos/errors.hpp"
#include "wgldos/modes.hpp"
#include "wgldos/scatter.hpp"

namespace wgldos::cli {

namespace {

using nlohmann::json;

bool guide_is_lossless(const ldos::Problem& p) {
  return p.guide && permittivity(p.guide->material(), p.sp).imag() == 0.0;
}

json optional_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string vec(const Vec3& u) { return "(" + num(u.x()) + " " + num(u.y()) + " " + num(u.z()) + ")"; }

std::string emitter_line(const EmitterSpec& e) {
  return "emitter position_nm=(" + num(e.position().x() * 1e3) + " " + num(e.position().y() * 1e3) +
         ") orientation=" + vec(e.orientation()) + " d_nm=" + num(e.distance() * 1e3);
}

// Fitted mode of a spectrum; lossless guides go through the reactive pole.
modes::ModeInfo find_mode(const ldos::Problem& p, const EmitterSpec& e, const ldos::LdosSpectrum& s,
                          const ldos::SpectrumOptions& opts) {
  if (guide_is_lossless(p)) return modes::lossless_pole(s);
  modes::ModeInfo m = modes::fit_lorentzian(s);
  if (m.kind == modes::ModeKind::leaky) m = modes::leaky_mode_split(p, e, m, opts);
  return m;
}

void require_emitters(const RunConfig& cfg) {
  if (cfg.emitters.empty()) throw UsageError("no emitters configured");
}

}  // namespace

void cmd_spectrum(const RunConfig& cfg) {
  require_emitters(cfg);
  const auto specs = ldos::spectrum(cfg.problem, cfg.emitters, cfg.spectrum);
  const double k0 = cfg.problem.sp.k0();
  for (std::size_t e = 0; e < specs.size(); ++e) {
    const auto& s = specs[e];
    CsvWriter w("spectrum", cfg, {"k_z_over_k0", "delta_rho2d_u", "rho_ref", "refinement_level"});
    w.comment(emitter_line(s.emitter));
    w.comment("n1=" + num(s.n1) + " n_max=" + num(s.n_max) + " samples=" + std::to_string(s.size()));
    w.comment(std::string("flags quenching_divergent=") + (s.quenching_divergent ? "1" : "0") +
              " unresolved_peak=" + (s.unresolved_peak ? "1" : "0") + " mesh_limited=" + (s.mesh_limited ? "1" : "0"));
    for (std::size_t i = 0; i < s.size(); ++i)
      w.row({num(s.k_z[i] / k0), num(s.delta_rho[i]), num(s.rho_ref[i]), std::to_string(s.level[i])});
    const std::string name = specs.size() == 1 ? "spectrum.csv" : "spectrum_" + std::to_string(e) + ".csv";
    std::printf("%s\n", w.write(cfg.out_dir, name).c_str());
  }
}

void cmd_modes(const RunConfig& cfg) {
  require_emitters(cfg);
  const EmitterSpec& e = cfg.emitters.front();
  const auto s = ldos::spectrum(cfg.problem, e, cfg.spectrum);
  const modes::ModeInfo m = find_mode(cfg.problem, e, s, cfg.spectrum);
  const double k0 = cfg.problem.sp.k0();
  json j;
  j["version"] = kVersion;
  j["source"] = cfg.source;
  j["config"] = cfg.resolved;
  j["emitter"] = {{"position_nm", {e.position().x() * 1e3, e.position().y() * 1e3}},
                  {"orientation", {e.orientation().x(), e.orientation().y(), e.orientation().z()}},
                  {"d_nm", std::isfinite(e.distance()) ? json(e.distance() * 1e3) : json(nullptr)}};
  j["n_eff"] = m.n_eff;
  j["k_spp_per_um"] = m.k_spp;
  j["L_spp_um"] = optional_num(m.L_spp);
  j["Gamma_SPP_per_um"] = optional_num(m.Gamma_spp);
  j["Gamma_rad_SPP_per_um"] = optional_num(m.Gamma_rad_spp);
  j["Gamma_nrad_SPP_per_um"] = optional_num(m.Gamma_nrad_spp);
  j["kind"] = modes::to_string(m.kind);
  j["below_linewidth_resolution"] = m.below_linewidth_resolution;
  j["fit"] = {{"amplitude", m.amplitude},
              {"hwhm_per_um", m.hwhm},
              {"baseline", {m.baseline0, m.baseline1}},
              {"residual_rms", m.residual_rms},
              {"window_k_over_k0", {m.window.first / k0, m.window.second / k0}}};
  json others = json::array();
  for (double k : m.other_peaks) others.push_back(k / k0);
  j["other_peaks_k_over_k0"] = others;
  j["warnings"] = m.warnings;
  j["spectrum_flags"] = {{"quenching_divergent", s.quenching_divergent},
                         {"unresolved_peak", s.unresolved_peak},
                         {"mesh_limited", s.mesh_limited}};
  std::printf("%s\n", write_file(cfg.out_dir, "modes.json", j.dump(2) + "\n").c_str());
}

void cmd_rates(const RunConfig& cfg) {
  require_emitters(cfg);
  const auto rows = ldos::rate_sweep(cfg.problem, cfg.emitters, cfg.spectrum);
  CsvWriter w("rates", cfg,
              {"d_nm", "gamma_pl", "gamma_rad", "gamma_scatt", "gamma_pl_leak", "gamma_NR", "gamma_pl_NR", "gamma_eh",
               "beta"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.quenching_divergent || r.mesh_limited)
      w.comment("row " + std::to_string(i) + std::string(" flags quenching_divergent=") +
                (r.quenching_divergent ? "1" : "0") + " mesh_limited=" + (r.mesh_limited ? "1" : "0"));
    const double d_nm = cfg.distances_nm.empty() ? r.d * 1e3 : cfg.distances_nm[i];
    w.row({num(d_nm), num(r.gamma_pl), num(r.gamma_rad), num(r.gamma_scatt), num(r.gamma_pl_leak),
           num(r.gamma_NR), num(r.gamma_pl_NR), num(r.gamma_eh), num(r.beta)});
  }
  std::printf("%s\n", w.write(cfg.out_dir, "rates.csv").c_str());
}

void cmd_map(const RunConfig& cfg) {
  if (!cfg.map) throw UsageError("map needs a [map] table in the config");
  const MapGrid& g = *cfg.map;
  const double k0 = cfg.problem.sp.k0();
  std::optional<double> k_z;
  if (g.k_z_over_k0) {
    k_z = *g.k_z_over_k0 * k0;
  } else if (cfg.problem.guide) {
    require_emitters(cfg);
    const auto s = ldos::spectrum(cfg.problem, cfg.emitters.front(), cfg.spectrum);
    k_z = find_mode(cfg.problem, cfg.emitters.front(), s, cfg.spectrum).k_spp;
  }

  std::vector<Vec2> pts;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const double x = g.nx == 1 ? g.x0_nm : g.x0_nm + (g.x1_nm - g.x0_nm) * ix / (g.nx - 1);
      const double y = g.ny == 1 ? g.y0_nm : g.y0_nm + (g.y1_nm - g.y0_nm) * iy / (g.ny - 1);
      pts.emplace_back(x * 1e-3, y * 1e-3);
    }
  std::vector<double> values(pts.size(), 0.0);
  std::vector<bool> masked(pts.size(), false);
  if (cfg.problem.guide) {
    const Mesh mesh = build_mesh(*cfg.problem.guide, cfg.problem.background, cfg.problem.h, cfg.problem.sp);
    std::vector<Vec3> us;
    if (g.orientation) {
      us.push_back(*g.orientation);
    } else {
      us = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    }
    for (const Vec3& u : us) {
      const auto map = scatter::ldos_map(mesh, cfg.problem.background, *k_z, cfg.problem.sp, pts, u);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        values[i] += map.values[i];
        masked[i] = masked[i] || map.masked[i];
      }
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (cfg.problem.guide->contains(pts[i])) {
        masked[i] = true;
        values[i] = 0.0;
      }
  }
  CsvWriter w("map", cfg, {"x_nm", "y_nm", "delta_rho2d_u", "masked"});
  w.comment("k_z_over_k0=" + (k_z ? num(*k_z / k0) : std::string("none")) +
            " orientation=" + (g.orientation ? vec(*g.orientation) : std::string("trace")));
  for (std::size_t i = 0; i < pts.size(); ++i)
    w.row({num(pts[i].x() * 1e3), num(pts[i].y() * 1e3), num(values[i]), masked[i] ? "1" : "0"});
  std::printf("%s\n", w.write(cfg.out_dir, "map.csv").c_str());
}

bool cmd_validate(const std::string& out_dir, bool quick, int workers) {
  const SpectralPoint sp(1.0);
  const double h = quick ? 0.004 : 0.002;
  ldos::SpectrumOptions opts;
  opts.workers = workers;
  json report = json::array();
  bool all = true;
  auto record = [&](const std::string& name, double measured, double tol, const std::string& detail) {
    const bool ok = measured <= tol;
    all = all && ok;
    std::printf("%s %-28s deviation=%s tol=%s %s\n", ok ? "PASS" : "FAIL", name.c_str(), num(measured).c_str(),
                num(tol).c_str(), detail.c_str());
    std::fflush(stdout);
    report.push_back({{"oracle", name}, {"pass", ok}, {"deviation", measured}, {"tolerance", tol}, {"detail", detail}});
  };

  double worst = 0.0;
  for (double n1 : {1.0, std::sqrt(2.0), 1.5}) {
    const ldos::Problem p{Background(Homogeneous{n1 * n1}), std::nullopt, sp, h};
    for (const Vec3& u : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}) {
      const double g = ldos::integrate_bands(ldos::spectrum(p, EmitterSpec(Vec2(0, 0), u), opts)).total();
      worst = std::max(worst, std::abs(g / n1 - 1.0));
    }
  }
  record("homogeneous_identity", worst, 1e-4, "n1 in {1, sqrt2, 1.5}, x/y/z dipoles");

  const CrossSection wire(Circle{Vec2(0, 0), 0.02}, Material::constant(cplx(-50.0, 3.85)));
  const ldos::Problem bench{Background(Homogeneous{2.0}), wire, sp, h};
  const std::vector<double> ds{0.01, 0.02, 0.05, 0.1};
  std::vector<EmitterSpec> em;
  for (double d : ds) em.push_back(emitter_along_ray(wire, Vec2(1, 0), d, Vec3(1, 0, 0)));
  const auto specs = ldos::spectrum(bench, em, opts);
  const double root = analytic::circular_dispersion_root(0.02, 2.0, -50.0, sp);
  const modes::ModeInfo m = modes::fit_lorentzian(specs[1]);
  record("dispersion_root", std::abs(m.k_spp / root - 1.0), 0.02,
         "n_eff " + num(m.n_eff) + " vs analytic " + num(root / sp.k0()));

  const analytic::CircularModeField field(root, 0.02, 2.0, -50.0, sp);
  double dev = 0.0;
  std::string detail;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const modes::ModeInfo mi = modes::fit_lorentzian(specs[i]);
    const double closed = ldos::breakdown(specs[i], &mi).gamma_pl;
    const double exact = analytic::gamma_pl_lossless(field, ds[i], Vec3(1, 0, 0));
    dev = std::max(dev, std::abs(closed - exact) / exact);
    detail += "d=" + num(ds[i] * 1e3) + "nm:" + num(closed) + "/" + num(exact) + " ";
  }
  record("lossless_vs_closed_form", dev, 0.10, detail);

  if (!out_dir.empty()) {
    json j{{"version", kVersion}, {"pitch_nm", h * 1e3}, {"oracles", report}, {"pass", all}};
    std::printf("%s\n", write_file(out_dir, "validate.json", j.dump(2) + "\n").c_str());
  }
  return all;
}

}  // namespace wgldos::cli
