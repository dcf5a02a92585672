// Acceptance criteria 1-10. Usage: wgldos_acceptance [n ...]; no argument runs all.
// Prints one "CRITERION n PASS|FAIL" line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wgldos/analytic.hpp"
#include "wgldos/errors.hpp"
#include "wgldos/green.hpp"
#include "wgldos/ldos.hpp"
#include "wgldos/modes.hpp"
#include "wgldos/scatter.hpp"
#include "wgldos/specfun.hpp"

using namespace wgldos;

namespace {

constexpr double kPi = std::numbers::pi;
const SpectralPoint kSp(1.0);
const double kK0 = kSp.k0();
const cplx kSilver(-50.0, 3.85);

struct Outcome {
  bool pass = true;
  std::ostringstream text;

  void check(bool ok, const std::string& label) {
    pass = pass && ok;
    text << ' ' << label << (ok ? " ok;" : " FAILED;");
  }
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

CrossSection benchmark_wire(cplx eps = kSilver) {
  return CrossSection(Circle{Vec2(0, 0), 0.02}, Material::constant(eps));
}

ldos::Problem benchmark(double h, cplx eps = kSilver) {
  return ldos::Problem{Background(Homogeneous{2.0}), benchmark_wire(eps), kSp, h};
}

EmitterSpec radial(const CrossSection& cs, double d) { return emitter_along_ray(cs, Vec2(1, 0), d, Vec3(1, 0, 0)); }

struct Row {
  double d;
  modes::ModeInfo mode;
  ldos::RateBreakdown rates;
};

// Benchmark wire at h = 2 nm, radial emitters at the given distances.
std::vector<Row> benchmark_rows(const std::vector<double>& ds, cplx eps = kSilver) {
  const ldos::Problem p = benchmark(0.002, eps);
  std::vector<EmitterSpec> em;
  for (double d : ds) em.push_back(radial(*p.guide, d));
  const auto specs = ldos::spectrum(p, em);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const modes::ModeInfo m = modes::fit_lorentzian(specs[i]);
    rows.push_back({ds[i], m, ldos::breakdown(specs[i], &m)});
  }
  return rows;
}

double max_abs(const green::Mat3& m) { return m.cwiseAbs().maxCoeff(); }

// 1. Homogeneous medium: band integral equals n1.
void criterion1(Outcome& o) {
  double worst = 0.0;
  for (double n1 : {1.0, std::sqrt(2.0), 1.5}) {
    const ldos::Problem p{Background(Homogeneous{n1 * n1}), std::nullopt, kSp, 0.002};
    for (const Vec3& u : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}) {
      const double g = ldos::integrate_bands(ldos::spectrum(p, EmitterSpec(Vec2(0, 0), u))).total();
      worst = std::max(worst, std::abs(g / n1 - 1.0));
    }
  }
  o.check(worst <= 5e-3, fmt("max |gamma/n1 - 1| = %.2e (tol 5e-3)", worst));
}

// 2. Bound mode of the benchmark wire.
void criterion2(Outcome& o) {
  const auto rows = benchmark_rows({0.02});
  const auto& m = rows[0].mode;
  o.check(std::abs(m.n_eff / 2.28 - 1.0) <= 0.02, fmt("n_eff = %.4f (2.28 +- 2%%)", m.n_eff));
  o.check(std::abs(*m.L_spp / 1.2 - 1.0) <= 0.15, fmt("L_spp = %.3f um (1.2 +- 15%%)", *m.L_spp));
  o.check(m.residual_rms < 0.05, fmt("fit rms = %.2e (< 5%%)", m.residual_rms));
}

// 3. Closed-form plasmon rate against the lossless flux formula.
void criterion3(Outcome& o) {
  const std::vector<double> ds{0.01, 0.02, 0.03, 0.05, 0.075, 0.1};
  const auto rows = benchmark_rows(ds);
  const double k = analytic::circular_dispersion_root(0.02, 2.0, -50.0, kSp);
  const analytic::CircularModeField field(k, 0.02, 2.0, -50.0, kSp);
  double worst = 0.0;
  for (const auto& r : rows) {
    const double ref = analytic::gamma_pl_lossless(field, r.d, Vec3(1, 0, 0));
    const double dev = std::abs(r.rates.gamma_pl - ref) / ref;
    worst = std::max(worst, dev);
    o.text << fmt(" d=%.0fnm %.4g", r.d * 1e3, r.rates.gamma_pl) << fmt("/%.4g", ref);
  }
  o.check(worst <= 0.10, fmt(" max deviation %.2f%% (tol 10%%)", 100 * worst));
}

// 4. Beta factor at 20 nm.
void criterion4(Outcome& o) {
  const auto rows = benchmark_rows({0.02});
  const double b = rows[0].rates.beta;
  o.check(std::abs(b - 0.83) <= 0.05, fmt("beta(20 nm) = %.4f (0.83 +- 0.05)", b));
}

// 5. Plasmon rate independent of metal loss.
void criterion5(Outcome& o) {
  std::vector<double> g;
  for (double f : {0.5, 1.0, 2.0}) g.push_back(benchmark_rows({0.02}, cplx(-50.0, 3.85 * f))[0].rates.gamma_pl);
  const double dev = std::max(std::abs(g[0] / g[1] - 1.0), std::abs(g[2] / g[1] - 1.0));
  o.text << fmt(" gamma_pl(x0.5, x1) = %.4f, %.4f;", g[0], g[1]) << fmt(" gamma_pl(x2) = %.4f;", g[2]);
  o.check(dev < 0.05, fmt("max change %.2f%% (< 5%%)", 100 * dev));
}

// 6. Numerical mode index converges to the analytic root.
void criterion6(Outcome& o) {
  const double root = analytic::circular_dispersion_root(0.02, 2.0, -50.0, kSp);
  const CrossSection cs = benchmark_wire();
  ldos::SpectrumOptions opts;
  opts.band = std::make_pair(1.6, 3.0);
  std::vector<double> neff, err;
  for (double h : {0.004, 0.002, 0.001}) {
    const ldos::Problem p{Background(Homogeneous{2.0}), cs, kSp, h};
    const modes::ModeInfo m = modes::fit_lorentzian(ldos::spectrum(p, radial(cs, 0.05), opts));
    neff.push_back(m.n_eff);
    err.push_back(std::abs(m.k_spp / root - 1.0));
    o.text << fmt(" h=%.0fnm", h * 1e3) << fmt(" n_eff=%.6f err=%.4f%%;", m.n_eff, 100 * err.back());
  }
  o.check(err[1] <= 0.02, "R/10 within 2%");
  o.check(err[2] <= 0.01, "R/20 within 1%");
  const bool mono = (neff[0] - neff[1]) * (neff[1] - neff[2]) > 0.0 && err[0] > err[1] && err[1] > err[2];
  o.check(mono, "monotone in h");
}

// 7. Leaky mode of a wire above glass.
void criterion7(Outcome& o) {
  const CrossSection cs(Circle{Vec2(0, 0.1), 0.05}, Material::constant(kSilver));
  const ldos::Problem p{Background(TwoLayer{1.0, 2.25}), cs, kSp, 0.005};
  const EmitterSpec em = emitter_along_ray(cs, Vec2(0, -1), 0.025, Vec3(1, 0, 0));
  const ldos::LdosSpectrum s = ldos::spectrum(p, em);
  const modes::ModeInfo m = modes::fit_lorentzian(s);
  const modes::ModeInfo split = modes::leaky_mode_split(p, em, m, {});
  const ldos::RateBreakdown r = ldos::breakdown(s, &split);
  const double leak = r.gamma_pl_leak / (r.gamma_rad + r.gamma_NR);
  o.check(m.kind == modes::ModeKind::leaky, "classified leaky");
  o.check(std::abs(m.n_eff / 1.28 - 1.0) <= 0.03, fmt("n_eff = %.4f (1.28 +- 3%%)", m.n_eff));
  o.check(std::abs(*m.Gamma_spp / 0.083 - 1.0) <= 0.15, fmt("Gamma_spp = %.4f /um (0.083 +- 15%%)", *m.Gamma_spp));
  o.check(std::abs(*split.Gamma_rad_spp / 0.073 - 1.0) <= 0.15,
          fmt("Gamma_rad_spp = %.4f /um (0.073 +- 15%%)", *split.Gamma_rad_spp));
  o.check(std::abs(leak - 0.70) <= 0.07, fmt("gamma_pl,leak/gamma = %.4f (0.70 +- 0.07)", leak));
}

// 8. Quenching versus plasmon coupling with distance.
void criterion8(Outcome& o) {
  const std::vector<double> ds{0.005, 0.01, 0.015, 0.02, 0.03, 0.05, 0.075, 0.1, 0.15};
  const auto rows = benchmark_rows(ds);
  bool mono = true, near = true;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i + 1].d <= 0.1 + 1e-12 && !(rows[i].rates.gamma_NR > rows[i + 1].rates.gamma_NR)) mono = false;
  for (const auto& r : rows) {
    o.text << fmt(" d=%.0fnm", r.d * 1e3) << fmt(" NR=%.4g pl=%.4g", r.rates.gamma_NR, r.rates.gamma_pl);
    if (r.d <= 0.01 + 1e-12 && !(r.rates.gamma_NR > r.rates.gamma_pl)) near = false;
  }
  const auto& far = rows.back().rates;
  const double dev = std::abs(far.gamma_NR - far.gamma_pl) / far.gamma_pl;
  o.text << ';';
  o.check(mono, "NR strictly decreasing on [5, 100] nm");
  o.check(near, "NR > pl for d <= 10 nm");
  o.check(dev < 0.10, fmt("|NR - pl|/pl at 150 nm = %.2f%% (< 10%%)", 100 * dev));
}

// 9. Pentagon corner against the circle of equal circumradius.
void criterion9(Outcome& o) {
  const double d = 0.005;
  const CrossSection pent(RegularPolygon{Vec2(0, 0), 0.02, 5, kPi / 2}, Material::constant(kSilver));
  const CrossSection circ = benchmark_wire();
  const Background bg(Homogeneous{2.0});
  double pl[2];
  double k_spp = 0.0;
  for (int s = 0; s < 2; ++s) {
    const CrossSection& cs = s == 0 ? pent : circ;
    const ldos::Problem p{bg, cs, kSp, 0.002};
    const ldos::LdosSpectrum spec = ldos::spectrum(p, emitter_along_ray(cs, Vec2(0, 1), d, Vec3(1, 0, 0)));
    const modes::ModeInfo m = modes::fit_lorentzian(spec);
    pl[s] = ldos::breakdown(spec, &m).gamma_pl;
    if (s == 0) k_spp = m.k_spp;
  }
  o.check(pl[0] > pl[1], fmt("gamma_pl corner %.4g vs circle %.4g", pl[0], pl[1]));

  // Orientation-summed map at k_spp along the contour at distance d from the pentagon.
  const Mesh mesh = build_mesh(pent, bg, 0.002, kSp);
  const auto v = pent.vertices();
  const std::size_t n = v.size();
  std::vector<Vec2> pts;
  std::vector<double> to_vertex;
  auto outward = [&](const Vec2& a, const Vec2& b) {
    const Vec2 t = (b - a).normalized();
    Vec2 nn(t.y(), -t.x());
    return nn.dot(a + b) < 0 ? Vec2(-nn) : nn;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = v[i], b = v[(i + 1) % n], c = v[(i + 2) % n];
    const Vec2 n1 = outward(a, b), n2 = outward(b, c);
    for (int j = 0; j < 20; ++j) pts.push_back(a + (b - a) * ((j + 0.5) / 20.0) + d * n1);
    double a0 = std::atan2(n1.y(), n1.x()), a1 = std::atan2(n2.y(), n2.x());
    if (a1 < a0) a1 += 2 * kPi;
    for (int j = 1; j < 6; ++j) {
      const double t = a0 + (a1 - a0) * j / 6.0;
      pts.push_back(b + d * Vec2(std::cos(t), std::sin(t)));
    }
  }
  for (const auto& q : pts) {
    double dv = INFINITY;
    for (const auto& x : v) dv = std::min(dv, (q - x).norm());
    to_vertex.push_back(dv);
  }
  std::vector<double> trace(pts.size(), 0.0);
  for (const Vec3& u : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}) {
    const auto map = scatter::ldos_map(mesh, bg, k_spp, kSp, pts, u);
    for (std::size_t i = 0; i < pts.size(); ++i) trace[i] += map.values[i];
  }
  std::vector<std::size_t> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return trace[a] > trace[b]; });
  bool corners = true;
  for (int t = 0; t < 5; ++t) corners = corners && to_vertex[idx[t]] <= 2 * d;
  double mid = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (to_vertex[i] > 0.4 * (v[1] - v[0]).norm()) mid = std::max(mid, trace[i]);
  o.check(corners, "five largest contour values within 2d of a corner");
  o.check(trace[idx[0]] > mid, fmt("map max %.4g vs mid-edge max %.4g", trace[idx[0]], mid));
}

// 10. Property suite.
void criterion10(Outcome& o) {
  using namespace specfun;
  double wr = 0.0;
  for (double r : {0.05, 0.7, 3.0, 12.0, 45.0})
    for (double th : {-1.4, -0.5, 0.0, 0.8, 1.5}) {
      const cplx z = std::polar(r, th);
      for (int nu : {0}) {
        const cplx ik = besseli(nu, z) * besselk(nu + 1, z) + besseli(nu + 1, z) * besselk(nu, z);
        wr = std::max(wr, std::abs(ik * z - 1.0));
        if (th == 0.0) {
          const cplx jy = besselj(nu + 1, z) * bessely(nu, z) - besselj(nu, z) * bessely(nu + 1, z);
          wr = std::max(wr, std::abs(jy * (kPi * z / 2.0) - 1.0));
        }
      }
    }
  o.check(wr <= 1e-10, fmt("Wronskians %.1e", wr));

  double rec = 0.0;
  const Background glass(TwoLayer{1.0, 2.25});
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.01, 0.2);
  for (int t = 0; t < 6; ++t) {
    const Vec2 r(u(rng) - 0.1, u(rng)), rp(u(rng) - 0.1, u(rng));
    const double kz = 20 * u(rng) * kK0;
    const auto h = green::dyad_hom(r, rp, kz, 2.0, kSp).tensor;
    rec = std::max(rec, max_abs(h - green::dyad_hom(rp, r, -kz, 2.0, kSp).tensor.transpose()) / max_abs(h));
    const auto g = green::dyad_reflected(r, rp, kz, glass, kSp).tensor;
    rec = std::max(rec, max_abs(g - green::dyad_reflected(rp, r, -kz, glass, kSp).tensor.transpose()) / max_abs(g));
  }
  o.check(rec <= 1e-8, fmt("reciprocity %.1e", rec));

  const ldos::Problem null{Background(Homogeneous{2.0}), benchmark_wire(2.0), kSp, 0.004};
  const auto ns = ldos::spectrum(null, radial(*null.guide, 0.02));
  o.check(std::all_of(ns.delta_rho.begin(), ns.delta_rho.end(), [](double x) { return x == 0.0; }), "null contrast");

  const ldos::Problem coarse = benchmark(0.004);
  const EmitterSpec em = radial(*coarse.guide, 0.02);
  ldos::SpectrumOptions one, two;
  two.workers = 2;
  const auto s1 = ldos::spectrum(coarse, em, one);
  const auto s2 = ldos::spectrum(coarse, em, two);
  const auto s3 = ldos::spectrum(coarse, em, one);
  modes::ModeInfo m = modes::fit_lorentzian(s1);
  const auto b = ldos::breakdown(s1, &m);
  const double total = ldos::integrate_bands(s1).total();
  double clos = std::abs(b.gamma_rad + b.gamma_NR - total) / total;
  m.kind = modes::ModeKind::leaky;
  m.Gamma_rad_spp = 0.6 * *m.Gamma_spp;
  m.Gamma_nrad_spp = 0.4 * *m.Gamma_spp;
  const auto bl = ldos::breakdown(s1, &m);
  clos = std::max(clos, std::abs(bl.gamma_rad + bl.gamma_NR - total) / total);
  clos = std::max(clos, std::abs(bl.gamma_scatt + bl.gamma_pl_leak + bl.gamma_pl_NR + bl.gamma_eh - total) / total);
  o.check(clos <= 0.01, fmt("closure %.1e", clos));

  Mesh mesh = build_mesh(*coarse.guide, coarse.background, 0.004, kSp);
  const Vec2 r0(0.03, 0.01);
  const auto a = scatter::ScatterSystem(mesh, coarse.background, kSp, 2.3 * kK0).delta_green(r0);
  std::shuffle(mesh.cells.begin(), mesh.cells.end(), rng);
  const auto c = scatter::ScatterSystem(mesh, coarse.background, kSp, 2.3 * kK0).delta_green(r0);
  const bool exact = a == c && s1.k_z == s2.k_z && s1.delta_rho == s2.delta_rho && s1.delta_rho == s3.delta_rho;
  o.check(exact, "permutation and determinism bit-exact");

  auto syn = s1;
  const double kc = 2.3 * kK0, w = 0.04 * kK0;
  for (std::size_t i = 0; i < syn.size(); ++i) {
    const double t = syn.k_z[i] - kc;
    syn.delta_rho[i] = 25.0 * w * w / (t * t + w * w) + 0.2;
  }
  const auto fit = modes::fit_lorentzian(syn);
  const double lerr = std::max({std::abs(fit.k_spp / kc - 1), std::abs(fit.hwhm / w - 1), std::abs(fit.amplitude / 25 - 1)});
  o.check(lerr <= 1e-6, fmt("Lorentzian recovery %.1e", lerr));
}

const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> kCriteria{
    {"homogeneous identity", criterion1},
    {"benchmark bound mode", criterion2},
    {"closed form vs lossless flux", criterion3},
    {"beta at 20 nm", criterion4},
    {"loss invariance", criterion5},
    {"dispersion convergence", criterion6},
    {"leaky benchmark", criterion7},
    {"near-field quenching", criterion8},
    {"pentagon corner enhancement", criterion9},
    {"property suite", criterion10},
};

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= 10; ++i) which.push_back(i);
  bool all = true;
  for (int id : which) {
    if (id < 1 || id > 10) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    const auto& [title, run] = kCriteria[static_cast<std::size_t>(id - 1)];
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("CRITERION %d %s [%s]%s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", title, o.text.str().c_str(), secs);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
