#include "wgldos/ldos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <string>

#include "wgldos/errors.hpp"
#include "wgldos/modes.hpp"
#include "wgldos/parallel.hpp"
#include "wgldos/quadrature.hpp"
#include "wgldos/scatter.hpp"

namespace wgldos::ldos {

namespace {

constexpr double kPi = 3.14159265358979323846;

cplx quadratic_form(const Mat3& g, const Vec3& u) {
  const Eigen::Vector3cd uc = u.cast<cplx>();
  return uc.dot(even_part(g) * uc);
}

// All emitter-dependent quantities at one k_z.
struct Sample {
  std::vector<double> drho, rref, drate, rrate, react;
  int level = 0;
};

class Evaluator {
 public:
  Evaluator(const Problem& p, const std::vector<EmitterSpec>& emitters) : p_(p), emitters_(emitters) {
    if (emitters.empty()) throw UsageError("spectrum needs at least one emitter");
    for (const auto& e : emitters_) {
      if (p.background.is_two_layer() && e.position().y() <= 0.0)
        throw DomainError("emitter must lie in the superstrate (y > 0)");
      positions_.push_back(e.position());
    }
    if (p.guide) {
      Mesh m = build_mesh(*p.guide, p.background, p.h, p.sp);
      if (!m.null_contrast()) mesh_ = std::make_unique<Mesh>(std::move(m));
    }
  }

  const Mesh* mesh() const { return mesh_.get(); }

  Sample operator()(double k) const {
    const std::size_t n = emitters_.size();
    const double k0 = p_.sp.k0();
    const cplx eps1 = p_.background.superstrate();
    Sample s;
    s.drho.assign(n, 0.0);
    s.rref.assign(n, 0.0);
    s.drate.assign(n, 0.0);
    s.rrate.assign(n, 0.0);
    s.react.assign(n, 0.0);
    const green::ReferenceGreen ref(p_.background, p_.sp, k, p_.sommerfeld);
    for (std::size_t e = 0; e < n; ++e) {
      const Vec3& u = emitters_[e].orientation();
      const double q = quadratic_form(ref.coincidence_imag(positions_[e]), u).real();
      s.rrate[e] = -(6.0 / k0) * q;
      s.rref[e] = -(2.0 * k / kPi) * eps1.real() * q;
    }
    if (mesh_) {
      const scatter::ScatterSystem sys(*mesh_, p_.background, p_.sp, k, p_.sommerfeld);
      const auto dg = sys.delta_green(positions_);
      for (std::size_t e = 0; e < n; ++e) {
        const Vec3& u = emitters_[e].orientation();
        const cplx q = eps1 * quadratic_form(dg[e], u);
        s.drho[e] = -(2.0 * k / kPi) * q.imag();
        s.react[e] = -(2.0 * k / kPi) * q.real();
        s.drate[e] = rate_density(dg[e], k0, u);
      }
    }
    return s;
  }

 private:
  const Problem& p_;
  const std::vector<EmitterSpec>& emitters_;
  std::vector<Vec2> positions_;
  std::unique_ptr<Mesh> mesh_;
};

struct Panel {
  double a, b;
  int level;
};

class Sampler {
 public:
  Sampler(const Evaluator& eval, std::size_t n_emitters, int workers)
      : eval_(eval), n_(n_emitters), workers_(workers) {}

  std::vector<Panel> panels;
  std::map<double, Sample> cache;

  void evaluate(const std::vector<Panel>& ps) {
    std::map<double, int> todo;
    for (const auto& p : ps) {
      for (double x : quad::gk15_nodes(p.a, p.b)) {
        if (!cache.count(x) && !todo.count(x)) todo.emplace(x, p.level);
      }
    }
    std::vector<double> ks;
    for (const auto& [k, lvl] : todo) ks.push_back(k);
    std::vector<Sample> out(ks.size());
    parallel_for(ks.size(), workers_, [&](std::size_t i) { out[i] = eval_(ks[i]); });
    for (std::size_t i = 0; i < ks.size(); ++i) {
      out[i].level = todo[ks[i]];
      cache.emplace(ks[i], std::move(out[i]));
    }
  }

  void add(const std::vector<Panel>& ps) {
    evaluate(ps);
    panels.insert(panels.end(), ps.begin(), ps.end());
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  }

  // Kronrod and Gauss sums of the total rate density on one panel.
  void panel_sums(const Panel& p, std::vector<double>& kr, std::vector<double>& ga, bool delta_only = false) const {
    const auto x = quad::gk15_nodes(p.a, p.b);
    const auto wk = quad::gk15_kronrod_weights(p.a, p.b);
    const auto wg = quad::gk15_gauss_weights(p.a, p.b);
    kr.assign(n_, 0.0);
    ga.assign(n_, 0.0);
    for (int j = 0; j < 15; ++j) {
      const Sample& s = cache.at(x[j]);
      for (std::size_t e = 0; e < n_; ++e) {
        const double f = s.drate[e] + (delta_only ? 0.0 : s.rrate[e]);
        kr[e] += wk[j] * f;
        ga[e] += wg[j] * f;
      }
    }
  }

  std::vector<double> totals() const {
    std::vector<double> t(n_, 0.0), kr, ga;
    for (const auto& p : panels) {
      panel_sums(p, kr, ga);
      for (std::size_t e = 0; e < n_; ++e) t[e] += kr[e];
    }
    return t;
  }

  // Bisects panels whose embedded error exceeds 0.1 tol of the running total.
  void refine(double tol, double min_width, int max_level) {
    for (int round = 0; round < max_level; ++round) {
      const auto tot = totals();
      std::vector<Panel> keep, split;
      std::vector<double> kr, ga;
      for (const auto& p : panels) {
        panel_sums(p, kr, ga);
        double err = 0.0;
        for (std::size_t e = 0; e < n_; ++e) {
          const double scale = std::max(std::abs(tot[e]), std::numeric_limits<double>::min());
          err = std::max(err, std::abs(kr[e] - ga[e]) / scale);
        }
        const double mid = 0.5 * (p.a + p.b);
        if (err > 0.1 * tol && p.level < max_level && (p.b - p.a) > 2.0 * min_width) {
          split.push_back({p.a, mid, p.level + 1});
          split.push_back({mid, p.b, p.level + 1});
        } else {
          keep.push_back(p);
        }
      }
      if (split.empty()) return;
      panels = std::move(keep);
      add(split);
    }
  }

  // Splits every panel overlapping [lo, hi] once; returns false when none could be split.
  bool split_range(double lo, double hi, int max_level) {
    std::vector<Panel> keep, split;
    for (const auto& p : panels) {
      if (p.b > lo && p.a < hi && p.level < max_level) {
        const double mid = 0.5 * (p.a + p.b);
        split.push_back({p.a, mid, p.level + 1});
        split.push_back({mid, p.b, p.level + 1});
      } else {
        keep.push_back(p);
      }
    }
    if (split.empty()) return false;
    panels = std::move(keep);
    add(split);
    return true;
  }

 private:
  const Evaluator& eval_;
  std::size_t n_;
  int workers_;
};

struct Peak {
  double k = 0;
  double hw = 0;
  double sharpness = 0;
};

// Sharpest positive peak of the summed normalized delta_rho whose FWHM avoids branch points.
std::optional<Peak> find_peak(const Sampler& s, std::size_t n_emitters, const std::vector<double>& branch) {
  std::vector<double> k, y;
  std::vector<double> norm(n_emitters, 0.0), react(n_emitters, 0.0);
  for (const auto& [kk, smp] : s.cache) {
    for (std::size_t e = 0; e < n_emitters; ++e) {
      norm[e] = std::max(norm[e], std::abs(smp.drho[e]));
      react[e] = std::max(react[e], std::abs(smp.react[e]));
    }
  }
  for (const auto& [kk, smp] : s.cache) {
    double v = 0.0;
    for (std::size_t e = 0; e < n_emitters; ++e) {
      if (norm[e] > 1e-9 * react[e] && norm[e] > 0.0) v += smp.drho[e] / norm[e];
    }
    k.push_back(kk);
    y.push_back(v);
  }
  std::optional<Peak> best;
  for (std::size_t i = 1; i + 1 < k.size(); ++i) {
    if (!(y[i] > 0.0 && y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    const double half = 0.5 * y[i];
    std::size_t l = i, r = i;
    while (l > 0 && y[l] > half && y[l - 1] <= y[l]) --l;
    while (r + 1 < k.size() && y[r] > half && y[r + 1] <= y[r]) ++r;
    if (y[l] > half || y[r] > half) continue;
    const double kl = k[l] + (half - y[l]) * (k[l + 1] - k[l]) / (y[l + 1] - y[l]);
    const double kr = k[r - 1] + (half - y[r - 1]) * (k[r] - k[r - 1]) / (y[r] - y[r - 1]);
    const double fwhm = kr - kl;
    if (!(fwhm > 0.0)) continue;
    bool near_branch = false;
    for (double b : branch) near_branch = near_branch || std::abs(b - k[i]) < fwhm;
    if (near_branch) continue;
    const double sharp = y[i] / fwhm;
    if (!best || sharp > best->sharpness) best = Peak{k[i], 0.5 * fwhm, sharp};
  }
  return best;
}

}  // namespace

Mat3 even_part(const Mat3& g) {
  Mat3 m = g;
  m(0, 2) = m(1, 2) = m(2, 0) = m(2, 1) = 0.0;
  return m;
}

double delta_rho2d(const Mat3& dg, double k_z, cplx eps_at_emitter, const Vec3& u) {
  return -(2.0 * k_z / kPi) * (eps_at_emitter * quadratic_form(dg, u)).imag();
}

double rate_density(const Mat3& g, double k0, const Vec3& u) { return -(6.0 / k0) * quadratic_form(g, u).imag(); }

double reference_rho(const EmitterSpec& emitter, const Background& bg, double k_z, const SpectralPoint& sp) {
  const green::ReferenceGreen ref(bg, sp, k_z);
  const double q = quadratic_form(ref.coincidence_imag(emitter.position()), emitter.orientation()).real();
  return -(2.0 * k_z / kPi) * bg.superstrate().real() * q;
}

Problem Problem::lossless() const {
  Problem p = *this;
  if (guide) p.guide = guide->with_material(lossless_variant(guide->material()));
  return p;
}

Problem Problem::with_guide_material(const Material& m) const {
  Problem p = *this;
  if (guide) p.guide = guide->with_material(m);
  return p;
}

std::size_t LdosSpectrum::index_of(double k) const {
  const auto it = std::lower_bound(k_z.begin(), k_z.end(), k);
  if (it == k_z.end() || *it != k) throw UsageError("k_z is not a sample of this spectrum");
  return static_cast<std::size_t>(it - k_z.begin());
}

std::vector<LdosSpectrum> spectrum(const Problem& problem, const std::vector<EmitterSpec>& emitters,
                                   const SpectrumOptions& opts) {
  const Evaluator eval(problem, emitters);
  const std::size_t ne = emitters.size();
  const double k0 = problem.sp.k0();
  const double n1 = std::sqrt(problem.background.superstrate().real());
  const double n_max = problem.background.n_max();
  const double k_max = opts.k_max * k0;
  if (!(k_max > n_max * k0)) throw UsageError("k_max must exceed the light line n_max k0");

  std::vector<double> branch{n1 * k0};
  if (n_max > n1) branch.push_back(n_max * k0);

  std::vector<double> edges;
  double lo = 0.0, hi = std::min(3.0 * n_max * k0, k_max);
  if (opts.band) {
    lo = opts.band->first * k0;
    hi = opts.band->second * k0;
    if (!(hi > lo) || lo < 0.0) throw UsageError("band must satisfy 0 <= lo < hi");
  }
  edges.push_back(lo);
  for (double b : branch)
    if (b > lo && b < hi) edges.push_back(b);
  edges.push_back(hi);

  Sampler sampler(eval, ne, opts.workers);
  std::vector<Panel> initial;
  const double width = opts.panel_width * k0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const int m = std::max(1, static_cast<int>(std::ceil((edges[i + 1] - edges[i]) / width - 1e-9)));
    for (int j = 0; j < m; ++j) {
      const double a = edges[i] + (edges[i + 1] - edges[i]) * j / m;
      const double b = (j + 1 == m) ? edges[i + 1] : edges[i] + (edges[i + 1] - edges[i]) * (j + 1) / m;
      initial.push_back({a, b, 0});
    }
  }
  sampler.add(initial);
  const double min_width = opts.guard * k0;
  sampler.refine(opts.tol, min_width, opts.max_level);

  std::vector<bool> divergent(ne, false);
  if (!opts.band) {
    double upper = hi;
    std::vector<bool> converged(ne, upper >= k_max);
    const auto all = [](const std::vector<bool>& v) { return std::all_of(v.begin(), v.end(), [](bool b) { return b; }); };
    while (!all(converged) && upper < k_max) {
      const double top = std::min(2.0 * upper, k_max);
      std::vector<Panel> oct;
      for (int j = 0; j < 4; ++j)
        oct.push_back({upper + (top - upper) * j / 4.0, j == 3 ? top : upper + (top - upper) * (j + 1) / 4.0, 0});
      sampler.add(oct);
      sampler.refine(opts.tol, min_width, opts.max_level);
      const auto tot = sampler.totals();
      std::vector<double> part(ne, 0.0), kr, ga;
      for (const auto& p : sampler.panels) {
        if (p.a < upper) continue;
        sampler.panel_sums(p, kr, ga);
        for (std::size_t e = 0; e < ne; ++e) part[e] += kr[e];
      }
      for (std::size_t e = 0; e < ne; ++e) converged[e] = std::abs(part[e]) < opts.octave_tol * std::abs(tot[e]);
      upper = top;
    }
    for (std::size_t e = 0; e < ne; ++e) divergent[e] = !converged[e];
    if (!all(converged) && opts.strict)
      throw NumericalError("evanescent tail not converged at the k_z ceiling (quenching-divergent)");
  }

  bool unresolved = false;
  if (eval.mesh()) {
    for (int round = 0; round <= opts.max_level; ++round) {
      const auto peak = find_peak(sampler, ne, branch);
      if (!peak) break;
      std::size_t inside = 0;
      for (const auto& [k, smp] : sampler.cache)
        if (k >= peak->k - peak->hw && k <= peak->k + peak->hw) ++inside;
      if (static_cast<int>(inside) >= opts.min_peak_samples) break;
      if (!sampler.split_range(peak->k - 2.0 * peak->hw, peak->k + 2.0 * peak->hw, opts.max_level)) {
        unresolved = true;
        break;
      }
    }
    if (unresolved && opts.strict) throw NumericalError("peak unresolved at the refinement limit");
  }

  std::vector<LdosSpectrum> out;
  out.reserve(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    LdosSpectrum s{emitters[e], problem.sp, n1, n_max, {}, {}, {}, {}, {}, {}, {}, {}, false, false, false};
    for (const auto& [k, smp] : sampler.cache) {
      s.k_z.push_back(k);
      s.delta_rho.push_back(smp.drho[e]);
      s.rho_ref.push_back(smp.rref[e]);
      s.delta_rate.push_back(smp.drate[e]);
      s.ref_rate.push_back(smp.rrate[e]);
      s.reactive.push_back(smp.react[e]);
      s.level.push_back(smp.level);
    }
    for (const auto& p : sampler.panels) s.panels.emplace_back(p.a, p.b);
    s.quenching_divergent = divergent[e];
    s.unresolved_peak = unresolved;
    s.mesh_limited = eval.mesh() && mesh_limited(emitters[e], *eval.mesh());
    out.push_back(std::move(s));
  }
  return out;
}

LdosSpectrum spectrum(const Problem& problem, const EmitterSpec& emitter, const SpectrumOptions& opts) {
  return std::move(spectrum(problem, std::vector<EmitterSpec>{emitter}, opts).front());
}

Bands integrate_bands(const LdosSpectrum& spec) {
  Bands b;
  const double edge = spec.n_max * spec.sp.k0();
  for (const auto& [lo, hi] : spec.panels) {
    const auto x = quad::gk15_nodes(lo, hi);
    const auto w = quad::gk15_kronrod_weights(lo, hi);
    double ref = 0.0, del = 0.0;
    for (int j = 0; j < 15; ++j) {
      const std::size_t i = spec.index_of(x[j]);
      ref += w[j] * spec.ref_rate[i];
      del += w[j] * spec.delta_rate[i];
    }
    if (0.5 * (lo + hi) < edge) {
      b.rad_ref += ref;
      b.rad_delta += del;
    } else {
      b.ev_ref += ref;
      b.ev_delta += del;
    }
  }
  return b;
}

double gamma_plasmon(const modes::ModeInfo& mode, double rho_peak, const SpectralPoint& sp, double n1) {
  if (!mode.L_spp) throw UsageError("plasmon rate needs a resolved linewidth");
  if (rho_peak == 0.0) return 0.0;
  return n1 * (3.0 * kPi * sp.lambda() / (4.0 * n1 * n1 * n1 * mode.k_spp)) * rho_peak / *mode.L_spp;
}

double lorentzian_rate(const modes::ModeInfo& mode, const SpectralPoint& sp, double n1, double lo, double hi) {
  if (mode.hwhm <= 0.0) return 0.0;
  const double c = 3.0 * kPi * mode.amplitude / (sp.k0() * mode.k_spp * n1 * n1);
  const auto at = [&](double k) {
    if (std::isinf(k)) return std::copysign(kPi / 2, k);
    return std::atan((k - mode.k_spp) / mode.hwhm);
  };
  return c * mode.hwhm * (at(hi) - at(lo));
}

namespace {

bool leaky(const modes::ModeInfo* mode) { return mode && mode->kind == modes::ModeKind::leaky; }

double plasmon_of(const LdosSpectrum& spec, const modes::ModeInfo* mode) {
  if (!mode || !mode->L_spp) return 0.0;
  return gamma_plasmon(*mode, mode->amplitude, spec.sp, spec.n1);
}

void require_split(const modes::ModeInfo& mode) {
  if (!mode.Gamma_rad_spp || !mode.Gamma_nrad_spp || !mode.Gamma_spp)
    throw UsageError("leaky mode needs its radiative/non-radiative split");
}

}  // namespace

Radiative gamma_radiative(const LdosSpectrum& spec, const modes::ModeInfo* mode) {
  const Bands b = integrate_bands(spec);
  Radiative r;
  if (!leaky(mode)) {
    r.gamma_rad = r.gamma_scatt = b.rad();
    return r;
  }
  require_split(*mode);
  const double pl = plasmon_of(spec, mode);
  const double edge = spec.n_max * spec.sp.k0();
  const double l_rad = pl - lorentzian_rate(*mode, spec.sp, spec.n1, edge, INFINITY);
  r.gamma_scatt = b.rad() - l_rad;
  r.gamma_pl_leak = pl * *mode->Gamma_rad_spp / (*mode->Gamma_rad_spp + *mode->Gamma_nrad_spp);
  r.gamma_rad = r.gamma_scatt + r.gamma_pl_leak;
  return r;
}

NonRadiative gamma_nonradiative(const LdosSpectrum& spec, const modes::ModeInfo* mode) {
  const Bands b = integrate_bands(spec);
  NonRadiative r;
  const double pl = plasmon_of(spec, mode);
  if (!leaky(mode)) {
    r.gamma_NR = b.ev();
    r.gamma_pl_NR = pl;
    r.gamma_eh = r.gamma_NR - pl;
    return r;
  }
  require_split(*mode);
  const double edge = spec.n_max * spec.sp.k0();
  r.gamma_pl_NR = pl * *mode->Gamma_nrad_spp / (*mode->Gamma_rad_spp + *mode->Gamma_nrad_spp);
  r.gamma_eh = b.ev() - lorentzian_rate(*mode, spec.sp, spec.n1, edge, INFINITY);
  r.gamma_NR = r.gamma_pl_NR + r.gamma_eh;
  return r;
}

RateBreakdown breakdown(const LdosSpectrum& spec, const modes::ModeInfo* mode) {
  RateBreakdown r;
  r.d = spec.emitter.distance();
  const Radiative rad = gamma_radiative(spec, mode);
  const NonRadiative nr = gamma_nonradiative(spec, mode);
  r.gamma_pl = plasmon_of(spec, mode);
  r.gamma_rad = rad.gamma_rad;
  r.gamma_scatt = rad.gamma_scatt;
  r.gamma_pl_leak = rad.gamma_pl_leak;
  r.gamma_NR = nr.gamma_NR;
  r.gamma_pl_NR = nr.gamma_pl_NR;
  r.gamma_eh = nr.gamma_eh;
  const double total = r.gamma_rad + r.gamma_NR;
  r.beta = total > 0.0 ? r.gamma_pl / total : 0.0;
  r.mesh_limited = spec.mesh_limited;
  r.quenching_divergent = spec.quenching_divergent;
  return r;
}

std::vector<RateBreakdown> rate_sweep(const Problem& problem, const std::vector<EmitterSpec>& emitters,
                                      const SpectrumOptions& opts) {
  for (const auto& e : emitters) {
    if (problem.guide && e.distance() < problem.h) throw UsageError("emitter distance must be at least the mesh pitch");
  }
  const auto spectra = spectrum(problem, emitters, opts);
  std::vector<std::optional<modes::ModeInfo>> fitted(spectra.size());
  for (std::size_t e = 0; e < spectra.size(); ++e) {
    try {
      fitted[e] = modes::fit_lorentzian(spectra[e]);
    } catch (const NoModeError&) {
      fitted[e].reset();
    }
  }
  std::optional<double> gamma_rad;
  for (std::size_t e = 0; e < spectra.size(); ++e) {
    auto& m = fitted[e];
    if (!m || m->kind != modes::ModeKind::leaky) continue;
    if (!gamma_rad) gamma_rad = *modes::leaky_mode_split(problem, emitters[e], *m, opts).Gamma_rad_spp;
    m->Gamma_rad_spp = *gamma_rad;
    m->Gamma_nrad_spp = std::max(0.0, *m->Gamma_spp - *gamma_rad);
  }
  std::vector<RateBreakdown> rows;
  rows.reserve(spectra.size());
  for (std::size_t e = 0; e < spectra.size(); ++e) rows.push_back(breakdown(spectra[e], fitted[e] ? &*fitted[e] : nullptr));
  return rows;
}

}  // namespace wgldos::ldos
