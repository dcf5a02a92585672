#include "wgldos/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/NonLinearOptimization>

#include "wgldos/errors.hpp"

namespace wgldos::modes {

namespace {

// Residuals of the normalized model A w^2 / ((x - c)^2 + w^2) + b0 + b1 (x - c) - y.
struct LorentzResidual {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  Eigen::VectorXd x, y;

  int inputs() const { return 5; }
  int values() const { return static_cast<int>(x.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double t = x[i] - p[1];
      f[i] = p[0] * p[2] * p[2] / (t * t + p[2] * p[2]) + p[3] + p[4] * t - y[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double t = x[i] - p[1];
      const double w2 = p[2] * p[2];
      const double d = t * t + w2;
      j(i, 0) = w2 / d;
      j(i, 1) = 2.0 * p[0] * w2 * t / (d * d) - p[4];
      j(i, 2) = 2.0 * p[0] * p[2] * t * t / (d * d);
      j(i, 3) = 1.0;
      j(i, 4) = t;
    }
    return 0;
  }
};

struct Candidate {
  std::size_t index;
  double k;
  double hw;
  double height;
  double sharpness;
};

// Local maxima of y with a half-maximum crossing on both sides.
std::vector<Candidate> local_peaks(const std::vector<double>& k, const std::vector<double>& y) {
  std::vector<Candidate> out;
  for (std::size_t i = 1; i + 1 < k.size(); ++i) {
    if (!(y[i] > 0.0 && y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    const double half = 0.5 * y[i];
    std::size_t l = i, r = i;
    while (l > 0 && y[l] > half && y[l - 1] <= y[l]) --l;
    while (r + 1 < k.size() && y[r] > half && y[r + 1] <= y[r]) ++r;
    if (y[l] > half || y[r] > half) continue;
    const double kl = k[l] + (half - y[l]) * (k[l + 1] - k[l]) / (y[l + 1] - y[l]);
    const double kr = k[r - 1] + (half - y[r - 1]) * (k[r] - k[r - 1]) / (y[r] - y[r - 1]);
    if (!(kr > kl)) continue;
    out.push_back({i, k[i], 0.5 * (kr - kl), y[i], y[i] / (kr - kl)});
  }
  return out;
}

}  // namespace

std::string to_string(ModeKind kind) { return kind == ModeKind::bound ? "bound" : "leaky"; }

double ModeInfo::lorentzian(double k) const {
  if (hwhm <= 0.0) return 0.0;
  const double t = k - k_spp;
  return amplitude * hwhm * hwhm / (t * t + hwhm * hwhm);
}

LorentzFit fit_window(const std::vector<double>& k, const std::vector<double>& y, double lo, double hi,
                      const LorentzFit& start) {
  if (k.size() != y.size()) throw UsageError("fit needs matching k and y arrays");
  if (!(start.hwhm > 0.0)) throw UsageError("fit start needs a positive half width");
  std::vector<double> xs, ys;
  double scale = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < lo || k[i] > hi) continue;
    xs.push_back((k[i] - start.center) / start.hwhm);
    ys.push_back(y[i]);
    scale = std::max(scale, std::abs(y[i]));
  }
  if (xs.size() < 6) throw NoModeError("fewer than 6 samples in the fit window");
  if (scale == 0.0) throw NoModeError("spectrum vanishes in the fit window");

  LorentzResidual fn;
  fn.x = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  fn.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size())) / scale;
  Eigen::VectorXd p(5);
  p << start.amplitude / scale, 0.0, 1.0, start.b0 / scale, start.b1 * start.hwhm / scale;

  Eigen::LevenbergMarquardt<LorentzResidual> lm(fn);
  lm.parameters.xtol = 1e-15;
  lm.parameters.ftol = 1e-15;
  lm.parameters.maxfev = 4000;
  lm.minimize(p);

  Eigen::VectorXd f(fn.values());
  fn(p, f);
  LorentzFit out;
  out.amplitude = p[0] * scale;
  out.center = start.center + p[1] * start.hwhm;
  out.hwhm = std::abs(p[2]) * start.hwhm;
  out.b0 = p[3] * scale;
  out.b1 = p[4] * scale / start.hwhm;
  out.iterations = static_cast<int>(lm.iter);
  const double rms = std::sqrt(f.squaredNorm() / static_cast<double>(f.size())) * scale;
  out.residual_rms = out.amplitude != 0.0 ? rms / std::abs(out.amplitude) : std::numeric_limits<double>::infinity();
  if (!std::isfinite(out.center) || !std::isfinite(out.hwhm) || !std::isfinite(out.amplitude))
    throw NumericalError("Lorentzian fit diverged");
  return out;
}

ModeInfo fit_lorentzian(const ldos::LdosSpectrum& spec) {
  const double k0 = spec.sp.k0();
  std::vector<double> branch{spec.n1 * k0};
  if (spec.n_max > spec.n1) branch.push_back(spec.n_max * k0);
  const double guard = 1e-3 * k0;

  auto peaks = local_peaks(spec.k_z, spec.delta_rho);
  peaks.erase(std::remove_if(peaks.begin(), peaks.end(),
                             [&](const Candidate& c) {
                               for (double b : branch)
                                 if (std::abs(c.k - b) < 2.0 * c.hw) return true;
                               return false;
                             }),
              peaks.end());
  if (peaks.empty()) throw NoModeError("no resolved peak in the spectrum");
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Candidate& a, const Candidate& b) { return a.sharpness > b.sharpness; });
  const Candidate& top = peaks.front();

  LorentzFit fit{top.height, top.k, top.hw, 0.0, 0.0, 0.0, 0};
  double lo = 0, hi = 0;
  for (int iter = 0; iter < 8; ++iter) {
    lo = fit.center - 10.0 * fit.hwhm;
    hi = fit.center + 10.0 * fit.hwhm;
    for (double b : branch) {
      if (b < fit.center) lo = std::max(lo, b + guard);
      if (b > fit.center) hi = std::min(hi, b - guard);
    }
    const LorentzFit next = fit_window(spec.k_z, spec.delta_rho, lo, hi, fit);
    const bool settled = std::abs(next.center - fit.center) < 1e-6 * next.hwhm &&
                         std::abs(next.hwhm - fit.hwhm) < 1e-6 * next.hwhm;
    fit = next;
    if (settled) break;
  }
  if (!(fit.amplitude > 0.0) || fit.amplitude <= 3.0 * std::abs(fit.b0))
    throw NoModeError("no peak rises above 3x the baseline");

  ModeInfo m;
  m.k_spp = fit.center;
  m.n_eff = fit.center / k0;
  m.hwhm = fit.hwhm;
  m.L_spp = 1.0 / (2.0 * fit.hwhm);
  m.Gamma_spp = 2.0 * fit.hwhm;
  m.amplitude = fit.amplitude;
  m.baseline0 = fit.b0;
  m.baseline1 = fit.b1;
  m.kind = m.n_eff < spec.n_max ? ModeKind::leaky : ModeKind::bound;
  m.residual_rms = fit.residual_rms;
  m.window = {lo, hi};
  for (std::size_t i = 1; i < peaks.size(); ++i) m.other_peaks.push_back(peaks[i].k);
  if (!m.other_peaks.empty()) m.warnings.push_back("additional peaks present; strongest one fitted");
  return m;
}

ModeInfo lossless_pole(const ldos::LdosSpectrum& spec) {
  const double edge = spec.n_max * spec.sp.k0();
  const auto& r = spec.reactive;
  std::size_t best = spec.size();
  double score = 0.0;
  for (std::size_t i = 0; i + 1 < spec.size(); ++i) {
    if (spec.k_z[i] <= edge) continue;
    if ((r[i] > 0.0) == (r[i + 1] > 0.0)) continue;
    const double s = std::min(std::abs(r[i]), std::abs(r[i + 1]));
    if (s > score) {
      score = s;
      best = i;
    }
  }
  if (best == spec.size()) throw NoModeError("no pole crossing in the reactive spectrum");
  // 1/r is locally linear through a simple pole.
  const double a = 1.0 / r[best], b = 1.0 / r[best + 1];
  const double k = spec.k_z[best] + a * (spec.k_z[best + 1] - spec.k_z[best]) / (a - b);
  ModeInfo m;
  m.k_spp = k;
  m.n_eff = k / spec.sp.k0();
  m.kind = ModeKind::bound;
  m.below_linewidth_resolution = true;
  m.window = {spec.k_z[best], spec.k_z[best + 1]};
  return m;
}

ModeInfo leaky_mode_split(const ldos::Problem& problem, const EmitterSpec& emitter, const ModeInfo& mode,
                          const ldos::SpectrumOptions& opts) {
  if (mode.kind != ModeKind::leaky) throw UsageError("leakage split applies to leaky modes only");
  if (!mode.Gamma_spp) throw UsageError("leakage split needs a fitted linewidth");
  const double k0 = problem.sp.k0();
  const double n1 = std::sqrt(problem.background.superstrate().real());
  const double n_max = problem.background.n_max();
  const double margin = 30.0 * mode.hwhm;
  ldos::SpectrumOptions lopts = opts;
  lopts.band = std::make_pair(std::max(n1 * 1.001, (mode.k_spp - margin) / k0),
                              std::min(n_max * 0.999, (mode.k_spp + margin) / k0));
  lopts.panel_width = std::min(opts.panel_width, 2.0 * margin / (4.0 * k0));

  ModeInfo lossless;
  try {
    lossless = fit_lorentzian(ldos::spectrum(problem.lossless(), emitter, lopts));
  } catch (const NoModeError& e) {
    throw InconsistencyError(std::string("lossless re-run found no mode: ") + e.what());
  }
  ModeInfo out = mode;
  out.Gamma_rad_spp = *lossless.Gamma_spp;
  const double nrad = *mode.Gamma_spp - *lossless.Gamma_spp;
  if (nrad < 0.0) out.warnings.push_back("negative non-radiative linewidth clamped to 0");
  out.Gamma_nrad_spp = std::max(0.0, nrad);
  return out;
}

}  // namespace wgldos::modes
