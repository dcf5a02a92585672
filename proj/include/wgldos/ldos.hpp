#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "wgldos/green.hpp"
#include "wgldos/physical_model.hpp"

namespace wgldos::modes {
struct ModeInfo;
}

namespace wgldos::ldos {

using green::Mat3;

/// Drops the (x,z), (y,z) couplings, which are odd in k_z and cancel in the +-k_z sum.
Mat3 even_part(const Mat3& g);

/// Partial 2D-LDOS variation -(2 k_z / pi) Im[eps u.dG.u].
double delta_rho2d(const Mat3& dg, double k_z, cplx eps_at_emitter, const Vec3& u);

/// Decay-rate density in units of gamma0 per rad/um, both signs of k_z folded:
/// -(6 / k0) Im[u.G.u]. Its integral over k_z >= 0 is gamma / gamma0.
double rate_density(const Mat3& g, double k0, const Vec3& u);

/// Reference partial 2D-LDOS at the emitter from Im G_ref at coincidence.
double reference_rho(const EmitterSpec& emitter, const Background& bg, double k_z, const SpectralPoint& sp);

/// Waveguide problem: background, optional guide cross-section and mesh pitch.
struct Problem {
  Background background;
  std::optional<CrossSection> guide;
  SpectralPoint sp;
  double h = 0.0;
  green::SommerfeldOptions sommerfeld{};

  /// Same problem with the guide material made lossless.
  Problem lossless() const;
  /// Same problem with a different guide material.
  Problem with_guide_material(const Material& m) const;
};

struct SpectrumOptions {
  double k_max = 50.0;          ///< evanescent ceiling, units of k0
  double tol = 1e-3;            ///< panel error target relative to the total rate
  double octave_tol = 5e-3;     ///< tail extension stops when an octave adds less than this
  double guard = 1e-3;          ///< branch-point guard band width, units of k0
  double panel_width = 0.25;    ///< initial panel width below 3 n_max k0, units of k0
  int min_peak_samples = 15;    ///< samples required within the peak FWHM
  int max_level = 14;           ///< maximum number of panel bisections
  bool strict = false;          ///< unresolved peak or divergent tail throws
  std::optional<std::pair<double, double>> band;  ///< sample only [lo, hi] (units of k0)
  int workers = 1;
};

/// One emitter's k_z-resolved LDOS on k_z > 0, sampled on Gauss-Kronrod panels.
struct LdosSpectrum {
  EmitterSpec emitter;
  SpectralPoint sp;
  double n1 = 1.0;
  double n_max = 1.0;
  std::vector<double> k_z;         ///< strictly increasing, rad/um
  std::vector<double> delta_rho;   ///< guide contribution to the partial 2D-LDOS
  std::vector<double> rho_ref;     ///< reference partial 2D-LDOS
  std::vector<double> delta_rate;  ///< guide contribution to the rate density
  std::vector<double> ref_rate;    ///< reference rate density
  std::vector<double> reactive;    ///< -(2 k_z / pi) Re[eps u.dG.u]
  std::vector<int> level;          ///< bisection depth of the panel that produced the sample
  std::vector<std::pair<double, double>> panels;
  bool quenching_divergent = false;
  bool unresolved_peak = false;
  bool mesh_limited = false;

  std::size_t size() const { return k_z.size(); }
  /// Index of an exact sample abscissa; throws UsageError when absent.
  std::size_t index_of(double k) const;
};

/// Adaptive spectra for several emitters sharing one factorization per k_z.
std::vector<LdosSpectrum> spectrum(const Problem& problem, const std::vector<EmitterSpec>& emitters,
                                   const SpectrumOptions& opts = {});
LdosSpectrum spectrum(const Problem& problem, const EmitterSpec& emitter, const SpectrumOptions& opts = {});

/// Band integrals of the rate density, units of gamma0.
struct Bands {
  double rad_ref = 0;   ///< |k_z| < n_max k0, reference
  double rad_delta = 0; ///< |k_z| < n_max k0, guide contribution
  double ev_ref = 0;    ///< |k_z| > n_max k0, reference
  double ev_delta = 0;  ///< |k_z| > n_max k0, guide contribution
  double rad() const { return rad_ref + rad_delta; }
  double ev() const { return ev_ref + ev_delta; }
  double total() const { return rad() + ev(); }
};
Bands integrate_bands(const LdosSpectrum& spec);

/// gamma_pl / gamma0 = n1 (3 pi lambda / (4 n1^3 k_SPP)) rho_peak / L_spp.
double gamma_plasmon(const modes::ModeInfo& mode, double rho_peak, const SpectralPoint& sp, double n1);

/// Rate-density integral of the fitted Lorentzian over [lo, hi] (rad/um), units of gamma0.
double lorentzian_rate(const modes::ModeInfo& mode, const SpectralPoint& sp, double n1, double lo, double hi);

struct Radiative {
  double gamma_rad = 0;
  double gamma_scatt = 0;
  double gamma_pl_leak = 0;
};
/// Throws UsageError for a leaky mode without its radiative/non-radiative split.
Radiative gamma_radiative(const LdosSpectrum& spec, const modes::ModeInfo* mode);

struct NonRadiative {
  double gamma_NR = 0;
  double gamma_pl_NR = 0;
  double gamma_eh = 0;
};
NonRadiative gamma_nonradiative(const LdosSpectrum& spec, const modes::ModeInfo* mode);

struct RateBreakdown {
  double d = 0;
  double gamma_pl = 0;
  double gamma_rad = 0;
  double gamma_NR = 0;
  double gamma_scatt = 0;
  double gamma_pl_leak = 0;
  double gamma_pl_NR = 0;
  double gamma_eh = 0;
  double beta = 0;
  bool mesh_limited = false;
  bool quenching_divergent = false;
};
RateBreakdown breakdown(const LdosSpectrum& spec, const modes::ModeInfo* mode);

/// Full pipeline per emitter: shared spectra, per-emitter fit, leaky split when needed.
std::vector<RateBreakdown> rate_sweep(const Problem& problem, const std::vector<EmitterSpec>& emitters,
                                      const SpectrumOptions& opts = {});

}  // namespace wgldos::ldos
