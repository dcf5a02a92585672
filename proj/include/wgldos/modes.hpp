#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wgldos/ldos.hpp"

namespace wgldos::modes {

enum class ModeKind { bound, leaky };

std::string to_string(ModeKind kind);

/// Guided-mode parameters read off a k_z spectrum.
struct ModeInfo {
  double k_spp = 0;                      ///< rad/um
  double n_eff = 0;                      ///< k_spp / k0
  double hwhm = 0;                       ///< rad/um; 0 for an unresolved (lossless bound) pole
  std::optional<double> L_spp;           ///< 1 / (2 hwhm), um
  std::optional<double> Gamma_spp;       ///< 1 / L_spp, 1/um
  std::optional<double> Gamma_rad_spp;   ///< leaky case, 1/um
  std::optional<double> Gamma_nrad_spp;  ///< leaky case, 1/um
  double amplitude = 0;                  ///< Lorentzian peak value of delta_rho
  double baseline0 = 0;                  ///< affine baseline at k_spp
  double baseline1 = 0;                  ///< baseline slope
  ModeKind kind = ModeKind::bound;
  bool below_linewidth_resolution = false;
  double residual_rms = 0;               ///< relative to amplitude
  std::pair<double, double> window{0, 0};  ///< fit window, rad/um
  std::vector<double> other_peaks;       ///< k_z of weaker local maxima, rad/um
  std::vector<std::string> warnings;

  /// Fitted Lorentzian without baseline.
  double lorentzian(double k) const;
};

/// Lorentzian-plus-affine fit to samples (k, y) over a fixed window.
struct LorentzFit {
  double amplitude = 0;
  double center = 0;
  double hwhm = 0;
  double b0 = 0;
  double b1 = 0;
  double residual_rms = 0;
  int iterations = 0;
};

/// Least-squares fit of A hw^2 / ((k - kc)^2 + hw^2) + b0 + b1 (k - kc).
/// Samples outside [lo, hi] are ignored.
LorentzFit fit_window(const std::vector<double>& k, const std::vector<double>& y, double lo, double hi,
                      const LorentzFit& start);

/// Strongest Lorentzian peak of delta_rho: moment start, then refits over +-5 FWHM.
/// Throws NoModeError when no peak rises above 3x the baseline.
ModeInfo fit_lorentzian(const ldos::LdosSpectrum& spec);

/// Lossless bound pole, located by the sign change of the reactive part; linewidth unresolved.
/// Throws NoModeError when the spectrum shows no such crossing above n_max k0.
ModeInfo lossless_pole(const ldos::LdosSpectrum& spec);

/// Leakage split: lossless re-run in a band around the mode, Gamma_rad from its fit,
/// Gamma_nrad = Gamma - Gamma_rad (clamped at 0). Throws InconsistencyError when the
/// lossless run has no mode.
ModeInfo leaky_mode_split(const ldos::Problem& problem, const EmitterSpec& emitter, const ModeInfo& mode,
                          const ldos::SpectrumOptions& opts = {});

}  // namespace wgldos::modes
