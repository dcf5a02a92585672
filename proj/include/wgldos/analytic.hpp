#pragma once

#include "wgldos/physical_model.hpp"

namespace wgldos::analytic {

/// Root of the m = 0 TM dispersion relation of a circular wire (lossless),
///   eps2 I1(k2 R) / (k2 I0(k2 R)) + eps1 K1(k1 R) / (k1 K0(k1 R)) = 0,  k_i^2 = k_z^2 - eps_i k0^2,
/// by bisection on (n1 k0 (1 + 1e-6), 20 n1 k0). Throws DomainError unless eps1 > 0 and
/// eps2 < -eps1, NoModeError when the bracket holds no sign change.
double circular_dispersion_root(double radius, double eps1, double eps2, const SpectralPoint& sp);

/// Axially symmetric TM mode of a circular wire, E_z = A I0(k2 r) inside, B K0(k1 r) outside,
/// with time dependence exp(i k_z z - i w t). H is scaled by the vacuum impedance.
class CircularModeField {
 public:
  CircularModeField(double k_z, double radius, double eps1, double eps2, const SpectralPoint& sp,
                    cplx amplitude = 1.0);

  double k_z() const { return k_z_; }
  double radius() const { return radius_; }
  double k0() const { return k0_; }
  double kappa1() const { return kappa1_; }
  double kappa2() const { return kappa2_; }

  cplx e_z(double r) const;
  cplx e_r(double r) const;
  cplx h_phi(double r) const;

  /// Longitudinal power flux integral of Re(E x H*).z over the plane, r up to
  /// R + 30 / kappa1 plus the asymptotic exterior tail.
  double flux() const;

 private:
  double k_z_, radius_, eps1_, eps2_, k0_;
  double kappa1_, kappa2_;
  cplx a_, b_;
};

/// gamma_pl / gamma0 = 3 pi |E_u(d)|^2 / (k0^2 flux) for an emitter at r = R + d;
/// u is given in the local (radial, azimuthal, z) frame.
double gamma_pl_lossless(const CircularModeField& field, double d, const Vec3& u);

}  // namespace wgldos::analytic
