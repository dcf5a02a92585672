#include "wgldos/analytic.hpp"

#include <cmath>
#include <limits>

#include "wgldos/errors.hpp"
#include "wgldos/quadrature.hpp"
#include "wgldos/specfun.hpp"

namespace wgldos::analytic {

namespace {

constexpr double kPi = 3.14159265358979323846;

double ratio_i(double x) { return (specfun::besseli_scaled(1, x) / specfun::besseli_scaled(0, x)).real(); }
double ratio_k(double x) { return (specfun::besselk_scaled(1, x) / specfun::besselk_scaled(0, x)).real(); }

}  // namespace

double circular_dispersion_root(double radius, double eps1, double eps2, const SpectralPoint& sp) {
  if (!(eps1 > 0.0)) throw DomainError("dispersion root needs eps1 > 0");
  if (!(eps2 < -eps1)) throw DomainError("m = 0 wire mode needs eps2 < -eps1");
  if (!(radius > 0.0)) throw DomainError("wire radius must be positive");
  const double k0 = sp.k0();
  const auto f = [&](double kz) {
    const double k1 = std::sqrt(kz * kz - eps1 * k0 * k0);
    const double k2 = std::sqrt(kz * kz - eps2 * k0 * k0);
    return eps2 * ratio_i(k2 * radius) / k2 + eps1 * ratio_k(k1 * radius) / k1;
  };
  const double n1k0 = std::sqrt(eps1) * k0;
  double lo = n1k0 * (1.0 + 1e-6), hi = 20.0 * n1k0;
  double flo = f(lo);
  const double fhi = f(hi);
  if ((flo > 0.0) == (fhi > 0.0)) throw NoModeError("no sign change of the m = 0 dispersion function");
  for (int i = 0; i < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

CircularModeField::CircularModeField(double k_z, double radius, double eps1, double eps2, const SpectralPoint& sp,
                                     cplx amplitude)
    : k_z_(k_z), radius_(radius), eps1_(eps1), eps2_(eps2), k0_(sp.k0()), a_(amplitude) {
  if (!(k_z * k_z > eps1 * k0_ * k0_)) throw DomainError("mode root must lie beyond the light line");
  kappa1_ = std::sqrt(k_z * k_z - eps1 * k0_ * k0_);
  kappa2_ = std::sqrt(k_z * k_z - eps2 * k0_ * k0_);
  b_ = a_ * specfun::besseli(0, kappa2_ * radius) / specfun::besselk(0, kappa1_ * radius);
}

cplx CircularModeField::e_z(double r) const {
  if (r < radius_) return a_ * specfun::besseli(0, kappa2_ * r);
  return b_ * specfun::besselk(0, kappa1_ * r);
}

cplx CircularModeField::e_r(double r) const {
  const cplx i(0.0, 1.0);
  if (r < radius_) return -i * (k_z_ / kappa2_) * a_ * specfun::besseli(1, kappa2_ * r);
  return i * (k_z_ / kappa1_) * b_ * specfun::besselk(1, kappa1_ * r);
}

cplx CircularModeField::h_phi(double r) const {
  const double eps = r < radius_ ? eps2_ : eps1_;
  return (k0_ * eps / k_z_) * e_r(r);
}

double CircularModeField::flux() const {
  const auto density = [&](double r) { return (e_r(r) * std::conj(h_phi(r))).real() * r; };
  const double r_out = radius_ + 30.0 / kappa1_;
  const double inner = quad::integrate(density, 0.0, radius_, 0.0, 1e-10).value;
  const double outer = quad::integrate(density, radius_, r_out, 0.0, 1e-10).value;
  // K1(x)^2 x ~ (pi / 2 k1) exp(-2 x) beyond r_out
  const double amp = std::norm(b_) * (k_z_ / kappa1_) * (k_z_ / kappa1_) * (k0_ * eps1_ / k_z_);
  const double tail = amp * (kPi / (2.0 * kappa1_)) * std::exp(-2.0 * kappa1_ * r_out) / (2.0 * kappa1_);
  return 2.0 * kPi * (inner + outer + tail);
}

double gamma_pl_lossless(const CircularModeField& field, double d, const Vec3& u) {
  if (!(d > 0.0)) throw DomainError("emitter must lie outside the wire");
  const double r = field.radius() + d;
  const cplx eu = u.x() * field.e_r(r) + u.z() * field.e_z(r);
  return 3.0 * kPi * std::norm(eu) / (field.k0() * field.k0() * field.flux());
}

}  // namespace wgldos::analytic
