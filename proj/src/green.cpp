#include "wgldos/green.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wgldos/errors.hpp"
#include "wgldos/quadrature.hpp"
#include "wgldos/specfun.hpp"

namespace wgldos::green {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

// principal root flipped onto Im >= 0
cplx proper_sqrt(cplx v) {
  cplx s = std::sqrt(v);
  if (s.imag() < 0 || (s.imag() == 0 && s.real() < 0)) s = -s;
  return s;
}

// Standard-sign homogeneous dyad, (curl curl - k^2) G = delta I.
Mat3 dyad_std(const Vec2& sep, double k_z, cplx eps_b, double k0) {
  const double rho = sep.norm();
  if (!(rho > 0)) throw SingularityError("homogeneous dyad evaluated at coincidence; use self_term");
  const cplx kappa = TransverseWavenumber(eps_b, k0, k_z).kappa();
  const cplx x = kappa * rho;
  const cplx e = std::exp(-x);
  const cplx k0v = specfun::besselk_scaled(0, x) * e;
  const cplx k1v = specfun::besselk_scaled(1, x) * e;
  const double u[2] = {sep.x() / rho, sep.y() / rho};

  Mat3 d;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double uu = u[i] * u[j];
      d(i, j) = kappa * kappa * k0v * uu + (kappa * k1v / rho) * (2.0 * uu - (i == j ? 1.0 : 0.0));
    }
    d(i, 2) = d(2, i) = I * k_z * kappa * k1v * u[i];
  }
  d(2, 2) = -k_z * k_z * k0v;
  const cplx k2 = eps_b * k0 * k0;
  return (k0v * Mat3::Identity() + d / k2) / (2.0 * kPi);
}

}  // namespace

TransverseWavenumber::TransverseWavenumber(cplx eps_b, double k0, double k_z)
    : k_t_(proper_sqrt(eps_b * k0 * k0 - k_z * k_z)) {}

TransverseWavenumber::TransverseWavenumber(cplx k_t) : k_t_(k_t) {
  if (k_t.imag() < 0 || (k_t.imag() == 0 && k_t.real() < 0))
    throw DomainError("transverse wavenumber violates the branch rule");
}

cplx scalar_g2(double rho, const TransverseWavenumber& kt) {
  if (!(rho > 0)) throw SingularityError("scalar kernel evaluated at rho = 0; use self_term");
  const cplx x = kt.kappa() * rho;
  return -specfun::besselk_scaled(0, x) * std::exp(-x) / (2.0 * kPi);
}

Mat3 dyad_hom_offset(const Vec2& sep, double k_z, cplx eps_b, double k0) { return -dyad_std(sep, k_z, eps_b, k0); }

GreenSample dyad_hom(const Vec2& r, const Vec2& r_source, double k_z, cplx eps_b, const SpectralPoint& sp) {
  return {dyad_hom_offset(r - r_source, k_z, eps_b, sp.k0()), GreenKind::homogeneous, r, r_source, k_z};
}

Mat3 hom_coincidence_imag(double k_z, cplx eps_b, double k0) {
  Mat3 m = Mat3::Zero();
  const double k2 = eps_b.real() * k0 * k0;
  if (k_z * k_z >= k2) return m;
  const double kt2 = k2 - k_z * k_z;
  m(0, 0) = m(1, 1) = -0.25 * (1.0 - kt2 / (2.0 * k2));
  m(2, 2) = -0.25 * (1.0 - k_z * k_z / k2);
  return m;
}

cplx disk_integral_g(double radius, const TransverseWavenumber& kt) {
  const cplx kappa = kt.kappa();
  if (kappa == 0.0) throw DomainError("disk integral undefined on the branch point k_t = 0");
  // -int K0(kappa r) r dr over [0, R] = (R/kappa) (K1(kappa R) - 1/(kappa R))
  return (radius / kappa) * specfun::besselk1_regular(kappa * radius);
}

SelfTerm self_term(double h, double k_z, cplx eps_b, double k0) {
  const double radius = h / std::sqrt(kPi);
  const TransverseWavenumber kt(eps_b, k0, k_z);
  const cplx ig = disk_integral_g(radius, kt);  // kernel sign; standard sign is -ig
  const cplx k2 = eps_b * k0 * k0;
  const cplx kt2 = kt.k_t() * kt.k_t();
  SelfTerm s;
  s.scalar = ig;
  s.static_part = Mat3::Zero();
  s.static_part(0, 0) = s.static_part(1, 1) = 0.5 / k2;
  // transverse grad-grad: int d_x d_x g = (1/2) int lap_t g; longitudinal: -k_z^2 int g
  s.dyad = ig * Mat3::Identity();
  s.dyad(0, 0) += (1.0 - kt2 * ig) / (2.0 * k2);
  s.dyad(1, 1) += (1.0 - kt2 * ig) / (2.0 * k2);
  s.dyad(2, 2) += -k_z * k_z * ig / k2;
  return s;
}

std::vector<Mat3> reflected_batch(const std::vector<Vec2>& xy, double k_z, const Background& bg, const SpectralPoint& sp,
                                  const SommerfeldOptions& opts) {
  if (!bg.is_two_layer()) throw UsageError("reflected dyad requires a two-layer background");
  const std::size_t n = xy.size();
  if (n == 0) return {};
  double y_min = std::numeric_limits<double>::infinity();
  for (const auto& p : xy) {
    if (!(p.y() > 0)) throw DomainError("reflected dyad requires both points above the interface");
    y_min = std::min(y_min, p.y());
  }

  const double k0 = sp.k0();
  const cplx eps1 = bg.two_layer().eps1;
  const cplx eps3 = bg.two_layer().eps3;
  const cplx k2 = eps1 * k0 * k0;
  const double depth = opts.detour_depth * k0;
  const double kd = opts.detour_extent * bg.n_max() * k0;
  const double ceiling = std::max(opts.ceiling * k0, 60.0 / y_min);

  using Vec = Eigen::VectorXcd;
  const Vec zero = Vec::Zero(static_cast<Eigen::Index>(9 * n));

  // Integrand at complex k_x, with path Jacobian dkx applied.
  auto integrand = [&](cplx kx, cplx dkx) {
    const cplx kx2 = kx * kx;
    const cplx a = proper_sqrt(k2 - kx2 - k_z * k_z);
    const cplx b = proper_sqrt(eps3 * k0 * k0 - kx2 - k_z * k_z);
    const cplx rs = (a - b) / (a + b);
    const cplx dp = eps3 * a + eps1 * b;
    const cplx rp = (eps3 * a - eps1 * b) / dp;
    const cplx f = (2.0 * a * a * (eps1 - eps3) + (a - b) * dp) / ((a + b) * dp * k2);
    const cplx q2 = kx2 + k_z * k_z;
    const cplx rpk = rp / k2;
    // T(+-kx) = E +- O
    Mat3 e = Mat3::Zero(), o = Mat3::Zero();
    e(0, 0) = rs - f * kx2;
    e(2, 2) = rs - f * k_z * k_z;
    e(1, 1) = rpk * q2;
    e(1, 2) = -rpk * a * k_z;
    e(2, 1) = rpk * a * k_z;
    o(0, 2) = o(2, 0) = f * kx * k_z;
    o(0, 1) = -rpk * a * kx;
    o(1, 0) = rpk * a * kx;
    // kernel sign: -(i / 4 pi)
    const cplx pref = -(I / (4.0 * kPi)) * dkx / a;
    Vec out(9 * n);
    for (std::size_t m = 0; m < n; ++m) {
      const cplx arg = kx * xy[m].x();
      const cplx ph = pref * std::exp(I * a * xy[m].y());
      const cplx c = 2.0 * std::cos(arg) * ph;
      const cplx s = 2.0 * I * std::sin(arg) * ph;
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) out(9 * m + 3 * j + i) = c * e(i, j) + s * o(i, j);
    }
    return out;
  };

  // smooth detour k_x = t - i depth sin(pi t / kd), t in [0, kd]
  auto detour = [&](double t) {
    const double w = kPi / kd;
    return integrand(cplx(t, -depth * std::sin(w * t)), cplx(1.0, -depth * w * std::cos(w * t)));
  };
  // magnitude of a unit-contrast image dyad; floors the error target
  const double scale = (1.0 + 1.0 / (std::abs(k2) * y_min * y_min)) / (2.0 * kPi);
  Vec total = quad::integrate(detour, 0.0, kd, zero, opts.rel_tol, opts.rel_tol * scale).value;

  auto real_axis = [&](double t) { return integrand(cplx(t, 0.0), cplx(1.0, 0.0)); };
  double lo = kd;
  bool converged = false;
  while (lo < ceiling) {
    const double hi = std::min(2.0 * lo, ceiling);
    const double floor = opts.rel_tol * std::max(scale, quad::magnitude(total));
    const Vec panel = quad::integrate(real_axis, lo, hi, zero, opts.rel_tol, floor).value;
    total += panel;
    lo = hi;
    if (quad::magnitude(panel) <= opts.tail_tol * std::max(quad::magnitude(total), opts.rel_tol * scale)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericalError("Sommerfeld tail not converged at k_x = " + std::to_string(ceiling) +
                         " rad/um (k_z = " + std::to_string(k_z) + ", min(y+y') = " + std::to_string(y_min) + " um)");
  }

  std::vector<Mat3> res(n);
  for (std::size_t m = 0; m < n; ++m) res[m] = Eigen::Map<const Mat3>(total.data() + 9 * m);
  return res;
}

GreenSample dyad_reflected(const Vec2& r, const Vec2& r_source, double k_z, const Background& bg,
                           const SpectralPoint& sp, const SommerfeldOptions& opts) {
  if (!(r.y() > 0) || !(r_source.y() > 0)) throw DomainError("reflected dyad requires both points above the interface");
  const auto v = reflected_batch({Vec2(r.x() - r_source.x(), r.y() + r_source.y())}, k_z, bg, sp, opts);
  return {v.front(), GreenKind::reflected, r, r_source, k_z};
}

namespace {
Mat3 mirror_x(const Mat3& m) {
  Mat3 r = m;
  r.row(0) *= -1.0;
  r.col(0) *= -1.0;
  return r;
}
}  // namespace

ReflectedTable::ReflectedTable(const Mesh& mesh, double k_z, const Background& bg, const SpectralPoint& sp,
                               const SommerfeldOptions& opts) {
  if (mesh.empty()) return;
  int ix0 = mesh.cells.front().ix, ix1 = ix0, iy0 = mesh.cells.front().iy, iy1 = iy0;
  for (const auto& c : mesh.cells) {
    ix0 = std::min(ix0, c.ix);
    ix1 = std::max(ix1, c.ix);
    iy0 = std::min(iy0, c.iy);
    iy1 = std::max(iy1, c.iy);
  }
  dx_max_ = ix1 - ix0;
  sy_min_ = 2 * iy0;
  sy_count_ = 2 * (iy1 - iy0) + 1;
  std::vector<Vec2> xy;
  xy.reserve(static_cast<std::size_t>((dx_max_ + 1) * sy_count_));
  for (int dx = 0; dx <= dx_max_; ++dx) {
    for (int k = 0; k < sy_count_; ++k) {
      const int sy = sy_min_ + k;
      xy.emplace_back(dx * mesh.h, 2.0 * mesh.origin.y() + (sy + 1) * mesh.h);
    }
  }
  table_ = reflected_batch(xy, k_z, bg, sp, opts);
}

Mat3 ReflectedTable::operator()(const MeshCell& obs, const MeshCell& src) const {
  const int dx = obs.ix - src.ix;
  const int k = obs.iy + src.iy - sy_min_;
  const Mat3& m = table_[static_cast<std::size_t>(std::abs(dx) * sy_count_ + k)];
  return dx >= 0 ? m : mirror_x(m);
}

ReferenceGreen::ReferenceGreen(const Background& bg, const SpectralPoint& sp, double k_z, SommerfeldOptions opts)
    : bg_(bg), sp_(sp), k_z_(k_z), k0_(sp.k0()), eps1_(bg.superstrate()), opts_(opts) {}

Mat3 ReferenceGreen::operator()(const Vec2& r, const Vec2& r_source) const {
  Mat3 g = dyad_hom_offset(r - r_source, k_z_, eps1_, k0_);
  if (bg_.is_two_layer()) g += dyad_reflected(r, r_source, k_z_, bg_, sp_, opts_).tensor;
  return g;
}

ReferenceGreen::Coupling ReferenceGreen::couple(const std::vector<Vec2>& r, const Vec2& r0) const {
  Coupling c;
  c.to.resize(r.size());
  c.from.resize(r.size());
  const Mat3 flip_z = Eigen::Vector3cd(1.0, 1.0, -1.0).asDiagonal();
  for (std::size_t j = 0; j < r.size(); ++j) {
    c.to[j] = dyad_hom_offset(r[j] - r0, k_z_, eps1_, k0_);
    // reversing the separation flips the odd (x,z), (y,z) couplings
    c.from[j] = flip_z * c.to[j] * flip_z;
  }
  if (bg_.is_two_layer()) {
    std::vector<Vec2> xy(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) xy[j] = Vec2(r[j].x() - r0.x(), r[j].y() + r0.y());
    const auto refl = reflected_batch(xy, k_z_, bg_, sp_, opts_);
    for (std::size_t j = 0; j < r.size(); ++j) {
      c.to[j] += refl[j];
      c.from[j] += mirror_x(refl[j]);
    }
  }
  return c;
}

Mat3 ReferenceGreen::coincidence_imag(const Vec2& r0) const {
  Mat3 m = hom_coincidence_imag(k_z_, eps1_, k0_);
  if (bg_.is_two_layer()) {
    const Mat3 refl = reflected_batch({Vec2(0.0, 2.0 * r0.y())}, k_z_, bg_, sp_, opts_).front();
    m += refl.imag().cast<cplx>();
  }
  return m;
}

}  // namespace wgldos::green
