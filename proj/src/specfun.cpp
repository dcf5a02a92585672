#include "wgldos/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "wgldos/errors.hpp"

namespace wgldos::specfun {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEuler = std::numbers::egamma;
constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;
constexpr double kSeriesRadius = 2.0;
constexpr double kRangeLimit = 700.0;

const cplx I(0.0, 1.0);

struct Pair {
  cplx v0;
  cplx v1;
};

struct SeriesSums {
  cplx i0;      // sum q^k / (k!)^2
  cplx i1;      // sum q^k / (k! (k+1)!)
  cplx k0_tail; // sum H_k q^k / (k!)^2
  cplx k1_tail; // sum (H_k + H_{k+1} - 2 gamma) q^k / (k! (k+1)!)
};

SeriesSums ascending(cplx w) {
  const cplx q = 0.25 * w * w;
  SeriesSums s{1.0, 1.0, 0.0, 1.0 - 2.0 * kEuler};
  cplx t0 = 1.0;  // q^k/(k!)^2
  cplx t1 = 1.0;  // q^k/(k!(k+1)!)
  double hk = 0.0;
  for (int k = 1; k < 200; ++k) {
    t0 *= q / (double(k) * k);
    t1 *= q / (double(k) * (k + 1));
    hk += 1.0 / k;
    const double hk1 = hk + 1.0 / (k + 1);
    s.i0 += t0;
    s.i1 += t1;
    s.k0_tail += hk * t0;
    s.k1_tail += (hk + hk1 - 2.0 * kEuler) * t1;
    if (std::abs(t0) < kEps * std::abs(s.i0) && std::abs(t1) < kEps * std::abs(s.i1)) break;
  }
  return s;
}

// K0, K1 by the ascending series; also K1 - 1/w.
struct KSeries {
  cplx k0;
  cplx k1;
  cplx k1_regular;
};

KSeries k_series(cplx w) {
  const SeriesSums s = ascending(w);
  const cplx lg = std::log(0.5 * w);
  const cplx i0 = s.i0;
  const cplx i1 = 0.5 * w * s.i1;
  KSeries r;
  r.k0 = -(lg + kEuler) * i0 + s.k0_tail;
  r.k1_regular = lg * i1 - 0.25 * w * s.k1_tail;
  r.k1 = 1.0 / w + r.k1_regular;
  return r;
}

// Steed's continued fraction CF2 for exp(w) K0(w), exp(w) K1(w).
Pair k_cf2_scaled(cplx x) {
  cplx b = 2.0 * (1.0 + x);
  cplx d = 1.0 / b;
  cplx h = d;
  cplx delh = d;
  cplx q1 = 0.0;
  cplx q2 = 1.0;
  const double a1 = 0.25;
  cplx q = a1;
  double c = a1;
  double a = -a1;
  cplx s = 1.0 + q * delh;
  int i = 1;
  for (; i < kMaxIter; ++i) {
    a -= 2.0 * i;
    c = -a * c / (i + 1.0);
    const cplx qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const cplx dels = q * delh;
    s += dels;
    if (std::abs(dels) < kEps * std::abs(s)) break;
  }
  if (i == kMaxIter) throw NumericalError("K continued fraction failed to converge");
  h *= a1;
  const cplx k0 = std::sqrt(kPi / (2.0 * x)) / s;
  const cplx k1 = k0 * (x + 0.5 - h) / x;
  return {k0, k1};
}

// exp(w) K_n(w) for Re w >= 0, w != 0.
Pair k_scaled(cplx w) {
  if (std::abs(w) <= kSeriesRadius) {
    const KSeries k = k_series(w);
    const cplx e = std::exp(w);
    return {k.k0 * e, k.k1 * e};
  }
  return k_cf2_scaled(w);
}

// I1/I0 by the modified Lentz algorithm.
cplx i_ratio(cplx w) {
  const double tiny = 1e-300;
  cplx f = tiny;
  cplx C = f;
  cplx D = 0.0;
  for (int k = 1; k < kMaxIter; ++k) {
    const cplx bk = 2.0 * k / w;
    D = bk + D;
    if (D == 0.0) D = tiny;
    C = bk + 1.0 / C;
    if (C == 0.0) C = tiny;
    D = 1.0 / D;
    const cplx delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0) < kEps) return f;
  }
  throw NumericalError("I continued fraction failed to converge");
}

// exp(-|Re w|) I_n(w).
Pair i_scaled(cplx w) {
  if (std::abs(w) <= kSeriesRadius) {
    const SeriesSums s = ascending(w);
    const double e = std::exp(-std::abs(w.real()));
    return {s.i0 * e, 0.5 * w * s.i1 * e};
  }
  const bool flip = w.real() < 0;
  const cplx x = flip ? -w : w;
  const cplx f = i_ratio(x);
  const Pair k = k_scaled(x);
  const cplx i0 = std::exp(I * x.imag()) / (x * (k.v1 + f * k.v0));
  const cplx i1 = f * i0;
  return {i0, flip ? -i1 : i1};
}

void check_order(int order) {
  if (order != 0 && order != 1) throw DomainError("only orders 0 and 1 are supported");
}

cplx pick(const Pair& p, int order) { return order == 0 ? p.v0 : p.v1; }

// H_n^(1)(z) for Im z >= 0 through K_n(-i z).
cplx hankel_upper(int order, cplx z) {
  const cplx w = -I * z;
  const Pair k = k_scaled(w);
  const cplx e = std::exp(-w);
  return order == 0 ? -(2.0 * I / kPi) * k.v0 * e : -(2.0 / kPi) * k.v1 * e;
}

}  // namespace

cplx hankel1(int order, cplx z) {
  check_order(order);
  if (z == 0.0) throw SingularityError("Hankel function is singular at z = 0");
  if (z.real() < 0) throw DomainError("hankel1 requires Re z >= 0");
  if (z.imag() >= 0) return hankel_upper(order, z);
  return 2.0 * besselj(order, z) - std::conj(hankel_upper(order, std::conj(z)));
}

cplx besselk_scaled(int order, cplx w) {
  check_order(order);
  if (w == 0.0) throw SingularityError("K is singular at w = 0");
  if (w.real() < 0) throw DomainError("besselk requires Re w >= 0");
  return pick(k_scaled(w), order);
}

cplx besselk(int order, cplx w) {
  if (w.real() > kRangeLimit) throw RangeError("besselk argument beyond range: Re w = " + std::to_string(w.real()));
  return besselk_scaled(order, w) * std::exp(-w);
}

cplx besselk1_regular(cplx w) {
  if (w == 0.0) return 0.0;
  if (w.real() < 0) throw DomainError("besselk requires Re w >= 0");
  if (std::abs(w) <= kSeriesRadius) return k_series(w).k1_regular;
  return besselk(1, w) - 1.0 / w;
}

cplx besseli_scaled(int order, cplx w) {
  check_order(order);
  return pick(i_scaled(w), order);
}

cplx besseli(int order, cplx w) {
  if (std::abs(w) > kRangeLimit) throw RangeError("besseli argument beyond range: |w| = " + std::to_string(std::abs(w)));
  return besseli_scaled(order, w) * std::exp(std::abs(w.real()));
}

cplx besselj(int order, cplx z) {
  check_order(order);
  if (z.imag() == 0.0 && z.real() != 0.0) {
    const double x = std::abs(z.real());
    const double v = hankel_upper(order, x).real();
    return (order == 1 && z.real() < 0) ? -v : v;
  }
  const cplx v = besseli(order, -I * z);
  return order == 0 ? v : I * v;
}

cplx bessely(int order, cplx z) {
  check_order(order);
  if (z == 0.0) throw SingularityError("Y is singular at z = 0");
  if (z.real() < 0) throw DomainError("bessely requires Re z >= 0");
  if (z.imag() == 0.0) return hankel_upper(order, z).imag();
  if (z.imag() > 0) return -I * (hankel_upper(order, z) - besselj(order, z));
  return std::conj(bessely(order, std::conj(z)));
}

CylinderFnValue evaluate(Kind kind, int order, cplx z) {
  cplx v;
  switch (kind) {
    case Kind::J: v = besselj(order, z); break;
    case Kind::Y: v = bessely(order, z); break;
    case Kind::H1: v = hankel1(order, z); break;
    case Kind::I: v = besseli(order, z); break;
    case Kind::K: v = besselk(order, z); break;
  }
  return {v, order, kind};
}

}  // namespace wgldos::specfun
