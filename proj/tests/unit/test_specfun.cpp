#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "doctest.h"
#include "wgldos/errors.hpp"
#include "wgldos/quadrature.hpp"
#include "wgldos/specfun.hpp"

using namespace wgldos;
using namespace wgldos::specfun;

namespace {

const cplx I(0.0, 1.0);
constexpr double kPi = std::numbers::pi;

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// Independent long-double ascending series for J_n(z), n = 0, 1.
std::complex<long double> series_j(int n, std::complex<long double> z) {
  const auto q = -z * z / 4.0L;
  std::complex<long double> term = n == 0 ? 1.0L : z / 2.0L;
  std::complex<long double> sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (long double)(k * (k + n));
    sum += term;
  }
  return sum;
}

// Y_n from the ascending series (A&S 9.1.11, n = 0, 1) in long double.
std::complex<long double> series_y(int n, std::complex<long double> z) {
  const long double g = 0.577215664901532860606512090082402431L;
  const long double pi = 3.141592653589793238462643383279502884L;
  const auto q = -z * z / 4.0L;
  const auto lg = std::log(z / 2.0L);
  if (n == 0) {
    std::complex<long double> term = 1.0L, sum = 0.0L;
    long double hk = 0;
    for (int k = 1; k < 200; ++k) {
      term *= q / (long double)(k * k);
      hk += 1.0L / k;
      sum += hk * term;
    }
    return (2.0L / pi) * ((lg + g) * series_j(0, z) - sum);
  }
  // Y1 = -2/(pi z) + (2/pi) ln(z/2) J1 - (1/pi)(z/2) sum (psi(k+1)+psi(k+2)) q^k/(k!(k+1)!)
  std::complex<long double> term = 1.0L, sum = 1.0L - 2.0L * g;
  long double hk = 0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (long double)(k * (k + 1));
    hk += 1.0L / k;
    sum += (2.0L * hk + 1.0L / (k + 1) - 2.0L * g) * term;
  }
  return -2.0L / (pi * z) + (2.0L / pi) * lg * series_j(1, z) - (z / (2.0L * pi)) * sum;
}

// K_n(w) = int_0^inf exp(-w cosh t) cosh(n t) dt, Re w > 0.
cplx integral_k(int n, cplx w) {
  const double tmax = std::acosh(1.0 + 45.0 / w.real()) + 1.0;
  auto f = [&](double t) { return std::exp(-w * std::cosh(t)) * std::cosh(n * t); };
  return quad::integrate(f, 0.0, tmax, cplx(0.0), 1e-13).value;
}

}  // namespace

TEST_CASE("reference values") {
  CHECK(rel(hankel1(0, 1.0), cplx(0.7651976866, 0.0882569642)) < 1e-9);
  CHECK(rel(hankel1(1, 1.0), cplx(0.4400505857, -0.7812128213)) < 1e-9);
  CHECK(std::abs(besselk(0, 1.0) - 0.4210244382) < 1e-9);
  CHECK(std::abs(besselk(1, 1.0) - 0.6019072302) < 1e-9);
  CHECK(besseli(0, 0.0) == cplx(1.0));
  CHECK(besseli(1, 0.0) == cplx(0.0));
  CHECK(std::abs(besseli(0, 1.0) - 1.2660658778) < 1e-9);
}

TEST_CASE("hankel matches long-double ascending series for |z| <= 6") {
  for (double r : {1e-4, 0.01, 0.3, 1.0, 2.5, 4.0, 6.0}) {
    for (double th : {0.0, 0.3, 0.8, 1.3, kPi / 2}) {
      const cplx z = std::polar(r, th);
      const std::complex<long double> zl(z.real(), z.imag());
      for (int n : {0, 1}) {
        const auto h = series_j(n, zl) + std::complex<long double>(0, 1) * series_y(n, zl);
        CAPTURE(z);
        CAPTURE(n);
        CHECK(rel(hankel1(n, z), cplx((double)h.real(), (double)h.imag())) < 1e-10);
      }
    }
  }
}

TEST_CASE("real-argument J, Y, I, K against boost") {
  for (double x : {1e-4, 0.05, 0.7, 1.9, 2.1, 5.0, 8.0, 13.7, 40.0, 150.0, 699.0}) {
    for (int n : {0, 1}) {
      CAPTURE(x);
      CAPTURE(n);
      CHECK(std::abs(besselk(n, x) - boost::math::cyl_bessel_k(n, x)) <= 1e-12 * boost::math::cyl_bessel_k(n, x));
      CHECK(std::abs(besseli(n, x) - boost::math::cyl_bessel_i(n, x)) <= 1e-12 * boost::math::cyl_bessel_i(n, x));
      if (x < 200) {
        const double j = boost::math::cyl_bessel_j(n, x), y = boost::math::cyl_neumann(n, x);
        const double scale = std::hypot(j, y);
        CHECK(std::abs(besselj(n, x) - j) <= 1e-12 * scale);
        CHECK(std::abs(bessely(n, x) - y) <= 1e-12 * scale);
      }
    }
  }
  for (double x : {1e3, 1e4}) {
    const cplx h = hankel1(0, x);
    const double j = boost::math::cyl_bessel_j(0, x), y = boost::math::cyl_neumann(0, x);
    CHECK(std::abs(h - cplx(j, y)) <= 1e-10 * std::hypot(j, y));
  }
}

TEST_CASE("complex K against the integral representation") {
  for (double r : {0.05, 0.8, 1.9, 2.1, 4.0, 12.0, 30.0}) {
    for (double th : {0.0, 0.5, 1.0, 1.4}) {
      const cplx w = std::polar(r, th);
      for (int n : {0, 1}) {
        CAPTURE(w);
        CAPTURE(n);
        CHECK(rel(besselk(n, w), integral_k(n, w)) < 1e-10);
      }
    }
  }
}

TEST_CASE("connection K0(x) = (i pi/2) H0(i x)") {
  for (double x = 0.1; x < 10.0; x += 0.37) {
    CHECK(rel(besselk(0, x), 0.5 * I * kPi * hankel1(0, I * x)) < 1e-12);
  }
}

TEST_CASE("Wronskians") {
  for (double x = 0.01; x <= 100.0; x *= 1.17) {
    const cplx ik = besseli(0, x) * besselk(1, x) + besseli(1, x) * besselk(0, x);
    CHECK(std::abs(ik * x - 1.0) < 1e-10);
    const cplx jy = besselj(1, x) * bessely(0, x) - besselj(0, x) * bessely(1, x);
    CHECK(std::abs(jy * (kPi * x / 2.0) - 1.0) < 1e-10);
  }
  for (double r : {0.3, 2.5, 9.0, 60.0}) {
    for (double th : {-1.2, -0.4, 0.6, 1.5}) {
      const cplx w = std::polar(r, th);
      const cplx ik = besseli(0, w) * besselk(1, w) + besseli(1, w) * besselk(0, w);
      CAPTURE(w);
      CHECK(std::abs(ik * w - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("H1 = J + iY and small-argument asymptote") {
  for (double r : {0.2, 1.5, 3.0, 20.0}) {
    for (double th : {-0.9, 0.0, 0.7}) {
      const cplx z = std::polar(r, th);
      for (int n : {0, 1}) {
        const cplx j = besselj(n, z);
        const double scale = std::max(std::abs(j), std::abs(hankel1(n, z)));
        CHECK(std::abs(hankel1(n, z) - (j + I * bessely(n, z))) < 1e-11 * scale);
      }
    }
  }
  const double x = 1e-7;
  CHECK(rel(hankel1(1, x), -2.0 * I / (kPi * x)) < 1e-6);
}

TEST_CASE("continuity across the series / continued-fraction switch") {
  for (double th : {0.0, 0.4, 1.0, kPi / 2}) {
    const cplx a = std::polar(2.0 - 1e-9, th), b = std::polar(2.0 + 1e-9, th);
    for (int n : {0, 1}) {
      CHECK(rel(besselk(n, a), besselk(n, b)) < 1e-8);
      CHECK(rel(besseli(n, a), besseli(n, b)) < 1e-8);
    }
  }
}

TEST_CASE("regular part of K1") {
  for (double x : {1e-6, 0.01, 0.5, 1.99, 2.01, 5.0}) {
    const double k1 = boost::math::cyl_bessel_k(1, x);
    CHECK(std::abs(besselk1_regular(x) - (k1 - 1.0 / x)) < 1e-10 * std::max(1.0, std::abs(k1 - 1.0 / x)));
  }
  // leading behaviour: (x/2) ln(x/2) + (x/4)(2 gamma - 1)
  const double x = 1e-5;
  const double lead = 0.5 * x * std::log(0.5 * x) + 0.25 * x * (2 * std::numbers::egamma - 1);
  CHECK(std::abs(besselk1_regular(x) - lead) < 1e-12);
}

TEST_CASE("scaled variants") {
  CHECK(rel(besselk_scaled(0, 900.0), std::sqrt(kPi / 1800.0) * (1 - 1.0 / 7200.0 + 9.0 / (128.0 * 810000.0))) < 1e-9);
  CHECK(rel(besseli_scaled(0, 650.0), besseli(0, 650.0) * std::exp(-650.0)) < 1e-12);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(hankel1(0, 0.0), SingularityError);
  CHECK_THROWS_AS(hankel1(0, cplx(-1.0, 0.5)), DomainError);
  CHECK_THROWS_AS(besselk(0, 800.0), RangeError);
  CHECK_THROWS_AS(besseli(0, 701.0), RangeError);
  CHECK_THROWS_AS(besselk(0, 0.0), SingularityError);
  CHECK_THROWS_AS(besselk(2, 1.0), DomainError);
  CHECK(evaluate(Kind::H1, 0, 1.0).value == hankel1(0, 1.0));
}
