#pragma once

#include <complex>

namespace wgldos::specfun {

using cplx = std::complex<double>;

enum class Kind { J, Y, H1, I, K };

struct CylinderFnValue {
  cplx value;
  int order;
  Kind kind;
};

/// Hankel function of the first kind, orders 0 and 1, for Re z >= 0.
/// Throws SingularityError at z = 0 and DomainError for Re z < 0.
cplx hankel1(int order, cplx z);

/// Modified Bessel K_order(w), Re w >= 0, w != 0. RangeError for Re w > 700.
cplx besselk(int order, cplx w);
/// exp(w) * K_order(w); no range limit.
cplx besselk_scaled(int order, cplx w);
/// K1(w) - 1/w, free of cancellation for small |w|.
cplx besselk1_regular(cplx w);

/// Modified Bessel I_order(w). RangeError for |w| > 700.
cplx besseli(int order, cplx w);
/// exp(-|Re w|) * I_order(w).
cplx besseli_scaled(int order, cplx w);

/// Bessel functions of the first and second kind. Y requires Re z >= 0.
cplx besselj(int order, cplx z);
cplx bessely(int order, cplx z);

/// Dispatch by kind; orders 0 and 1 only.
CylinderFnValue evaluate(Kind kind, int order, cplx z);

}  // namespace wgldos::specfun
