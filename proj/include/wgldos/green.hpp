#pragma once

#include <vector>

#include <Eigen/Dense>

#include "wgldos/physical_model.hpp"

namespace wgldos::green {

using Mat3 = Eigen::Matrix3cd;

/// k_t = sqrt(eps_b k0^2 - k_z^2) on the branch Im k_t >= 0 (Re k_t >= 0 when real).
class TransverseWavenumber {
 public:
  TransverseWavenumber(cplx eps_b, double k0, double k_z);
  explicit TransverseWavenumber(cplx k_t);

  cplx k_t() const { return k_t_; }
  /// kappa = -i k_t, the decay constant of the K-function form (Re kappa >= 0).
  cplx kappa() const { return cplx(k_t_.imag(), -k_t_.real()); }

 private:
  cplx k_t_;
};

enum class GreenKind { homogeneous, reflected, delta };

struct GreenSample {
  Mat3 tensor;
  GreenKind kind;
  Vec2 r;
  Vec2 r_source;
  double k_z;
};

/// Outgoing 2D scalar kernel, -(i/4) H0(k_t rho) = -K0(kappa rho) / (2 pi).
/// Throws SingularityError for rho <= 0.
cplx scalar_g2(double rho, const TransverseWavenumber& kt);

/// Homogeneous 2D dyad (I + grad grad / (eps_b k0^2)) applied to scalar_g2,
/// with the z derivative replaced by -i k_z. Throws SingularityError when r == r'.
GreenSample dyad_hom(const Vec2& r, const Vec2& r_source, double k_z, cplx eps_b, const SpectralPoint& sp);

/// Same tensor for a separation vector, without the sample bookkeeping.
Mat3 dyad_hom_offset(const Vec2& sep, double k_z, cplx eps_b, double k0);

/// Imaginary part of the homogeneous dyad at coincidence (finite; real part diverges).
Mat3 hom_coincidence_imag(double k_z, cplx eps_b, double k0);

struct SelfTerm {
  cplx scalar;      ///< integral of scalar_g2 over the equal-area disk
  Mat3 static_part; ///< diag(1/2, 1/2, 0) / (eps_b k0^2)
  Mat3 dyad;        ///< disk integral of the full dyad
};

/// Integral of scalar_g2 over a disk of radius R centred on the singularity.
cplx disk_integral_g(double radius, const TransverseWavenumber& kt);

/// Cell integral of the dyad for source and observer in one square cell of side h,
/// approximated by the disk of equal area. Throws DomainError on the branch point k_t = 0.
SelfTerm self_term(double h, double k_z, cplx eps_b, double k0);

struct SommerfeldOptions {
  double detour_depth = 0.05;   ///< maximum excursion below the real k_x axis, units of k0
  double detour_extent = 1.2;   ///< end of the detour, units of n_max k0
  double rel_tol = 1e-9;        ///< quadrature tolerance relative to the largest entry
  double tail_tol = 1e-6;       ///< stop once a tail panel adds less than this fraction
  double ceiling = 100.0;       ///< minimum k_x ceiling, units of k0
};

/// Surface-reflected dyad of a two-layer background for many (x - x', y + y') pairs,
/// all integrated on a shared adaptive k_x rule. Requires y + y' > 0.
std::vector<Mat3> reflected_batch(const std::vector<Vec2>& xy, double k_z, const Background& bg, const SpectralPoint& sp,
                                  const SommerfeldOptions& opts = {});

/// Reflected dyad between two superstrate points. Throws DomainError when a point is
/// not above the interface and NumericalError if the tail does not converge.
GreenSample dyad_reflected(const Vec2& r, const Vec2& r_source, double k_z, const Background& bg,
                           const SpectralPoint& sp, const SommerfeldOptions& opts = {});

/// Reflected dyad on the mesh lattice. Entries depend on (ix - jx, iy + jy) only and are
/// evaluated exactly at those lattice offsets.
class ReflectedTable {
 public:
  ReflectedTable(const Mesh& mesh, double k_z, const Background& bg, const SpectralPoint& sp,
                 const SommerfeldOptions& opts = {});

  Mat3 operator()(const MeshCell& obs, const MeshCell& src) const;

 private:
  int dx_max_ = 0;
  int sy_min_ = 0;
  int sy_count_ = 0;
  std::vector<Mat3> table_;  // index (dx >= 0) * sy_count + (sy - sy_min)
};

/// Reference-system Green dyad G_ref = G_hom + G_reflected at fixed (k_z, lambda).
class ReferenceGreen {
 public:
  ReferenceGreen(const Background& bg, const SpectralPoint& sp, double k_z, SommerfeldOptions opts = {});

  const Background& background() const { return bg_; }
  const SpectralPoint& spectral_point() const { return sp_; }
  double k_z() const { return k_z_; }
  double k0() const { return k0_; }
  cplx eps1() const { return eps1_; }
  const SommerfeldOptions& options() const { return opts_; }

  /// G_ref(r, r') for r != r'.
  Mat3 operator()(const Vec2& r, const Vec2& r_source) const;
  struct Coupling {
    std::vector<Mat3> to;    ///< G_ref(r_j, r0)
    std::vector<Mat3> from;  ///< G_ref(r0, r_j)
  };
  /// Both coupling directions between r0 and every r_j (reflected part batched).
  Coupling couple(const std::vector<Vec2>& r, const Vec2& r0) const;
  /// Im G_ref(r0, r0): homogeneous part plus reflected coincidence term.
  Mat3 coincidence_imag(const Vec2& r0) const;

 private:
  Background bg_;
  SpectralPoint sp_;
  double k_z_;
  double k0_;
  cplx eps1_;
  SommerfeldOptions opts_;
};

}  // namespace wgldos::green
