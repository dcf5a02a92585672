#pragma once

#include <vector>

#include <Eigen/Dense>

#include "wgldos/green.hpp"
#include "wgldos/physical_model.hpp"

namespace wgldos::scatter {

using green::Mat3;

/// Dense Lippmann-Schwinger matrix: block (i, j) = delta_ij I + k0^2 d_eps_j A_j G_ref(r_i, r_j),
/// with the cell integral of the dyad on the diagonal.
Eigen::MatrixXcd assemble_matrix(const Mesh& mesh, const green::ReferenceGreen& ref);

/// Factorized system at one (k_z, lambda). Read-only after construction.
class ScatterSystem {
 public:
  /// Throws NumericalError (with k_z) when the factorization is singular.
  ScatterSystem(const Mesh& mesh, const Background& bg, const SpectralPoint& sp, double k_z,
                green::SommerfeldOptions opts = {});
  ScatterSystem(const ScatterSystem&) = delete;
  ScatterSystem& operator=(const ScatterSystem&) = delete;

  double k_z() const { return ref_.k_z(); }
  const green::ReferenceGreen& reference() const { return ref_; }
  const Mesh& mesh() const { return mesh_; }

  /// Scattered dyad Delta G(r, r; k_z). Throws DomainError when r lies inside a cell.
  Mat3 delta_green(const Vec2& r_obs) const;
  /// Same for many observation points, one block solve.
  std::vector<Mat3> delta_green(const std::vector<Vec2>& r_obs) const;

 private:
  Mesh mesh_;
  green::ReferenceGreen ref_;
  Eigen::MatrixXcd lu_storage_;
  Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXcd>> lu_;
};

struct LdosMap {
  std::vector<Vec2> points;
  std::vector<double> values;  ///< partial 2D LDOS variation; 0 where masked
  std::vector<bool> masked;    ///< point closer than one pitch to a cell center
};

/// Partial 2D-LDOS variation over a set of points at fixed k_z, one factorization.
/// Points within one pitch of a cell center are masked.
LdosMap ldos_map(const Mesh& mesh, const Background& bg, double k_z, const SpectralPoint& sp,
                 const std::vector<Vec2>& points, const Vec3& u);

}  // namespace wgldos::scatter
