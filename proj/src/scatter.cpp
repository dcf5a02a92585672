#include "wgldos/scatter.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "wgldos/errors.hpp"
#include "wgldos/ldos.hpp"

namespace wgldos::scatter {

namespace {

// Homogeneous couplings indexed by lattice offset (dx, dy).
class OffsetTable {
 public:
  OffsetTable(const Mesh& mesh, const green::ReferenceGreen& ref) {
    int ix0 = mesh.cells.front().ix, ix1 = ix0, iy0 = mesh.cells.front().iy, iy1 = iy0;
    for (const auto& c : mesh.cells) {
      ix0 = std::min(ix0, c.ix);
      ix1 = std::max(ix1, c.ix);
      iy0 = std::min(iy0, c.iy);
      iy1 = std::max(iy1, c.iy);
    }
    dx_ = ix1 - ix0;
    dy_ = iy1 - iy0;
    table_.resize(static_cast<std::size_t>((2 * dx_ + 1) * (2 * dy_ + 1)));
    for (int dy = -dy_; dy <= dy_; ++dy) {
      for (int dx = -dx_; dx <= dx_; ++dx) {
        if (dx == 0 && dy == 0) continue;
        table_[index(dx, dy)] =
            green::dyad_hom_offset(mesh.h * Vec2(dx, dy), ref.k_z(), ref.eps1(), ref.k0());
      }
    }
  }
  const Mat3& operator()(int dx, int dy) const { return table_[index(dx, dy)]; }

 private:
  std::size_t index(int dx, int dy) const {
    return static_cast<std::size_t>((dy + dy_) * (2 * dx_ + 1) + (dx + dx_));
  }
  int dx_ = 0, dy_ = 0;
  std::vector<Mat3> table_;
};

Eigen::MatrixXcd build(const Mesh& mesh, const green::ReferenceGreen& ref, const SpectralPoint& sp) {
  if (mesh.empty()) throw UsageError("scatter system needs at least one cell");
  const std::size_t n = mesh.size();
  const double k0 = ref.k0();
  const double k02 = k0 * k0;
  const OffsetTable hom(mesh, ref);
  const green::SelfTerm self = green::self_term(mesh.h, ref.k_z(), ref.eps1(), k0);
  std::unique_ptr<green::ReflectedTable> refl;
  if (ref.background().is_two_layer())
    refl = std::make_unique<green::ReflectedTable>(mesh, ref.k_z(), ref.background(), sp, ref.options());

  Eigen::MatrixXcd m(3 * n, 3 * n);
  for (std::size_t j = 0; j < n; ++j) {
    const MeshCell& cj = mesh.cells[j];
    const cplx w = k02 * cj.delta_eps;
    for (std::size_t i = 0; i < n; ++i) {
      const MeshCell& ci = mesh.cells[i];
      Mat3 g = (i == j) ? Mat3(self.dyad) : Mat3(cj.area * hom(ci.ix - cj.ix, ci.iy - cj.iy));
      if (refl) g += cj.area * (*refl)(ci, cj);
      Mat3 blk = w * g;
      if (i == j) blk += Mat3::Identity();
      m.block<3, 3>(3 * i, 3 * j) = blk;
    }
  }
  return m;
}

}  // namespace

Eigen::MatrixXcd assemble_matrix(const Mesh& mesh, const green::ReferenceGreen& ref) {
  return build(mesh, ref, ref.spectral_point());
}

namespace {

// Lattice order, so that the factorization does not depend on the input cell order.
Mesh canonical(const Mesh& mesh) {
  Mesh out = mesh;
  std::stable_sort(out.cells.begin(), out.cells.end(), [](const MeshCell& a, const MeshCell& b) {
    if (a.iy != b.iy) return a.iy < b.iy;
    if (a.ix != b.ix) return a.ix < b.ix;
    if (a.center.y() != b.center.y()) return a.center.y() < b.center.y();
    return a.center.x() < b.center.x();
  });
  return out;
}

}  // namespace

ScatterSystem::ScatterSystem(const Mesh& mesh, const Background& bg, const SpectralPoint& sp, double k_z,
                             green::SommerfeldOptions opts)
    : mesh_(canonical(mesh)), ref_(bg, sp, k_z, opts), lu_storage_(build(mesh_, ref_, sp)), lu_(lu_storage_) {
  const double rc = lu_.rcond();
  if (!std::isfinite(rc) || rc < 1e-15) {
    throw NumericalError("singular scattering matrix at k_z = " + std::to_string(k_z) +
                         " rad/um (rcond " + std::to_string(rc) + ")");
  }
}

Mat3 ScatterSystem::delta_green(const Vec2& r_obs) const { return delta_green(std::vector<Vec2>{r_obs}).front(); }

std::vector<Mat3> ScatterSystem::delta_green(const std::vector<Vec2>& r_obs) const {
  for (const auto& r : r_obs) {
    if (mesh_.inside_cell(r)) throw DomainError("observation point lies inside a mesh cell");
  }
  const std::size_t n = mesh_.size();
  const double k02 = ref_.k0() * ref_.k0();
  std::vector<Vec2> centers(n);
  for (std::size_t j = 0; j < n; ++j) centers[j] = mesh_.cells[j].center;

  std::vector<green::ReferenceGreen::Coupling> couplings;
  couplings.reserve(r_obs.size());
  Eigen::MatrixXcd rhs(3 * n, 3 * r_obs.size());
  for (std::size_t e = 0; e < r_obs.size(); ++e) {
    couplings.push_back(ref_.couple(centers, r_obs[e]));
    for (std::size_t j = 0; j < n; ++j) rhs.block<3, 3>(3 * j, 3 * e) = couplings.back().to[j];
  }
  const Eigen::MatrixXcd x = lu_.solve(rhs);

  std::vector<Mat3> out(r_obs.size());
  for (std::size_t e = 0; e < r_obs.size(); ++e) {
    Mat3 acc = Mat3::Zero();
    for (std::size_t j = 0; j < n; ++j) {
      const MeshCell& c = mesh_.cells[j];
      acc += (c.delta_eps * c.area) * couplings[e].from[j] * x.block<3, 3>(3 * j, 3 * e);
    }
    out[e] = -k02 * acc;
  }
  return out;
}

LdosMap ldos_map(const Mesh& mesh, const Background& bg, double k_z, const SpectralPoint& sp,
                 const std::vector<Vec2>& points, const Vec3& u) {
  LdosMap map;
  map.points = points;
  map.values.assign(points.size(), 0.0);
  map.masked.assign(points.size(), false);
  std::vector<Vec2> open;
  std::vector<std::size_t> where;
  for (std::size_t p = 0; p < points.size(); ++p) {
    if (mesh.min_distance_to_centers(points[p]) < mesh.h) {
      map.masked[p] = true;
    } else {
      open.push_back(points[p]);
      where.push_back(p);
    }
  }
  if (open.empty()) return map;
  const ScatterSystem sys(mesh, bg, sp, k_z);
  const Vec3 unit = u.normalized();
  constexpr std::size_t kChunk = 128;
  for (std::size_t start = 0; start < open.size(); start += kChunk) {
    const std::size_t stop = std::min(open.size(), start + kChunk);
    const std::vector<Vec2> part(open.begin() + start, open.begin() + stop);
    const auto dg = sys.delta_green(part);
    for (std::size_t k = start; k < stop; ++k)
      map.values[where[k]] = ldos::delta_rho2d(dg[k - start], k_z, bg.eps_at(open[k]), unit);
  }
  return map;
}

}  // namespace wgldos::scatter
