#pragma once

#include <complex>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace wgldos {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Speed of light in vacuum, µm/s. All lengths in the library are in µm.
inline constexpr double kSpeedOfLight = 2.99792458e14;

/// Vacuum wavelength together with the derived angular frequency and wavenumber.
class SpectralPoint {
 public:
  explicit SpectralPoint(double lambda_um);

  double lambda() const { return lambda_; }
  double omega() const { return omega_; }
  double k0() const { return k0_; }

 private:
  double lambda_;
  double omega_;
  double k0_;
};

struct ConstantModel {
  cplx eps;
};

/// eps(w) = eps_inf - wp^2 / (w^2 + i*gamma*w); frequencies in rad/s.
struct DrudeModel {
  double eps_inf;
  double omega_p;
  double gamma;
};

/// Tabulated permittivity, linearly interpolated in wavelength.
struct TableModel {
  std::vector<double> lambda_um;
  std::vector<cplx> eps;
};

/// Dispersive dielectric function. Passive media have Im eps >= 0 (exp(-i w t)).
class Material {
 public:
  using Model = std::variant<ConstantModel, DrudeModel, TableModel>;

  static Material constant(cplx eps);
  static Material drude(double eps_inf, double omega_p, double gamma);
  static Material table(std::vector<double> lambda_um, std::vector<cplx> eps);

  const Model& model() const { return model_; }
  /// True when the imaginary part is dropped on evaluation.
  bool lossless() const { return lossless_; }

  friend cplx permittivity(const Material& material, const SpectralPoint& sp);
  friend Material lossless_variant(const Material& material);

 private:
  explicit Material(Model m, bool lossless = false) : model_(std::move(m)), lossless_(lossless) {}
  Model model_;
  bool lossless_ = false;
};

/// Throws RangeError when a tabulated material is queried outside its range.
cplx permittivity(const Material& material, const SpectralPoint& sp);

/// Same material with Im eps forced to zero at every wavelength.
Material lossless_variant(const Material& material);

struct Homogeneous {
  cplx eps1;
};

/// Superstrate eps1 for y > 0, substrate eps3 for y < 0.
struct TwoLayer {
  cplx eps1;
  cplx eps3;
};

/// Reference (guide-free) system. The emitter always lives in the superstrate.
class Background {
 public:
  explicit Background(Homogeneous h);
  explicit Background(TwoLayer t);

  bool is_two_layer() const { return std::holds_alternative<TwoLayer>(layers_); }
  const TwoLayer& two_layer() const { return std::get<TwoLayer>(layers_); }

  cplx superstrate() const;
  cplx eps_at(const Vec2& r) const;
  /// Largest refractive index over the open half-spaces; sets the light line.
  double n_max() const;

 private:
  std::variant<Homogeneous, TwoLayer> layers_;
};

struct Circle {
  Vec2 center;
  double radius;
};

struct RegularPolygon {
  Vec2 center;
  double circumradius;
  int n_sides;
  double rotation;  ///< radians; vertex 0 sits at angle `rotation`
};

struct Polygon {
  std::vector<Vec2> vertices;
};

/// Waveguide cross-section: closed shape filled with one material.
class CrossSection {
 public:
  using Shape = std::variant<Circle, RegularPolygon, Polygon>;

  CrossSection(Shape shape, Material material);

  const Shape& shape() const { return shape_; }
  const Material& material() const { return material_; }
  CrossSection with_material(Material m) const { return CrossSection(shape_, std::move(m)); }

  bool contains(const Vec2& p) const;
  double area() const;
  double perimeter() const;
  Vec2 center() const;
  /// Polygon vertices (empty for circles).
  std::vector<Vec2> vertices() const;
  /// Smallest length scale the mesh must resolve (radius or shortest edge).
  double feature_size() const;
  double distance_to_boundary(const Vec2& p) const;
  /// First point of the boundary hit by the ray from center() along dir.
  Vec2 boundary_along(const Vec2& dir) const;
  /// Axis-aligned bounding box (min, max).
  std::pair<Vec2, Vec2> bounds() const;

 private:
  Shape shape_;
  Material material_;
};

struct MeshCell {
  Vec2 center;
  double area;
  cplx delta_eps;
  int ix;  ///< lattice index: center = origin + ((ix + 1/2) h, (iy + 1/2) h)
  int iy;
};

/// Square-cell discretization of a cross-section (midpoint in/out rule).
struct Mesh {
  double h = 0;
  Vec2 origin = Vec2::Zero();
  std::vector<MeshCell> cells;

  std::size_t size() const { return cells.size(); }
  bool empty() const { return cells.empty(); }
  bool null_contrast() const;
  /// True when p falls inside one of the square cells.
  bool inside_cell(const Vec2& p) const;
  double min_distance_to_centers(const Vec2& p) const;
};

/// Throws GeometryError for degenerate shapes or a pitch too coarse for the shape.
Mesh build_mesh(const CrossSection& cs, const Background& background, double h, const SpectralPoint& sp);

/// Point dipole: position in the cross-section plane, unit orientation (x, y, z).
class EmitterSpec {
 public:
  /// Throws DomainError when the position lies inside the guide or |u| = 0.
  EmitterSpec(const Vec2& position, const Vec3& orientation, const CrossSection* guide = nullptr);

  const Vec2& position() const { return position_; }
  const Vec3& orientation() const { return u_; }
  /// Distance to the guide surface (infinity without a guide).
  double distance() const { return distance_; }

 private:
  Vec2 position_;
  Vec3 u_;
  double distance_;
};

/// Emitter at surface distance d along the ray center + t*dir.
/// Orientation is given in the local (radial, tangential, z) frame of that ray.
EmitterSpec emitter_along_ray(const CrossSection& cs, const Vec2& dir, double d, const Vec3& local_orientation);

/// Validity guard: emitter closer than one cell pitch to any cell center.
bool mesh_limited(const EmitterSpec& emitter, const Mesh& mesh);

}  // namespace wgldos
