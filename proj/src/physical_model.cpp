#include "wgldos/physical_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wgldos/errors.hpp"

namespace wgldos {

namespace {

constexpr double kPi = std::numbers::pi;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross2(q2 - q1, p1 - q1);
  const double d2 = cross2(q2 - q1, p2 - q1);
  const double d3 = cross2(p2 - p1, q1 - p1);
  const double d4 = cross2(p2 - p1, q2 - p1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

std::vector<Vec2> regular_vertices(const RegularPolygon& rp) {
  std::vector<Vec2> v;
  v.reserve(rp.n_sides);
  for (int k = 0; k < rp.n_sides; ++k) {
    const double a = rp.rotation + 2.0 * kPi * k / rp.n_sides;
    v.emplace_back(rp.center + rp.circumradius * Vec2(std::cos(a), std::sin(a)));
  }
  return v;
}

double shoelace(const std::vector<Vec2>& v) {
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += cross2(v[i], v[(i + 1) % v.size()]);
  return 0.5 * s;
}

void validate_polygon(const std::vector<Vec2>& v) {
  if (v.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if ((v[i] - v[(i + 1) % v.size()]).norm() == 0.0)
      throw GeometryError("polygon has a zero-length edge");
  }
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
        throw GeometryError("polygon boundary self-intersects");
    }
  }
  if (std::abs(shoelace(v)) <= 0.0) throw GeometryError("polygon has zero area");
}

}  // namespace

SpectralPoint::SpectralPoint(double lambda_um) : lambda_(lambda_um) {
  if (!(lambda_um > 0) || !std::isfinite(lambda_um))
    throw DomainError("vacuum wavelength must be positive");
  k0_ = 2.0 * kPi / lambda_um;
  omega_ = kSpeedOfLight * k0_;
}

Material Material::constant(cplx eps) { return Material(ConstantModel{eps}); }

Material Material::drude(double eps_inf, double omega_p, double gamma) {
  if (omega_p < 0 || gamma < 0) throw DomainError("Drude parameters must be non-negative");
  return Material(DrudeModel{eps_inf, omega_p, gamma});
}

Material Material::table(std::vector<double> lambda_um, std::vector<cplx> eps) {
  if (lambda_um.size() != eps.size() || lambda_um.size() < 2)
    throw DomainError("permittivity table needs at least two (lambda, eps) pairs");
  for (std::size_t i = 1; i < lambda_um.size(); ++i) {
    if (!(lambda_um[i] > lambda_um[i - 1]))
      throw DomainError("permittivity table wavelengths must be strictly increasing");
  }
  return Material(TableModel{std::move(lambda_um), std::move(eps)});
}

cplx permittivity(const Material& material, const SpectralPoint& sp) {
  const cplx eps = std::visit(
      [&](const auto& m) -> cplx {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          return m.eps;
        } else if constexpr (std::is_same_v<T, DrudeModel>) {
          const double w = sp.omega();
          return m.eps_inf - m.omega_p * m.omega_p / (w * w + cplx(0.0, m.gamma * w));
        } else {
          const double l = sp.lambda();
          if (l < m.lambda_um.front() || l > m.lambda_um.back())
            throw RangeError("wavelength " + std::to_string(l) + " um outside permittivity table range");
          const auto it = std::upper_bound(m.lambda_um.begin(), m.lambda_um.end(), l);
          const std::size_t hi = std::min<std::size_t>(it - m.lambda_um.begin(), m.lambda_um.size() - 1);
          const std::size_t lo = hi - 1;
          const double t = (l - m.lambda_um[lo]) / (m.lambda_um[hi] - m.lambda_um[lo]);
          return (1.0 - t) * m.eps[lo] + t * m.eps[hi];
        }
      },
      material.model_);
  return material.lossless_ ? cplx(eps.real(), 0.0) : eps;
}

Material lossless_variant(const Material& material) { return Material(material.model_, true); }

Background::Background(Homogeneous h) : layers_(h) {
  if (std::abs(h.eps1.imag()) > 1e-12 * std::abs(h.eps1) || !(h.eps1.real() > 0))
    throw DomainError("background medium must be a lossless dielectric");
}

Background::Background(TwoLayer t) : layers_(t) {
  if (std::abs(t.eps1.imag()) > 1e-12 * std::abs(t.eps1) || !(t.eps1.real() > 0))
    throw DomainError("superstrate must be a lossless dielectric");
  if (t.eps3.imag() < 0) throw DomainError("substrate must be passive (Im eps3 >= 0)");
}

cplx Background::superstrate() const {
  return std::visit([](const auto& l) { return l.eps1; }, layers_);
}

cplx Background::eps_at(const Vec2& r) const {
  if (const auto* t = std::get_if<TwoLayer>(&layers_)) return r.y() >= 0 ? t->eps1 : t->eps3;
  return std::get<Homogeneous>(layers_).eps1;
}

double Background::n_max() const {
  const double n1 = std::sqrt(superstrate().real());
  if (const auto* t = std::get_if<TwoLayer>(&layers_)) {
    return std::max(n1, std::sqrt(std::max(t->eps3.real(), 0.0)));
  }
  return n1;
}

CrossSection::CrossSection(Shape shape, Material material)
    : shape_(std::move(shape)), material_(std::move(material)) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          if (!(s.radius > 0)) throw GeometryError("circle radius must be positive");
        } else if constexpr (std::is_same_v<T, RegularPolygon>) {
          if (s.n_sides < 3) throw GeometryError("regular polygon needs at least 3 sides");
          if (!(s.circumradius > 0)) throw GeometryError("circumradius must be positive");
        } else {
          validate_polygon(s.vertices);
        }
      },
      shape_);
}

std::vector<Vec2> CrossSection::vertices() const {
  if (const auto* rp = std::get_if<RegularPolygon>(&shape_)) return regular_vertices(*rp);
  if (const auto* p = std::get_if<Polygon>(&shape_)) return p->vertices;
  return {};
}

bool CrossSection::contains(const Vec2& p) const {
  if (const auto* c = std::get_if<Circle>(&shape_)) return (p - c->center).norm() < c->radius;
  const auto v = vertices();
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y() > p.y()) != (v[j].y() > p.y())) {
      const double x = v[j].x() + (p.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

double CrossSection::area() const {
  if (const auto* c = std::get_if<Circle>(&shape_)) return kPi * c->radius * c->radius;
  return std::abs(shoelace(vertices()));
}

double CrossSection::perimeter() const {
  if (const auto* c = std::get_if<Circle>(&shape_)) return 2.0 * kPi * c->radius;
  const auto v = vertices();
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += (v[(i + 1) % v.size()] - v[i]).norm();
  return s;
}

Vec2 CrossSection::center() const {
  if (const auto* c = std::get_if<Circle>(&shape_)) return c->center;
  if (const auto* rp = std::get_if<RegularPolygon>(&shape_)) return rp->center;
  // area centroid
  const auto& v = std::get<Polygon>(shape_).vertices;
  Vec2 acc = Vec2::Zero();
  double a2 = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    const double w = cross2(p, q);
    acc += w * (p + q);
    a2 += w;
  }
  return acc / (3.0 * a2);
}

double CrossSection::feature_size() const {
  if (const auto* c = std::get_if<Circle>(&shape_)) return c->radius;
  const auto v = vertices();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) m = std::min(m, (v[(i + 1) % v.size()] - v[i]).norm());
  return m;
}

double CrossSection::distance_to_boundary(const Vec2& p) const {
  if (const auto* c = std::get_if<Circle>(&shape_)) return std::abs((p - c->center).norm() - c->radius);
  const auto v = vertices();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) m = std::min(m, segment_distance(p, v[i], v[(i + 1) % v.size()]));
  return m;
}

Vec2 CrossSection::boundary_along(const Vec2& dir) const {
  const double n = dir.norm();
  if (!(n > 0)) throw DomainError("ray direction must be non-zero");
  const Vec2 d = dir / n;
  const Vec2 c = center();
  if (const auto* circ = std::get_if<Circle>(&shape_)) return c + circ->radius * d;
  const auto v = vertices();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i];
    const Vec2 e = v[(i + 1) % v.size()] - a;
    const double den = cross2(d, e);
    if (std::abs(den) < 1e-300) continue;
    const double t = cross2(a - c, e) / den;
    const double s = cross2(a - c, d) / den;
    if (t > 0 && s >= -1e-12 && s <= 1.0 + 1e-12) best = std::min(best, t);
  }
  if (!std::isfinite(best)) throw GeometryError("ray from the center does not leave the cross-section");
  return c + best * d;
}

std::pair<Vec2, Vec2> CrossSection::bounds() const {
  if (const auto* c = std::get_if<Circle>(&shape_)) {
    const Vec2 r(c->radius, c->radius);
    return {c->center - r, c->center + r};
  }
  const auto v = vertices();
  Vec2 lo = v.front(), hi = v.front();
  for (const auto& p : v) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

bool Mesh::null_contrast() const {
  return std::all_of(cells.begin(), cells.end(), [](const MeshCell& c) { return c.delta_eps == cplx(0.0); });
}

bool Mesh::inside_cell(const Vec2& p) const {
  const double half = 0.5 * h;
  return std::any_of(cells.begin(), cells.end(), [&](const MeshCell& c) {
    return std::abs(p.x() - c.center.x()) < half && std::abs(p.y() - c.center.y()) < half;
  });
}

double Mesh::min_distance_to_centers(const Vec2& p) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : cells) m = std::min(m, (p - c.center).norm());
  return m;
}

Mesh build_mesh(const CrossSection& cs, const Background& background, double h, const SpectralPoint& sp) {
  if (!(h > 0)) throw GeometryError("mesh pitch must be positive");
  if (h > cs.feature_size() / 4.0 * (1.0 + 1e-12))
    throw GeometryError("mesh pitch exceeds a quarter of the smallest feature size");
  const auto [lo, hi] = cs.bounds();
  if (background.is_two_layer() && !(lo.y() > 0))
    throw GeometryError("guide must lie entirely inside the superstrate (y > 0)");

  Mesh mesh;
  mesh.h = h;
  mesh.origin = cs.center();
  const cplx eps_guide = permittivity(cs.material(), sp);
  const int ix0 = static_cast<int>(std::floor((lo.x() - mesh.origin.x()) / h)) - 1;
  const int ix1 = static_cast<int>(std::ceil((hi.x() - mesh.origin.x()) / h)) + 1;
  const int iy0 = static_cast<int>(std::floor((lo.y() - mesh.origin.y()) / h)) - 1;
  const int iy1 = static_cast<int>(std::ceil((hi.y() - mesh.origin.y()) / h)) + 1;
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      const Vec2 c = mesh.origin + h * Vec2(ix + 0.5, iy + 0.5);
      if (!cs.contains(c)) continue;
      mesh.cells.push_back({c, h * h, eps_guide - background.eps_at(c), ix, iy});
    }
  }
  if (mesh.cells.empty()) throw GeometryError("mesh has no cells; reduce the pitch");
  return mesh;
}

EmitterSpec::EmitterSpec(const Vec2& position, const Vec3& orientation, const CrossSection* guide)
    : position_(position) {
  const double n = orientation.norm();
  if (!(n > 0)) throw DomainError("dipole orientation must be non-zero");
  u_ = orientation / n;
  if (guide) {
    if (guide->contains(position)) throw DomainError("emitter position lies inside the cross-section");
    distance_ = guide->distance_to_boundary(position);
  } else {
    distance_ = std::numeric_limits<double>::infinity();
  }
}

EmitterSpec emitter_along_ray(const CrossSection& cs, const Vec2& dir, double d, const Vec3& local) {
  if (!(d > 0)) throw DomainError("emitter surface distance must be positive");
  const Vec2 r = dir.normalized();
  const Vec2 pos = cs.boundary_along(r) + d * r;
  const Vec3 u = local.x() * Vec3(r.x(), r.y(), 0) + local.y() * Vec3(-r.y(), r.x(), 0) + local.z() * Vec3::UnitZ();
  return EmitterSpec(pos, u, &cs);
}

bool mesh_limited(const EmitterSpec& emitter, const Mesh& mesh) {
  return mesh.min_distance_to_centers(emitter.position()) < mesh.h;
}

}  // namespace wgldos
