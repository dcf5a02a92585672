#include "config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "toml.hpp"

namespace wgldos::cli {

namespace {

std::string anchored(const std::string& message, int line, int column) {
  if (line <= 0) return message;
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
}

[[noreturn]] void fail_at(const toml::node* node, const std::string& message) {
  if (node != nullptr && node->source().begin) {
    throw ConfigError(message, static_cast<int>(node->source().begin.line),
                      static_cast<int>(node->source().begin.column));
  }
  throw ConfigError(message);
}

// Schema reader over one table: typed getters record the resolved value and the key as known.
class Section {
 public:
  Section(const toml::table* table, std::string name, toml::table& resolved)
      : table_(table), name_(std::move(name)), out_(resolved) {}

  bool has(const std::string& key) const { return node(key) != nullptr; }

  const toml::node* node(const std::string& key) const { return table_ ? table_->get(key) : nullptr; }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    seen_.insert(key);
    const toml::node* n = node(key);
    double v;
    if (n == nullptr) {
      if (!fallback) missing(key);
      v = *fallback;
    } else {
      v = as_number(n, key);
    }
    out_.insert_or_assign(key, v);
    return v;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) {
      seen_.insert(key);
      return std::nullopt;
    }
    return number(key);
  }

  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
    seen_.insert(key);
    const toml::node* n = node(key);
    std::int64_t v;
    if (n == nullptr) {
      if (!fallback) missing(key);
      v = *fallback;
    } else if (auto i = n->value_exact<std::int64_t>()) {
      v = *i;
    } else {
      fail_at(n, where(key) + " must be an integer");
    }
    out_.insert_or_assign(key, v);
    return static_cast<int>(v);
  }

  bool boolean(const std::string& key, bool fallback) {
    seen_.insert(key);
    const toml::node* n = node(key);
    bool v = fallback;
    if (n != nullptr) {
      auto b = n->value_exact<bool>();
      if (!b) fail_at(n, where(key) + " must be true or false");
      v = *b;
    }
    out_.insert_or_assign(key, v);
    return v;
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    seen_.insert(key);
    const toml::node* n = node(key);
    std::string v;
    if (n == nullptr) {
      if (!fallback) missing(key);
      v = *fallback;
    } else if (auto s = n->value_exact<std::string>()) {
      v = *s;
    } else {
      fail_at(n, where(key) + " must be a string");
    }
    out_.insert_or_assign(key, v);
    return v;
  }

  std::string choice(const std::string& key, std::initializer_list<const char*> options,
                     std::optional<std::string> fallback = std::nullopt) {
    const std::string v = string(key, fallback);
    for (const char* o : options)
      if (v == o) return v;
    std::string list;
    for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
    fail_at(node(key), where(key) + " must be one of " + list + " (got \"" + v + "\")");
  }

  /// Real number or [re, im].
  cplx complex(const std::string& key, std::optional<cplx> fallback = std::nullopt) {
    seen_.insert(key);
    const toml::node* n = node(key);
    cplx v;
    if (n == nullptr) {
      if (!fallback) missing(key);
      v = *fallback;
    } else {
      v = as_complex(n, key);
    }
    out_.insert_or_assign(key, toml::array{v.real(), v.imag()});
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::size_t min_count = 1,
                              std::optional<std::size_t> exact = std::nullopt) {
    seen_.insert(key);
    const toml::node* n = node(key);
    if (n == nullptr) missing(key);
    const toml::array* a = n->as_array();
    if (a == nullptr) fail_at(n, where(key) + " must be an array of numbers");
    std::vector<double> v;
    toml::array copy;
    for (const toml::node& el : *a) {
      v.push_back(as_number(&el, key));
      copy.push_back(v.back());
    }
    if (exact && v.size() != *exact)
      fail_at(n, where(key) + " must have exactly " + std::to_string(*exact) + " entries");
    if (v.size() < min_count) fail_at(n, where(key) + " needs at least " + std::to_string(min_count) + " entries");
    out_.insert_or_assign(key, copy);
    return v;
  }

  /// Fixed-length array with a default.
  std::vector<double> numbers_or(const std::string& key, const std::vector<double>& fallback) {
    if (has(key)) return numbers(key, fallback.size(), fallback.size());
    seen_.insert(key);
    toml::array copy;
    for (double x : fallback) copy.push_back(x);
    out_.insert_or_assign(key, copy);
    return fallback;
  }

  std::vector<cplx> complexes(const std::string& key) {
    seen_.insert(key);
    const toml::node* n = node(key);
    if (n == nullptr) missing(key);
    const toml::array* a = n->as_array();
    if (a == nullptr) fail_at(n, where(key) + " must be an array");
    std::vector<cplx> v;
    toml::array copy;
    for (const toml::node& el : *a) {
      v.push_back(as_complex(&el, key));
      copy.push_back(toml::array{v.back().real(), v.back().imag()});
    }
    out_.insert_or_assign(key, copy);
    return v;
  }

  std::vector<Vec2> points(const std::string& key) {
    seen_.insert(key);
    const toml::node* n = node(key);
    if (n == nullptr) missing(key);
    const toml::array* a = n->as_array();
    if (a == nullptr || a->empty()) fail_at(n, where(key) + " must be a non-empty array of [x, y] pairs");
    std::vector<Vec2> v;
    toml::array copy;
    for (const toml::node& el : *a) {
      const toml::array* p = el.as_array();
      if (p == nullptr || p->size() != 2) fail_at(&el, where(key) + " entries must be [x, y] pairs");
      v.emplace_back(as_number(p->get(0), key), as_number(p->get(1), key));
      copy.push_back(toml::array{v.back().x(), v.back().y()});
    }
    out_.insert_or_assign(key, copy);
    return v;
  }

  /// Sub-table; the name is recorded as known.
  const toml::table* subtable(const std::string& key) {
    seen_.insert(key);
    const toml::node* n = node(key);
    if (n == nullptr) return nullptr;
    const toml::table* t = n->as_table();
    if (t == nullptr) fail_at(n, where(key) + " must be a table");
    return t;
  }

  /// Rejects keys no getter asked for.
  void finish() const {
    if (table_ == nullptr) return;
    for (auto&& [k, v] : *table_) {
      if (!seen_.count(std::string(k.str()))) {
        const auto& src = k.source().begin ? k.source() : v.source();
        throw ConfigError("unknown key \"" + std::string(k.str()) + "\" in " + label(), static_cast<int>(src.begin.line),
                          static_cast<int>(src.begin.column));
      }
    }
  }

  std::string where(const std::string& key) const { return label() + "." + key; }
  std::string label() const { return name_.empty() ? "top level" : "[" + name_ + "]"; }

 private:
  [[noreturn]] void missing(const std::string& key) const {
    if (table_ != nullptr) fail_at(table_, "missing required key " + where(key));
    throw ConfigError("missing required key " + where(key));
  }

  double as_number(const toml::node* n, const std::string& key) const {
    if (auto d = n->value_exact<double>()) return *d;
    if (auto i = n->value_exact<std::int64_t>()) return static_cast<double>(*i);
    fail_at(n, where(key) + " must be a number");
  }

  cplx as_complex(const toml::node* n, const std::string& key) const {
    if (const toml::array* a = n->as_array()) {
      if (a->size() != 2) fail_at(n, where(key) + " complex values are [re, im]");
      return {as_number(a->get(0), key), as_number(a->get(1), key)};
    }
    return {as_number(n, key), 0.0};
  }

  const toml::table* table_;
  std::string name_;
  toml::table& out_;
  std::set<std::string> seen_;
};

toml::array json_array(const nlohmann::json& j);

toml::table json_table(const nlohmann::json& j) {
  toml::table t;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& v = it.value();
    if (v.is_object()) {
      t.insert_or_assign(it.key(), json_table(v));
    } else if (v.is_array()) {
      t.insert_or_assign(it.key(), json_array(v));
    } else if (v.is_boolean()) {
      t.insert_or_assign(it.key(), v.get<bool>());
    } else if (v.is_number_integer()) {
      t.insert_or_assign(it.key(), v.get<std::int64_t>());
    } else if (v.is_number()) {
      t.insert_or_assign(it.key(), v.get<double>());
    } else if (v.is_string()) {
      t.insert_or_assign(it.key(), v.get<std::string>());
    } else {
      throw ConfigError("null or unsupported value for key \"" + it.key() + "\"");
    }
  }
  return t;
}

toml::array json_array(const nlohmann::json& j) {
  toml::array a;
  for (const auto& v : j) {
    if (v.is_array()) {
      a.push_back(json_array(v));
    } else if (v.is_object()) {
      a.push_back(json_table(v));
    } else if (v.is_boolean()) {
      a.push_back(v.get<bool>());
    } else if (v.is_number_integer()) {
      a.push_back(v.get<std::int64_t>());
    } else if (v.is_number()) {
      a.push_back(v.get<double>());
    } else if (v.is_string()) {
      a.push_back(v.get<std::string>());
    } else {
      throw ConfigError("null or unsupported array entry");
    }
  }
  return a;
}

Vec3 named_orientation(const std::string& name, const toml::node* at, const std::string& key) {
  if (name == "x") return {1, 0, 0};
  if (name == "y") return {0, 1, 0};
  if (name == "z") return {0, 0, 1};
  fail_at(at, key + " must be x, y, z, radial, tangential or a 3-vector (got \"" + name + "\")");
}

Material read_material(Section& s) {
  const std::string model = s.choice("model", {"constant", "drude", "table"}, "constant");
  if (model == "constant") return Material::constant(s.complex("eps"));
  if (model == "drude") return Material::drude(s.number("eps_inf"), s.number("omega_p_rad_s"), s.number("gamma_rad_s"));
  const std::vector<double> lam = s.numbers("lambda_um", 2);
  const std::vector<cplx> eps = s.complexes("eps");
  if (lam.size() != eps.size()) fail_at(s.node("eps"), s.where("eps") + " must match lambda_um in length");
  return Material::table(lam, eps);
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line, int column)
    : wgldos::ConfigError(anchored(message, line, column)), bare_(message), line_(line), column_(column) {}

RunConfig parse_config(const std::string& text, bool json, const std::string& source_name, const Overrides& ov) {
  toml::table root;
  if (json) {
    try {
      const auto j = nlohmann::json::parse(text);
      if (!j.is_object()) throw ConfigError("JSON config must be an object");
      root = json_table(j);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("JSON syntax: ") + e.what());
    }
  } else {
    try {
      root = toml::parse(text, source_name);
    } catch (const toml::parse_error& e) {
      throw ConfigError(std::string(e.description()), static_cast<int>(e.source().begin.line),
                        static_cast<int>(e.source().begin.column));
    }
  }

  toml::table out;
  auto section_out = [&](const char* name) -> toml::table& {
    out.insert_or_assign(name, toml::table{});
    return *out[name].as_table();
  };
  Section top(&root, "", out);

  // [spectral]
  Section spectral(top.subtable("spectral"), "spectral", section_out("spectral"));
  const double lambda = spectral.number("lambda_um", 1.0);
  if (!(lambda > 0.0)) fail_at(spectral.node("lambda_um"), "[spectral].lambda_um must be positive");
  spectral.finish();
  const SpectralPoint sp(lambda);

  // [background]
  Section bg(top.subtable("background"), "background", section_out("background"));
  const std::string kind = bg.choice("kind", {"homogeneous", "two_layer"}, "homogeneous");
  const cplx eps1 = bg.complex("eps1", cplx(1.0));
  std::optional<Background> background;
  if (kind == "homogeneous") {
    background.emplace(Homogeneous{eps1});
  } else {
    background.emplace(TwoLayer{eps1, bg.complex("eps3")});
  }
  bg.finish();

  // [guide]
  std::optional<CrossSection> guide;
  const toml::table* gt = top.subtable("guide");
  if (gt != nullptr) {
    Section g(gt, "guide", section_out("guide"));
    const std::string shape = g.choice("shape", {"circle", "regular_polygon", "polygon"});
    CrossSection::Shape geometry;
    if (shape == "polygon") {
      std::vector<Vec2> v = g.points("vertices_nm");
      for (auto& p : v) p *= 1e-3;
      geometry = Polygon{v};
    } else {
      const std::vector<double> c = g.numbers("center_nm", 2, 2);
      const Vec2 center(c[0] * 1e-3, c[1] * 1e-3);
      if (shape == "circle") {
        geometry = Circle{center, g.number("radius_nm") * 1e-3};
      } else {
        const double rho = g.number("circumradius_nm") * 1e-3;
        const int sides = g.integer("sides");
        const double rot = g.number("rotation_deg", 90.0) * std::numbers::pi / 180.0;
        geometry = RegularPolygon{center, rho, sides, rot};
      }
    }
    Section m(g.subtable("material"), "guide.material", [&]() -> toml::table& {
      out["guide"].as_table()->insert_or_assign("material", toml::table{});
      return *out["guide"]["material"].as_table();
    }());
    if (!g.has("material")) fail_at(gt, "missing required table [guide.material]");
    const Material material = read_material(m);
    m.finish();
    g.finish();
    guide.emplace(geometry, material);
  }

  // [mesh]
  Section mesh(top.subtable("mesh"), "mesh", section_out("mesh"));
  const double h = mesh.number("h_nm", 2.0) * 1e-3;
  if (!(h > 0.0)) fail_at(mesh.node("h_nm"), "[mesh].h_nm must be positive");
  mesh.finish();

  // [sommerfeld]
  Section so(top.subtable("sommerfeld"), "sommerfeld", section_out("sommerfeld"));
  green::SommerfeldOptions sopts;
  sopts.detour_depth = so.number("detour_depth", sopts.detour_depth);
  sopts.detour_extent = so.number("detour_extent", sopts.detour_extent);
  sopts.rel_tol = so.number("rel_tol", sopts.rel_tol);
  sopts.tail_tol = so.number("tail_tol", sopts.tail_tol);
  sopts.ceiling = so.number("ceiling", sopts.ceiling);
  so.finish();

  // [spectrum]
  const toml::table* st = top.subtable("spectrum");
  toml::table& spec_out = section_out("spectrum");
  Section s(st, "spectrum", spec_out);
  ldos::SpectrumOptions opts;
  opts.k_max = s.number("k_max", opts.k_max);
  const double tol_cfg = s.number("tol", opts.tol);
  opts.tol = ov.tol ? *ov.tol : tol_cfg;
  spec_out.insert_or_assign("tol", opts.tol);
  opts.octave_tol = s.number("octave_tol", opts.octave_tol);
  opts.guard = s.number("guard", opts.guard);
  opts.panel_width = s.number("panel_width", opts.panel_width);
  opts.min_peak_samples = s.integer("min_peak_samples", opts.min_peak_samples);
  opts.max_level = s.integer("max_level", opts.max_level);
  opts.strict = s.boolean("strict", opts.strict);
  if (s.has("band")) {
    const auto b = s.numbers("band", 2, 2);
    if (!(b[0] >= 0.0 && b[1] > b[0])) fail_at(s.node("band"), "[spectrum].band must be [lo, hi] with 0 <= lo < hi");
    opts.band = std::make_pair(b[0], b[1]);
  } else {
    s.optional_number("band");
  }
  if (!(opts.tol > 0.0)) throw ConfigError("[spectrum].tol must be positive");
  s.finish();

  // [run]
  Section run(top.subtable("run"), "run", section_out("run"));
  const int workers_cfg = run.integer("workers", 1);
  const std::string out_cfg = run.string("out_dir", ".");
  const bool lossless_cfg = run.boolean("lossless", false);
  run.finish();
  opts.workers = ov.workers ? *ov.workers : workers_cfg;
  if (opts.workers < 1) throw ConfigError("workers must be at least 1");
  out["run"].as_table()->insert_or_assign("workers", static_cast<std::int64_t>(opts.workers));
  const bool lossless = ov.lossless || lossless_cfg;
  out["run"].as_table()->insert_or_assign("lossless", lossless);
  const std::string out_dir = ov.out_dir ? *ov.out_dir : out_cfg;
  out["run"].as_table()->insert_or_assign("out_dir", out_dir);

  ldos::Problem problem{*background, guide, sp, h, sopts};
  if (lossless) problem = problem.lossless();

  // [emitters]
  std::vector<EmitterSpec> emitters;
  std::vector<double> distances_nm;
  const toml::table* et = top.subtable("emitters");
  if (et == nullptr) throw ConfigError("missing required table [emitters]");
  {
    Section e(et, "emitters", section_out("emitters"));
    const toml::node* on = e.node("orientation");
    std::string oname = "radial";
    std::optional<Vec3> ovec;
    if (on != nullptr && on->is_array()) {
      const auto v = e.numbers("orientation", 3, 3);
      ovec = Vec3(v[0], v[1], v[2]);
      if (ovec->norm() == 0.0) fail_at(on, "[emitters].orientation must be non-zero");
    } else {
      oname = e.choice("orientation", {"radial", "tangential", "x", "y", "z"}, guide ? "radial" : "x");
    }
    const bool by_distance = e.has("distances_nm");
    if (by_distance == e.has("positions_nm"))
      fail_at(et, "[emitters] needs exactly one of distances_nm or positions_nm");
    if ((oname == "radial" || oname == "tangential") && !ovec && !guide)
      fail_at(on ? on : et, "radial or tangential orientation needs a [guide]");

    if (by_distance) {
      if (!guide) fail_at(e.node("distances_nm"), "distances_nm needs a [guide]");
      const auto ray = e.numbers_or("ray", {1.0, 0.0});
      const Vec2 dir = Vec2(ray[0], ray[1]);
      if (dir.norm() == 0.0) fail_at(e.node("ray"), "[emitters].ray must be non-zero");
      const Vec2 r = dir.normalized(), t(-r.y(), r.x());
      Vec3 local;
      if (ovec) {
        const Vec3 u = ovec->normalized();
        local = Vec3(r.x() * u.x() + r.y() * u.y(), t.x() * u.x() + t.y() * u.y(), u.z());
      } else if (oname == "radial") {
        local = Vec3(1, 0, 0);
      } else if (oname == "tangential") {
        local = Vec3(0, 1, 0);
      } else {
        const Vec3 u = named_orientation(oname, on, "[emitters].orientation");
        local = Vec3(r.x() * u.x() + r.y() * u.y(), t.x() * u.x() + t.y() * u.y(), u.z());
      }
      for (double d : e.numbers("distances_nm")) {
        if (!(d > 0.0)) fail_at(e.node("distances_nm"), "[emitters].distances_nm must be positive");
        emitters.push_back(emitter_along_ray(*guide, dir, d * 1e-3, local));
        distances_nm.push_back(d);
      }
    } else {
      if (e.has("ray")) fail_at(e.node("ray"), "[emitters].ray applies to distances_nm only");
      for (Vec2 p : e.points("positions_nm")) {
        p *= 1e-3;
        Vec3 u;
        if (ovec) {
          u = ovec->normalized();
        } else if (oname == "radial" || oname == "tangential") {
          const Vec2 r = (p - guide->center()).normalized();
          u = oname == "radial" ? Vec3(r.x(), r.y(), 0) : Vec3(-r.y(), r.x(), 0);
        } else {
          u = named_orientation(oname, on, "[emitters].orientation");
        }
        emitters.emplace_back(p, u, guide ? &*guide : nullptr);
      }
    }
    e.finish();
  }

  // [map]
  std::optional<MapGrid> map;
  if (const toml::table* mt = top.subtable("map")) {
    Section m(mt, "map", section_out("map"));
    MapGrid grid{};
    const auto xs = m.numbers("x_nm", 2, 2);
    const auto ys = m.numbers("y_nm", 2, 2);
    grid.x0_nm = xs[0];
    grid.x1_nm = xs[1];
    grid.y0_nm = ys[0];
    grid.y1_nm = ys[1];
    grid.nx = m.integer("nx", 41);
    grid.ny = m.integer("ny", 41);
    if (grid.nx < 1 || grid.ny < 1) throw ConfigError("[map].nx and [map].ny must be at least 1");
    grid.k_z_over_k0 = m.optional_number("k_z_over_k0");
    const toml::node* on = m.node("orientation");
    if (on != nullptr && on->is_array()) {
      const auto v = m.numbers("orientation", 3, 3);
      grid.orientation = Vec3(v[0], v[1], v[2]).normalized();
    } else {
      const std::string o = m.choice("orientation", {"trace", "x", "y", "z"}, "trace");
      if (o != "trace") grid.orientation = named_orientation(o, on, "[map].orientation");
    }
    m.finish();
    map = grid;
  }
  top.finish();

  RunConfig cfg{source_name, problem, emitters, distances_nm, opts, map, out_dir, lossless, {}};
  std::ostringstream os;
  os << out;
  cfg.resolved = os.str();
  return cfg;
}

RunConfig load_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return parse_config(buf.str(), json, path, overrides);
}

}  // namespace wgldos::cli
