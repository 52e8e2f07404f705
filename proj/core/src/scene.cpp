#include "mpm/scene.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "mpm/errors.hpp"

namespace mpm {

using nlohmann::json;

std::string_view to_string(Integrator integrator) {
  switch (integrator) {
    case Integrator::kExplicit: return "explicit";
    case Integrator::kSecantLumped: return "secant_lumped";
    case Integrator::kSecantFullLs: return "secant_full_ls";
  }
  return "explicit";
}

std::optional<Integrator> parse_integrator(std::string_view name) {
  if (name == "explicit") return Integrator::kExplicit;
  if (name == "secant_lumped") return Integrator::kSecantLumped;
  if (name == "secant_full_ls") return Integrator::kSecantFullLs;
  return std::nullopt;
}

namespace {

std::string_view to_string(WallCondition wall) {
  return wall == WallCondition::kSticky ? "sticky" : "slip";
}

std::string_view to_string(CflPolicy policy) {
  switch (policy) {
    case CflPolicy::kIgnore: return "ignore";
    case CflPolicy::kWarn: return "warn";
    case CflPolicy::kError: return "error";
  }
  return "warn";
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reads one JSON object and rejects keys that were never looked at.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }
  ObjectReader(const ObjectReader&) = delete;
  ObjectReader& operator=(const ObjectReader&) = delete;

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(join(path_, item.key()), "unknown key");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& required(const std::string& key) {
    if (!has(key)) throw ConfigError(join(path_, key), "missing required key");
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key) { return as_number(required(key), path(key)); }
  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return as_number(j_.at(key), path(key));
  }
  long long integer(const std::string& key) { return as_integer(required(key), path(key)); }
  std::optional<long long> optional_integer(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return as_integer(j_.at(key), path(key));
  }
  std::string string(const std::string& key) { return as_string(required(key), path(key)); }
  std::optional<std::string> optional_string(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return as_string(j_.at(key), path(key));
  }
  Vec2 vec2(const std::string& key) { return as_vec2(required(key), path(key)); }
  std::optional<Vec2> optional_vec2(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return as_vec2(j_.at(key), path(key));
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
    return d;
  }
  static long long as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    return v.get<long long>();
  }
  static std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    return v.get<std::string>();
  }
  static Vec2 as_vec2(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(path, "expected [x, y]");
    return Vec2(as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]"));
  }
  static Mat2 as_mat2(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(path, "expected [[a, b], [c, d]]");
    const Vec2 r0 = as_vec2(v[0], path + "[0]");
    const Vec2 r1 = as_vec2(v[1], path + "[1]");
    Mat2 m;
    m << r0.x(), r0.y(), r1.x(), r1.y();
    return m;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

WallCondition parse_wall(const std::string& name, const std::string& path) {
  if (name == "sticky") return WallCondition::kSticky;
  if (name == "slip") return WallCondition::kSlip;
  throw ConfigError(path, "expected \"sticky\" or \"slip\"");
}

GridSpec parse_grid(const json& j) {
  ObjectReader r(j, "grid");
  GridSpec g;
  g.dx = r.number("dx");
  g.nx = static_cast<int>(r.integer("nx"));
  g.ny = static_cast<int>(r.integer("ny"));
  g.origin = r.optional_vec2("origin").value_or(Vec2::Zero());
  g.boundary_band = static_cast<int>(r.optional_integer("boundary_band").value_or(2));
  if (r.has("bc")) {
    const json& bc = j.at("bc");
    if (bc.is_string()) {
      const WallCondition all = parse_wall(bc.get<std::string>(), r.path("bc"));
      g.walls = WallConditions{all, all, all, all};
    } else {
      ObjectReader w(bc, r.path("bc"));
      auto wall = [&](const char* key, WallCondition& out) {
        if (auto name = w.optional_string(key)) out = parse_wall(*name, w.path(key));
      };
      wall("left", g.walls.left);
      wall("right", g.walls.right);
      wall("bottom", g.walls.bottom);
      wall("top", g.walls.top);
      w.finish();
    }
  }
  r.finish();
  return g;
}

Material parse_material(const json& j) {
  ObjectReader r(j, "material");
  Material m;
  m.E = r.number("E");
  m.nu = r.number("nu");
  m.rho = r.number("rho");
  r.finish();
  return m;
}

Region parse_region(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  Region region;
  region.min = r.vec2("min");
  region.max = r.vec2("max");
  region.ppc = static_cast<int>(r.optional_integer("ppc").value_or(4));
  region.velocity = r.optional_vec2("velocity").value_or(Vec2::Zero());
  if (r.has("affine")) region.affine = ObjectReader::as_mat2(j.at("affine"), r.path("affine"));
  r.finish();
  return region;
}

SubstepPolicy parse_substeps(const json& j) {
  ObjectReader r(j, "substeps");
  SubstepPolicy policy;
  const std::string mode = r.string("mode");
  if (mode == "auto_cfl") {
    policy.kind = SubstepPolicy::Kind::kAutoCfl;
  } else if (mode == "fixed") {
    policy.kind = SubstepPolicy::Kind::kFixed;
    policy.count = static_cast<int>(r.integer("count"));
  } else {
    throw ConfigError(r.path("mode"), "expected \"auto_cfl\" or \"fixed\"");
  }
  policy.cfl = r.optional_number("cfl").value_or(0.5);
  r.finish();
  return policy;
}

CflPolicy parse_cfl_policy(const std::string& name, const std::string& path) {
  if (name == "ignore") return CflPolicy::kIgnore;
  if (name == "warn") return CflPolicy::kWarn;
  if (name == "error") return CflPolicy::kError;
  throw ConfigError(path, "expected \"ignore\", \"warn\" or \"error\"");
}

json vec2_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

}  // namespace

void SceneConfig::validate() const {
  if (!(grid.dx > 0.0)) throw ConfigError("grid.dx", "must be positive");
  if (grid.nx < 8) throw ConfigError("grid.nx", "must be at least 8");
  if (grid.ny < 8) throw ConfigError("grid.ny", "must be at least 8");
  if (grid.boundary_band < 2) throw ConfigError("grid.boundary_band", "must be at least 2");
  try {
    grid.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError("grid", e.what());
  }
  if (!(material.E > 0.0)) throw ConfigError("material.E", "must be positive");
  if (!(material.nu >= 0.0 && material.nu < 0.5)) {
    throw ConfigError("material.nu", "must lie in [0, 0.5)");
  }
  if (!(material.rho > 0.0)) throw ConfigError("material.rho", "must be positive");
  if (regions.empty()) throw ConfigError("regions", "at least one region is required");
  const Vec2 lo = grid.interior_min();
  const Vec2 hi = grid.interior_max();
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Region& r = regions[i];
    const std::string path = "regions[" + std::to_string(i) + "]";
    if (r.ppc < 1) throw ConfigError(path + ".ppc", "must be at least 1");
    if (!(r.min.x() < r.max.x() && r.min.y() < r.max.y())) {
      throw ConfigError(path, "min must be strictly below max");
    }
    if (r.min.x() < lo.x() || r.min.y() < lo.y() || r.max.x() > hi.x() || r.max.y() > hi.y()) {
      std::ostringstream os;
      os << "region [" << r.min.x() << ", " << r.max.x() << "] x [" << r.min.y() << ", "
         << r.max.y() << "] reaches into the boundary band (interior is [" << lo.x() << ", "
         << hi.x() << "] x [" << lo.y() << ", " << hi.y() << "])";
      throw ConfigError(path, os.str());
    }
  }
  if (!(macro_dt > 0.0)) throw ConfigError("macro_dt", "must be positive");
  if (substeps.kind == SubstepPolicy::Kind::kFixed && substeps.count < 1) {
    throw ConfigError("substeps.count", "must be at least 1");
  }
  if (!(substeps.cfl > 0.0 && substeps.cfl <= 1.0)) {
    throw ConfigError("substeps.cfl", "must lie in (0, 1]");
  }
  if (frames < 1) throw ConfigError("frames", "must be at least 1");
  if (lambda && !(*lambda >= 0.0)) throw ConfigError("lambda", "must be >= 0");
  if (!(cg_tol > 0.0)) throw ConfigError("cg_tol", "must be positive");
  if (cg_max_iter < 0) throw ConfigError("cg_max_iter", "must be >= 0");
}

SceneConfig parse_scene(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed scene document: ") + e.what());
  }

  SceneConfig c;
  {
    ObjectReader r(doc, "");
    c.grid = parse_grid(r.required("grid"));
    c.material = parse_material(r.required("material"));
    c.gravity = r.optional_vec2("gravity").value_or(Vec2::Zero());

    const json& regions = r.required("regions");
    if (!regions.is_array()) throw ConfigError("regions", "expected an array");
    for (std::size_t i = 0; i < regions.size(); ++i) {
      c.regions.push_back(parse_region(regions[i], "regions[" + std::to_string(i) + "]"));
    }

    const std::string integrator = r.string("integrator");
    const auto parsed = parse_integrator(integrator);
    if (!parsed) {
      throw ConfigError("integrator",
                        "expected \"explicit\", \"secant_lumped\" or \"secant_full_ls\"");
    }
    c.integrator = *parsed;

    const bool has_macro = r.has("macro_dt");
    const bool has_frame = r.has("frame_dt");
    if (has_macro && has_frame) throw ConfigError("frame_dt", "give macro_dt or frame_dt, not both");
    if (!has_macro && !has_frame) throw ConfigError("macro_dt", "missing required key");
    c.macro_dt = has_macro ? r.number("macro_dt") : r.number("frame_dt");

    if (r.has("substeps")) c.substeps = parse_substeps(doc.at("substeps"));
    c.frames = static_cast<int>(r.integer("frames"));
    if (auto seed = r.optional_integer("rng_seed")) {
      if (*seed < 0) throw ConfigError("rng_seed", "must be non-negative");
      c.rng_seed = static_cast<std::uint64_t>(*seed);
    }
    c.lambda = r.optional_number("lambda");
    c.cg_tol = r.optional_number("cg_tol").value_or(1e-10);
    c.cg_max_iter = static_cast<int>(r.optional_integer("cg_max_iter").value_or(0));
    if (auto policy = r.optional_string("cfl_policy")) {
      c.cfl_policy = parse_cfl_policy(*policy, "cfl_policy");
    }
    r.finish();
  }
  c.validate();
  return c;
}

std::string scene_to_json(const SceneConfig& c) {
  json j;
  j["grid"] = {{"dx", c.grid.dx},
               {"nx", c.grid.nx},
               {"ny", c.grid.ny},
               {"origin", vec2_json(c.grid.origin)},
               {"boundary_band", c.grid.boundary_band},
               {"bc",
                {{"left", to_string(c.grid.walls.left)},
                 {"right", to_string(c.grid.walls.right)},
                 {"bottom", to_string(c.grid.walls.bottom)},
                 {"top", to_string(c.grid.walls.top)}}}};
  j["material"] = {{"E", c.material.E}, {"nu", c.material.nu}, {"rho", c.material.rho}};
  j["gravity"] = vec2_json(c.gravity);
  j["regions"] = json::array();
  for (const Region& r : c.regions) {
    json region = {{"min", vec2_json(r.min)},
                   {"max", vec2_json(r.max)},
                   {"ppc", r.ppc},
                   {"velocity", vec2_json(r.velocity)}};
    if (r.affine) {
      const Mat2& A = *r.affine;
      region["affine"] = json::array({json::array({A(0, 0), A(0, 1)}),
                                      json::array({A(1, 0), A(1, 1)})});
    }
    j["regions"].push_back(region);
  }
  j["integrator"] = to_string(c.integrator);
  j["macro_dt"] = c.macro_dt;
  if (c.substeps.kind == SubstepPolicy::Kind::kFixed) {
    j["substeps"] = {{"mode", "fixed"}, {"count", c.substeps.count}, {"cfl", c.substeps.cfl}};
  } else {
    j["substeps"] = {{"mode", "auto_cfl"}, {"cfl", c.substeps.cfl}};
  }
  j["frames"] = c.frames;
  j["rng_seed"] = c.rng_seed;
  if (c.lambda) j["lambda"] = *c.lambda;
  j["cg_tol"] = c.cg_tol;
  j["cg_max_iter"] = c.cg_max_iter;
  j["cfl_policy"] = to_string(c.cfl_policy);
  return j.dump(2);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based uniform in [0, 1): hash of (seed, region, cell, slot, axis).
double jitter(std::uint64_t seed, std::uint64_t region, std::int64_t ci, std::int64_t cj,
              std::uint64_t slot, std::uint64_t axis) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ region);
  h = splitmix64(h ^ static_cast<std::uint64_t>(ci));
  h = splitmix64(h ^ static_cast<std::uint64_t>(cj));
  h = splitmix64(h ^ slot);
  h = splitmix64(h ^ axis);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<Particle> sample_particles(const Region& region, const GridSpec& spec,
                                       const Material& mat, std::uint64_t seed,
                                       std::size_t region_index) {
  if (region.ppc < 1) throw ContractViolation("sample_particles: ppc must be >= 1");
  const double dx = spec.dx;
  const Vec2 lo = (region.min - spec.origin) / dx;
  const Vec2 hi = (region.max - spec.origin) / dx;
  const int i0 = static_cast<int>(std::floor(lo.x()));
  const int j0 = static_cast<int>(std::floor(lo.y()));
  const int i1 = static_cast<int>(std::ceil(hi.x())) - 1;
  const int j1 = static_cast<int>(std::ceil(hi.y())) - 1;

  const int strata_x = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(region.ppc))));
  const int strata_y = (region.ppc + strata_x - 1) / strata_x;
  const double volume = dx * dx / region.ppc;
  const Vec2 center = 0.5 * (region.min + region.max);
  const Mat2 A = region.affine.value_or(Mat2::Zero());

  std::vector<Particle> out;
  out.reserve(static_cast<std::size_t>(std::max(0, i1 - i0 + 1)) *
              static_cast<std::size_t>(std::max(0, j1 - j0 + 1)) * region.ppc);
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Vec2 corner = spec.node_position(i, j);
      for (int q = 0; q < region.ppc; ++q) {
        const int sx = q % strata_x;
        const int sy = q / strata_x;
        const double ux = jitter(seed, region_index, i, j, q, 0);
        const double uy = jitter(seed, region_index, i, j, q, 1);
        Particle p;
        p.x = corner + dx * Vec2((sx + ux) / strata_x, (sy + uy) / strata_y);
        p.m = mat.rho * volume;
        p.V0 = volume;
        p.F = Mat2::Identity();
        p.C = A;
        p.v = region.velocity + A * (p.x - center);
        out.push_back(p);
      }
    }
  }
  return out;
}

SimState make_state(const SceneConfig& config) {
  SimState state;
  state.spec = config.grid;
  state.mat = config.material;
  state.gravity = config.gravity;
  for (std::size_t r = 0; r < config.regions.size(); ++r) {
    auto particles =
        sample_particles(config.regions[r], config.grid, config.material, config.rng_seed, r);
    state.particles.insert(state.particles.end(), particles.begin(), particles.end());
  }
  return state;
}

LoadedScene load_scene(std::string_view text) {
  LoadedScene scene;
  scene.config = parse_scene(text);
  scene.state = make_state(scene.config);
  return scene;
}

LoadedScene load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open scene file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scene(buf.str());
}

}  // namespace mpm
