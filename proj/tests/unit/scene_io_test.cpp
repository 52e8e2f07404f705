#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mpm/diagnostics.hpp"
#include "mpm/errors.hpp"
#include "mpm/frame_io.hpp"
#include "mpm/runner.hpp"
#include "mpm/scene.hpp"
#include "test_support.hpp"

using namespace mpm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json minimal_scene() {
  return json::parse(R"({
    "grid": {"dx": 0.0625, "nx": 16, "ny": 16},
    "material": {"E": 1000.0, "nu": 0.2, "rho": 10.0},
    "regions": [{"min": [0.375, 0.375], "max": [0.5625, 0.5], "ppc": 4}],
    "integrator": "explicit",
    "macro_dt": 0.001,
    "frames": 2
  })");
}

std::string config_error_key(const json& doc) {
  try {
    load_scene(doc.dump());
  } catch (const ConfigError& e) {
    return e.key_path();
  }
  return "<no error>";
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mpm2d_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("minimal scene loads with ppc * cells particles") {
  const LoadedScene scene = load_scene(minimal_scene().dump());
  // 3 x 2 cells at dx = 1/16.
  CHECK(scene.state.particles.size() == 24);
  CHECK(scene.config.integrator == Integrator::kExplicit);
  CHECK(scene.config.substeps.kind == SubstepPolicy::Kind::kAutoCfl);
  CHECK(scene.config.substeps.cfl == 0.5);
  CHECK(scene.config.grid.boundary_band == 2);
  CHECK(scene.state.gravity == Vec2::Zero());
}

TEST_CASE("scene validation errors name the key") {
  json doc = minimal_scene();
  doc["regions"][0]["min"] = json::array({0.0625, 0.375});
  CHECK(config_error_key(doc) == "regions[0]");

  doc = minimal_scene();
  doc.erase("frames");
  CHECK(config_error_key(doc) == "frames");

  doc = minimal_scene();
  doc["grid"].erase("dx");
  CHECK(config_error_key(doc) == "grid.dx");

  doc = minimal_scene();
  doc["material"]["colour"] = "red";
  CHECK(config_error_key(doc) == "material.colour");

  doc = minimal_scene();
  doc["frames"] = 0;
  CHECK(config_error_key(doc) == "frames");

  doc = minimal_scene();
  doc["material"]["nu"] = 0.5;
  CHECK(config_error_key(doc) == "material.nu");

  doc = minimal_scene();
  doc["integrator"] = "implicit";
  CHECK(config_error_key(doc) == "integrator");

  doc = minimal_scene();
  doc["regions"][0]["ppc"] = 0;
  CHECK(config_error_key(doc) == "regions[0].ppc");

  doc = minimal_scene();
  doc["substeps"] = {{"mode", "fixed"}};
  CHECK(config_error_key(doc) == "substeps.count");

  doc = minimal_scene();
  doc["grid"]["bc"] = {{"left", "glue"}};
  CHECK(config_error_key(doc) == "grid.bc.left");

  doc = minimal_scene();
  doc.erase("macro_dt");
  CHECK(config_error_key(doc) == "macro_dt");

  CHECK_THROWS_AS(load_scene("{not json"), ConfigError);
}

TEST_CASE("frame_dt is accepted as the macro step") {
  json doc = minimal_scene();
  doc.erase("macro_dt");
  doc["frame_dt"] = 0.002;
  CHECK(load_scene(doc.dump()).config.macro_dt == 0.002);
}

TEST_CASE("scene echo round-trips") {
  json doc = minimal_scene();
  doc["grid"]["bc"] = {{"left", "slip"}, {"bottom", "sticky"}};
  doc["regions"][0]["affine"] = json::array({json::array({0.1, 0.2}), json::array({0.3, 0.4})});
  doc["lambda"] = 0.001;
  const SceneConfig a = parse_scene(doc.dump());
  const SceneConfig b = parse_scene(scene_to_json(a));
  CHECK(scene_to_json(a) == scene_to_json(b));
  CHECK(b.grid.walls.left == WallCondition::kSlip);
  CHECK(b.regions[0].affine.has_value());
  CHECK(b.lambda == 0.001);
}

TEST_CASE("sampling is deterministic and stratified") {
  const GridSpec spec = mpm::testing::make_spec(32);
  const Material mat{1000.0, 0.2, 10.0};
  Region region;
  region.min = Vec2(10, 10) * spec.dx;
  region.max = Vec2(15, 12) * spec.dx;
  region.ppc = 4;
  const auto a = sample_particles(region, spec, mat, 42);
  const auto b = sample_particles(region, spec, mat, 42);
  const auto c = sample_particles(region, spec, mat, 43);
  REQUIRE(a.size() == 40);
  for (std::size_t p = 0; p < a.size(); ++p) {
    CHECK(a[p].x == b[p].x);
    CHECK(a[p].m == mat.rho * spec.dx * spec.dx / 4.0);
    CHECK(a[p].V0 == spec.dx * spec.dx / 4.0);
    CHECK(a[p].F == Mat2::Identity());
  }
  CHECK(a[0].x != c[0].x);
  // Each 2x2 stratum of a cell holds exactly one particle.
  for (std::size_t cell = 0; cell < 10; ++cell) {
    std::set<std::pair<int, int>> strata;
    for (std::size_t q = 0; q < 4; ++q) {
      const Vec2 rel = a[cell * 4 + q].x / spec.dx;
      const Vec2 frac = rel - rel.array().floor().matrix();
      strata.insert({static_cast<int>(frac.x() * 2), static_cast<int>(frac.y() * 2)});
    }
    CHECK(strata.size() == 4);
  }
}

TEST_CASE("sampled mass matches the covered area") {
  const GridSpec spec = mpm::testing::make_spec(64);
  const Material mat{1000.0, 0.2, 7.0};
  Region region;
  region.min = Vec2(0.2013, 0.3);
  region.max = Vec2(0.4471, 0.5522);
  region.ppc = 3;
  const auto particles = sample_particles(region, spec, mat, 1);
  double mass = 0.0;
  for (const Particle& p : particles) mass += p.m;
  const Vec2 extent = region.max - region.min;
  const double exact = mat.rho * extent.x() * extent.y();
  // Partial cells along the perimeter are counted as whole cells.
  const double perimeter_cells = 2.0 * (extent.x() + extent.y()) / spec.dx + 4.0;
  CHECK(mass >= exact);
  CHECK(mass - exact <= mat.rho * spec.dx * spec.dx * perimeter_cells);
}

TEST_CASE("affine region velocity") {
  const GridSpec spec = mpm::testing::make_spec(32);
  Region region;
  region.min = Vec2(0.3, 0.3);
  region.max = Vec2(0.5, 0.6);
  region.velocity = Vec2(1.0, 0.0);
  Mat2 A;
  A << 0.0, -1.0, 1.0, 0.0;
  region.affine = A;
  for (const Particle& p : sample_particles(region, spec, Material{}, 3)) {
    CHECK((p.v - (Vec2(1.0, 0.0) + A * (p.x - Vec2(0.4, 0.45)))).norm() < 1e-15);
    CHECK(p.C == A);
  }
}

TEST_CASE("diagnostics") {
  LoadedScene scene = load_scene(minimal_scene().dump());
  Diagnostics d = compute_diagnostics(scene.state);
  CHECK(d.kinetic_energy == 0.0);
  CHECK(d.momentum == Vec2::Zero());
  CHECK(d.elastic_energy == 0.0);
  CHECK(d.total_mass == doctest::Approx(10.0 * 6 * 0.0625 * 0.0625));

  for (Particle& p : scene.state.particles) p.v = Vec2(1.0, 0.0);
  scene.state.gravity = Vec2(0.0, -10.0);
  d = compute_diagnostics(scene.state);
  CHECK((d.momentum - Vec2(d.total_mass, 0.0)).norm() < 1e-15);
  CHECK(d.kinetic_energy == doctest::Approx(0.5 * d.total_mass));
  double expected_grav = 0.0;
  for (const Particle& p : scene.state.particles) expected_grav += 10.0 * p.m * p.x.y();
  CHECK(d.gravitational_energy == doctest::Approx(expected_grav));
}

TEST_CASE("frame files") {
  Frame frame;
  frame.index = 3;
  Particle a;
  a.x = Vec2(0.1, 1.0 / 3.0);
  a.v = Vec2(-2.5, 1e-17);
  a.F << 1.0, 0.1, -0.2, 0.9;
  frame.particles = {a, a};
  const std::string csv = frame_csv(frame);
  std::istringstream lines(csv);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "id,x,y,vx,vy,Fxx,Fxy,Fyx,Fyy");
  CHECK(rows[1].rfind("0,0.10000000000000001,0.33333333333333331,-2.5,", 0) == 0);
  CHECK(rows[2].rfind("1,", 0) == 0);

  const fs::path dir = temp_dir("frames");
  fs::create_directories(dir);
  const fs::path written = write_frame(frame, dir);
  CHECK(written.filename() == "frame_0003.csv");
  const std::vector<Vec2> xs = read_frame_positions(written);
  REQUIRE(xs.size() == 2);
  CHECK(xs[0] == a.x);

  CHECK_THROWS_AS(write_frame(frame, dir / "missing" / "deeper"), IoError);
}

TEST_CASE("run writes frames, manifest and is byte-reproducible") {
  const LoadedScene scene = load_scene(minimal_scene().dump());
  const fs::path a = temp_dir("run_a");
  const fs::path b = temp_dir("run_b");
  run_to_directory(scene.config, scene.state, a);
  run_to_directory(scene.config, load_scene(minimal_scene().dump()).state, b);
  CHECK(fs::exists(a / "frame_0000.csv"));
  CHECK(fs::exists(a / "frame_0001.csv"));
  CHECK_FALSE(fs::exists(a / "frame_0002.csv"));
  for (const char* name : {"frame_0000.csv", "frame_0001.csv", "manifest.json"}) {
    CHECK(slurp(a / name) == slurp(b / name));
  }
  const json manifest = json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["diagnostics"].size() == 2);
  CHECK(manifest["frames"][1]["file"] == "frame_0001.csv");
  CHECK(manifest["config"]["integrator"] == "explicit");
  CHECK(manifest["frames"][1]["time"].get<double>() > manifest["frames"][0]["time"].get<double>());

  const auto devs = diff_runs(a, b);
  REQUIRE(devs.size() == 2);
  for (const auto& d : devs) {
    CHECK(d.rms == 0.0);
    CHECK(d.max == 0.0);
  }
}

TEST_CASE("secant runs record the macro-step report") {
  json doc = minimal_scene();
  doc["integrator"] = "secant_full_ls";
  doc["substeps"] = {{"mode", "fixed"}, {"count", 3}};
  doc["gravity"] = json::array({0.0, -9.8});
  const LoadedScene scene = load_scene(doc.dump());
  std::vector<Frame> frames;
  simulate(scene.config, scene.state, [&](const Frame& f) { frames.push_back(f); });
  REQUIRE(frames.size() == 2);
  REQUIRE(frames[0].diagnostics.macro.has_value());
  CHECK(frames[0].diagnostics.macro->mode == ReconstructionMode::kFullLs);
  CHECK(frames[0].diagnostics.macro->substeps == 3);
  CHECK(frames[0].diagnostics.macro->cg_residual <= 1e-10);
  CHECK(frames[1].time > frames[0].time);
  CHECK(std::abs(frames[1].diagnostics.total_mass - frames[0].diagnostics.total_mass) <=
        1e-12 * frames[0].diagnostics.total_mass);
}
