#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpm/grid.hpp"
#include "mpm/materials.hpp"
#include "mpm/particles.hpp"
#include "mpm/secant.hpp"

namespace mpm {

enum class Integrator { kExplicit, kSecantLumped, kSecantFullLs };

std::string_view to_string(Integrator integrator);
std::optional<Integrator> parse_integrator(std::string_view name);

/// Axis-aligned box of material seeded at `ppc` particles per grid cell.
struct Region {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
  int ppc = 4;
  Vec2 velocity = Vec2::Zero();
  std::optional<Mat2> affine;  // initial C; also adds A (x - center) to v
};

struct SubstepPolicy {
  enum class Kind { kAutoCfl, kFixed };
  Kind kind = Kind::kAutoCfl;
  int count = 1;     // used when kind == kFixed
  double cfl = 0.5;  // CFL number for auto count and for the violation check
};

struct SceneConfig {
  GridSpec grid;
  Material material;
  Vec2 gravity = Vec2::Zero();
  std::vector<Region> regions;
  Integrator integrator = Integrator::kExplicit;
  double macro_dt = 0.0;  // also the frame interval
  SubstepPolicy substeps;
  int frames = 1;
  std::uint64_t rng_seed = 0;
  std::optional<double> lambda;  // nullopt selects D = dx^2 / 4
  double cg_tol = 1e-10;
  int cg_max_iter = 0;
  CflPolicy cfl_policy = CflPolicy::kWarn;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Parses a JSON scene document. Unknown keys, missing required keys,
/// out-of-range values and regions reaching into the boundary band are
/// reported as ConfigError with the key path.
SceneConfig parse_scene(std::string_view text);

/// Canonical JSON rendering of a config (used for the run manifest).
std::string scene_to_json(const SceneConfig& config);

/// Stratified jittered seeding: every grid cell overlapping `region` gets
/// `ppc` particles jittered inside the cell. The jitter is a pure function of
/// (seed, region_index, cell, slot).
std::vector<Particle> sample_particles(const Region& region, const GridSpec& spec,
                                       const Material& mat, std::uint64_t seed,
                                       std::size_t region_index = 0);

SimState make_state(const SceneConfig& config);

struct LoadedScene {
  SceneConfig config;
  SimState state;
};

LoadedScene load_scene(std::string_view text);
LoadedScene load_scene_file(const std::string& path);

}  // namespace mpm
