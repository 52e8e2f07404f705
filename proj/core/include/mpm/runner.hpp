#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "mpm/frame_io.hpp"
#include "mpm/scene.hpp"

namespace mpm {

/// Advances `state` by one frame (config.macro_dt) with the configured
/// integrator. Returns the macro-step report for secant integrators.
std::optional<MacroStepReport> advance_frame(const SceneConfig& config,
                                             SimState& state);

/// Runs config.frames frames from `state`, calling `on_frame` after each.
void simulate(const SceneConfig& config, SimState state,
              const std::function<void(const Frame&)>& on_frame);

/// simulate() writing every frame and the manifest into `out_dir`.
std::vector<Frame> run_to_directory(const SceneConfig& config, SimState state,
                                    const std::filesystem::path& out_dir);

}  // namespace mpm
