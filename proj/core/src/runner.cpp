#include "mpm/runner.hpp"

#include "mpm/diagnostics.hpp"
#include "mpm/errors.hpp"
#include "mpm/explicit_mpm.hpp"

namespace mpm {

std::optional<MacroStepReport> advance_frame(const SceneConfig& config, SimState& state) {
  const double dt = config.macro_dt;
  const int substeps = config.substeps.kind == SubstepPolicy::Kind::kFixed
                           ? config.substeps.count
                           : auto_substep_count(state, dt, config.substeps.cfl);

  if (config.integrator == Integrator::kExplicit) {
    SubstepRun run =
        run_substeps(state, dt, substeps, config.substeps.cfl, config.cfl_policy);
    state = std::move(run.after);
    return std::nullopt;
  }

  MacroStepOptions options;
  options.mode = config.integrator == Integrator::kSecantLumped ? ReconstructionMode::kLumped
                                                                : ReconstructionMode::kFullLs;
  options.lambda = config.lambda;
  options.cfl = config.substeps.cfl;
  options.cfl_policy = config.cfl_policy;
  options.cg.tolerance = config.cg_tol;
  options.cg.max_iterations = config.cg_max_iter;
  MacroStepResult result = macro_step(state, dt, substeps, options);
  state = std::move(result.state);
  return result.report;
}

void simulate(const SceneConfig& config, SimState state,
              const std::function<void(const Frame&)>& on_frame) {
  for (int i = 0; i < config.frames; ++i) {
    const std::optional<MacroStepReport> report = advance_frame(config, state);
    Frame frame;
    frame.index = i;
    frame.time = state.time;
    frame.particles = state.particles;
    frame.diagnostics = compute_diagnostics(state);
    frame.diagnostics.macro = report;
    on_frame(frame);
  }
}

std::vector<Frame> run_to_directory(const SceneConfig& config, SimState state,
                                    const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), ec.message());
  std::vector<Frame> frames;
  simulate(config, std::move(state), [&](const Frame& frame) {
    write_frame(frame, out_dir);
    Frame summary = frame;
    summary.particles.clear();
    frames.push_back(std::move(summary));
  });
  write_manifest(config, frames, out_dir);
  return frames;
}

}  // namespace mpm
