#include "cli.hpp"

#include <cstdio>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "mpm/errors.hpp"
#include "mpm/frame_io.hpp"
#include "mpm/runner.hpp"
#include "mpm/scene.hpp"

namespace mpm::cli {
namespace {

struct RunArgs {
  std::string scene;
  std::string out_dir;
  std::optional<std::string> integrator;
  std::optional<double> macro_dt;
  std::optional<std::string> substeps;
  std::optional<double> cfl;
  std::optional<int> frames;
  std::optional<std::string> lambda;
  std::optional<std::uint64_t> seed;
  std::optional<double> cg_tol;
};

void apply_overrides(const RunArgs& a, SceneConfig& config) {
  if (a.integrator) {
    const auto parsed = parse_integrator(*a.integrator);
    if (!parsed) throw ConfigError("--integrator", "unknown integrator '" + *a.integrator + "'");
    config.integrator = *parsed;
  }
  if (a.macro_dt) config.macro_dt = *a.macro_dt;
  if (a.substeps) {
    if (*a.substeps == "auto") {
      config.substeps.kind = SubstepPolicy::Kind::kAutoCfl;
    } else {
      std::size_t used = 0;
      int count = 0;
      try {
        count = std::stoi(*a.substeps, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != a.substeps->size()) {
        throw ConfigError("--substeps", "expected 'auto' or a positive integer");
      }
      config.substeps.kind = SubstepPolicy::Kind::kFixed;
      config.substeps.count = count;
    }
  }
  if (a.cfl) config.substeps.cfl = *a.cfl;
  if (a.frames) config.frames = *a.frames;
  if (a.lambda) {
    if (*a.lambda == "natural") {
      config.lambda.reset();
    } else {
      try {
        config.lambda = std::stod(*a.lambda);
      } catch (const std::exception&) {
        throw ConfigError("--lambda", "expected 'natural' or a number");
      }
    }
  }
  if (a.seed) config.rng_seed = *a.seed;
  if (a.cg_tol) config.cg_tol = *a.cg_tol;
  config.validate();
}

int do_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  LoadedScene scene = load_scene_file(a.scene);
  apply_overrides(a, scene.config);
  SimState state = make_state(scene.config);

  const std::vector<Frame> frames = run_to_directory(scene.config, std::move(state), a.out_dir);
  std::optional<int> first_violation;
  std::size_t violations = 0;
  for (const Frame& f : frames) {
    if (f.diagnostics.macro && f.diagnostics.macro->cfl_violated) {
      if (!first_violation) first_violation = f.index;
      ++violations;
    }
  }
  if (first_violation) {
    err << "warning: substep dt exceeds the CFL limit in " << violations << " frame(s), first at frame "
        << *first_violation << "\n";
  }
  out << "wrote " << frames.size() << " frames to " << a.out_dir << "\n";
  return kExitOk;
}

int do_diff(const std::string& a, const std::string& b, std::ostream& out) {
  const std::vector<FrameDeviation> devs = diff_runs(a, b);
  out << "frame,rms,max\n";
  char buf[64];
  for (const FrameDeviation& d : devs) {
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", d.rms, d.max);
    out << d.frame << buf;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"2D MPM with pseudo-implicit macro steps", "mpm2d"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "Simulate a scene and write frames");
  run_cmd->add_option("scene", run_args.scene, "Scene file (JSON)")->required();
  run_cmd->add_option("--out", run_args.out_dir, "Output directory")->required();
  run_cmd->add_option("--integrator", run_args.integrator,
                      "explicit | secant_lumped | secant_full_ls");
  run_cmd->add_option("--macro-dt", run_args.macro_dt, "Macro step / frame interval (s)");
  run_cmd->add_option("--substeps", run_args.substeps, "'auto' or a fixed count");
  run_cmd->add_option("--cfl", run_args.cfl, "CFL number");
  run_cmd->add_option("--frames", run_args.frames, "Number of frames");
  run_cmd->add_option("--lambda", run_args.lambda, "Gradient weight (m^2) or 'natural'");
  run_cmd->add_option("--seed", run_args.seed, "Particle seeding seed");
  run_cmd->add_option("--cg-tol", run_args.cg_tol, "CG relative residual tolerance");

  std::string dir_a, dir_b;
  CLI::App* diff_cmd = app.add_subcommand("diff", "RMS/max position deviation per frame");
  diff_cmd->add_option("dirA", dir_a)->required();
  diff_cmd->add_option("dirB", dir_b)->required();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("mpm2d");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& s : argv_storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) return do_run(run_args, out, err);
    return do_diff(dir_a, dir_b, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace mpm::cli
