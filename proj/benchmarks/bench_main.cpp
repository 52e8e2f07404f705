#include <benchmark/benchmark.h>

#include "mpm/explicit_mpm.hpp"
#include "mpm/scene.hpp"
#include "mpm/secant.hpp"

using namespace mpm;

namespace {

// Square block of material in a 64^2 box; count grows with ppc.
SimState block(int ppc) {
  SceneConfig config;
  config.grid.dx = 1.0 / 64;
  config.grid.nx = 64;
  config.grid.ny = 64;
  config.material = Material{1e5, 0.3, 1000.0};
  config.gravity = Vec2(0.0, -9.8);
  Region region;
  region.min = Vec2(0.34375, 0.25);
  region.max = Vec2(0.671875, 0.578125);
  region.ppc = ppc;
  config.regions = {region};
  config.macro_dt = 1e-3;
  config.frames = 1;
  return make_state(config);
}

void BM_Substep(benchmark::State& st) {
  SimState s = block(static_cast<int>(st.range(0)));
  const double dt = stable_dt(s, 0.5);
  for (auto _ : st) {
    SimState copy = s;
    substep(copy, dt);
    benchmark::DoNotOptimize(copy.particles.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(s.particles.size()));
}
BENCHMARK(BM_Substep)->Arg(4)->Arg(9)->Arg(16);

struct Fixture {
  ReferenceConfiguration omega;
  SecantTargets targets;
  explicit Fixture(int ppc) {
    const SimState s = block(ppc);
    const SubstepRun run = run_substeps(s, 10 * stable_dt(s, 0.5), 10);
    targets = secant_targets(run.before, run.after, 10 * stable_dt(s, 0.5));
    omega = run.before;
  }
};

void BM_ReconstructLumped(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(reconstruct_lumped(f.targets, f.omega).velocity.data());
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(f.omega.size()));
}
BENCHMARK(BM_ReconstructLumped)->Arg(4)->Arg(9)->Arg(16);

void BM_AssembleLs(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  const double lambda = f.omega.spec.apic_inertia();
  for (auto _ : st) benchmark::DoNotOptimize(assemble_ls_system(f.targets, f.omega, lambda).rhs.data());
}
BENCHMARK(BM_AssembleLs)->Arg(4)->Arg(9)->Arg(16);

void BM_SolveCg(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  const LsSystem sys = assemble_ls_system(f.targets, f.omega, f.omega.spec.apic_inertia());
  int iterations = 0;
  for (auto _ : st) {
    const CgResult r = solve_cg(sys);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.grid.velocity.data());
  }
  st.counters["cg_iters"] = iterations;
}
BENCHMARK(BM_SolveCg)->Arg(4)->Arg(9)->Arg(16);

void BM_MacroStep(benchmark::State& st) {
  const SimState s = block(9);
  const double dt = 10 * stable_dt(s, 0.5);
  MacroStepOptions opts;
  opts.mode = st.range(0) == 0 ? ReconstructionMode::kLumped : ReconstructionMode::kFullLs;
  for (auto _ : st) benchmark::DoNotOptimize(macro_step(s, dt, 10, opts).state.particles.data());
  st.SetLabel(std::string(to_string(opts.mode)));
}
BENCHMARK(BM_MacroStep)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
