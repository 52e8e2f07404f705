#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mpm/grid.hpp"
#include "mpm/particles.hpp"

namespace mpm {

/// Particle positions, deformation gradients and masses at the start of a
/// macro step, together with the grid layout they are weighted against.
/// This is the configuration the macro-step grid velocity lives on.
struct ReferenceConfiguration {
  GridSpec spec;
  std::vector<Vec2> x;
  std::vector<Mat2> F;
  std::vector<double> m;

  std::size_t size() const { return x.size(); }
  double total_mass() const;
};

ReferenceConfiguration snapshot(const SimState& state);

/// Secant velocity and velocity-gradient targets, one pair per particle,
/// anchored at the reference positions.
struct SecantTargets {
  std::vector<Vec2> v_star;
  std::vector<Mat2> C_star;

  std::size_t size() const { return v_star.size(); }
};

enum class CflPolicy { kIgnore, kWarn, kError };

struct SubstepRun {
  SimState after;
  ReferenceConfiguration before;
  double substep_dt = 0.0;
  bool cfl_violated = false;
};

/// Number of substeps ceil(macro_dt / stable_dt(state, cfl)), at least 1.
int auto_substep_count(const SimState& state, double macro_dt, double cfl);

/// Runs `substeps` explicit steps of size macro_dt / substeps from `state`.
/// The returned `before` snapshot is taken prior to the first step.
SubstepRun run_substeps(const SimState& state, double macro_dt, int substeps,
                        double cfl = 0.5, CflPolicy policy = CflPolicy::kWarn);

/// v* = (x_after - x_before) / dt, C* = (F_after F_before^-1 - I) / dt.
SecantTargets secant_targets(const ReferenceConfiguration& before,
                             const SimState& after, double macro_dt);

/// APIC scatter of (v*, C*) over the reference configuration followed by
/// division by node mass. No wall projection.
Grid lumped_transfer(const SecantTargets& targets,
                     const ReferenceConfiguration& omega);

/// Closed-form lumped reconstruction: lumped_transfer + apply_boundary.
Grid reconstruct_lumped(const SecantTargets& targets,
                        const ReferenceConfiguration& omega);

/// Which weight gradient the assembler uses. The APIC approximation
/// (1/D) w (x_k - x_p) exists to check the lumped path against the full one.
enum class GradientModel { kExact, kApicApprox };

/// Normal equations of the velocity/gradient matching objective, restricted
/// to active nodes. The same scalar matrix acts on both velocity components.
struct LsSystem {
  GridSpec spec;
  double lambda = 0.0;
  std::vector<int> node_to_dof;          // -1 for inactive nodes
  std::vector<std::size_t> dof_to_node;
  std::vector<double> lumped_mass;       // per node, sum_p m_p w_kp
  Eigen::SparseMatrix<double> matrix;    // dofs x dofs, symmetric
  Eigen::MatrixX2d rhs;                  // dofs x 2

  std::size_t dof_count() const { return dof_to_node.size(); }
};

/// Assembles the consistent "mass" + lambda * "stiffness" system. Each
/// unordered node pair is accumulated once, so the matrix is exactly
/// symmetric. Throws EmptySystemError if no node is active.
LsSystem assemble_ls_system(const SecantTargets& targets,
                            const ReferenceConfiguration& omega, double lambda,
                            GradientModel gradients = GradientModel::kExact);

struct CgSettings {
  double tolerance = 1e-10;  // relative residual |Av - b| / |b|
  int max_iterations = 0;    // 0 selects 10 * dof count
};

struct CgResult {
  Grid grid;                     // solution, wall-projected
  int iterations = 0;            // max over the two components
  double relative_residual = 0;  // max over the two components
};

/// Jacobi-preconditioned conjugate gradient, one solve per velocity
/// component. Starts from `initial` at the active dofs when given, else zero.
/// Throws NonConvergenceError when the cap is reached.
CgResult solve_cg(const LsSystem& system, const CgSettings& settings = {},
                  const Grid* initial = nullptr);

/// sum_p m_p |v_p(v) - v*_p|^2 + lambda sum_p m_p |grad v_p(v) - C*_p|_F^2
/// with exact B-spline gradients.
double ls_objective(const Grid& grid, const SecantTargets& targets,
                    const ReferenceConfiguration& omega, double lambda);

/// sum_k sum_p 1/2 m_p w_kp |v*_p + C*_p (x_k - x_p)|^2.
double scattered_target_kinetic_energy(const SecantTargets& targets,
                                       const ReferenceConfiguration& omega);

/// sum_k 1/2 m_k |v_k|^2 over active nodes.
double grid_kinetic_energy(const Grid& grid);

enum class ReconstructionMode { kLumped, kFullLs };

std::string_view to_string(ReconstructionMode mode);

struct MacroStepOptions {
  ReconstructionMode mode = ReconstructionMode::kLumped;
  std::optional<double> lambda;  // nullopt selects D = dx^2 / 4
  double cfl = 0.5;
  CflPolicy cfl_policy = CflPolicy::kWarn;
  CgSettings cg;
};

struct MacroStepReport {
  ReconstructionMode mode = ReconstructionMode::kLumped;
  int substeps = 0;
  double substep_dt = 0.0;
  double lambda = 0.0;
  double objective = 0.0;
  int cg_iterations = 0;
  double cg_residual = 0.0;
  bool cfl_violated = false;
  double scattered_target_ke = 0.0;
  double grid_ke = 0.0;
  double particle_ke = 0.0;
  /// scattered_target_ke - particle_ke
  double dissipation = 0.0;
};

/// First half of a macro step: substeps, targets and the grid field on the
/// reference configuration. `grid` may be inspected or overwritten before
/// finish_transfer is called.
struct Reconstruction {
  ReferenceConfiguration omega;
  SecantTargets targets;
  Grid grid;
  MacroStepReport report;
};

Reconstruction reconstruct_macro_step(const SimState& state, double macro_dt,
                                      int substeps,
                                      const MacroStepOptions& options = {});

/// Second half: APIC gather from `grid` over the start-of-step particles,
/// x <- x_n + dt v, F <- (I + dt C) F_n. Fills report->particle_ke and
/// report->dissipation when a report is given.
SimState finish_transfer(const SimState& state_n, const Grid& grid,
                         double macro_dt, MacroStepReport* report = nullptr);

struct MacroStepResult {
  SimState state;
  Grid grid;
  MacroStepReport report;
};

/// Full pseudo-implicit step of size macro_dt built from `substeps`
/// explicit substeps.
MacroStepResult macro_step(const SimState& state, double macro_dt,
                           int substeps, const MacroStepOptions& options = {});

}  // namespace mpm
