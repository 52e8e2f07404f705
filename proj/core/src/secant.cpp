#include "mpm/secant.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "mpm/errors.hpp"
#include "mpm/explicit_mpm.hpp"
#include "mpm/materials.hpp"

namespace mpm {

double ReferenceConfiguration::total_mass() const {
  double total = 0.0;
  for (double mp : m) total += mp;
  return total;
}

ReferenceConfiguration snapshot(const SimState& state) {
  ReferenceConfiguration omega;
  omega.spec = state.spec;
  omega.x.reserve(state.particles.size());
  omega.F.reserve(state.particles.size());
  omega.m.reserve(state.particles.size());
  for (const Particle& p : state.particles) {
    omega.x.push_back(p.x);
    omega.F.push_back(p.F);
    omega.m.push_back(p.m);
  }
  return omega;
}

int auto_substep_count(const SimState& state, double macro_dt, double cfl) {
  const double limit = stable_dt(state, cfl);
  return std::max(1, static_cast<int>(std::ceil(macro_dt / limit)));
}

SubstepRun run_substeps(const SimState& state, double macro_dt, int substeps,
                        double cfl, CflPolicy policy) {
  if (substeps < 1) throw ContractViolation("run_substeps: substep count must be >= 1");
  if (!(macro_dt > 0.0)) throw ContractViolation("run_substeps: macro_dt must be positive");

  SubstepRun run;
  run.before = snapshot(state);
  run.substep_dt = macro_dt / substeps;
  if (policy != CflPolicy::kIgnore) {
    const double limit = stable_dt(state, cfl);
    run.cfl_violated = run.substep_dt > limit;
    if (run.cfl_violated && policy == CflPolicy::kError) {
      std::ostringstream os;
      os << "substep dt " << run.substep_dt << " exceeds CFL limit " << limit;
      throw CflViolationError(os.str());
    }
  }
  run.after = state;
  for (int s = 0; s < substeps; ++s) substep(run.after, run.substep_dt);
  run.after.time = state.time + macro_dt;
  return run;
}

SecantTargets secant_targets(const ReferenceConfiguration& before,
                             const SimState& after, double macro_dt) {
  if (before.size() != after.particles.size()) {
    throw ContractViolation("secant_targets: particle count mismatch");
  }
  if (!(macro_dt > 0.0)) throw ContractViolation("secant_targets: macro_dt must be positive");
  const double inv_dt = 1.0 / macro_dt;
  SecantTargets t;
  t.v_star.resize(before.size());
  t.C_star.resize(before.size());
  for (std::size_t p = 0; p < before.size(); ++p) {
    const double det = before.F[p].determinant();
    if (!(det > kMinDeterminant)) throw DegenerateDeformationError(p, det);
    const Particle& a = after.particles[p];
    t.v_star[p] = (a.x - before.x[p]) * inv_dt;
    t.C_star[p] = (a.F * before.F[p].inverse() - Mat2::Identity()) * inv_dt;
  }
  return t;
}

namespace {

void check_sizes(const SecantTargets& targets, const ReferenceConfiguration& omega) {
  if (targets.v_star.size() != omega.size() || targets.C_star.size() != omega.size() ||
      omega.m.size() != omega.size()) {
    throw ContractViolation("secant targets do not match the reference configuration");
  }
}

}  // namespace

Grid lumped_transfer(const SecantTargets& targets, const ReferenceConfiguration& omega) {
  check_sizes(targets, omega);
  Grid grid(omega.spec);
  for (std::size_t p = 0; p < omega.size(); ++p) {
    const Stencil s = stencil(omega.x[p], omega.spec, p);
    const double mp = omega.m[p];
    const Vec2& v = targets.v_star[p];
    const Mat2& C = targets.C_star[p];
    s.for_each(omega.spec, [&](std::size_t k, double w, const Vec2&, const Vec2& dpos) {
      grid.mass[k] += w * mp;
      grid.momentum[k] += (w * mp) * (v + C * dpos);
    });
  }
  grid.mark_active(omega.total_mass());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid.velocity[k] = grid.active[k] ? Vec2(grid.momentum[k] / grid.mass[k]) : Vec2::Zero();
  }
  return grid;
}

Grid reconstruct_lumped(const SecantTargets& targets, const ReferenceConfiguration& omega) {
  Grid grid = lumped_transfer(targets, omega);
  apply_boundary(grid);
  return grid;
}

LsSystem assemble_ls_system(const SecantTargets& targets,
                            const ReferenceConfiguration& omega, double lambda,
                            GradientModel gradients) {
  check_sizes(targets, omega);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ContractViolation("assemble_ls_system: lambda must be finite and >= 0");
  }
  const GridSpec& spec = omega.spec;
  const double inv_d = 1.0 / spec.apic_inertia();

  std::vector<Stencil> stencils;
  stencils.reserve(omega.size());
  LsSystem sys;
  sys.spec = spec;
  sys.lambda = lambda;
  sys.lumped_mass.assign(spec.node_count(), 0.0);
  for (std::size_t p = 0; p < omega.size(); ++p) {
    stencils.push_back(stencil(omega.x[p], spec, p));
    stencils.back().for_each(spec, [&](std::size_t k, double w, const Vec2&, const Vec2&) {
      sys.lumped_mass[k] += w * omega.m[p];
    });
  }

  const double eps = Grid::mass_epsilon(omega.total_mass(), spec.node_count());
  sys.node_to_dof.assign(spec.node_count(), -1);
  for (std::size_t k = 0; k < spec.node_count(); ++k) {
    if (sys.lumped_mass[k] > eps) {
      sys.node_to_dof[k] = static_cast<int>(sys.dof_to_node.size());
      sys.dof_to_node.push_back(k);
    }
  }
  if (sys.dof_to_node.empty()) throw EmptySystemError("least-squares system has no active nodes");

  const auto n = static_cast<Eigen::Index>(sys.dof_count());
  sys.rhs = Eigen::MatrixX2d::Zero(n, 2);
  std::vector<Eigen::Triplet<double>> upper;
  upper.reserve(omega.size() * 45);

  struct Entry {
    int dof;
    double w;
    Vec2 grad;
  };
  for (std::size_t p = 0; p < omega.size(); ++p) {
    std::array<Entry, 9> entries;
    int count = 0;
    stencils[p].for_each(spec, [&](std::size_t k, double w, const Vec2& grad, const Vec2& dpos) {
      const int dof = sys.node_to_dof[k];
      if (dof < 0) return;
      const Vec2 g = gradients == GradientModel::kExact ? grad : Vec2(inv_d * w * dpos);
      entries[count++] = Entry{dof, w, g};
    });
    const double mp = omega.m[p];
    const Vec2& v = targets.v_star[p];
    const Mat2& C = targets.C_star[p];
    for (int a = 0; a < count; ++a) {
      const Entry& ea = entries[a];
      sys.rhs.row(ea.dof) += (mp * (ea.w * v + lambda * (C * ea.grad))).transpose();
      for (int b = a; b < count; ++b) {
        const Entry& eb = entries[b];
        const double value = mp * (ea.w * eb.w + lambda * ea.grad.dot(eb.grad));
        upper.emplace_back(std::min(ea.dof, eb.dof), std::max(ea.dof, eb.dof), value);
      }
    }
  }
  Eigen::SparseMatrix<double> triangle(n, n);
  triangle.setFromTriplets(upper.begin(), upper.end());
  sys.matrix = triangle.selfadjointView<Eigen::Upper>();
  sys.matrix.makeCompressed();
  return sys;
}

namespace {

struct ComponentSolve {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual = 0.0;
};

ComponentSolve pcg(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& inv_diag,
                   const Eigen::VectorXd& b, Eigen::VectorXd x0, double tol, int max_iter) {
  ComponentSolve out;
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    out.x = Eigen::VectorXd::Zero(b.size());
    return out;
  }
  out.x = std::move(x0);

  // Outer loop restarts from the true residual if the recurrence drifted.
  while (true) {
    Eigen::VectorXd r = b - A * out.x;
    out.residual = r.norm() / b_norm;
    if (out.residual <= tol) return out;
    if (out.iterations >= max_iter) throw NonConvergenceError(out.iterations, out.residual);

    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd d = z;
    double rz = r.dot(z);
    const int restart_at = out.iterations;
    while (out.iterations < max_iter) {
      const Eigen::VectorXd Ad = A * d;
      const double dAd = d.dot(Ad);
      if (!(dAd > 0.0)) break;
      const double alpha = rz / dAd;
      out.x += alpha * d;
      r -= alpha * Ad;
      ++out.iterations;
      if (r.norm() / b_norm <= tol) break;
      z = inv_diag.cwiseProduct(r);
      const double rz_next = r.dot(z);
      d = z + (rz_next / rz) * d;
      rz = rz_next;
    }
    if (out.iterations == restart_at) throw NonConvergenceError(out.iterations, out.residual);
  }
}

}  // namespace

CgResult solve_cg(const LsSystem& system, const CgSettings& settings, const Grid* initial) {
  const auto n = static_cast<Eigen::Index>(system.dof_count());
  if (n == 0) throw EmptySystemError("least-squares system has no active nodes");
  const int max_iter = settings.max_iterations > 0 ? settings.max_iterations
                                                   : static_cast<int>(10 * n);
  Eigen::VectorXd inv_diag = system.matrix.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(inv_diag[i] > 0.0)) throw ContractViolation("solve_cg: non-positive diagonal entry");
    inv_diag[i] = 1.0 / inv_diag[i];
  }

  CgResult result;
  result.grid = Grid(system.spec);
  result.grid.mass = system.lumped_mass;
  if (initial && initial->size() != system.spec.node_count()) {
    throw ContractViolation("solve_cg: initial guess grid size mismatch");
  }
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
    if (initial) {
      for (Eigen::Index i = 0; i < n; ++i) x0[i] = initial->velocity[system.dof_to_node[i]][c];
    }
    const ComponentSolve solve = pcg(system.matrix, inv_diag, system.rhs.col(c), std::move(x0),
                                     settings.tolerance, max_iter);
    result.iterations = std::max(result.iterations, solve.iterations);
    result.relative_residual = std::max(result.relative_residual, solve.residual);
    for (Eigen::Index i = 0; i < n; ++i) {
      result.grid.velocity[system.dof_to_node[i]][c] = solve.x[i];
    }
  }
  for (std::size_t k : system.dof_to_node) result.grid.active[k] = 1;
  apply_boundary(result.grid);
  return result;
}

double ls_objective(const Grid& grid, const SecantTargets& targets,
                    const ReferenceConfiguration& omega, double lambda) {
  check_sizes(targets, omega);
  double velocity_term = 0.0;
  double gradient_term = 0.0;
  for (std::size_t p = 0; p < omega.size(); ++p) {
    const Stencil s = stencil(omega.x[p], omega.spec, p);
    Vec2 v = Vec2::Zero();
    Mat2 G = Mat2::Zero();
    s.for_each(omega.spec, [&](std::size_t k, double w, const Vec2& grad, const Vec2&) {
      v += w * grid.velocity[k];
      G += grid.velocity[k] * grad.transpose();
    });
    velocity_term += omega.m[p] * (v - targets.v_star[p]).squaredNorm();
    gradient_term += omega.m[p] * (G - targets.C_star[p]).squaredNorm();
  }
  return velocity_term + lambda * gradient_term;
}

double scattered_target_kinetic_energy(const SecantTargets& targets,
                                       const ReferenceConfiguration& omega) {
  check_sizes(targets, omega);
  double ke = 0.0;
  for (std::size_t p = 0; p < omega.size(); ++p) {
    const Stencil s = stencil(omega.x[p], omega.spec, p);
    s.for_each(omega.spec, [&](std::size_t, double w, const Vec2&, const Vec2& dpos) {
      ke += 0.5 * omega.m[p] * w * (targets.v_star[p] + targets.C_star[p] * dpos).squaredNorm();
    });
  }
  return ke;
}

double grid_kinetic_energy(const Grid& grid) {
  double ke = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.active[k]) ke += 0.5 * grid.mass[k] * grid.velocity[k].squaredNorm();
  }
  return ke;
}

std::string_view to_string(ReconstructionMode mode) {
  return mode == ReconstructionMode::kLumped ? "lumped" : "full_ls";
}

Reconstruction reconstruct_macro_step(const SimState& state, double macro_dt, int substeps,
                                      const MacroStepOptions& options) {
  SubstepRun run = run_substeps(state, macro_dt, substeps, options.cfl, options.cfl_policy);

  Reconstruction rec;
  rec.targets = secant_targets(run.before, run.after, macro_dt);
  rec.omega = std::move(run.before);

  MacroStepReport& report = rec.report;
  report.mode = options.mode;
  report.substeps = substeps;
  report.substep_dt = run.substep_dt;
  report.cfl_violated = run.cfl_violated;
  report.lambda = options.lambda.value_or(state.spec.apic_inertia());

  if (options.mode == ReconstructionMode::kLumped) {
    rec.grid = reconstruct_lumped(rec.targets, rec.omega);
  } else {
    const LsSystem system = assemble_ls_system(rec.targets, rec.omega, report.lambda);
    const Grid warm = lumped_transfer(rec.targets, rec.omega);
    CgResult solved = solve_cg(system, options.cg, &warm);
    report.cg_iterations = solved.iterations;
    report.cg_residual = solved.relative_residual;
    rec.grid = std::move(solved.grid);
  }
  report.objective = ls_objective(rec.grid, rec.targets, rec.omega, report.lambda);
  report.scattered_target_ke = scattered_target_kinetic_energy(rec.targets, rec.omega);
  report.grid_ke = grid_kinetic_energy(rec.grid);
  return rec;
}

SimState finish_transfer(const SimState& state_n, const Grid& grid, double macro_dt,
                         MacroStepReport* report) {
  SimState next = state_n;
  g2p(next, grid, macro_dt);
  next.time = state_n.time + macro_dt;
  if (report) {
    double ke = 0.0;
    for (const Particle& p : next.particles) ke += 0.5 * p.m * p.v.squaredNorm();
    report->particle_ke = ke;
    report->dissipation = report->scattered_target_ke - ke;
  }
  return next;
}

MacroStepResult macro_step(const SimState& state, double macro_dt, int substeps,
                           const MacroStepOptions& options) {
  Reconstruction rec = reconstruct_macro_step(state, macro_dt, substeps, options);
  MacroStepResult out;
  out.report = rec.report;
  out.state = finish_transfer(state, rec.grid, macro_dt, &out.report);
  out.grid = std::move(rec.grid);
  return out;
}

}  // namespace mpm
