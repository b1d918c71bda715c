#pragma once

// Load-controlled Newton-Raphson for trusses with a bilinear material, with
// three interchangeable solvers for the linearized step.

#include <iosfwd>
#include <string_view>
#include <vector>

#include "reanalysis/assembly.hpp"
#include "reanalysis/elements.hpp"
#include "reanalysis/model.hpp"
#include "reanalysis/solvers.hpp"

namespace reanalysis {

enum class Backend { Regular, Reduction, Sri };

std::string_view to_string(Backend backend);
Backend backend_from_string(std::string_view s);

// Per-element strain state and nodal internal forces F(d), over free dofs.
Vector internal_force(const StructuralModel& model, const Vector& d, std::vector<MaterialState>* states = nullptr);
std::vector<MaterialState> material_states(const StructuralModel& model, const Vector& d);

struct TangentSnapshot {
  std::vector<double> moduli;  // per element id
  int n_nle = 0;               // elements on the hardening branch
};

TangentSnapshot tangent_snapshot(const StructuralModel& model, const std::vector<MaterialState>& states);

SparseMatrix tangent_stiffness(const StructuralModel& model, const std::vector<MaterialState>& states);

// K_Lb and K_La rebuilt from tangent moduli; C_b's factorization and C_s are
// shared with the elastic partition.
SystemPartition tangent_partition(const StructuralModel& model, const std::vector<MaterialState>& states,
                                  const SystemPartition& elastic);

struct NonlinearOptions {
  Backend backend = Backend::Regular;
  int steps = 20;
  double tol_outer = 1e-8;  // |R_r| / |lambda P0|
  double tol_inner = 1e-15; // SRI residual / |lambda P0|
  int max_outer = 50;
  int max_inner = 0;        // <= 0 selects the SRI default
};

struct StepRecord {
  int step = 0;
  double lambda = 0.0;
  Vector displacements;
  int outer_iterations = 0;
  int inner_iterations = 0;
  int n_nle = 0;
  double residual = 0.0;  // |R_r| / |lambda P0| at acceptance
  bool converged = false;
};

struct NonlinearRun {
  Backend backend = Backend::Regular;
  std::vector<StepRecord> steps;
  std::vector<MaterialState> states;
  bool completed = false;
  double wall_time = 0.0;

  int final_n_nle() const { return steps.empty() ? 0 : steps.back().n_nle; }
};

// p0 is the reference load; step s applies lambda = s / steps.
NonlinearRun run_newton_raphson(const StructuralModel& model, const Vector& p0, const PartitionSpec& partition,
                                const NonlinearOptions& options);

struct HistoryPoint {
  int node = 0;
  int dof = 0;
};

// Columns: step, lambda, node_id, dof, value, outer_iters, n_nle, status.
// A step that hit the outer iteration cap is written last with status "failed".
void write_history_csv(std::ostream& out, const StructuralModel& model, const NonlinearRun& run,
                       const std::vector<HistoryPoint>& points, bool full_precision = false);

}  // namespace reanalysis
