#include "reanalysis/nonlinear.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include "reanalysis/errors.hpp"

namespace reanalysis {

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::Regular: return "regular";
    case Backend::Reduction: return "reduction";
    case Backend::Sri: return "sri";
  }
  return "unknown";
}

Backend backend_from_string(std::string_view s) {
  if (s == "regular") return Backend::Regular;
  if (s == "reduction") return Backend::Reduction;
  if (s == "sri") return Backend::Sri;
  throw Error(ErrorKind::InvalidParameter, "unknown backend '" + std::string(s) + "'");
}

namespace {

const BilinearLaw& law_of(const ElementRecord& e) {
  if (e.kind != ElementKind::TrussBar || !e.material.bilinear) {
    throw Error(ErrorKind::UnsupportedModel, "nonlinear analysis needs truss bars with a bilinear law");
  }
  return *e.material.bilinear;
}

double displacement(const Vector& d, int dof) { return dof == kConstrained ? 0.0 : d[dof]; }

}  // namespace

Vector internal_force(const StructuralModel& model, const Vector& d, std::vector<MaterialState>* states) {
  if (d.size() != model.free_dof_count()) throw Error(ErrorKind::InvalidParameter, "displacement length must equal n");
  Vector f = Vector::Zero(model.free_dof_count());
  if (states) states->assign(model.elements().size(), MaterialState{});
  for (const auto& e : model.elements()) {
    const auto& law = law_of(e);
    const auto dofs = model.element_dofs(e);
    const double length = model.length(e);
    const double c = std::cos(model.angle(e));
    const double s = std::sin(model.angle(e));
    // Small-displacement axial strain.
    const double elongation = c * (displacement(d, dofs[2]) - displacement(d, dofs[0])) +
                              s * (displacement(d, dofs[3]) - displacement(d, dofs[1]));
    const MaterialState state = bilinear_stress(elongation / length, law);
    const double axial = state.stress * e.section.area;
    const double nodal[4] = {-axial * c, -axial * s, axial * c, axial * s};
    for (std::size_t a = 0; a < 4; ++a) {
      if (dofs[a] != kConstrained) f[dofs[a]] += nodal[a];
    }
    if (states) (*states)[static_cast<std::size_t>(e.id)] = state;
  }
  return f;
}

std::vector<MaterialState> material_states(const StructuralModel& model, const Vector& d) {
  std::vector<MaterialState> states;
  internal_force(model, d, &states);
  return states;
}

TangentSnapshot tangent_snapshot(const StructuralModel& model, const std::vector<MaterialState>& states) {
  if (states.size() != model.elements().size()) throw Error(ErrorKind::InvalidState, "one state per element expected");
  TangentSnapshot snap;
  snap.moduli.reserve(states.size());
  for (const auto& e : model.elements()) {
    const auto& law = law_of(e);
    const auto& st = states[static_cast<std::size_t>(e.id)];
    const double modulus = st.yielded ? law.et : law.e0;
    if (!(modulus > 0.0)) throw Error(ErrorKind::InvalidState, "tangent modulus must be positive");
    snap.moduli.push_back(modulus);
    if (st.yielded) ++snap.n_nle;
  }
  return snap;
}

SparseMatrix tangent_stiffness(const StructuralModel& model, const std::vector<MaterialState>& states) {
  return assemble_global(model, tangent_snapshot(model, states).moduli);
}

SystemPartition tangent_partition(const StructuralModel& model, const std::vector<MaterialState>& states,
                                  const SystemPartition& elastic) {
  return reparameterize(elastic, model, tangent_snapshot(model, states).moduli);
}

NonlinearRun run_newton_raphson(const StructuralModel& model, const Vector& p0, const PartitionSpec& partition,
                                const NonlinearOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = model.free_dof_count();
  if (p0.size() != n) throw Error(ErrorKind::InvalidParameter, "reference load length must equal n");
  if (options.steps < 1) throw Error(ErrorKind::InvalidParameter, "at least one load step is required");

  NonlinearRun run;
  run.backend = options.backend;

  std::optional<SystemPartition> elastic;
  SriPreconditioner precond;
  if (options.backend != Backend::Regular) {
    elastic.emplace(make_partition(model, partition));
    if (options.backend == Backend::Sri) precond = build_sri_preconditioner(*elastic);
  }

  auto solve_increment = [&](const std::vector<MaterialState>& states, const Vector& rhs, double reference,
                             int& inner) -> Vector {
    switch (options.backend) {
      case Backend::Regular:
        return StiffnessFactorization(tangent_stiffness(model, states)).solve(rhs);
      case Backend::Reduction: {
        const SystemPartition tangent = tangent_partition(model, states, *elastic);
        const ReducedRhs reduced = reduced_rhs(tangent, rhs);
        Vector forces(0);
        if (tangent.q() > 0) {
          Eigen::LLT<Eigen::MatrixXd> llt(reduced_matrix(tangent));
          if (llt.info() != Eigen::Success) {
            throw Error(ErrorKind::InternalError, "reduced tangent system is not positive definite");
          }
          forces = llt.solve(reduced.b);
        }
        return recover_displacements(tangent, forces, reduced);
      }
      case Backend::Sri: {
        const SystemPartition tangent = tangent_partition(model, states, *elastic);
        SriOptions sri;
        sri.tol = options.tol_inner;
        sri.max_iter = options.max_inner;
        sri.reference_norm = reference;
        const SolveReport report = solve_sri(tangent, rhs, precond, sri);
        inner += report.iterations;
        return report.displacements;
      }
    }
    throw Error(ErrorKind::InternalError, "unhandled backend");
  };

  Vector d = Vector::Zero(n);
  std::vector<MaterialState> states;
  for (int s = 1; s <= options.steps; ++s) {
    StepRecord record;
    record.step = s;
    record.lambda = static_cast<double>(s) / options.steps;
    const Vector external = record.lambda * p0;
    const double reference = external.norm();
    if (reference == 0.0) {
      throw Error(ErrorKind::InvalidParameter, "reference load must be non-zero");
    }
    for (;;) {
      const Vector residual = internal_force(model, d, &states) - external;
      record.residual = residual.norm() / reference;
      if (record.residual < options.tol_outer) {
        record.converged = true;
        break;
      }
      if (record.outer_iterations >= options.max_outer) break;
      d += solve_increment(states, -residual, reference, record.inner_iterations);
      ++record.outer_iterations;
    }
    record.displacements = d;
    record.n_nle = tangent_snapshot(model, states).n_nle;
    run.steps.push_back(std::move(record));
    if (!run.steps.back().converged) break;
  }
  run.states = std::move(states);
  run.completed = run.steps.size() == static_cast<std::size_t>(options.steps) && run.steps.back().converged;
  run.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

void write_history_csv(std::ostream& out, const StructuralModel& model, const NonlinearRun& run,
                       const std::vector<HistoryPoint>& points, bool full_precision) {
  out << "step,lambda,node_id,dof,value,outer_iters,n_nle,status\n";
  char value[64];
  char lambda[64];
  for (const auto& step : run.steps) {
    std::snprintf(lambda, sizeof lambda, "%.10g", step.lambda);
    for (const auto& point : points) {
      const int eq = model.dof(point.node, point.dof);
      std::snprintf(value, sizeof value, full_precision ? "%.17g" : "%.6e",
                    eq == kConstrained ? 0.0 : step.displacements[eq]);
      out << step.step << ',' << lambda << ',' << point.node << ',' << point.dof << ',' << value << ','
          << step.outer_iterations << ',' << step.n_nle << ',' << (step.converged ? "ok" : "failed") << '\n';
    }
  }
}

}  // namespace reanalysis
