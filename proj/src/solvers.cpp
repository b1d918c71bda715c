#include "reanalysis/solvers.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "reanalysis/errors.hpp"

namespace reanalysis {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Smallest LDL^T pivot accepted, relative to the largest.
constexpr double kStiffnessPivotThreshold = 1e-14;

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Conventional: return "conventional";
    case Method::Pcg: return "pcg";
    case Method::Sri: return "sri";
    case Method::Fdp: return "fdp";
  }
  return "unknown";
}

Method method_from_string(std::string_view s) {
  if (s == "conventional") return Method::Conventional;
  if (s == "pcg") return Method::Pcg;
  if (s == "sri") return Method::Sri;
  if (s == "fdp") return Method::Fdp;
  throw Error(ErrorKind::InvalidParameter, "unknown method '" + std::string(s) + "'");
}

StiffnessFactorization::StiffnessFactorization(const SparseMatrix& k) : size_(k.rows()) {
  auto ldlt = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
  if (size_ > 0) {
    // Symmetric diagonal scaling: translations and rotations differ by orders
    // of magnitude in frames, and the unit-diagonal form factors more accurately.
    const Vector diag = k.diagonal();
    if (!(diag.minCoeff() > 0.0)) {
      throw Error(ErrorKind::UnstableStructure, "stiffness matrix has a non-positive diagonal entry");
    }
    scale_ = diag.cwiseSqrt().cwiseInverse();
    ldlt->compute(scale_.asDiagonal() * k * scale_.asDiagonal());
    if (ldlt->info() != Eigen::Success) {
      throw Error(ErrorKind::UnstableStructure, "stiffness matrix factorization failed");
    }
    const Vector d = ldlt->vectorD();
    const double hi = d.cwiseAbs().maxCoeff();
    if (!(d.minCoeff() > kStiffnessPivotThreshold * hi)) {
      throw Error(ErrorKind::UnstableStructure, "stiffness matrix is singular or indefinite");
    }
  }
  ldlt_ = std::move(ldlt);
}

Vector StiffnessFactorization::solve(const Vector& r) const {
  if (size_ == 0) return Vector(0);
  return scale_.cwiseProduct(ldlt_->solve(scale_.cwiseProduct(r)));
}

SolveReport solve_conventional(const SparseMatrix& k, const Vector& r) {
  const auto start = Clock::now();
  SolveReport report;
  report.method = Method::Conventional;
  StiffnessFactorization factor(k);
  report.displacements = factor.solve(r);
  report.wall_time = seconds_since(start);
  return report;
}

SolveReport solve_conventional(const StructuralModel& model) {
  return solve_conventional(assemble_global(model), model.load_vector());
}

SolveReport solve_pcg_full(const SparseMatrix& k, const Vector& r, const StiffnessFactorization& k0, double tol,
                           int max_iter) {
  const auto start = Clock::now();
  const Eigen::Index n = k.rows();
  if (r.size() != n || k0.size() != n) throw Error(ErrorKind::InvalidParameter, "PCG operand sizes differ");
  if (max_iter <= 0) max_iter = static_cast<int>(std::max<Eigen::Index>(1, 10 * n));

  SolveReport report;
  report.method = Method::Pcg;
  Vector x = Vector::Zero(n);
  const double r_norm = r.norm();
  if (r_norm == 0.0) {
    report.displacements = x;
    report.residual_history.push_back(0.0);
    report.flops_estimate = flops_pcg(static_cast<std::uint64_t>(n), 0);
    report.wall_time = seconds_since(start);
    return report;
  }
  Vector res = r;
  Vector z = k0.solve(res);
  Vector p = z;
  double rz = res.dot(z);
  report.residual_history.push_back(1.0);
  int j = 0;
  report.converged = false;
  while (j < max_iter) {
    const Vector ap = k * p;
    const double alpha = rz / ap.dot(p);
    x.noalias() += alpha * p;
    res.noalias() -= alpha * ap;
    ++j;
    const double rel = res.norm() / r_norm;
    report.residual_history.push_back(rel);
    if (rel < tol) {
      report.converged = true;
      break;
    }
    z = k0.solve(res);
    const double rz_next = res.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  report.iterations = j;
  report.displacements = std::move(x);
  report.flops_estimate = flops_pcg(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(j));
  report.wall_time = seconds_since(start);
  return report;
}

SolveReport solve_pcg_full(const StructuralModel& modified, const StiffnessFactorization& k0, double tol,
                           int max_iter) {
  return solve_pcg_full(assemble_global(modified), modified.load_vector(), k0, tol, max_iter);
}

SriPreconditioner::SriPreconditioner(Eigen::MatrixXd m) : matrix_(std::move(m)) {
  auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>();
  if (matrix_.rows() > 0) {
    llt->compute(matrix_);
    if (llt->info() != Eigen::Success) {
      throw Error(ErrorKind::InternalError, "SRI preconditioner is not symmetric positive definite");
    }
  }
  llt_ = std::move(llt);
}

Vector SriPreconditioner::apply(const Vector& r) const {
  if (matrix_.rows() == 0) return Vector(0);
  return llt_->solve(r);
}

SriPreconditioner build_sri_preconditioner(const SystemPartition& original) {
  return SriPreconditioner(reduced_matrix(original));
}

Vector recover_displacements(const SystemPartition& partition, const Vector& additional_forces,
                             const ReducedRhs& rhs) {
  if (additional_forces.size() != partition.q()) {
    throw Error(ErrorKind::InvalidParameter, "additional force vector length must equal q");
  }
  Vector inner = rhs.basis_response;
  if (partition.q() > 0) {
    inner -= partition.basis_parameters().apply_inverse(partition.c_s().transpose() * additional_forces);
  }
  return partition.basis().solve(inner);
}

Vector recover_displacements(const SystemPartition& partition, const Vector& additional_forces, const Vector& r) {
  return recover_displacements(partition, additional_forces, reduced_rhs(partition, r));
}

SolveReport solve_sri(const SystemPartition& modified, const Vector& r, const SriPreconditioner& precond,
                      const SriOptions& options) {
  const auto start = Clock::now();
  const Eigen::Index q = modified.q();
  const Eigen::Index n = modified.n();
  if (precond.size() != q) throw Error(ErrorKind::InvalidParameter, "preconditioner size must equal q");
  int max_iter = options.max_iter > 0 ? options.max_iter : static_cast<int>(std::max<Eigen::Index>(1, 10 * q));

  SolveReport report;
  report.method = Method::Sri;
  const ReducedRhs rhs = reduced_rhs(modified, r);
  const double b_norm = rhs.b.norm();
  const double reference = options.reference_norm ? *options.reference_norm : b_norm;

  Vector x = Vector::Zero(q);
  int j = 0;
  if (q > 0 && b_norm > 0.0) {
    // r_0 = B - A x_0 with x_0 = 0.
    Vector res = rhs.b - reduced_apply(modified, x);
    Vector z = precond.apply(res);
    Vector p = z;
    double rz = res.dot(z);
    report.residual_history.push_back(res.norm() / reference);
    report.converged = report.residual_history.back() < options.tol;
    while (!report.converged && j < max_iter) {
      const Vector ap = reduced_apply(modified, p);
      const double alpha = rz / ap.dot(p);
      x.noalias() += alpha * p;
      res.noalias() -= alpha * ap;
      ++j;
      report.residual_history.push_back(res.norm() / reference);
      if (report.residual_history.back() < options.tol) {
        report.converged = true;
        break;
      }
      z = precond.apply(res);
      const double rz_next = res.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
  } else {
    report.residual_history.push_back(0.0);
  }
  report.iterations = j;
  report.displacements = recover_displacements(modified, x, rhs);
  report.additional_forces = std::move(x);
  report.flops_estimate =
      flops_sri(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(j));
  report.wall_time = seconds_since(start);
  return report;
}

namespace {

struct FdpSolution {
  Vector additional_forces;
  ReducedRhs rhs;
};

FdpSolution fdp_solve(const SystemPartition& partition, const Vector& r) {
  FdpSolution out;
  out.rhs = reduced_rhs(partition, r);
  const Eigen::Index q = partition.q();
  if (q == 0) {
    out.additional_forces = Vector(0);
    return out;
  }
  // I + (C_s K_Lb^{-1} C_s^T) K_La
  Eigen::MatrixXd s = flexibility_product(partition);
  const auto& k_la = partition.additional_parameters();
  for (std::size_t i = 0; i < k_la.block_count(); ++i) {
    const auto m = k_la.block(i).rows();
    const auto off = k_la.offset(i);
    if (m == 1) {
      s.col(off) *= k_la.block(i)(0, 0);
    } else {
      s.middleCols(off, m) = (s.middleCols(off, m) * k_la.block(i)).eval();
    }
  }
  s.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(s);
  const double rcond = lu.rcond();
  if (!(rcond > std::numeric_limits<double>::epsilon())) {
    throw Error(ErrorKind::InternalError, "FDP matrix I + C_s K_Lb^-1 C_s^T K_La is singular");
  }
  out.additional_forces = k_la.apply(lu.solve(out.rhs.b));
  return out;
}

}  // namespace

Vector fdp_additional_forces(const SystemPartition& partition, const Vector& r) {
  return fdp_solve(partition, r).additional_forces;
}

SolveReport solve_fdp(const SystemPartition& modified, const Vector& r) {
  const auto start = Clock::now();
  SolveReport report;
  report.method = Method::Fdp;
  auto solution = fdp_solve(modified, r);
  report.displacements = recover_displacements(modified, solution.additional_forces, solution.rhs);
  report.additional_forces = std::move(solution.additional_forces);
  report.flops_estimate =
      flops_fdp(static_cast<std::uint64_t>(modified.n()), static_cast<std::uint64_t>(modified.q()));
  report.wall_time = seconds_since(start);
  return report;
}

}  // namespace reanalysis
