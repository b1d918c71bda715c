#pragma once

// The four linear solution paths: conventional direct, full-system PCG,
// reduced-system PCG with the original-structure preconditioner (SRI), and
// the direct Sherman-Morrison-Woodbury route (FDP).

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "reanalysis/assembly.hpp"
#include "reanalysis/costmodel.hpp"
#include "reanalysis/model.hpp"

namespace reanalysis {

enum class Method { Conventional, Pcg, Sri, Fdp };

std::string_view to_string(Method method);
Method method_from_string(std::string_view s);

struct SolveReport {
  Method method = Method::Conventional;
  Vector displacements;
  std::optional<Vector> additional_forces;  // F_a, reduced methods only
  int iterations = 0;
  std::vector<double> residual_history;     // entry j is |r_j| / reference
  FlopCount flops_estimate = 0;
  double wall_time = 0.0;                   // seconds
  bool converged = true;
};

// Sparse LDL^T of a stiffness matrix; rejects indefinite or singular input.
class StiffnessFactorization {
public:
  explicit StiffnessFactorization(const SparseMatrix& k);

  Vector solve(const Vector& r) const;
  Eigen::Index size() const { return size_; }

private:
  std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
  Vector scale_;
  Eigen::Index size_ = 0;
};

SolveReport solve_conventional(const StructuralModel& model);
SolveReport solve_conventional(const SparseMatrix& k, const Vector& r);

// Preconditioned CG on K d = R with M = K_0 (factorized in advance).
// max_iter <= 0 selects 10 n.
SolveReport solve_pcg_full(const StructuralModel& modified, const StiffnessFactorization& k0, double tol = 1e-12,
                           int max_iter = 0);
SolveReport solve_pcg_full(const SparseMatrix& k, const Vector& r, const StiffnessFactorization& k0,
                           double tol = 1e-12, int max_iter = 0);

// M = C_s K_Lb,0^{-1} C_s^T + K_La,0^{-1}, materialized and Cholesky-factorized.
class SriPreconditioner {
public:
  SriPreconditioner() = default;
  explicit SriPreconditioner(Eigen::MatrixXd m);

  Eigen::Index size() const { return matrix_.rows(); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  Vector apply(const Vector& r) const;  // M^{-1} r

private:
  Eigen::MatrixXd matrix_;
  std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> llt_;
};

SriPreconditioner build_sri_preconditioner(const SystemPartition& original);

struct SriOptions {
  double tol = 1e-12;
  int max_iter = 0;  // <= 0 selects 10 q
  // Normalizes the residual by this value instead of |B| when set.
  std::optional<double> reference_norm;
};

SolveReport solve_sri(const SystemPartition& modified, const Vector& r, const SriPreconditioner& precond,
                      const SriOptions& options = {});

// d = C_b^{-1} (B_s - K_Lb^{-1} C_s^T F_a)
Vector recover_displacements(const SystemPartition& partition, const Vector& additional_forces,
                             const ReducedRhs& rhs);
Vector recover_displacements(const SystemPartition& partition, const Vector& additional_forces, const Vector& r);

// F_a = K_La S_a C_s K_Lb^{-1} C_b^{-T} R with S_a = (I + C_s K_Lb^{-1} C_s^T K_La)^{-1}.
Vector fdp_additional_forces(const SystemPartition& partition, const Vector& r);

SolveReport solve_fdp(const SystemPartition& modified, const Vector& r);

}  // namespace reanalysis
