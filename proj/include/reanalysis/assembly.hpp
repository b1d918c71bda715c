#pragma once

// Global assembly in spectral form (K = C^T K_L C) and the basis/additional
// partition that the reduced solvers work on.

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "reanalysis/model.hpp"

namespace reanalysis {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Block-diagonal SPD matrix stored blockwise with blockwise inverses.
class BlockDiagonal {
public:
  BlockDiagonal() = default;
  explicit BlockDiagonal(std::vector<Eigen::MatrixXd> blocks);

  Eigen::Index size() const { return size_; }
  std::size_t block_count() const { return blocks_.size(); }
  const Eigen::MatrixXd& block(std::size_t i) const { return blocks_[i]; }
  const Eigen::MatrixXd& inverse_block(std::size_t i) const { return inverses_[i]; }
  // Lower Cholesky factor L of the inverse block: inverse = L L^T.
  const Eigen::MatrixXd& inverse_factor(std::size_t i) const { return inverse_factors_[i]; }
  Eigen::Index offset(std::size_t i) const { return offsets_[i]; }

  Vector apply(const Vector& x) const;
  Vector apply_inverse(const Vector& x) const;

  Eigen::MatrixXd dense() const;
  Eigen::MatrixXd dense_inverse() const;

private:
  std::vector<Eigen::MatrixXd> blocks_;
  std::vector<Eigen::MatrixXd> inverses_;
  std::vector<Eigen::MatrixXd> inverse_factors_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index size_ = 0;
};

struct BlockIndex {
  Eigen::Index row_offset = 0;
  int mode_count = 0;
};

struct GlobalDecomposition {
  BlockDiagonal parameters;       // K_L, one block per element in id order
  SparseMatrix transform;         // C, (total parameter count) x n
  std::vector<BlockIndex> index;  // element id -> rows of C
};

// moduli, when non-empty, overrides each element's homogeneous modulus.
SparseMatrix assemble_global(const StructuralModel& model, const std::vector<double>& moduli = {});
GlobalDecomposition assemble_parameters(const StructuralModel& model);

// Sparse LU of the square basis transform C_b. Solves with C_b and C_b^T are
// const and safe to call concurrently.
class BasisFactorization {
public:
  explicit BasisFactorization(const SparseMatrix& c_b);

  Eigen::Index size() const { return size_; }
  Vector solve(const Vector& v) const;            // C_b^{-1} v
  Vector solve_transpose(const Vector& v) const;  // C_b^{-T} v
  Eigen::MatrixXd solve_transpose(const Eigen::MatrixXd& v) const;

  // Smallest pivot magnitude over the largest, from the C_b factorization.
  double pivot_ratio() const { return pivot_ratio_; }

private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  Eigen::Index size_ = 0;
  double pivot_ratio_ = 0.0;
};

// Everything about the partition that depends on topology only.
struct PartitionTopology {
  std::vector<int> basis_ids;
  std::vector<int> additional_ids;  // ascending
  SparseMatrix c_b;                 // n x n
  SparseMatrix c_a;                 // q x n
  BasisFactorization basis;
  Eigen::MatrixXd c_s;              // q x n, C_a C_b^{-1}

  PartitionTopology(std::vector<int> basis_elements, std::vector<int> additional_elements, SparseMatrix cb,
                    SparseMatrix ca);
};

class SystemPartition {
public:
  SystemPartition(std::shared_ptr<const PartitionTopology> topology, BlockDiagonal basis_parameters,
                  BlockDiagonal additional_parameters);

  const PartitionTopology& topology() const { return *topology_; }
  const std::shared_ptr<const PartitionTopology>& shared_topology() const { return topology_; }
  const BlockDiagonal& basis_parameters() const { return k_lb_; }       // K_Lb
  const BlockDiagonal& additional_parameters() const { return k_la_; }  // K_La
  const Eigen::MatrixXd& c_s() const { return topology_->c_s; }
  const BasisFactorization& basis() const { return topology_->basis; }

  Eigen::Index n() const { return topology_->c_b.cols(); }
  Eigen::Index q() const { return topology_->c_a.rows(); }

  SystemPartition with_parameters(BlockDiagonal basis_parameters, BlockDiagonal additional_parameters) const;

private:
  std::shared_ptr<const PartitionTopology> topology_;
  BlockDiagonal k_lb_;
  BlockDiagonal k_la_;
};

SystemPartition make_partition(const StructuralModel& model, const PartitionSpec& spec);

// Rebuilds K_Lb and K_La for a model with the same topology, reusing C_b's
// factorization and C_s. moduli, when non-empty, overrides each element's
// homogeneous modulus (indexed by element id).
SystemPartition reparameterize(const SystemPartition& partition, const StructuralModel& model,
                               const std::vector<double>& moduli = {});

struct ReducedRhs {
  Vector b;               // C_s K_Lb^{-1} C_b^{-T} R
  Vector basis_response;  // B_s = K_Lb^{-1} C_b^{-T} R
};

ReducedRhs reduced_rhs(const SystemPartition& partition, const Vector& r);

// (K_La^{-1} + C_s K_Lb^{-1} C_s^T) x as matrix-vector chains.
Vector reduced_apply(const SystemPartition& partition, const Vector& x);

// Dense C_s K_Lb^{-1} C_s^T (q x q, symmetric).
Eigen::MatrixXd flexibility_product(const SystemPartition& partition);

// Dense reduced operator K_La^{-1} + C_s K_Lb^{-1} C_s^T.
Eigen::MatrixXd reduced_matrix(const SystemPartition& partition);

}  // namespace reanalysis
