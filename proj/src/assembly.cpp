#include "reanalysis/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SparseLU>

#include "reanalysis/elements.hpp"
#include "reanalysis/errors.hpp"

namespace reanalysis {

namespace {

constexpr double kPivotThreshold = 1e-10;
constexpr Eigen::Index kSolveBlock = 128;
constexpr Eigen::Index kApplyPanel = 96;

using LuSolver = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

// Exposes the diagonal of U, which SparseLU keeps inside its supernodal L store.
class PivotInspectingLu : public LuSolver {
public:
  std::pair<double, double> pivot_range() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index j = 0; j < this->cols(); ++j) {
      double pivot = 0.0;
      for (SCMatrix::InnerIterator it(m_Lstore, j); it; ++it) {
        if (it.row() < j) continue;
        if (it.row() == j) pivot = std::abs(it.value());
        break;
      }
      lo = std::min(lo, pivot);
      hi = std::max(hi, pivot);
    }
    return {lo, hi};
  }
};

}  // namespace

BlockDiagonal::BlockDiagonal(std::vector<Eigen::MatrixXd> blocks) : blocks_(std::move(blocks)) {
  inverses_.reserve(blocks_.size());
  inverse_factors_.reserve(blocks_.size());
  offsets_.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    offsets_.push_back(size_);
    size_ += b.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (b.rows() != b.cols() || llt.info() != Eigen::Success || !b.allFinite()) {
      throw Error(ErrorKind::InvalidState, "stiffness parameter block is not symmetric positive definite");
    }
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(b.rows(), b.cols()));
    inv = 0.5 * (inv + inv.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> inv_llt(inv);
    inverse_factors_.push_back(inv_llt.matrixL());
    inverses_.push_back(std::move(inv));
  }
}

Vector BlockDiagonal::apply(const Vector& x) const {
  Vector y(size_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto m = blocks_[i].rows();
    y.segment(offsets_[i], m).noalias() = blocks_[i] * x.segment(offsets_[i], m);
  }
  return y;
}

Vector BlockDiagonal::apply_inverse(const Vector& x) const {
  Vector y(size_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto m = inverses_[i].rows();
    if (m == 1) {
      y[offsets_[i]] = inverses_[i](0, 0) * x[offsets_[i]];
    } else {
      y.segment(offsets_[i], m).noalias() = inverses_[i] * x.segment(offsets_[i], m);
    }
  }
  return y;
}

Eigen::MatrixXd BlockDiagonal::dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(size_, size_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    d.block(offsets_[i], offsets_[i], blocks_[i].rows(), blocks_[i].cols()) = blocks_[i];
  }
  return d;
}

Eigen::MatrixXd BlockDiagonal::dense_inverse() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(size_, size_);
  for (std::size_t i = 0; i < inverses_.size(); ++i) {
    d.block(offsets_[i], offsets_[i], inverses_[i].rows(), inverses_[i].cols()) = inverses_[i];
  }
  return d;
}

SparseMatrix assemble_global(const StructuralModel& model, const std::vector<double>& moduli) {
  if (!moduli.empty() && moduli.size() != model.elements().size()) {
    throw Error(ErrorKind::InvalidParameter, "one modulus per element expected");
  }
  const int n = model.free_dof_count();
  std::vector<Eigen::Triplet<double>> triplets;
  const auto edofs = static_cast<std::size_t>(2 * model.dofs_per_node());
  triplets.reserve(model.elements().size() * edofs * edofs);
  for (const auto& e : model.elements()) {
    const double override = moduli.empty() ? 0.0 : moduli[static_cast<std::size_t>(e.id)];
    const Eigen::MatrixXd k = decompose(model, e, override).stiffness();
    const auto dofs = model.element_dofs(e);
    for (std::size_t a = 0; a < dofs.size(); ++a) {
      if (dofs[a] == kConstrained) continue;
      for (std::size_t b = 0; b < dofs.size(); ++b) {
        if (dofs[b] == kConstrained) continue;
        triplets.emplace_back(dofs[a], dofs[b], k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
      }
    }
  }
  SparseMatrix kg(n, n);
  kg.setFromTriplets(triplets.begin(), triplets.end());
  // Element matrices are symmetric only to rounding; enforce exact symmetry.
  SparseMatrix kt = kg.transpose();
  kg = 0.5 * (kg + kt);
  kg.prune(0.0);
  return kg;
}

GlobalDecomposition assemble_parameters(const StructuralModel& model) {
  GlobalDecomposition g;
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(model.elements().size());
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::Index row = 0;
  for (const auto& e : model.elements()) {
    auto d = decompose(model, e);
    const auto dofs = model.element_dofs(e);
    const int m = d.mode_count();
    g.index.push_back({row, m});
    for (int r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < dofs.size(); ++c) {
        if (dofs[c] == kConstrained) continue;
        const double v = d.modes_global(r, static_cast<Eigen::Index>(c));
        if (v != 0.0) triplets.emplace_back(row + r, dofs[c], v);
      }
    }
    row += m;
    blocks.push_back(std::move(d.parameters));
  }
  g.parameters = BlockDiagonal(std::move(blocks));
  g.transform.resize(row, model.free_dof_count());
  g.transform.setFromTriplets(triplets.begin(), triplets.end());
  return g;
}

struct BasisFactorization::Impl {
  PivotInspectingLu lu;
  LuSolver lu_transpose;
};

BasisFactorization::BasisFactorization(const SparseMatrix& c_b) : size_(c_b.rows()) {
  if (c_b.rows() != c_b.cols()) {
    throw Error(ErrorKind::NotDeterminate, "basis transform is not square");
  }
  auto impl = std::make_shared<Impl>();
  if (size_ > 0) {
    SparseMatrix a = c_b;
    a.makeCompressed();
    impl->lu.compute(a);
    if (impl->lu.info() != Eigen::Success) {
      throw Error(ErrorKind::BasisUnstable, "basis transform is singular: " + impl->lu.lastErrorMessage());
    }
    const auto [lo, hi] = impl->lu.pivot_range();
    pivot_ratio_ = hi > 0.0 ? lo / hi : 0.0;
    if (!(pivot_ratio_ > kPivotThreshold)) {
      throw Error(ErrorKind::BasisUnstable,
                  "basis transform is numerically singular (pivot ratio " + std::to_string(pivot_ratio_) + ")");
    }
    SparseMatrix at = c_b.transpose();
    at.makeCompressed();
    impl->lu_transpose.compute(at);
    if (impl->lu_transpose.info() != Eigen::Success) {
      throw Error(ErrorKind::BasisUnstable, "transposed basis transform is singular");
    }
  } else {
    pivot_ratio_ = 1.0;
  }
  impl_ = std::move(impl);
}

Vector BasisFactorization::solve(const Vector& v) const {
  if (size_ == 0) return Vector(0);
  return impl_->lu.solve(v);
}

Vector BasisFactorization::solve_transpose(const Vector& v) const {
  if (size_ == 0) return Vector(0);
  return impl_->lu_transpose.solve(v);
}

Eigen::MatrixXd BasisFactorization::solve_transpose(const Eigen::MatrixXd& v) const {
  if (size_ == 0) return Eigen::MatrixXd(0, v.cols());
  return impl_->lu_transpose.solve(v);
}

PartitionTopology::PartitionTopology(std::vector<int> basis_elements, std::vector<int> additional_elements,
                                     SparseMatrix cb, SparseMatrix ca)
    : basis_ids(std::move(basis_elements)),
      additional_ids(std::move(additional_elements)),
      c_b(std::move(cb)),
      c_a(std::move(ca)),
      basis(c_b) {
  const Eigen::Index n = c_b.cols();
  const Eigen::Index q = c_a.rows();
  c_s.resize(q, n);
  // C_s^T = C_b^{-T} C_a^T, one column block of C_a^T at a time.
  const SparseMatrix c_a_t = c_a.transpose();
  for (Eigen::Index j = 0; j < q; j += kSolveBlock) {
    const Eigen::Index width = std::min(kSolveBlock, q - j);
    const Eigen::MatrixXd rhs = Eigen::MatrixXd(c_a_t.middleCols(j, width));
    c_s.middleRows(j, width) = basis.solve_transpose(rhs).transpose();
  }
}

SystemPartition::SystemPartition(std::shared_ptr<const PartitionTopology> topology,
                                 BlockDiagonal basis_parameters, BlockDiagonal additional_parameters)
    : topology_(std::move(topology)), k_lb_(std::move(basis_parameters)), k_la_(std::move(additional_parameters)) {
  if (k_lb_.size() != topology_->c_b.rows() || k_la_.size() != topology_->c_a.rows()) {
    throw Error(ErrorKind::InternalError, "parameter blocks do not match the partition topology");
  }
}

SystemPartition SystemPartition::with_parameters(BlockDiagonal basis_parameters,
                                                 BlockDiagonal additional_parameters) const {
  return SystemPartition(topology_, std::move(basis_parameters), std::move(additional_parameters));
}

namespace {

SparseMatrix select_rows(const GlobalDecomposition& g, const std::vector<int>& ids, Eigen::Index cols) {
  Eigen::Index rows = 0;
  for (int id : ids) rows += g.index[static_cast<std::size_t>(id)].mode_count;
  // Row-major copy makes row extraction cheap.
  const Eigen::SparseMatrix<double, Eigen::RowMajor> c = g.transform;
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::Index out = 0;
  for (int id : ids) {
    const auto& bi = g.index[static_cast<std::size_t>(id)];
    for (int r = 0; r < bi.mode_count; ++r, ++out) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(c, bi.row_offset + r); it; ++it) {
        triplets.emplace_back(out, it.col(), it.value());
      }
    }
  }
  SparseMatrix s(rows, cols);
  s.setFromTriplets(triplets.begin(), triplets.end());
  s.makeCompressed();
  return s;
}

BlockDiagonal select_blocks(const std::vector<Eigen::MatrixXd>& all, const std::vector<int>& ids) {
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(ids.size());
  for (int id : ids) blocks.push_back(all[static_cast<std::size_t>(id)]);
  return BlockDiagonal(std::move(blocks));
}

std::vector<Eigen::MatrixXd> parameter_blocks(const StructuralModel& model, const std::vector<double>& moduli) {
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(model.elements().size());
  for (const auto& e : model.elements()) {
    const double override = moduli.empty() ? 0.0 : moduli[static_cast<std::size_t>(e.id)];
    blocks.push_back(element_parameters(model, e, override));
  }
  return blocks;
}

}  // namespace

SystemPartition make_partition(const StructuralModel& model, const PartitionSpec& spec) {
  const int element_count = static_cast<int>(model.elements().size());
  std::vector<int> additional;
  std::vector<int> basis;
  for (int id : spec.additional_ids) {
    if (id < 0 || id >= element_count) {
      throw Error(ErrorKind::InvalidParameter, "additional component " + std::to_string(id) + " does not exist");
    }
  }
  for (int id = 0; id < element_count; ++id) {
    (spec.additional_ids.count(id) ? additional : basis).push_back(id);
  }

  const GlobalDecomposition g = assemble_parameters(model);
  Eigen::Index basis_params = 0;
  for (int id : basis) basis_params += g.index[static_cast<std::size_t>(id)].mode_count;
  const Eigen::Index n = model.free_dof_count();
  if (basis_params != n) {
    throw Error(ErrorKind::NotDeterminate, "basis has " + std::to_string(basis_params) +
                                               " stiffness parameters for " + std::to_string(n) + " dofs");
  }

  std::vector<Eigen::MatrixXd> all;
  all.reserve(g.parameters.block_count());
  for (std::size_t i = 0; i < g.parameters.block_count(); ++i) all.push_back(g.parameters.block(i));

  auto topology = std::make_shared<const PartitionTopology>(basis, additional, select_rows(g, basis, n),
                                                            select_rows(g, additional, n));
  return SystemPartition(std::move(topology), select_blocks(all, basis), select_blocks(all, additional));
}

SystemPartition reparameterize(const SystemPartition& partition, const StructuralModel& model,
                               const std::vector<double>& moduli) {
  if (!moduli.empty() && moduli.size() != model.elements().size()) {
    throw Error(ErrorKind::InvalidParameter, "one modulus per element expected");
  }
  const auto all = parameter_blocks(model, moduli);
  const auto& t = partition.topology();
  return partition.with_parameters(select_blocks(all, t.basis_ids), select_blocks(all, t.additional_ids));
}

ReducedRhs reduced_rhs(const SystemPartition& partition, const Vector& r) {
  if (r.size() != partition.n()) throw Error(ErrorKind::InvalidParameter, "load vector length must equal n");
  ReducedRhs out;
  const Vector p_r = partition.basis().solve_transpose(r);
  out.basis_response = partition.basis_parameters().apply_inverse(p_r);
  out.b = partition.c_s() * out.basis_response;
  return out;
}

Vector reduced_apply(const SystemPartition& partition, const Vector& x) {
  if (x.size() != partition.q()) throw Error(ErrorKind::InvalidParameter, "reduced vector length must equal q");
  Vector y = partition.additional_parameters().apply_inverse(x);
  // C_s K_Lb^{-1} C_s^T x, one cache-sized panel of C_s columns at a time so
  // each panel is streamed from memory once for both products.
  const auto& c_s = partition.c_s();
  const auto& k_lb = partition.basis_parameters();
  Vector t;
  std::size_t first = 0;
  while (first < k_lb.block_count()) {
    std::size_t last = first;
    const Eigen::Index begin = k_lb.offset(first);
    Eigen::Index width = 0;
    while (last < k_lb.block_count() && (width == 0 || width + k_lb.block(last).rows() <= kApplyPanel)) {
      width += k_lb.block(last).rows();
      ++last;
    }
    const auto panel = c_s.middleCols(begin, width);
    t.noalias() = panel.transpose() * x;
    for (std::size_t i = first; i < last; ++i) {
      const auto& inv = k_lb.inverse_block(i);
      const Eigen::Index off = k_lb.offset(i) - begin;
      if (inv.rows() == 1) {
        t[off] *= inv(0, 0);
      } else {
        t.segment(off, inv.rows()) = (inv * t.segment(off, inv.rows())).eval();
      }
    }
    y.noalias() += panel * t;
    first = last;
  }
  return y;
}

Eigen::MatrixXd flexibility_product(const SystemPartition& partition) {
  const auto& k_lb = partition.basis_parameters();
  const Eigen::Index q = partition.q();
  Eigen::MatrixXd w = partition.c_s();
  for (std::size_t i = 0; i < k_lb.block_count(); ++i) {
    const auto& l = k_lb.inverse_factor(i);
    const auto off = k_lb.offset(i);
    if (l.rows() == 1) {
      w.col(off) *= l(0, 0);
    } else {
      w.middleCols(off, l.rows()) = (w.middleCols(off, l.rows()) * l).eval();
    }
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(q, q);
  g.selfadjointView<Eigen::Lower>().rankUpdate(w);
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

Eigen::MatrixXd reduced_matrix(const SystemPartition& partition) {
  Eigen::MatrixXd a = flexibility_product(partition);
  const auto& k_la = partition.additional_parameters();
  for (std::size_t i = 0; i < k_la.block_count(); ++i) {
    const auto m = k_la.inverse_block(i).rows();
    a.block(k_la.offset(i), k_la.offset(i), m, m) += k_la.inverse_block(i);
  }
  return a;
}

}  // namespace reanalysis
