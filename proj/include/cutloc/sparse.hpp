#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cutloc {

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  double value;
};

// Square sparse matrix in compressed-row form. Column indices are sorted and
// unique within each row. Row products are summed in ascending column order
// so results are bit-reproducible.
class SparseOperator {
 public:
  SparseOperator() = default;

  // Duplicate (row, col) entries are summed in their input order after a
  // stable sort, so the result does not depend on the sort implementation.
  static SparseOperator from_triplets(std::size_t dimension, std::vector<Triplet> triplets, bool symmetric);
  static SparseOperator identity(std::size_t dimension);
  static SparseOperator zero(std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  std::size_t nonzeros() const { return values_.size(); }
  bool symmetric() const { return symmetric_; }

  std::span<const std::uint32_t> row_offsets() const { return row_offsets_; }
  std::span<const std::uint32_t> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }

  double diagonal(std::size_t row) const;
  double coefficient(std::size_t row, std::size_t col) const;
  double max_abs_entry() const;

  // Structural and numerical symmetry to `rel_tol` relative to the larger
  // of the two mirrored entries.
  bool check_symmetry(double rel_tol = 1e-12) const;

  // Row-wise product (A x)_i for a single row; used by relaxation sweeps.
  double row_dot(std::size_t row, std::span<const double> x) const {
    double s = 0.0;
    for (auto k = row_offsets_[row]; k < row_offsets_[row + 1]; ++k) s += values_[k] * x[columns_[k]];
    return s;
  }

 private:
  std::size_t dimension_ = 0;
  bool symmetric_ = false;
  std::vector<std::uint32_t> row_offsets_{0};
  std::vector<std::uint32_t> columns_;
  std::vector<double> values_;
};

std::vector<double> matvec(const SparseOperator& A, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double max_abs(std::span<const double> a);

struct CgResult {
  std::vector<double> x;
  double relative_residual = 0.0;  // ||Ax - b|| / ||b||
  int iterations = 0;
  bool converged = false;
};

// Unpreconditioned conjugate gradients for symmetric positive semidefinite A.
// When A is singular the caller must supply b orthogonal to its kernel.
// Non-convergence is reported through `converged`, not thrown.
CgResult conjugate_gradient(const SparseOperator& A, std::span<const double> b, double tol, int max_iter);

}  // namespace cutloc
