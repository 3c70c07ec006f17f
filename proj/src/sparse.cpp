#include "cutloc/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cutloc/error.hpp"

namespace cutloc {

SparseOperator SparseOperator::from_triplets(std::size_t dimension, std::vector<Triplet> triplets, bool symmetric) {
  for (const auto& t : triplets) {
    if (t.row >= dimension || t.col >= dimension) {
      throw ParameterError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                           ") outside a " + std::to_string(dimension) + "-dimensional operator");
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(),
                   [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  SparseOperator A;
  A.dimension_ = dimension;
  A.symmetric_ = symmetric;
  A.row_offsets_.assign(dimension + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    std::size_t j = k;
    double sum = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[k].row && triplets[j].col == triplets[k].col) {
      sum += triplets[j].value;
      ++j;
    }
    A.columns_.push_back(triplets[k].col);
    A.values_.push_back(sum);
    ++A.row_offsets_[triplets[k].row + 1];
    k = j;
  }
  for (std::size_t r = 0; r < dimension; ++r) A.row_offsets_[r + 1] += A.row_offsets_[r];
  return A;
}

SparseOperator SparseOperator::identity(std::size_t dimension) {
  std::vector<Triplet> t;
  t.reserve(dimension);
  for (std::size_t i = 0; i < dimension; ++i) t.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), 1.0});
  return from_triplets(dimension, std::move(t), true);
}

SparseOperator SparseOperator::zero(std::size_t dimension) { return from_triplets(dimension, {}, true); }

double SparseOperator::coefficient(std::size_t row, std::size_t col) const {
  const auto begin = columns_.begin() + row_offsets_[row];
  const auto end = columns_.begin() + row_offsets_[row + 1];
  const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(col));
  if (it == end || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - columns_.begin())];
}

double SparseOperator::diagonal(std::size_t row) const { return coefficient(row, row); }

double SparseOperator::max_abs_entry() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool SparseOperator::check_symmetry(double rel_tol) const {
  for (std::size_t r = 0; r < dimension_; ++r) {
    for (auto k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const std::size_t c = columns_[k];
      const auto begin = columns_.begin() + row_offsets_[c];
      const auto end = columns_.begin() + row_offsets_[c + 1];
      const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(r));
      if (it == end || *it != r) return false;
      const double a = values_[k];
      const double b = values_[static_cast<std::size_t>(it - columns_.begin())];
      if (std::abs(a - b) > rel_tol * std::max(std::abs(a), std::abs(b))) return false;
    }
  }
  return true;
}

std::vector<double> matvec(const SparseOperator& A, std::span<const double> x) {
  if (x.size() != A.dimension()) {
    throw ParameterError("matvec: vector of length " + std::to_string(x.size()) + " against operator of dimension " +
                         std::to_string(A.dimension()));
  }
  std::vector<double> y(A.dimension());
  for (std::size_t r = 0; r < A.dimension(); ++r) y[r] = A.row_dot(r, x);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

CgResult conjugate_gradient(const SparseOperator& A, std::span<const double> b, double tol, int max_iter) {
  if (b.size() != A.dimension()) throw ParameterError("conjugate_gradient: right-hand side has wrong length");
  if (!(tol > 0.0) || max_iter < 0) throw ParameterError("conjugate_gradient: tol must be > 0 and max_iter >= 0");

  const std::size_t n = A.dimension();
  CgResult result;
  result.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    result.converged = true;
    return result;
  }
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> p = r;
  double rr = dot(r, r);
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= tol * bnorm) break;
    const auto Ap = matvec(A, p);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) break;  // direction in the kernel: b has a kernel component
    const double alpha = rr / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      result.x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    result.iterations = it + 1;
  }
  // Report the true residual, not the recursively updated one.
  const auto Ax = matvec(A, result.x);
  std::vector<double> res(n);
  for (std::size_t i = 0; i < n; ++i) res[i] = Ax[i] - b[i];
  result.relative_residual = norm2(res) / bnorm;
  result.converged = result.relative_residual <= tol;
  return result;
}

}  // namespace cutloc
