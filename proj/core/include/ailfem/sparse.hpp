#pragma once

#include <span>
#include <vector>

#include "ailfem/geometry.hpp"

namespace ailfem {

using Vector = std::vector<double>;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Square matrix in compressed sparse row storage; column indices ascend
/// within each row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// Validates the CSR arrays (monotone offsets, sorted in-range columns).
  SparseMatrix(Index n, std::vector<std::size_t> row_offsets, std::vector<Index> col_indices,
               std::vector<double> values);

  Index dimension() const { return n_; }
  std::size_t nonzeros() const { return values_.size(); }
  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const Index> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  /// Entry (i, j); zero when not stored.
  double at(Index i, Index j) const;
  Vector diagonal() const;
  bool is_symmetric() const;  // bit-exact comparison of A_ij and A_ji

 private:
  Index n_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

/// Sums duplicate entries and drops entries that sum to exactly zero.
/// Duplicates are summed in input order, so symmetric input gives a
/// bit-exactly symmetric matrix.
SparseMatrix assemble_from_triplets(std::span<const Triplet> triplets, Index n);

Vector spmv(const SparseMatrix& a, std::span<const double> x);

struct SolveReport {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. Returns x with
/// ||A x - b||_2 <= rel_tol ||b||_2, checked on the recomputed true residual.
/// `initial_guess` (optional) seeds the iteration. Throws SolverError after
/// 10 n iterations.
Vector solve_spd(const SparseMatrix& a, std::span<const double> b, double rel_tol,
                 std::span<const double> initial_guess = {}, SolveReport* report = nullptr);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

}  // namespace ailfem
