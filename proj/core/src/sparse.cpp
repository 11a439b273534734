#include "ailfem/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ailfem/errors.hpp"

namespace ailfem {

SparseMatrix::SparseMatrix(Index n, std::vector<std::size_t> row_offsets, std::vector<Index> col_indices,
                           std::vector<double> values)
    : n_(n), row_offsets_(std::move(row_offsets)), col_indices_(std::move(col_indices)), values_(std::move(values)) {
  if (row_offsets_.size() != std::size_t{n_} + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != col_indices_.size() || col_indices_.size() != values_.size()) {
    throw InputError("inconsistent CSR arrays");
  }
  for (Index i = 0; i < n_; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1]) throw InputError("CSR row offsets must be non-decreasing");
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (col_indices_[k] >= n_) throw InputError("CSR column index out of range");
      if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1]) {
        throw InputError("CSR column indices must be strictly ascending within a row");
      }
    }
  }
}

double SparseMatrix::at(Index i, Index j) const {
  if (i >= n_ || j >= n_) throw InputError("matrix index out of range");
  const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

Vector SparseMatrix::diagonal() const {
  Vector d(n_, 0.0);
  for (Index i = 0; i < n_; ++i) d[i] = at(i, i);
  return d;
}

bool SparseMatrix::is_symmetric() const {
  for (Index i = 0; i < n_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (at(col_indices_[k], i) != values_[k]) return false;
    }
  }
  return true;
}

SparseMatrix assemble_from_triplets(std::span<const Triplet> triplets, Index n) {
  // Stable counting sort by row keeps input order within each row.
  std::vector<std::size_t> count(std::size_t{n} + 1, 0);
  for (const auto& t : triplets) {
    if (t.row >= n || t.col >= n) {
      std::ostringstream msg;
      msg << "triplet (" << t.row << ", " << t.col << ") out of range for dimension " << n;
      throw InputError(msg.str());
    }
    ++count[t.row + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<std::size_t> cursor(count.begin(), count.end() - 1);
  std::vector<std::pair<Index, double>> bucket(triplets.size());
  for (const auto& t : triplets) bucket[cursor[t.row]++] = {t.col, t.value};

  std::vector<std::size_t> offsets(std::size_t{n} + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size() / 2 + 1);
  vals.reserve(triplets.size() / 2 + 1);
  for (Index i = 0; i < n; ++i) {
    const auto first = bucket.begin() + static_cast<std::ptrdiff_t>(count[i]);
    const auto last = bucket.begin() + static_cast<std::ptrdiff_t>(count[i + 1]);
    std::stable_sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto it = first; it != last;) {
      const Index c = it->first;
      double sum = 0.0;
      for (; it != last && it->first == c; ++it) sum += it->second;
      if (sum != 0.0) {
        cols.push_back(c);
        vals.push_back(sum);
      }
    }
    offsets[i + 1] = cols.size();
  }
  return SparseMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

Vector spmv(const SparseMatrix& a, std::span<const double> x) {
  if (x.size() != a.dimension()) throw InputError("spmv: dimension mismatch");
  const auto rows = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  Vector y(a.dimension(), 0.0);
  for (Index i = 0; i < a.dimension(); ++i) {
    double sum = 0.0;
    for (std::size_t k = rows[i]; k < rows[i + 1]; ++k) sum += vals[k] * x[cols[k]];
    y[i] = sum;
  }
  return y;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return sum;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

namespace {

// r = b - A x with extended-precision accumulation.
double true_residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x, Vector& r) {
  const auto rows = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  long double norm_sq = 0.0L;
  for (Index i = 0; i < a.dimension(); ++i) {
    long double sum = b[i];
    for (std::size_t k = rows[i]; k < rows[i + 1]; ++k) {
      sum -= static_cast<long double>(vals[k]) * static_cast<long double>(x[cols[k]]);
    }
    r[i] = static_cast<double>(sum);
    norm_sq += sum * sum;
  }
  return static_cast<double>(std::sqrt(norm_sq));
}

}  // namespace

Vector solve_spd(const SparseMatrix& a, std::span<const double> b, double rel_tol,
                 std::span<const double> initial_guess, SolveReport* report) {
  const Index n = a.dimension();
  if (b.size() != n) throw InputError("solve_spd: right-hand side has the wrong dimension");
  if (!(rel_tol > 0.0)) throw InputError("solve_spd: rel_tol must be positive");
  if (!initial_guess.empty() && initial_guess.size() != n) {
    throw InputError("solve_spd: initial guess has the wrong dimension");
  }

  Vector x(n, 0.0);
  if (!initial_guess.empty()) std::copy(initial_guess.begin(), initial_guess.end(), x.begin());
  const double b_norm = norm2(b);
  if (b_norm == 0.0) {
    if (report) *report = {0, 0.0};
    return Vector(n, 0.0);
  }
  const double tol = rel_tol * b_norm;

  Vector inv_diag = a.diagonal();
  for (auto& d : inv_diag) {
    if (!(d > 0.0)) throw SolverError("solve_spd: matrix has a non-positive diagonal entry", 1.0);
    d = 1.0 / d;
  }

  Vector r(n), z(n), p(n), q(n);
  double r_norm = true_residual(a, b, x, r);
  const std::size_t cap = std::size_t{10} * n;
  std::size_t it = 0;

  while (r_norm > tol) {
    // (Re)start from the current residual.
    for (Index i = 0; i < n; ++i) p[i] = z[i] = inv_diag[i] * r[i];
    double rho = dot(r, z);
    while (r_norm > tol && it < cap) {
      q = spmv(a, p);
      const double pq = dot(p, q);
      if (!(pq > 0.0)) {
        throw SolverError("solve_spd: matrix is not positive definite (p^T A p <= 0)", r_norm / b_norm);
      }
      const double alpha = rho / pq;
      for (Index i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      for (Index i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rho_next = dot(r, z);
      const double beta = rho_next / rho;
      rho = rho_next;
      for (Index i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      r_norm = norm2(r);
      ++it;
    }
    // Replace the recursive residual by the true one.
    r_norm = true_residual(a, b, x, r);
    if (r_norm <= tol) break;
    if (it >= cap) {
      std::ostringstream msg;
      msg << "solve_spd: no convergence after " << it << " iterations, relative residual " << r_norm / b_norm;
      throw SolverError(msg.str(), r_norm / b_norm);
    }
  }
  if (report) *report = {it, r_norm / b_norm};
  return x;
}

}  // namespace ailfem
