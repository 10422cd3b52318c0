#include "mctrl/sparse.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "mctrl/vec.hpp"

namespace mctrl {

SparseMatrix::SparseMatrix(int n_rows, int n_cols)
    : n_rows_(n_rows), n_cols_(n_cols), row_offsets_(n_rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(int n_rows, int n_cols,
                                         const std::vector<Triplet>& triplets) {
  for (const Triplet& t : triplets)
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
      throw std::invalid_argument("from_triplets: index out of range");

  std::vector<Triplet> sorted = triplets;
  std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m(n_rows, n_cols);
  m.col_indices_.reserve(sorted.size());
  m.values_.reserve(sorted.size());
  std::size_t k = 0;
  for (int r = 0; r < n_rows; ++r) {
    while (k < sorted.size() && sorted[k].row == r) {
      int c = sorted[k].col;
      double v = 0.0;
      while (k < sorted.size() && sorted[k].row == r && sorted[k].col == c)
        v += sorted[k++].value;
      if (v != 0.0) {
        m.col_indices_.push_back(c);
        m.values_.push_back(v);
      }
    }
    m.row_offsets_[r + 1] = static_cast<int>(m.values_.size());
  }
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  SparseMatrix m(n, n);
  m.col_indices_.resize(n);
  m.values_.assign(n, 1.0);
  for (int i = 0; i < n; ++i) {
    m.col_indices_[i] = i;
    m.row_offsets_[i + 1] = i + 1;
  }
  return m;
}

std::vector<double> SparseMatrix::matvec(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != n_cols_)
    throw std::invalid_argument("matvec: size mismatch");
  std::vector<double> y(n_rows_, 0.0);
  for (int r = 0; r < n_rows_; ++r) {
    double s = 0.0;
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      s += values_[k] * x[col_indices_[k]];
    y[r] = s;
  }
  return y;
}

std::vector<double> SparseMatrix::matvec_transpose(
    const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != n_rows_)
    throw std::invalid_argument("matvec_transpose: size mismatch");
  std::vector<double> y(n_cols_, 0.0);
  for (int r = 0; r < n_rows_; ++r)
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      y[col_indices_[k]] += values_[k] * x[r];
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t(n_cols_, n_rows_);
  std::vector<int> count(n_cols_, 0);
  for (int c : col_indices_) ++count[c];
  for (int c = 0; c < n_cols_; ++c) t.row_offsets_[c + 1] = t.row_offsets_[c] + count[c];
  t.col_indices_.resize(values_.size());
  t.values_.resize(values_.size());
  std::vector<int> next(t.row_offsets_.begin(), t.row_offsets_.end() - 1);
  for (int r = 0; r < n_rows_; ++r)
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      int pos = next[col_indices_[k]]++;
      t.col_indices_[pos] = r;
      t.values_[pos] = values_[k];
    }
  return t;
}

double SparseMatrix::coeff(int row, int col) const {
  auto first = col_indices_.begin() + row_offsets_[row];
  auto last = col_indices_.begin() + row_offsets_[row + 1];
  auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return values_[it - col_indices_.begin()];
}

SparseMatrix SparseMatrix::restricted(const std::vector<int>& rows,
                                      const std::vector<int>& cols) const {
  std::vector<int> col_map(n_cols_, -1);
  for (std::size_t j = 0; j < cols.size(); ++j) col_map[cols[j]] = static_cast<int>(j);

  SparseMatrix s(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int r = rows[i];
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      int c = col_map[col_indices_[k]];
      if (c >= 0) {
        s.col_indices_.push_back(c);
        s.values_.push_back(values_[k]);
      }
    }
    s.row_offsets_[i + 1] = static_cast<int>(s.values_.size());
  }
  return s;
}

void SparseMatrix::write_matrix_market(std::ostream& os) const {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << n_rows_ << ' ' << n_cols_ << ' ' << nnz() << '\n';
  char buf[96];
  for (int r = 0; r < n_rows_; ++r)
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r + 1, col_indices_[k] + 1,
                    values_[k]);
      os << buf;
    }
}

LinearSolveResult solve(const SparseMatrix& K, const std::vector<double>& b,
                        double tol) {
  if (K.rows() != K.cols())
    throw std::invalid_argument("solve: matrix not square");
  if (static_cast<int>(b.size()) != K.rows())
    throw std::invalid_argument("solve: rhs size mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");

  const int n = K.rows();
  Eigen::SparseMatrix<double> A(n, n);
  {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(K.nnz());
    const auto& off = K.row_offsets();
    const auto& col = K.col_indices();
    const auto& val = K.values();
    for (int r = 0; r < n; ++r)
      for (int k = off[r]; k < off[r + 1]; ++k)
        trips.emplace_back(r, col[k], val[k]);
    A.setFromTriplets(trips.begin(), trips.end());
  }

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw SolveFailure("solve: factorization failed (singular matrix?)",
                       std::numeric_limits<double>::infinity());

  Eigen::VectorXd be = Eigen::Map<const Eigen::VectorXd>(b.data(), n);
  Eigen::VectorXd xe = lu.solve(be);

  std::vector<double> x(xe.data(), xe.data() + n);
  const double b_norm = std::max(two_norm(b), DBL_EPSILON);

  // Refinement with the residual recomputed by our own matvec; the backend is
  // only trusted for the factorization.
  double rel = 0.0;
  int sweeps = 0;
  const int max_sweeps = 8;
  std::vector<double> best_x = x;
  double best_rel = std::numeric_limits<double>::infinity();
  for (;; ++sweeps) {
    std::vector<double> r = subtract(b, K.matvec(x));
    rel = two_norm(r) / b_norm;
    if (rel < best_rel) {
      best_rel = rel;
      best_x = x;
    }
    if (rel <= tol || sweeps == max_sweeps) break;
    Eigen::VectorXd re = Eigen::Map<const Eigen::VectorXd>(r.data(), n);
    Eigen::VectorXd dx = lu.solve(re);
    for (int i = 0; i < n; ++i) x[i] += dx[i];
  }
  if (best_rel > tol)
    throw SolveFailure("solve: residual stalled above tolerance", best_rel);

  return {std::move(best_x), best_rel, sweeps};
}

}  // namespace mctrl
