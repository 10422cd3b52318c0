#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace mctrl {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// Compressed-row sparse matrix. Column indices are strictly increasing within
// each row and duplicates are already merged; both are construction
// invariants, not runtime options.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int n_rows, int n_cols);

  // Duplicates are summed; entries that cancel to exact zero are dropped.
  // Throws std::invalid_argument on out-of-range coordinates.
  static SparseMatrix from_triplets(int n_rows, int n_cols,
                                    const std::vector<Triplet>& triplets);
  static SparseMatrix identity(int n);

  int rows() const { return n_rows_; }
  int cols() const { return n_cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  const std::vector<int>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  std::vector<double> matvec(const std::vector<double>& x) const;
  std::vector<double> matvec_transpose(const std::vector<double>& x) const;
  SparseMatrix transpose() const;

  // Stored value at (row, col), 0 if the entry is not stored.
  double coeff(int row, int col) const;

  // Submatrix with the given (sorted) row and column index sets.
  SparseMatrix restricted(const std::vector<int>& rows,
                          const std::vector<int>& cols) const;

  // MatrixMarket "coordinate real general", 1-based, 17 significant digits.
  void write_matrix_market(std::ostream& os) const;

 private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<int> row_offsets_ = {0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

struct LinearSolveResult {
  std::vector<double> solution;
  // ||b - K x||_2 / max(||b||_2, machine eps), recomputed with the CSR matvec
  // after the solve. Never trusted from the factorization backend.
  double relative_residual = 0.0;
  // Refinement sweeps after the factored solve; 0 when none were needed.
  int iterations = 0;
};

class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_ = 0.0;
};

// Direct sparse LU with iterative refinement until the relative residual
// meets tol. Throws SolveFailure on singular K or if tol is unreachable.
LinearSolveResult solve(const SparseMatrix& K, const std::vector<double>& b,
                        double tol = 1e-10);

}  // namespace mctrl
