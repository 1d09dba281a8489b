/// @file sparse.hpp
/// @brief CSR storage and the dense/sparse kernels shared by every module:
/// products, Galerkin triple product, SOR sweeps, restarted GMRES and a
/// pivoted dense LU for the coarsest level.

#ifndef SNKS_SPARSE_HPP
#define SNKS_SPARSE_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace snks {

using Vector = std::vector<double>;

/// Compressed sparse row matrix with owned storage.
/// Invariants: row_offsets has length n_rows+1, starts at 0, is nondecreasing;
/// column indices are strictly increasing within each row; values are finite.
struct CsrMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_offsets;
    std::vector<int> col_indices;
    std::vector<double> values;

    int nnz() const { return static_cast<int>(col_indices.size()); }

    /// Entry (i,j), 0 if not stored.
    double at(int i, int j) const;

    /// Throws std::runtime_error if any CSR invariant is violated.
    void validate() const;

    static CsrMatrix identity(int n);
};

/// Accumulates (row, col, value) contributions; duplicate entries are summed.
class CsrBuilder {
public:
    CsrBuilder(int n_rows, int n_cols) : n_rows_(n_rows), n_cols_(n_cols) {}
    void add(int row, int col, double value);
    /// Sorts, merges duplicates, and returns a valid CsrMatrix.
    /// Exact-zero entries are kept unless drop_zeros is set.
    CsrMatrix build(bool drop_zeros = false) const;

private:
    int n_rows_;
    int n_cols_;
    std::vector<std::tuple<int, int, double>> entries_;
};

/// y = A x, rows accumulated left-to-right.
Vector spmv(const CsrMatrix& a, const Vector& x);

/// y += alpha * A x
void spmv_add(const CsrMatrix& a, const Vector& x, double alpha, Vector& y);

CsrMatrix transpose(const CsrMatrix& a);

/// C = A B in CSR form.
CsrMatrix csr_multiply(const CsrMatrix& a, const CsrMatrix& b);

/// Galerkin product R A P. Entries that cancel to exactly 0.0 are dropped.
CsrMatrix triple_product(const CsrMatrix& r, const CsrMatrix& a,
                         const CsrMatrix& p);

enum class SorMode { Forward, Backward, Symmetric };

/// Applies `sweeps` SOR sweeps to A x = b in place. A must be square with a
/// nonzero diagonal on every row; 0 < omega < 2. Symmetric mode runs a forward
/// then a backward pass per sweep.
void sor_sweep(const CsrMatrix& a, Vector& x, const Vector& b, double omega,
               SorMode mode, int sweeps);

/// Principal submatrix on rows x rows with indices renumbered by position.
/// `rows` must be sorted, unique and in range; A must be square.
CsrMatrix extract_principal_submatrix(const CsrMatrix& a,
                                      const std::vector<int>& rows);

/// Row-pivoted LU factorization of a dense row-major square matrix.
struct DenseFactor {
    int n = 0;
    std::vector<double> lu;   // combined L (unit diagonal) and U, row-major
    std::vector<int> perm;    // row permutation

    Vector solve(const Vector& b) const;
};

/// Factors a row-major n x n matrix. Throws on an exactly singular pivot.
DenseFactor dense_factor(const std::vector<double>& a, int n);

struct KrylovReport {
    int iterations = 0;
    double final_relative_residual = 0.0;
    bool converged = false;
};

/// Linear operator acting on vectors: out = op(in). out is pre-sized.
using LinearOp = std::function<void(const Vector&, Vector&)>;

/// Right-preconditioned restarted GMRES on op(x) = b. The unpreconditioned
/// residual norm is monitored. Modified Gram-Schmidt with a DGKS
/// reorthogonalization pass. Pass x0 = nullptr for a zero initial guess;
/// residual_history, when non-null, receives the per-iteration residual norms.
std::pair<Vector, KrylovReport> gmres(const LinearOp& op, const LinearOp& prec,
                                      const Vector& b, double rtol,
                                      int max_iters, int restart,
                                      const Vector* x0 = nullptr,
                                      std::vector<double>* residual_history = nullptr);

double norm2(const Vector& v);
double dot(const Vector& a, const Vector& b);

/// Matrix Market coordinate-format exchange (real general, 1-based).
void write_matrix_market(const CsrMatrix& a, std::ostream& out);
void write_matrix_market(const CsrMatrix& a, const std::string& path);
CsrMatrix read_matrix_market(std::istream& in);
CsrMatrix read_matrix_market_file(const std::string& path);

}  // namespace snks

#endif  // SNKS_SPARSE_HPP
