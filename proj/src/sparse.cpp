#include "snks/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace snks {

double CsrMatrix::at(int i, int j) const {
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
        if (col_indices[k] == j) return values[k];
    }
    return 0.0;
}

void CsrMatrix::validate() const {
    if (n_rows < 0 || n_cols < 0)
        throw std::runtime_error("csr: negative dimension");
    if (static_cast<int>(row_offsets.size()) != n_rows + 1)
        throw std::runtime_error("csr: row_offsets length mismatch");
    if (row_offsets.front() != 0 || row_offsets.back() != nnz())
        throw std::runtime_error("csr: row_offsets endpoints invalid");
    if (col_indices.size() != values.size())
        throw std::runtime_error("csr: col/value length mismatch");
    for (int i = 0; i < n_rows; ++i) {
        if (row_offsets[i] > row_offsets[i + 1])
            throw std::runtime_error("csr: row_offsets not nondecreasing");
        for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
            if (col_indices[k] < 0 || col_indices[k] >= n_cols)
                throw std::runtime_error("csr: column index out of range");
            if (k > row_offsets[i] && col_indices[k] <= col_indices[k - 1])
                throw std::runtime_error("csr: columns not strictly increasing");
            if (!std::isfinite(values[k]))
                throw std::runtime_error("csr: nonfinite value");
        }
    }
}

CsrMatrix CsrMatrix::identity(int n) {
    CsrMatrix a;
    a.n_rows = a.n_cols = n;
    a.row_offsets.resize(n + 1);
    a.col_indices.resize(n);
    a.values.assign(n, 1.0);
    for (int i = 0; i <= n; ++i) a.row_offsets[i] = i;
    for (int i = 0; i < n; ++i) a.col_indices[i] = i;
    return a;
}

void CsrBuilder::add(int row, int col, double value) {
    if (row < 0 || row >= n_rows_ || col < 0 || col >= n_cols_)
        throw std::invalid_argument("csr builder: entry out of range");
    entries_.emplace_back(row, col, value);
}

CsrMatrix CsrBuilder::build(bool drop_zeros) const {
    auto sorted = entries_;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) {
                  return std::tie(std::get<0>(a), std::get<1>(a)) <
                         std::tie(std::get<0>(b), std::get<1>(b));
              });
    CsrMatrix a;
    a.n_rows = n_rows_;
    a.n_cols = n_cols_;
    a.row_offsets.assign(n_rows_ + 1, 0);
    std::size_t i = 0;
    while (i < sorted.size()) {
        const int row = std::get<0>(sorted[i]);
        const int col = std::get<1>(sorted[i]);
        double sum = 0.0;
        while (i < sorted.size() && std::get<0>(sorted[i]) == row &&
               std::get<1>(sorted[i]) == col) {
            sum += std::get<2>(sorted[i]);
            ++i;
        }
        if (drop_zeros && sum == 0.0) continue;
        a.col_indices.push_back(col);
        a.values.push_back(sum);
        ++a.row_offsets[row + 1];
    }
    for (int r = 0; r < n_rows_; ++r) a.row_offsets[r + 1] += a.row_offsets[r];
    return a;
}

Vector spmv(const CsrMatrix& a, const Vector& x) {
    if (static_cast<int>(x.size()) != a.n_cols)
        throw std::invalid_argument("spmv: dimension mismatch");
    Vector y(a.n_rows, 0.0);
    for (int i = 0; i < a.n_rows; ++i) {
        double sum = 0.0;
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
            sum += a.values[k] * x[a.col_indices[k]];
        y[i] = sum;
    }
    return y;
}

void spmv_add(const CsrMatrix& a, const Vector& x, double alpha, Vector& y) {
    if (static_cast<int>(x.size()) != a.n_cols ||
        static_cast<int>(y.size()) != a.n_rows)
        throw std::invalid_argument("spmv_add: dimension mismatch");
    for (int i = 0; i < a.n_rows; ++i) {
        double sum = 0.0;
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
            sum += a.values[k] * x[a.col_indices[k]];
        y[i] += alpha * sum;
    }
}

CsrMatrix transpose(const CsrMatrix& a) {
    CsrMatrix t;
    t.n_rows = a.n_cols;
    t.n_cols = a.n_rows;
    t.row_offsets.assign(a.n_cols + 1, 0);
    t.col_indices.resize(a.nnz());
    t.values.resize(a.nnz());
    for (int k = 0; k < a.nnz(); ++k) ++t.row_offsets[a.col_indices[k] + 1];
    for (int i = 0; i < t.n_rows; ++i) t.row_offsets[i + 1] += t.row_offsets[i];
    std::vector<int> next(t.row_offsets.begin(), t.row_offsets.end() - 1);
    for (int i = 0; i < a.n_rows; ++i) {
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
            const int pos = next[a.col_indices[k]]++;
            t.col_indices[pos] = i;
            t.values[pos] = a.values[k];
        }
    }
    return t;
}

CsrMatrix csr_multiply(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.n_cols != b.n_rows)
        throw std::invalid_argument("csr_multiply: dimension mismatch");
    CsrMatrix c;
    c.n_rows = a.n_rows;
    c.n_cols = b.n_cols;
    c.row_offsets.assign(a.n_rows + 1, 0);
    std::vector<double> accum(b.n_cols, 0.0);
    std::vector<int> marker(b.n_cols, -1);
    std::vector<int> cols;
    for (int i = 0; i < a.n_rows; ++i) {
        cols.clear();
        for (int ka = a.row_offsets[i]; ka < a.row_offsets[i + 1]; ++ka) {
            const int j = a.col_indices[ka];
            const double va = a.values[ka];
            for (int kb = b.row_offsets[j]; kb < b.row_offsets[j + 1]; ++kb) {
                const int col = b.col_indices[kb];
                if (marker[col] != i) {
                    marker[col] = i;
                    accum[col] = 0.0;
                    cols.push_back(col);
                }
                accum[col] += va * b.values[kb];
            }
        }
        std::sort(cols.begin(), cols.end());
        for (int col : cols) {
            c.col_indices.push_back(col);
            c.values.push_back(accum[col]);
        }
        c.row_offsets[i + 1] = c.nnz();
    }
    return c;
}

CsrMatrix triple_product(const CsrMatrix& r, const CsrMatrix& a,
                         const CsrMatrix& p) {
    if (r.n_cols != a.n_rows || a.n_cols != p.n_rows)
        throw std::invalid_argument("triple_product: dimension mismatch");
    CsrMatrix ra = csr_multiply(r, a);
    CsrMatrix rap = csr_multiply(ra, p);
    // Drop entries that cancelled to exactly zero; keeps coarse stencils tight.
    CsrMatrix out;
    out.n_rows = rap.n_rows;
    out.n_cols = rap.n_cols;
    out.row_offsets.assign(rap.n_rows + 1, 0);
    for (int i = 0; i < rap.n_rows; ++i) {
        for (int k = rap.row_offsets[i]; k < rap.row_offsets[i + 1]; ++k) {
            if (rap.values[k] == 0.0) continue;
            out.col_indices.push_back(rap.col_indices[k]);
            out.values.push_back(rap.values[k]);
        }
        out.row_offsets[i + 1] = out.nnz();
    }
    return out;
}

void sor_sweep(const CsrMatrix& a, Vector& x, const Vector& b, double omega,
               SorMode mode, int sweeps) {
    if (a.n_rows != a.n_cols)
        throw std::invalid_argument("sor: matrix not square");
    if (static_cast<int>(x.size()) != a.n_rows ||
        static_cast<int>(b.size()) != a.n_rows)
        throw std::invalid_argument("sor: dimension mismatch");
    if (!(omega > 0.0 && omega < 2.0))
        throw std::invalid_argument("sor: omega out of (0,2)");

    auto pass = [&](bool forward) {
        const int begin = forward ? 0 : a.n_rows - 1;
        const int end = forward ? a.n_rows : -1;
        const int step = forward ? 1 : -1;
        for (int i = begin; i != end; i += step) {
            double diag = 0.0;
            double sum = b[i];
            for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
                const int j = a.col_indices[k];
                if (j == i)
                    diag = a.values[k];
                else
                    sum -= a.values[k] * x[j];
            }
            if (diag == 0.0)
                throw std::runtime_error("sor: zero diagonal in row " +
                                         std::to_string(i));
            x[i] = (1.0 - omega) * x[i] + omega * sum / diag;
        }
    };

    for (int s = 0; s < sweeps; ++s) {
        switch (mode) {
            case SorMode::Forward: pass(true); break;
            case SorMode::Backward: pass(false); break;
            case SorMode::Symmetric: pass(true); pass(false); break;
        }
    }
}

CsrMatrix extract_principal_submatrix(const CsrMatrix& a,
                                      const std::vector<int>& rows) {
    if (a.n_rows != a.n_cols)
        throw std::invalid_argument("extract_principal_submatrix: not square");
    std::vector<int> position(a.n_rows, -1);
    for (std::size_t p = 0; p < rows.size(); ++p) {
        const int r = rows[p];
        if (r < 0 || r >= a.n_rows)
            throw std::invalid_argument(
                "extract_principal_submatrix: index out of range");
        if (p > 0 && rows[p] <= rows[p - 1])
            throw std::invalid_argument(
                "extract_principal_submatrix: rows not sorted unique");
        position[r] = static_cast<int>(p);
    }
    CsrMatrix s;
    s.n_rows = s.n_cols = static_cast<int>(rows.size());
    s.row_offsets.assign(rows.size() + 1, 0);
    for (std::size_t p = 0; p < rows.size(); ++p) {
        const int i = rows[p];
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
            const int q = position[a.col_indices[k]];
            if (q < 0) continue;
            s.col_indices.push_back(q);
            s.values.push_back(a.values[k]);
        }
        s.row_offsets[p + 1] = s.nnz();
    }
    return s;
}

DenseFactor dense_factor(const std::vector<double>& a, int n) {
    if (static_cast<int>(a.size()) != n * n)
        throw std::invalid_argument("dense_factor: size mismatch");
    DenseFactor f;
    f.n = n;
    f.lu = a;
    f.perm.resize(n);
    for (int i = 0; i < n; ++i) f.perm[i] = i;

    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));

    for (int k = 0; k < n; ++k) {
        int pivot_row = k;
        double pivot = std::abs(f.lu[k * n + k]);
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(f.lu[i * n + k]);
            if (v > pivot) {
                pivot = v;
                pivot_row = i;
            }
        }
        if (pivot == 0.0 || pivot < scale * 1e-15 * n * std::numeric_limits<double>::epsilon())
            throw std::runtime_error("dense_factor: singular matrix at column " +
                                     std::to_string(k));
        if (pivot_row != k) {
            for (int j = 0; j < n; ++j)
                std::swap(f.lu[k * n + j], f.lu[pivot_row * n + j]);
            std::swap(f.perm[k], f.perm[pivot_row]);
        }
        const double inv = 1.0 / f.lu[k * n + k];
        for (int i = k + 1; i < n; ++i) {
            const double lik = f.lu[i * n + k] * inv;
            f.lu[i * n + k] = lik;
            for (int j = k + 1; j < n; ++j)
                f.lu[i * n + j] -= lik * f.lu[k * n + j];
        }
    }
    return f;
}

Vector DenseFactor::solve(const Vector& b) const {
    if (static_cast<int>(b.size()) != n)
        throw std::invalid_argument("dense solve: dimension mismatch");
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (int i = 0; i < n; ++i) {
        double sum = x[i];
        for (int j = 0; j < i; ++j) sum -= lu[i * n + j] * x[j];
        x[i] = sum;
    }
    for (int i = n - 1; i >= 0; --i) {
        double sum = x[i];
        for (int j = i + 1; j < n; ++j) sum -= lu[i * n + j] * x[j];
        x[i] = sum / lu[i * n + i];
    }
    return x;
}

double norm2(const Vector& v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum);
}

double dot(const Vector& a, const Vector& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

std::pair<Vector, KrylovReport> gmres(const LinearOp& op, const LinearOp& prec,
                                      const Vector& b, double rtol,
                                      int max_iters, int restart,
                                      const Vector* x0,
                                      std::vector<double>* residual_history) {
    if (rtol <= 0.0) throw std::invalid_argument("gmres: rtol must be > 0");
    if (restart < 1) throw std::invalid_argument("gmres: restart must be >= 1");
    const int n = static_cast<int>(b.size());
    KrylovReport report;

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        report.converged = true;
        return {Vector(n, 0.0), report};
    }

    Vector x = x0 ? *x0 : Vector(n, 0.0);
    Vector tmp(n), r(n);

    auto check_finite = [](double v) {
        if (!std::isfinite(v))
            throw std::runtime_error("gmres: numerical breakdown (non-finite)");
    };

    const int m = restart;
    std::vector<Vector> basis;
    std::vector<double> hess((m + 1) * m, 0.0);  // column-major, ld = m+1
    std::vector<double> cs(m), sn(m), g(m + 1);

    double res = 0.0;
    while (report.iterations < max_iters) {
        op(x, tmp);
        for (int i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
        double beta = norm2(r);
        check_finite(beta);
        res = beta / bnorm;
        if (residual_history && report.iterations == 0)
            residual_history->push_back(res);
        if (res <= rtol) {
            report.converged = true;
            break;
        }

        basis.assign(1, r);
        for (double& v : basis[0]) v /= beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int j = 0;
        for (; j < m && report.iterations < max_iters; ++j) {
            prec(basis[j], tmp);
            Vector w(n);
            op(tmp, w);

            // Modified Gram-Schmidt with a DGKS second pass.
            const double wnorm_before = norm2(w);
            for (int i = 0; i <= j; ++i) {
                const double h = dot(w, basis[i]);
                hess[j * (m + 1) + i] = h;
                for (int k = 0; k < n; ++k) w[k] -= h * basis[i][k];
            }
            double wnorm = norm2(w);
            if (wnorm < 0.7071 * wnorm_before) {
                for (int i = 0; i <= j; ++i) {
                    const double h = dot(w, basis[i]);
                    hess[j * (m + 1) + i] += h;
                    for (int k = 0; k < n; ++k) w[k] -= h * basis[i][k];
                }
                wnorm = norm2(w);
            }
            check_finite(wnorm);
            hess[j * (m + 1) + j + 1] = wnorm;

            // Givens rotations to maintain the least-squares residual.
            for (int i = 0; i < j; ++i) {
                const double h0 = hess[j * (m + 1) + i];
                const double h1 = hess[j * (m + 1) + i + 1];
                hess[j * (m + 1) + i] = cs[i] * h0 + sn[i] * h1;
                hess[j * (m + 1) + i + 1] = -sn[i] * h0 + cs[i] * h1;
            }
            const double h0 = hess[j * (m + 1) + j];
            const double h1 = hess[j * (m + 1) + j + 1];
            const double denom = std::hypot(h0, h1);
            if (denom == 0.0)
                throw std::runtime_error("gmres: numerical breakdown (zero column)");
            cs[j] = h0 / denom;
            sn[j] = h1 / denom;
            hess[j * (m + 1) + j] = denom;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];

            ++report.iterations;
            res = std::abs(g[j + 1]) / bnorm;
            check_finite(res);
            if (residual_history) residual_history->push_back(res);

            if (wnorm > 0.0) {
                Vector v = w;
                for (double& val : v) val /= wnorm;
                basis.push_back(std::move(v));
            }

            if (res <= rtol || wnorm == 0.0) {
                ++j;
                break;
            }
        }

        // Solve the triangular system and update x through the preconditioner.
        std::vector<double> y(j);
        for (int i = j - 1; i >= 0; --i) {
            double sum = g[i];
            for (int k = i + 1; k < j; ++k) sum -= hess[k * (m + 1) + i] * y[k];
            y[i] = sum / hess[i * (m + 1) + i];
        }
        Vector update(n, 0.0);
        for (int i = 0; i < j; ++i)
            for (int k = 0; k < n; ++k) update[k] += y[i] * basis[i][k];
        prec(update, tmp);
        for (int k = 0; k < n; ++k) x[k] += tmp[k];

        if (res <= rtol) {
            report.converged = true;
            break;
        }
    }

    op(x, tmp);
    for (int i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
    report.final_relative_residual = norm2(r) / bnorm;
    if (report.final_relative_residual <= rtol) report.converged = true;
    return {x, report};
}

void write_matrix_market(const CsrMatrix& a, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.n_rows << " " << a.n_cols << " " << a.nnz() << "\n";
    out << std::setprecision(17);
    for (int i = 0; i < a.n_rows; ++i)
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
            out << i + 1 << " " << a.col_indices[k] + 1 << " " << a.values[k]
                << "\n";
}

void write_matrix_market(const CsrMatrix& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    write_matrix_market(a, out);
}

CsrMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("%%MatrixMarket", 0) != 0 ||
        line.find("coordinate") == std::string::npos)
        throw std::runtime_error("matrix market: bad header");
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream dims(line);
    int n_rows, n_cols, nnz;
    if (!(dims >> n_rows >> n_cols >> nnz))
        throw std::runtime_error("matrix market: bad size line");
    CsrBuilder builder(n_rows, n_cols);
    for (int k = 0; k < nnz; ++k) {
        int i, j;
        double v;
        if (!(in >> i >> j >> v))
            throw std::runtime_error("matrix market: truncated entries");
        builder.add(i - 1, j - 1, v);
    }
    return builder.build();
}

CsrMatrix read_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_matrix_market(in);
}

}  // namespace snks
