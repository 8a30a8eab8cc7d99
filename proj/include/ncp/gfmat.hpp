#pragma once

#include <optional>
#include <vector>

#include "ncp/gf.hpp"

namespace ncp::gf {

/// Dense row-major matrix over one field.
class Matrix {
public:
    Matrix(const Field& f, int rows, int cols)
        : f_(&f), rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * cols, 0) {
        if (rows < 0 || cols < 0) throw FieldError("negative matrix dimension");
    }
    static Matrix identity(const Field& f, int n) {
        Matrix m(f, n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const Field& field() const { return *f_; }

    uint16_t& at(int r, int c) { return e_[static_cast<size_t>(r) * cols_ + c]; }
    uint16_t at(int r, int c) const { return e_[static_cast<size_t>(r) * cols_ + c]; }

    Matrix submatrix(const std::vector<int>& rs, const std::vector<int>& cs) const;
    Matrix transposed() const;

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.f_ == b.f_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.e_ == b.e_;
    }

private:
    const Field* f_;
    int rows_, cols_;
    std::vector<uint16_t> e_;
};

/// Matrix-vector product.
std::vector<uint16_t> mat_vec(const Matrix& a, const std::vector<uint16_t>& x);

/// Rank by Gaussian elimination over the field.
int rank(Matrix a);

/// Solves A x = b for square A. Returns nullopt when A is singular.
std::optional<std::vector<uint16_t>> solve(const Matrix& a, const std::vector<uint16_t>& b);

/// Solves sum_l lambda_l^(k-1) x_l = b_k, the system whose matrix has row k
/// equal to the (k-1)-th powers of the lambdas, in O(n^2) instead of O(n^3).
/// Throws on duplicate lambdas.
std::vector<uint16_t> solve_vandermonde(const Field& f, const std::vector<uint16_t>& lambdas,
                                        const std::vector<uint16_t>& b);

/// True iff coordinate `col` takes the same value in every solution of
/// A x = b (for consistent b), i.e. rank(A) = rank(A without that column) + 1.
bool coordinate_determined(const Matrix& a, int col);

/// Value of x[col] when it is determined by A x = rhs; nullopt when it is not.
/// Works on non-square and rank-deficient systems: finds w with A^T w = e_col
/// and returns w . rhs.
std::optional<uint16_t> extract_coordinate(const Matrix& a, const std::vector<uint16_t>& rhs,
                                           int col);

}  // namespace ncp::gf
