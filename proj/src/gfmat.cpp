#include "ncp/gfmat.hpp"

#include <algorithm>

namespace ncp::gf {

Matrix Matrix::submatrix(const std::vector<int>& rs, const std::vector<int>& cs) const {
    Matrix out(*f_, static_cast<int>(rs.size()), static_cast<int>(cs.size()));
    for (size_t i = 0; i < rs.size(); ++i)
        for (size_t j = 0; j < cs.size(); ++j) out.at(static_cast<int>(i), static_cast<int>(j)) = at(rs[i], cs[j]);
    return out;
}

Matrix Matrix::transposed() const {
    Matrix out(*f_, cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) out.at(c, r) = at(r, c);
    return out;
}

std::vector<uint16_t> mat_vec(const Matrix& a, const std::vector<uint16_t>& x) {
    if (static_cast<int>(x.size()) != a.cols()) throw FieldError("mat_vec: dimension mismatch");
    const Field& f = a.field();
    std::vector<uint16_t> y(a.rows(), 0);
    for (int r = 0; r < a.rows(); ++r) {
        uint16_t acc = 0;
        for (int c = 0; c < a.cols(); ++c) acc = f.add(acc, f.mul(a.at(r, c), x[c]));
        y[r] = acc;
    }
    return y;
}

namespace {

// Row echelon elimination in place; returns pivot columns.
std::vector<int> eliminate(Matrix& m) {
    const Field& f = m.field();
    std::vector<int> pivots;
    int r = 0;
    for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
        int p = -1;
        for (int i = r; i < m.rows(); ++i)
            if (m.at(i, c) != 0) {
                p = i;
                break;
            }
        if (p < 0) continue;
        if (p != r)
            for (int j = 0; j < m.cols(); ++j) std::swap(m.at(p, j), m.at(r, j));
        uint16_t iv = f.inv(m.at(r, c));
        for (int j = c; j < m.cols(); ++j) m.at(r, j) = f.mul(m.at(r, j), iv);
        for (int i = 0; i < m.rows(); ++i) {
            if (i == r || m.at(i, c) == 0) continue;
            uint16_t factor = m.at(i, c);
            for (int j = c; j < m.cols(); ++j)
                m.at(i, j) = f.add(m.at(i, j), f.mul(factor, m.at(r, j)));
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

}  // namespace

int rank(Matrix a) { return static_cast<int>(eliminate(a).size()); }

std::optional<std::vector<uint16_t>> solve(const Matrix& a, const std::vector<uint16_t>& b) {
    if (a.rows() != a.cols()) throw FieldError("solve: matrix must be square");
    if (static_cast<int>(b.size()) != a.rows()) throw FieldError("solve: rhs dimension mismatch");
    const Field& f = a.field();
    int n = a.rows();
    Matrix aug(f, n, n + 1);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) aug.at(r, c) = a.at(r, c);
        aug.at(r, n) = b[r];
    }
    auto pivots = eliminate(aug);
    if (static_cast<int>(pivots.size()) != n || (n > 0 && pivots.back() == n)) return std::nullopt;
    std::vector<uint16_t> x(n, 0);
    for (int r = 0; r < n; ++r) x[pivots[r]] = aug.at(r, n);
    return x;
}

std::vector<uint16_t> solve_vandermonde(const Field& f, const std::vector<uint16_t>& lambdas,
                                        const std::vector<uint16_t>& b) {
    size_t n = lambdas.size();
    if (b.size() != n) throw FieldError("solve_vandermonde: dimension mismatch");
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (lambdas[i] == lambdas[j]) throw FieldError("solve_vandermonde: duplicate lambdas");
    if (n == 0) return {};

    // Bjorck-Pereyra recurrences for the dual Vandermonde system; subtraction
    // is addition here, so no sign bookkeeping.
    std::vector<uint16_t> x = b;
    for (size_t k = 0; k + 1 < n; ++k)
        for (size_t i = n - 1; i >= k + 1; --i)
            x[i] = f.add(x[i], f.mul(lambdas[k], x[i - 1]));
    for (size_t k = n - 1; k-- > 0;) {
        for (size_t i = k + 1; i < n; ++i)
            x[i] = f.div(x[i], f.add(lambdas[i], lambdas[i - k - 1]));
        for (size_t i = k; i + 1 < n; ++i) x[i] = f.add(x[i], x[i + 1]);
    }
    return x;
}

bool coordinate_determined(const Matrix& a, int col) {
    if (col < 0 || col >= a.cols()) throw FieldError("coordinate_determined: column out of range");
    std::vector<int> rows(a.rows());
    for (int i = 0; i < a.rows(); ++i) rows[i] = i;
    std::vector<int> rest;
    for (int c = 0; c < a.cols(); ++c)
        if (c != col) rest.push_back(c);
    return rank(a) == rank(a.submatrix(rows, rest)) + 1;
}

std::optional<uint16_t> extract_coordinate(const Matrix& a, const std::vector<uint16_t>& rhs,
                                           int col) {
    if (static_cast<int>(rhs.size()) != a.rows()) throw FieldError("extract_coordinate: rhs size");
    if (col < 0 || col >= a.cols()) throw FieldError("extract_coordinate: column out of range");
    const Field& f = a.field();
    // Find w with A^T w = e_col; then x[col] = w . rhs for every solution x.
    Matrix t(f, a.cols(), a.rows() + 1);
    for (int r = 0; r < a.cols(); ++r)
        for (int c = 0; c < a.rows(); ++c) t.at(r, c) = a.at(c, r);
    t.at(col, a.rows()) = 1;
    auto pivots = eliminate(t);
    // Inconsistent iff some pivot lands in the augmented column.
    if (!pivots.empty() && pivots.back() == a.rows()) return std::nullopt;
    std::vector<uint16_t> w(a.rows(), 0);
    for (size_t r = 0; r < pivots.size(); ++r) w[pivots[r]] = t.at(static_cast<int>(r), a.rows());
    uint16_t acc = 0;
    for (int i = 0; i < a.rows(); ++i) acc = f.add(acc, f.mul(w[i], rhs[i]));
    return acc;
}

}  // namespace ncp::gf
