#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "errors.hpp"

namespace reluforge {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

// Compressed sparse row matrix. Explicit zeros are never stored.
class Matrix {
public:
    struct Entry {
        std::size_t col;
        double value;
    };

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

    // Duplicate coordinates are summed.
    static Matrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t) {
        for (const auto& e : t)
            if (e.row >= rows || e.col >= cols) throw precondition_error("triplet outside matrix bounds");
        std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        Matrix m(rows, cols);
        m.entries_.reserve(t.size());
        std::size_t i = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            m.row_ptr_[r] = m.entries_.size();
            while (i < t.size() && t[i].row == r) {
                std::size_t c = t[i].col;
                double v = 0.0;
                while (i < t.size() && t[i].row == r && t[i].col == c) v += t[i++].value;
                if (v != 0.0) m.entries_.push_back({c, v});
            }
        }
        m.row_ptr_[rows] = m.entries_.size();
        return m;
    }

    static Matrix from_dense(std::size_t rows, std::size_t cols, std::span<const double> row_major) {
        if (row_major.size() != rows * cols) throw dimension_error("dense data size does not match rows*cols");
        std::vector<Triplet> t;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                if (double v = row_major[r * cols + c]; v != 0.0) t.push_back({r, c, v});
        return from_triplets(rows, cols, std::move(t));
    }

    static Matrix identity(std::size_t n, double scale = 1.0) {
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, scale});
        return from_triplets(n, n, std::move(t));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return entries_.size(); }

    std::span<const Entry> row(std::size_t r) const {
        return {entries_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }

    double at(std::size_t r, std::size_t c) const {
        auto rr = row(r);
        auto it = std::lower_bound(rr.begin(), rr.end(), c, [](const Entry& e, std::size_t col) { return e.col < col; });
        return (it != rr.end() && it->col == c) ? it->value : 0.0;
    }

    std::vector<double> to_dense() const {
        std::vector<double> d(rows_ * cols_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r)
            for (const auto& e : row(r)) d[r * cols_ + e.col] = e.value;
        return d;
    }

    std::vector<Triplet> triplets() const {
        std::vector<Triplet> t;
        t.reserve(entries_.size());
        for (std::size_t r = 0; r < rows_; ++r)
            for (const auto& e : row(r)) t.push_back({r, e.col, e.value});
        return t;
    }

    double max_abs() const noexcept {
        double m = 0.0;
        for (const auto& e : entries_) m = std::max(m, std::abs(e.value));
        return m;
    }

    bool all_finite() const noexcept {
        return std::all_of(entries_.begin(), entries_.end(), [](const Entry& e) { return std::isfinite(e.value); });
    }

    // Sum is accumulated in ascending column order, bias excluded.
    double row_dot(std::size_t r, std::span<const double> x) const {
        double acc = 0.0;
        for (const auto& e : row(r)) acc += e.value * x[e.col];
        return acc;
    }

    // this * rhs
    Matrix multiply(const Matrix& rhs) const {
        if (cols_ != rhs.rows_) throw dimension_error("matrix product dimension mismatch");
        std::vector<Triplet> t;
        std::vector<double> acc(rhs.cols_, 0.0);
        std::vector<char> used(rhs.cols_, 0);
        std::vector<std::size_t> touched;
        for (std::size_t r = 0; r < rows_; ++r) {
            touched.clear();
            for (const auto& a : row(r))
                for (const auto& b : rhs.row(a.col)) {
                    if (!used[b.col]) {
                        used[b.col] = 1;
                        touched.push_back(b.col);
                    }
                    acc[b.col] += a.value * b.value;
                }
            for (std::size_t c : touched) {
                t.push_back({r, c, acc[c]});
                acc[c] = 0.0;
                used[c] = 0;
            }
        }
        return from_triplets(rows_, rhs.cols_, std::move(t));
    }

    // this * v
    std::vector<double> apply(std::span<const double> v) const {
        if (v.size() != cols_) throw dimension_error("matrix-vector dimension mismatch");
        std::vector<double> y(rows_);
        for (std::size_t r = 0; r < rows_; ++r) y[r] = row_dot(r, v);
        return y;
    }

    Matrix scaled(double s) const {
        Matrix m = *this;
        for (auto& e : m.entries_) e.value *= s;
        if (s == 0.0) return Matrix(rows_, cols_);
        return m;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_ || a.row_ptr_ != b.row_ptr_) return false;
        for (std::size_t i = 0; i < a.entries_.size(); ++i)
            if (a.entries_[i].col != b.entries_[i].col || a.entries_[i].value != b.entries_[i].value) return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<Entry> entries_;
};

}  // namespace reluforge
