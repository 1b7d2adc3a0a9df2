#pragma once
// Dense row-major matrix and small vector helpers shared by every stage.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ssrc {

using Vec = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    Vec row_vec(std::size_t r) const {
        auto s = row(r);
        return Vec(s.begin(), s.end());
    }

    void set_row(std::size_t r, std::span<const double> v) {
        if (v.size() != cols_) throw std::invalid_argument("Matrix::set_row: width mismatch");
        std::copy(v.begin(), v.end(), data_.begin() + static_cast<std::ptrdiff_t>(r * cols_));
    }

    void append_row(std::span<const double> v) {
        if (rows_ == 0 && cols_ == 0) cols_ = v.size();
        if (v.size() != cols_) throw std::invalid_argument("Matrix::append_row: width mismatch");
        data_.insert(data_.end(), v.begin(), v.end());
        ++rows_;
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Throws on a zero vector; callers that can see one must check first.
inline Vec normalized(std::span<const double> a) {
    const double n = norm(a);
    if (!(n > 0.0)) throw std::domain_error("normalized: zero-norm vector");
    Vec out(a.begin(), a.end());
    for (double& x : out) x /= n;
    return out;
}

inline void normalize_in_place(std::span<double> a) {
    const double n = norm(a);
    if (!(n > 0.0)) throw std::domain_error("normalize_in_place: zero-norm vector");
    for (double& x : a) x /= n;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (!(na > 0.0) || !(nb > 0.0)) throw std::domain_error("cosine: zero-norm vector");
    return dot(a, b) / (na * nb);
}

inline Vec mean_of_rows(const Matrix& m, std::span<const std::size_t> rows) {
    if (rows.empty()) throw std::invalid_argument("mean_of_rows: no rows");
    Vec out(m.cols(), 0.0);
    for (std::size_t r : rows) {
        auto src = m.row(r);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += src[c];
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& x : out) x *= inv;
    return out;
}

}  // namespace ssrc
