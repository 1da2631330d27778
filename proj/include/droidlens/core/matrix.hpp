#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "droidlens/core/error.hpp"

namespace droidlens {

/// Dense row-major matrix of doubles. Rows are samples, columns are features.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        for (const auto& r : rows) {
            if (rows_ == 0) {
                cols_ = r.size();
            } else if (r.size() != cols_) {
                throw InvalidArgument("Matrix: ragged initializer");
            }
            data_.insert(data_.end(), r.begin(), r.end());
            ++rows_;
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> values() const noexcept { return data_; }

    /// Appends a row; the first row appended to an empty matrix fixes the column count.
    void append_row(std::span<const double> values) {
        if (rows_ == 0 && cols_ == 0) {
            cols_ = values.size();
        } else if (values.size() != cols_) {
            throw InvalidArgument("Matrix::append_row: expected " + std::to_string(cols_) +
                                  " columns, got " + std::to_string(values.size()));
        }
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    /// New matrix made of the given rows, in the given order.
    Matrix select_rows(std::span<const std::size_t> indices) const {
        Matrix out(0, cols_);
        out.data_.reserve(indices.size() * cols_);
        for (std::size_t i : indices) {
            const auto r = row(i);
            out.data_.insert(out.data_.end(), r.begin(), r.end());
            ++out.rows_;
        }
        return out;
    }

    bool all_finite() const noexcept {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept {
    return std::sqrt(squared_distance(a, b));
}

inline std::vector<double> column_means(const Matrix& x) {
    std::vector<double> mean(x.cols(), 0.0);
    if (x.rows() == 0) return mean;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto r = x.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) mean[j] += r[j];
    }
    for (double& m : mean) m /= static_cast<double>(x.rows());
    return mean;
}

/// Z-scores every column; zero-variance columns become all zeros.
inline Matrix standardize_columns(const Matrix& x) {
    const auto mean = column_means(x);
    std::vector<double> sd(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double d = x(i, j) - mean[j];
            sd[j] += d * d;
        }
    }
    for (double& s : sd) s = x.rows() ? std::sqrt(s / static_cast<double>(x.rows())) : 0.0;
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            out(i, j) = sd[j] > 0.0 ? (x(i, j) - mean[j]) / sd[j] : 0.0;
        }
    }
    return out;
}

inline void require_finite(const Matrix& x, const char* where) {
    if (!x.all_finite()) throw InvalidArgument(std::string(where) + ": non-finite feature value");
}

} // namespace droidlens
