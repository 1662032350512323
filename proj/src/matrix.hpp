// Copyright 2026 the dualgraph-rec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dgsr {

/// Dense row-major matrix of doubles. Rows are embedding vectors.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::int64_t rows, std::int64_t cols)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), 0.0) {}

    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }

    double& operator()(std::int64_t r, std::int64_t c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
    double operator()(std::int64_t r, std::int64_t c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }

    std::span<double> row(std::int64_t r) { return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)}; }
    std::span<const double> row(std::int64_t r) const { return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

    bool same_shape(const Matrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

    bool operator==(const Matrix& other) const = default;

private:
    std::int64_t rows_ = 0;
    std::int64_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

}  // namespace dgsr
