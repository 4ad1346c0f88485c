#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lightpath {

// Dense row-major tensor of 64-bit floats. Rank is at most 2 in practice;
// a scalar is stored as shape {1, 1}, a row vector as {1, n}.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor row(std::vector<double> values);
    static Tensor zeros(std::size_t rows, std::size_t cols);
    static Tensor filled(std::size_t rows, std::size_t cols, double v);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    // Rank-2 view of any tensor: rank 0 -> 1x1, rank 1 -> 1xn.
    std::size_t rows() const;
    std::size_t cols() const;

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    bool same_shape(const Tensor& other) const;
    bool all_finite() const;
    bool is_scalar() const { return data_.size() == 1; }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

namespace detail {

// C = A * B for row-major matrices, with optional transposition of either
// input. When accumulate is set the product is added onto C.
// Dimensions are those of the logical (post-transpose) operands:
// A is m x k, B is k x n, C is m x n.
void gemm(bool trans_a, bool trans_b,
          std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate);

} // namespace detail

} // namespace lightpath
