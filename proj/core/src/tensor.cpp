#include "lightpath/tensor.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <utility>

namespace lightpath {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != data_.size()) {
        throw std::invalid_argument("tensor: shape does not match data size");
    }
}

Tensor Tensor::scalar(double v) {
    return Tensor({1, 1}, {v});
}

Tensor Tensor::row(std::vector<double> values) {
    std::size_t n = values.size();
    return Tensor({1, n}, std::move(values));
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) {
    return Tensor({rows, cols});
}

Tensor Tensor::filled(std::size_t rows, std::size_t cols, double v) {
    return Tensor({rows, cols}, std::vector<double>(rows * cols, v));
}

std::size_t Tensor::rows() const {
    if (shape_.empty()) return 1;
    if (shape_.size() == 1) return 1;
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (shape_.empty()) return 1;
    return shape_.back();
}

bool Tensor::same_shape(const Tensor& other) const {
    return rows() == other.rows() && cols() == other.cols();
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

namespace detail {

void gemm(bool trans_a, bool trans_b,
          std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate) {
    if (!accumulate) {
        std::memset(c, 0, m * n * sizeof(double));
    }
    if (!trans_a && !trans_b) {
        // a: m x k, b: k x n. i-k-j order keeps the inner loop contiguous.
        for (std::size_t i = 0; i < m; ++i) {
            const double* ai = a + i * k;
            double* ci = c + i * n;
            for (std::size_t p = 0; p < k; ++p) {
                const double av = ai[p];
                if (av == 0.0) continue;
                const double* bp = b + p * n;
                for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
            }
        }
    } else if (!trans_a && trans_b) {
        // a: m x k, b stored n x k.
        for (std::size_t i = 0; i < m; ++i) {
            const double* ai = a + i * k;
            double* ci = c + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                const double* bj = b + j * k;
                double acc = 0.0;
                for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
                ci[j] += acc;
            }
        }
    } else if (trans_a && !trans_b) {
        // a stored k x m, b: k x n.
        for (std::size_t p = 0; p < k; ++p) {
            const double* ap = a + p * m;
            const double* bp = b + p * n;
            for (std::size_t i = 0; i < m; ++i) {
                const double av = ap[i];
                if (av == 0.0) continue;
                double* ci = c + i * n;
                for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
            }
        }
    } else {
        // a stored k x m, b stored n x k.
        for (std::size_t i = 0; i < m; ++i) {
            double* ci = c + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                const double* bj = b + j * k;
                double acc = 0.0;
                for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * bj[p];
                ci[j] += acc;
            }
        }
    }
}

} // namespace detail

} // namespace lightpath
