#pragma once

#include <cstdint>
#include <vector>

#include "lightpath/tensor.hpp"

namespace lightpath::ad {

using ValueId = std::int32_t;

enum class Op : std::uint8_t {
    Leaf,
    Add,
    Sub,
    Mul,
    Div,
    Exp,
    Relu,
    Sigmoid,
    MatMul,
    Transpose,
    ConcatRows,
    ConcatCols,
    SliceRows,
    GatherRows,
    Softmax,
    LayerNorm,
    Mean,
    Sum,
    Mse,
    Bce,
};

struct Node {
    Op op = Op::Leaf;
    ValueId a = -1;
    ValueId b = -1;
    ValueId c = -1;
    Tensor value;
    Tensor grad; // allocated lazily during backward
    bool requires_grad = false;
    std::vector<ValueId> parents;      // ConcatRows / ConcatCols
    std::vector<std::int32_t> indices; // GatherRows
    std::vector<double> saved;         // LayerNorm per-row mean and inv-std
    double eps = 0.0;                  // LayerNorm
    std::size_t r0 = 0, r1 = 0;        // SliceRows
    int axis = 1;                      // Softmax
};

// Expression tape. Nodes are appended in construction order, which is a
// topological order of the DAG; backward walks it in reverse. Forward values
// are checked for NaN/Inf as they are produced.
class Tape {
public:
    ValueId leaf(Tensor t, bool requires_grad);
    ValueId constant(Tensor t) { return leaf(std::move(t), false); }
    ValueId constant_scalar(double v) { return leaf(Tensor::scalar(v), false); }

    // Elementwise binary ops with 2-D broadcasting: each dimension of either
    // operand must equal the result dimension or 1.
    ValueId add(ValueId x, ValueId y);
    ValueId sub(ValueId x, ValueId y);
    ValueId mul(ValueId x, ValueId y);
    ValueId div(ValueId x, ValueId y);

    ValueId exp(ValueId x);
    ValueId relu(ValueId x);
    ValueId sigmoid(ValueId x);

    ValueId matmul(ValueId x, ValueId y);
    ValueId transpose(ValueId x);
    ValueId concat_rows(const std::vector<ValueId>& xs);
    ValueId concat_cols(const std::vector<ValueId>& xs);
    ValueId slice_rows(ValueId x, std::size_t r0, std::size_t r1);
    ValueId gather_rows(ValueId table, std::vector<std::int32_t> idx);

    // Softmax along rows (axis 1) or columns (axis 0), with max-subtraction.
    ValueId softmax(ValueId x, int axis = 1);

    // Per-row normalization over the last dimension, then affine with gain
    // and bias (both 1 x cols).
    ValueId layer_norm(ValueId x, ValueId gain, ValueId bias, double eps = 1e-5);

    ValueId mean(ValueId x); // full reduction to scalar
    ValueId sum(ValueId x);  // full reduction to scalar

    ValueId mse(ValueId pred, ValueId target); // mean squared error, scalar
    // Elementwise binary cross-entropy of predicted probabilities against
    // targets; probabilities are clamped to [1e-12, 1 - 1e-12].
    ValueId bce(ValueId pred, ValueId target);

    // Accumulates gradients for every node that requires grad and is
    // reachable from `loss`, which must be scalar.
    void backward(ValueId loss);

    const Tensor& value(ValueId id) const { return nodes_[id].value; }
    // Gradient of the node; zeros of the value's shape if nothing flowed.
    const Tensor& grad(ValueId id);
    bool requires_grad(ValueId id) const { return nodes_[id].requires_grad; }

    std::size_t size() const { return nodes_.size(); }

private:
    ValueId push(Node n);
    std::vector<Node> nodes_;
};

} // namespace lightpath::ad
