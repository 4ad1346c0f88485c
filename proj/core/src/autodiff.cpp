#include "lightpath/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace lightpath::ad {

namespace {

constexpr double kBceClamp = 1e-12;

const char* op_name(Op op) {
    switch (op) {
        case Op::Leaf: return "leaf";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Div: return "div";
        case Op::Exp: return "exp";
        case Op::Relu: return "relu";
        case Op::Sigmoid: return "sigmoid";
        case Op::MatMul: return "matmul";
        case Op::Transpose: return "transpose";
        case Op::ConcatRows: return "concat_rows";
        case Op::ConcatCols: return "concat_cols";
        case Op::SliceRows: return "slice_rows";
        case Op::GatherRows: return "gather_rows";
        case Op::Softmax: return "softmax";
        case Op::LayerNorm: return "layer_norm";
        case Op::Mean: return "mean";
        case Op::Sum: return "sum";
        case Op::Mse: return "mse";
        case Op::Bce: return "bce";
    }
    return "?";
}

void ensure_grad(Node& n) {
    if (n.grad.empty()) {
        n.grad = Tensor(n.value.shape());
    }
}

struct BroadcastShape {
    std::size_t rows, cols;
};

BroadcastShape broadcast_shape(const Tensor& x, const Tensor& y, const char* what) {
    std::size_t r = std::max(x.rows(), y.rows());
    std::size_t c = std::max(x.cols(), y.cols());
    auto ok = [](std::size_t d, std::size_t target) { return d == target || d == 1; };
    if (!ok(x.rows(), r) || !ok(y.rows(), r) || !ok(x.cols(), c) || !ok(y.cols(), c)) {
        throw std::invalid_argument(std::string(what) + ": incompatible shapes");
    }
    return {r, c};
}

// Accumulate g (shaped rows x cols) into target grad, reducing over
// broadcast dimensions.
void reduce_into(Tensor& tgt, const Tensor& g, std::size_t rows, std::size_t cols) {
    const std::size_t tr = tgt.rows(), tc = tgt.cols();
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t ti = tr == 1 ? 0 : i;
        for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t tj = tc == 1 ? 0 : j;
            tgt.data()[ti * tc + tj] += g.data()[i * cols + j];
        }
    }
}

} // namespace

ValueId Tape::push(Node n) {
    if (n.op != Op::Leaf && !n.value.all_finite()) {
        throw std::domain_error(std::string("non-finite value produced by ") + op_name(n.op));
    }
    nodes_.push_back(std::move(n));
    return static_cast<ValueId>(nodes_.size() - 1);
}

ValueId Tape::leaf(Tensor t, bool requires_grad) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(t);
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

ValueId Tape::add(ValueId x, ValueId y) {
    const Tensor& a = nodes_[x].value;
    const Tensor& b = nodes_[y].value;
    auto [r, c] = broadcast_shape(a, b, "add");
    Tensor out({r, c});
    const std::size_t ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            out.data()[i * c + j] = a.data()[(ar == 1 ? 0 : i) * ac + (ac == 1 ? 0 : j)] +
                                    b.data()[(br == 1 ? 0 : i) * bc + (bc == 1 ? 0 : j)];
        }
    }
    Node n;
    n.op = Op::Add;
    n.a = x;
    n.b = y;
    n.requires_grad = nodes_[x].requires_grad || nodes_[y].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::sub(ValueId x, ValueId y) {
    const Tensor& a = nodes_[x].value;
    const Tensor& b = nodes_[y].value;
    auto [r, c] = broadcast_shape(a, b, "sub");
    Tensor out({r, c});
    const std::size_t ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            out.data()[i * c + j] = a.data()[(ar == 1 ? 0 : i) * ac + (ac == 1 ? 0 : j)] -
                                    b.data()[(br == 1 ? 0 : i) * bc + (bc == 1 ? 0 : j)];
        }
    }
    Node n;
    n.op = Op::Sub;
    n.a = x;
    n.b = y;
    n.requires_grad = nodes_[x].requires_grad || nodes_[y].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::mul(ValueId x, ValueId y) {
    const Tensor& a = nodes_[x].value;
    const Tensor& b = nodes_[y].value;
    auto [r, c] = broadcast_shape(a, b, "mul");
    Tensor out({r, c});
    const std::size_t ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            out.data()[i * c + j] = a.data()[(ar == 1 ? 0 : i) * ac + (ac == 1 ? 0 : j)] *
                                    b.data()[(br == 1 ? 0 : i) * bc + (bc == 1 ? 0 : j)];
        }
    }
    Node n;
    n.op = Op::Mul;
    n.a = x;
    n.b = y;
    n.requires_grad = nodes_[x].requires_grad || nodes_[y].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::div(ValueId x, ValueId y) {
    const Tensor& a = nodes_[x].value;
    const Tensor& b = nodes_[y].value;
    auto [r, c] = broadcast_shape(a, b, "div");
    Tensor out({r, c});
    const std::size_t ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            out.data()[i * c + j] = a.data()[(ar == 1 ? 0 : i) * ac + (ac == 1 ? 0 : j)] /
                                    b.data()[(br == 1 ? 0 : i) * bc + (bc == 1 ? 0 : j)];
        }
    }
    Node n;
    n.op = Op::Div;
    n.a = x;
    n.b = y;
    n.requires_grad = nodes_[x].requires_grad || nodes_[y].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::exp(ValueId x) {
    const Tensor& a = nodes_[x].value;
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::exp(a[i]);
    Node n;
    n.op = Op::Exp;
    n.a = x;
    n.requires_grad = nodes_[x].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::relu(ValueId x) {
    const Tensor& a = nodes_[x].value;
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
    Node n;
    n.op = Op::Relu;
    n.a = x;
    n.requires_grad = nodes_[x].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::sigmoid(ValueId x) {
    const Tensor& a = nodes_[x].value;
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-a[i]))
                             : std::exp(a[i]) / (1.0 + std::exp(a[i]));
    }
    Node n;
    n.op = Op::Sigmoid;
    n.a = x;
    n.requires_grad = nodes_[x].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::matmul(ValueId x, ValueId y) {
    const Tensor& a = nodes_[x].value;
    const Tensor& b = nodes_[y].value;
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: inner dimensions differ");
    }
    Tensor out({a.rows(), b.cols()});
    detail::gemm(false, false, a.rows(), b.cols(), a.cols(), a.data(), b.data(), out.data(), false);
    Node n;
    n.op = Op::MatMul;
    n.a = x;
    n.b = y;
    n.requires_grad = nodes_[x].requires_grad || nodes_[y].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::transpose(ValueId x) {
    const Tensor& a = nodes_[x].value;
    Tensor out({a.cols(), a.rows()});
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
    }
    Node n;
    n.op = Op::Transpose;
    n.a = x;
    n.requires_grad = nodes_[x].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::concat_rows(const std::vector<ValueId>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_rows: no inputs");
    const std::size_t c = nodes_[xs[0]].value.cols();
    std::size_t r = 0;
    for (ValueId id : xs) {
        if (nodes_[id].value.cols() != c) {
            throw std::invalid_argument("concat_rows: column mismatch");
        }
        r += nodes_[id].value.rows();
    }
    Tensor out({r, c});
    std::size_t row = 0;
    for (ValueId id : xs) {
        const Tensor& t = nodes_[id].value;
        std::copy(t.data(), t.data() + t.size(), out.data() + row * c);
        row += t.rows();
    }
    Node n;
    n.op = Op::ConcatRows;
    n.parents = xs;
    for (ValueId id : xs) n.requires_grad = n.requires_grad || nodes_[id].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::concat_cols(const std::vector<ValueId>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_cols: no inputs");
    const std::size_t r = nodes_[xs[0]].value.rows();
    std::size_t c = 0;
    for (ValueId id : xs) {
        if (nodes_[id].value.rows() != r) {
            throw std::invalid_argument("concat_cols: row mismatch");
        }
        c += nodes_[id].value.cols();
    }
    Tensor out({r, c});
    std::size_t col = 0;
    for (ValueId id : xs) {
        const Tensor& t = nodes_[id].value;
        for (std::size_t i = 0; i < r; ++i) {
            std::copy(t.data() + i * t.cols(), t.data() + (i + 1) * t.cols(),
                      out.data() + i * c + col);
        }
        col += t.cols();
    }
    Node n;
    n.op = Op::ConcatCols;
    n.parents = xs;
    for (ValueId id : xs) n.requires_grad = n.requires_grad || nodes_[id].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::slice_rows(ValueId x, std::size_t r0, std::size_t r1) {
    const Tensor& a = nodes_[x].value;
    if (r0 >= r1 || r1 > a.rows()) {
        throw std::invalid_argument("slice_rows: bad range");
    }
    const std::size_t c = a.cols();
    Tensor out({r1 - r0, c});
    std::copy(a.data() + r0 * c, a.data() + r1 * c, out.data());
    Node n;
    n.op = Op::SliceRows;
    n.a = x;
    n.r0 = r0;
    n.r1 = r1;
    n.requires_grad = nodes_[x].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::gather_rows(ValueId table, std::vector<std::int32_t> idx) {
    const Tensor& a = nodes_[table].value;
    const std::size_t c = a.cols();
    Tensor out({idx.size(), c});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto r = idx[i];
        if (r < 0 || static_cast<std::size_t>(r) >= a.rows()) {
            throw std::out_of_range("gather_rows: index out of range");
        }
        std::copy(a.data() + static_cast<std::size_t>(r) * c,
                  a.data() + (static_cast<std::size_t>(r) + 1) * c, out.data() + i * c);
    }
    Node n;
    n.op = Op::GatherRows;
    n.a = table;
    n.indices = std::move(idx);
    n.requires_grad = nodes_[table].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::softmax(ValueId x, int axis) {
    const Tensor& a = nodes_[x].value;
    if (axis != 0 && axis != 1) throw std::invalid_argument("softmax: axis must be 0 or 1");
    Tensor out(a.shape());
    const std::size_t r = a.rows(), c = a.cols();
    if (axis == 1) {
        for (std::size_t i = 0; i < r; ++i) {
            const double* row = a.data() + i * c;
            double mx = row[0];
            for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
            double z = 0.0;
            double* orow = out.data() + i * c;
            for (std::size_t j = 0; j < c; ++j) {
                orow[j] = std::exp(row[j] - mx);
                z += orow[j];
            }
            for (std::size_t j = 0; j < c; ++j) orow[j] /= z;
        }
    } else {
        for (std::size_t j = 0; j < c; ++j) {
            double mx = a.at(0, j);
            for (std::size_t i = 1; i < r; ++i) mx = std::max(mx, a.at(i, j));
            double z = 0.0;
            for (std::size_t i = 0; i < r; ++i) {
                out.at(i, j) = std::exp(a.at(i, j) - mx);
                z += out.at(i, j);
            }
            for (std::size_t i = 0; i < r; ++i) out.at(i, j) /= z;
        }
    }
    Node n;
    n.op = Op::Softmax;
    n.a = x;
    n.axis = axis;
    n.requires_grad = nodes_[x].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::layer_norm(ValueId x, ValueId gain, ValueId bias, double eps) {
    const Tensor& a = nodes_[x].value;
    const Tensor& g = nodes_[gain].value;
    const Tensor& b = nodes_[bias].value;
    const std::size_t r = a.rows(), c = a.cols();
    if (g.size() != c || b.size() != c) {
        throw std::invalid_argument("layer_norm: gain/bias must match last dimension");
    }
    Tensor out({r, c});
    std::vector<double> saved(2 * r);
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = a.data() + i * c;
        double mean = 0.0;
        for (std::size_t j = 0; j < c; ++j) mean += row[j];
        mean /= static_cast<double>(c);
        double var = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            const double d = row[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(c);
        const double inv = 1.0 / std::sqrt(var + eps);
        saved[2 * i] = mean;
        saved[2 * i + 1] = inv;
        double* orow = out.data() + i * c;
        for (std::size_t j = 0; j < c; ++j) {
            orow[j] = (row[j] - mean) * inv * g[j] + b[j];
        }
    }
    Node n;
    n.op = Op::LayerNorm;
    n.a = x;
    n.b = gain;
    n.c = bias;
    n.eps = eps;
    n.saved = std::move(saved);
    n.requires_grad =
        nodes_[x].requires_grad || nodes_[gain].requires_grad || nodes_[bias].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

ValueId Tape::mean(ValueId x) {
    const Tensor& a = nodes_[x].value;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i];
    Node n;
    n.op = Op::Mean;
    n.a = x;
    n.requires_grad = nodes_[x].requires_grad;
    n.value = Tensor::scalar(s / static_cast<double>(a.size()));
    return push(std::move(n));
}

ValueId Tape::sum(ValueId x) {
    const Tensor& a = nodes_[x].value;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i];
    Node n;
    n.op = Op::Sum;
    n.a = x;
    n.requires_grad = nodes_[x].requires_grad;
    n.value = Tensor::scalar(s);
    return push(std::move(n));
}

ValueId Tape::mse(ValueId pred, ValueId target) {
    const Tensor& a = nodes_[pred].value;
    const Tensor& b = nodes_[target].value;
    if (!a.same_shape(b)) throw std::invalid_argument("mse: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    Node n;
    n.op = Op::Mse;
    n.a = pred;
    n.b = target;
    n.requires_grad = nodes_[pred].requires_grad || nodes_[target].requires_grad;
    n.value = Tensor::scalar(s / static_cast<double>(a.size()));
    return push(std::move(n));
}

ValueId Tape::bce(ValueId pred, ValueId target) {
    const Tensor& p = nodes_[pred].value;
    const Tensor& t = nodes_[target].value;
    if (!p.same_shape(t)) throw std::invalid_argument("bce: shape mismatch");
    Tensor out(p.shape());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pc = std::clamp(p[i], kBceClamp, 1.0 - kBceClamp);
        out[i] = -(t[i] * std::log(pc) + (1.0 - t[i]) * std::log(1.0 - pc));
    }
    Node n;
    n.op = Op::Bce;
    n.a = pred;
    n.b = target;
    n.requires_grad = nodes_[pred].requires_grad || nodes_[target].requires_grad;
    n.value = std::move(out);
    return push(std::move(n));
}

const Tensor& Tape::grad(ValueId id) {
    Node& n = nodes_[id];
    ensure_grad(n);
    return n.grad;
}

void Tape::backward(ValueId loss) {
    Node& top = nodes_[loss];
    if (!top.value.is_scalar()) {
        throw std::invalid_argument("backward: loss must be scalar");
    }
    ensure_grad(top);
    top.grad[0] += 1.0;

    for (ValueId id = loss; id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.op == Op::Leaf || !n.requires_grad || n.grad.empty()) continue;
        const Tensor& g = n.grad;
        const std::size_t r = n.value.rows(), c = n.value.cols();

        auto want = [&](ValueId p) { return p >= 0 && nodes_[p].requires_grad; };
        auto pgrad = [&](ValueId p) -> Tensor& {
            ensure_grad(nodes_[p]);
            return nodes_[p].grad;
        };

        switch (n.op) {
            case Op::Add: {
                if (want(n.a)) reduce_into(pgrad(n.a), g, r, c);
                if (want(n.b)) reduce_into(pgrad(n.b), g, r, c);
                break;
            }
            case Op::Sub: {
                if (want(n.a)) reduce_into(pgrad(n.a), g, r, c);
                if (want(n.b)) {
                    Tensor neg(g.shape());
                    for (std::size_t i = 0; i < g.size(); ++i) neg[i] = -g[i];
                    reduce_into(pgrad(n.b), neg, r, c);
                }
                break;
            }
            case Op::Mul: {
                const Tensor& a = nodes_[n.a].value;
                const Tensor& b = nodes_[n.b].value;
                const std::size_t ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
                if (want(n.a)) {
                    Tensor t(g.shape());
                    for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < c; ++j)
                            t.data()[i * c + j] =
                                g.data()[i * c + j] *
                                b.data()[(br == 1 ? 0 : i) * bc + (bc == 1 ? 0 : j)];
                    reduce_into(pgrad(n.a), t, r, c);
                }
                if (want(n.b)) {
                    Tensor t(g.shape());
                    for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < c; ++j)
                            t.data()[i * c + j] =
                                g.data()[i * c + j] *
                                a.data()[(ar == 1 ? 0 : i) * ac + (ac == 1 ? 0 : j)];
                    reduce_into(pgrad(n.b), t, r, c);
                }
                break;
            }
            case Op::Div: {
                const Tensor& a = nodes_[n.a].value;
                const Tensor& b = nodes_[n.b].value;
                const std::size_t ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
                if (want(n.a)) {
                    Tensor t(g.shape());
                    for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < c; ++j)
                            t.data()[i * c + j] =
                                g.data()[i * c + j] /
                                b.data()[(br == 1 ? 0 : i) * bc + (bc == 1 ? 0 : j)];
                    reduce_into(pgrad(n.a), t, r, c);
                }
                if (want(n.b)) {
                    Tensor t(g.shape());
                    for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < c; ++j) {
                            const double av =
                                a.data()[(ar == 1 ? 0 : i) * ac + (ac == 1 ? 0 : j)];
                            const double bv =
                                b.data()[(br == 1 ? 0 : i) * bc + (bc == 1 ? 0 : j)];
                            t.data()[i * c + j] = -g.data()[i * c + j] * av / (bv * bv);
                        }
                    reduce_into(pgrad(n.b), t, r, c);
                }
                break;
            }
            case Op::Exp: {
                if (want(n.a)) {
                    Tensor& pg = pgrad(n.a);
                    for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * n.value[i];
                }
                break;
            }
            case Op::Relu: {
                if (want(n.a)) {
                    const Tensor& a = nodes_[n.a].value;
                    Tensor& pg = pgrad(n.a);
                    for (std::size_t i = 0; i < g.size(); ++i)
                        pg[i] += a[i] > 0.0 ? g[i] : 0.0;
                }
                break;
            }
            case Op::Sigmoid: {
                if (want(n.a)) {
                    Tensor& pg = pgrad(n.a);
                    for (std::size_t i = 0; i < g.size(); ++i)
                        pg[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
                }
                break;
            }
            case Op::MatMul: {
                const Tensor& a = nodes_[n.a].value;
                const Tensor& b = nodes_[n.b].value;
                if (want(n.a)) {
                    // dA = dC * B^T
                    detail::gemm(false, true, a.rows(), a.cols(), b.cols(), g.data(), b.data(),
                                 pgrad(n.a).data(), true);
                }
                if (want(n.b)) {
                    // dB = A^T * dC
                    detail::gemm(true, false, b.rows(), b.cols(), a.rows(), a.data(), g.data(),
                                 pgrad(n.b).data(), true);
                }
                break;
            }
            case Op::Transpose: {
                if (want(n.a)) {
                    Tensor& pg = pgrad(n.a);
                    for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < c; ++j) pg.at(j, i) += g.at(i, j);
                }
                break;
            }
            case Op::ConcatRows: {
                std::size_t row = 0;
                for (ValueId p : n.parents) {
                    const std::size_t pr = nodes_[p].value.rows();
                    if (want(p)) {
                        Tensor& pg = pgrad(p);
                        for (std::size_t i = 0; i < pr * c; ++i) pg[i] += g[row * c + i];
                    }
                    row += pr;
                }
                break;
            }
            case Op::ConcatCols: {
                std::size_t col = 0;
                for (ValueId p : n.parents) {
                    const std::size_t pc = nodes_[p].value.cols();
                    if (want(p)) {
                        Tensor& pg = pgrad(p);
                        for (std::size_t i = 0; i < r; ++i)
                            for (std::size_t j = 0; j < pc; ++j)
                                pg.at(i, j) += g.data()[i * c + col + j];
                    }
                    col += pc;
                }
                break;
            }
            case Op::SliceRows: {
                if (want(n.a)) {
                    Tensor& pg = pgrad(n.a);
                    const std::size_t pc = nodes_[n.a].value.cols();
                    for (std::size_t i = 0; i < g.size(); ++i) pg[n.r0 * pc + i] += g[i];
                }
                break;
            }
            case Op::GatherRows: {
                if (want(n.a)) {
                    Tensor& pg = pgrad(n.a);
                    const std::size_t pc = nodes_[n.a].value.cols();
                    for (std::size_t i = 0; i < n.indices.size(); ++i) {
                        const std::size_t tr = static_cast<std::size_t>(n.indices[i]);
                        for (std::size_t j = 0; j < pc; ++j)
                            pg.data()[tr * pc + j] += g.data()[i * pc + j];
                    }
                }
                break;
            }
            case Op::Softmax: {
                if (want(n.a)) {
                    Tensor& pg = pgrad(n.a);
                    const Tensor& y = n.value;
                    if (n.axis == 1) {
                        for (std::size_t i = 0; i < r; ++i) {
                            double dot = 0.0;
                            for (std::size_t j = 0; j < c; ++j)
                                dot += g.data()[i * c + j] * y.data()[i * c + j];
                            for (std::size_t j = 0; j < c; ++j)
                                pg.data()[i * c + j] +=
                                    y.data()[i * c + j] * (g.data()[i * c + j] - dot);
                        }
                    } else {
                        for (std::size_t j = 0; j < c; ++j) {
                            double dot = 0.0;
                            for (std::size_t i = 0; i < r; ++i) dot += g.at(i, j) * y.at(i, j);
                            for (std::size_t i = 0; i < r; ++i)
                                pg.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
                        }
                    }
                }
                break;
            }
            case Op::LayerNorm: {
                const Tensor& x = nodes_[n.a].value;
                const Tensor& gain = nodes_[n.b].value;
                const bool wx = want(n.a), wg = want(n.b), wb = want(n.c);
                for (std::size_t i = 0; i < r; ++i) {
                    const double mean = n.saved[2 * i];
                    const double inv = n.saved[2 * i + 1];
                    const double* xr = x.data() + i * c;
                    const double* gr = g.data() + i * c;
                    if (wg || wb) {
                        Tensor* gg = wg ? &pgrad(n.b) : nullptr;
                        Tensor* gb = wb ? &pgrad(n.c) : nullptr;
                        for (std::size_t j = 0; j < c; ++j) {
                            const double xhat = (xr[j] - mean) * inv;
                            if (gg) (*gg)[j] += gr[j] * xhat;
                            if (gb) (*gb)[j] += gr[j];
                        }
                    }
                    if (wx) {
                        Tensor& pg = pgrad(n.a);
                        double s1 = 0.0, s2 = 0.0;
                        for (std::size_t j = 0; j < c; ++j) {
                            const double gy = gr[j] * gain[j];
                            const double xhat = (xr[j] - mean) * inv;
                            s1 += gy;
                            s2 += gy * xhat;
                        }
                        const double nc = static_cast<double>(c);
                        for (std::size_t j = 0; j < c; ++j) {
                            const double gy = gr[j] * gain[j];
                            const double xhat = (xr[j] - mean) * inv;
                            pg.data()[i * c + j] += inv * (gy - s1 / nc - xhat * s2 / nc);
                        }
                    }
                }
                break;
            }
            case Op::Mean: {
                if (want(n.a)) {
                    Tensor& pg = pgrad(n.a);
                    const double gv = g[0] / static_cast<double>(pg.size());
                    for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += gv;
                }
                break;
            }
            case Op::Sum: {
                if (want(n.a)) {
                    Tensor& pg = pgrad(n.a);
                    for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += g[0];
                }
                break;
            }
            case Op::Mse: {
                const Tensor& a = nodes_[n.a].value;
                const Tensor& b = nodes_[n.b].value;
                const double scale = 2.0 * g[0] / static_cast<double>(a.size());
                if (want(n.a)) {
                    Tensor& pg = pgrad(n.a);
                    for (std::size_t i = 0; i < a.size(); ++i) pg[i] += scale * (a[i] - b[i]);
                }
                if (want(n.b)) {
                    Tensor& pg = pgrad(n.b);
                    for (std::size_t i = 0; i < a.size(); ++i) pg[i] -= scale * (a[i] - b[i]);
                }
                break;
            }
            case Op::Bce: {
                const Tensor& p = nodes_[n.a].value;
                const Tensor& t = nodes_[n.b].value;
                if (want(n.a)) {
                    Tensor& pg = pgrad(n.a);
                    for (std::size_t i = 0; i < p.size(); ++i) {
                        const double pc = std::clamp(p[i], kBceClamp, 1.0 - kBceClamp);
                        pg[i] += g[i] * (pc - t[i]) / (pc * (1.0 - pc));
                    }
                }
                if (want(n.b)) {
                    Tensor& pg = pgrad(n.b);
                    for (std::size_t i = 0; i < p.size(); ++i) {
                        const double pc = std::clamp(p[i], kBceClamp, 1.0 - kBceClamp);
                        pg[i] += g[i] * std::log((1.0 - pc) / pc);
                    }
                }
                break;
            }
            case Op::Leaf:
                break;
        }
    }
}

} // namespace lightpath::ad
