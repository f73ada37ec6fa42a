#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "emoxgen/errors.hpp"

namespace emoxgen::num {

using Shape = std::vector<size_t>;

inline size_t shape_numel(const Shape& s) {
    size_t n = 1;
    for (size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ")";
    return os.str();
}

template <typename T>
struct TensorNode {
    Shape shape;
    std::vector<T> values;
    std::vector<T> grad;  // allocated on first accumulation
    bool requires_grad = false;
    bool consumed = false;  // interior node already traversed by a backward pass
    const char* op = "leaf";
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backprop;

    void ensure_grad() {
        if (grad.empty()) grad.assign(values.size(), T(0));
    }
};

// Value-semantics handle onto a node of the implicit compute graph.
// Nodes are immutable after construction except for grad accumulation;
// parameter leaves additionally allow set_values() between steps.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    static Tensor from(Shape shape, std::vector<T> values) {
        check_sized(shape, values);
        auto n = std::make_shared<TensorNode<T>>();
        n->shape = std::move(shape);
        n->values = std::move(values);
        return Tensor(std::move(n));
    }

    static Tensor param(Shape shape, std::vector<T> values) {
        Tensor t = from(std::move(shape), std::move(values));
        t.node_->requires_grad = true;
        return t;
    }

    static Tensor zeros(Shape shape) {
        size_t n = shape_numel(shape);
        return from(std::move(shape), std::vector<T>(n, T(0)));
    }

    static Tensor full(Shape shape, T v) {
        size_t n = shape_numel(shape);
        return from(std::move(shape), std::vector<T>(n, v));
    }

    static Tensor scalar(T v) { return from({1}, {v}); }

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    size_t numel() const { return node_->values.size(); }
    size_t rows() const { return node_->shape.size() == 2 ? node_->shape[0] : 1; }
    size_t cols() const { return node_->shape.empty() ? 1 : node_->shape.back(); }
    bool requires_grad() const { return node_->requires_grad; }

    const std::vector<T>& values() const { return node_->values; }
    T operator[](size_t i) const { return node_->values[i]; }
    T at(size_t r, size_t c) const { return node_->values[r * cols() + c]; }

    T item() const {
        if (numel() != 1) {
            throw ContractError("item() requires a scalar tensor, got shape " + shape_str(shape()));
        }
        return node_->values[0];
    }

    const std::vector<T>& grad() const {
        node_->ensure_grad();
        return node_->grad;
    }
    bool has_grad() const { return !node_->grad.empty(); }
    void zero_grad() { node_->grad.assign(node_->values.size(), T(0)); }

    // Parameter update hook for optimizers; only valid on leaves between
    // graph builds.
    void set_values(std::vector<T> values) {
        if (values.size() != node_->values.size()) {
            throw ShapeError("set_values size mismatch");
        }
        node_->values = std::move(values);
    }
    std::vector<T>& mutable_values() { return node_->values; }

    std::shared_ptr<TensorNode<T>> node() const { return node_; }

private:
    explicit Tensor(std::shared_ptr<TensorNode<T>> n) : node_(std::move(n)) {}

    static void check_sized(const Shape& shape, const std::vector<T>& values) {
        if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
        for (size_t d : shape) {
            if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape));
        }
        if (shape_numel(shape) != values.size()) {
            throw ShapeError("shape " + shape_str(shape) + " does not match " +
                             std::to_string(values.size()) + " values");
        }
    }

    std::shared_ptr<TensorNode<T>> node_;
};

namespace detail {

template <typename T>
void check_finite(const std::vector<T>& v, const char* what) {
    for (T x : v) {
        if (!std::isfinite(static_cast<double>(x))) {
            throw NumericError(std::string("non-finite value produced by ") + what);
        }
    }
}

template <typename T>
Tensor<T> make_op(const char* name, Shape shape, std::vector<T> values,
                  std::vector<Tensor<T>> inputs,
                  std::function<void(TensorNode<T>&)> backprop) {
    detail::check_finite(values, name);
    Tensor<T> out = Tensor<T>::from(std::move(shape), std::move(values));
    auto node = out.node();
    node->op = name;
    bool needs_grad = false;
    for (const auto& in : inputs) {
        needs_grad = needs_grad || in.requires_grad();
    }
    if (needs_grad) {
        node->requires_grad = true;
        node->parents.reserve(inputs.size());
        for (const auto& in : inputs) node->parents.push_back(in.node());
        node->backprop = std::move(backprop);
    }
    return out;
}

// Accumulate src into parent's grad when the parent participates in autodiff.
template <typename T>
void accum(TensorNode<T>& parent, const std::vector<T>& src) {
    if (!parent.requires_grad) return;
    parent.ensure_grad();
    for (size_t i = 0; i < src.size(); ++i) parent.grad[i] += src[i];
}

template <typename T>
void require_2d(const Tensor<T>& t, const char* op) {
    if (t.shape().size() != 2) {
        throw ShapeError(std::string(op) + " requires a 2-d tensor, got " + shape_str(t.shape()));
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Primitives. Each op validates shapes, computes the forward value, checks
// for NaN/Inf, and records a backward closure when any input requires grad.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    const bool same = a.shape() == b.shape();
    const bool bias = a.shape().size() == 2 && b.shape().size() == 1 && b.shape()[0] == a.shape()[1];
    if (!same && !bias) {
        throw ShapeError("add: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                         " do not conform");
    }
    std::vector<T> out(a.numel());
    if (same) {
        for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    } else {
        const size_t r = a.shape()[0], c = a.shape()[1];
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < c; ++j) out[i * c + j] = a[i * c + j] + b[j];
    }
    return detail::make_op<T>(
        "add", a.shape(), std::move(out), {a, b}, [same](TensorNode<T>& n) {
            auto& pa = *n.parents[0];
            auto& pb = *n.parents[1];
            detail::accum(pa, n.grad);
            if (same) {
                detail::accum(pb, n.grad);
            } else if (pb.requires_grad) {
                pb.ensure_grad();
                const size_t r = pa.shape[0], c = pa.shape[1];
                for (size_t i = 0; i < r; ++i)
                    for (size_t j = 0; j < c; ++j) pb.grad[j] += n.grad[i * c + j];
            }
        });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("sub: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                         " do not conform");
    }
    std::vector<T> out(a.numel());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
    return detail::make_op<T>("sub", a.shape(), std::move(out), {a, b}, [](TensorNode<T>& n) {
        detail::accum(*n.parents[0], n.grad);
        auto& pb = *n.parents[1];
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (size_t i = 0; i < n.grad.size(); ++i) pb.grad[i] -= n.grad[i];
        }
    });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("mul: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                         " do not conform");
    }
    std::vector<T> out(a.numel());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
    return detail::make_op<T>("mul", a.shape(), std::move(out), {a, b}, [](TensorNode<T>& n) {
        auto& pa = *n.parents[0];
        auto& pb = *n.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i] * pb.values[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (size_t i = 0; i < n.grad.size(); ++i) pb.grad[i] += n.grad[i] * pa.values[i];
        }
    });
}

// out = alpha * x + beta, with scalar constants.
template <typename T>
Tensor<T> affine(const Tensor<T>& x, T alpha, T beta) {
    std::vector<T> out(x.numel());
    for (size_t i = 0; i < out.size(); ++i) out[i] = alpha * x[i] + beta;
    return detail::make_op<T>("affine", x.shape(), std::move(out), {x}, [alpha](TensorNode<T>& n) {
        auto& p = *n.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += alpha * n.grad[i];
    });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T alpha) {
    return affine(x, alpha, T(0));
}

template <typename T>
Tensor<T> neg(const Tensor<T>& x) {
    return affine(x, T(-1), T(0));
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    detail::require_2d(a, "matmul");
    detail::require_2d(b, "matmul");
    if (a.shape()[1] != b.shape()[0]) {
        throw ShapeError("matmul: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                         " do not conform");
    }
    const size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    std::vector<T> out(m * n, T(0));
    const T* av = a.values().data();
    const T* bv = b.values().data();
    for (size_t i = 0; i < m; ++i) {
        for (size_t p = 0; p < k; ++p) {
            const T aip = av[i * k + p];
            const T* brow = bv + p * n;
            T* orow = out.data() + i * n;
            for (size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
        }
    }
    return detail::make_op<T>(
        "matmul", {m, n}, std::move(out), {a, b}, [m, k, n](TensorNode<T>& nd) {
            auto& pa = *nd.parents[0];
            auto& pb = *nd.parents[1];
            const T* g = nd.grad.data();
            if (pa.requires_grad) {
                pa.ensure_grad();
                // dA = G * B^T
                for (size_t i = 0; i < m; ++i)
                    for (size_t j = 0; j < n; ++j) {
                        const T gij = g[i * n + j];
                        for (size_t p = 0; p < k; ++p) pa.grad[i * k + p] += gij * pb.values[p * n + j];
                    }
            }
            if (pb.requires_grad) {
                pb.ensure_grad();
                // dB = A^T * G
                for (size_t i = 0; i < m; ++i)
                    for (size_t p = 0; p < k; ++p) {
                        const T aip = pa.values[i * k + p];
                        for (size_t j = 0; j < n; ++j) pb.grad[p * n + j] += aip * g[i * n + j];
                    }
            }
        });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& x) {
    detail::require_2d(x, "transpose");
    const size_t r = x.shape()[0], c = x.shape()[1];
    std::vector<T> out(r * c);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < c; ++j) out[j * r + i] = x[i * c + j];
    return detail::make_op<T>("transpose", {c, r}, std::move(out), {x}, [r, c](TensorNode<T>& n) {
        auto& p = *n.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < c; ++j) p.grad[i * c + j] += n.grad[j * r + i];
    });
}

// Softmax over the last axis; 1-d input is treated as a single row.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
    const size_t c = x.cols(), r = x.numel() / c;
    std::vector<T> out(x.numel());
    for (size_t i = 0; i < r; ++i) {
        const T* row = x.values().data() + i * c;
        T* orow = out.data() + i * c;
        T mx = row[0];
        for (size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        T sum = T(0);
        for (size_t j = 0; j < c; ++j) {
            orow[j] = std::exp(row[j] - mx);
            sum += orow[j];
        }
        for (size_t j = 0; j < c; ++j) orow[j] /= sum;
    }
    return detail::make_op<T>("softmax", x.shape(), std::move(out), {x}, [r, c](TensorNode<T>& n) {
        auto& p = *n.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < r; ++i) {
            const T* y = n.values.data() + i * c;
            const T* g = n.grad.data() + i * c;
            T dot = T(0);
            for (size_t j = 0; j < c; ++j) dot += g[j] * y[j];
            for (size_t j = 0; j < c; ++j) p.grad[i * c + j] += y[j] * (g[j] - dot);
        }
    });
}

// Layer normalization over the last axis with learned gain/shift.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps = T(1e-5)) {
    const size_t c = x.cols(), r = x.numel() / c;
    if (gamma.shape() != Shape{c} || beta.shape() != Shape{c}) {
        throw ShapeError("layer_norm: gamma/beta shapes " + shape_str(gamma.shape()) + "/" +
                         shape_str(beta.shape()) + " do not match feature dim " + std::to_string(c));
    }
    std::vector<T> out(x.numel());
    auto xhat = std::make_shared<std::vector<T>>(x.numel());
    auto rstd = std::make_shared<std::vector<T>>(r);
    for (size_t i = 0; i < r; ++i) {
        const T* row = x.values().data() + i * c;
        T mean = T(0);
        for (size_t j = 0; j < c; ++j) mean += row[j];
        mean /= T(c);
        T var = T(0);
        for (size_t j = 0; j < c; ++j) {
            T d = row[j] - mean;
            var += d * d;
        }
        var /= T(c);
        const T rs = T(1) / std::sqrt(var + eps);
        (*rstd)[i] = rs;
        for (size_t j = 0; j < c; ++j) {
            T h = (row[j] - mean) * rs;
            (*xhat)[i * c + j] = h;
            out[i * c + j] = gamma[j] * h + beta[j];
        }
    }
    return detail::make_op<T>(
        "layer_norm", x.shape(), std::move(out), {x, gamma, beta},
        [r, c, xhat, rstd](TensorNode<T>& n) {
            auto& px = *n.parents[0];
            auto& pg = *n.parents[1];
            auto& pb = *n.parents[2];
            if (pg.requires_grad) {
                pg.ensure_grad();
                for (size_t i = 0; i < r; ++i)
                    for (size_t j = 0; j < c; ++j) pg.grad[j] += n.grad[i * c + j] * (*xhat)[i * c + j];
            }
            if (pb.requires_grad) {
                pb.ensure_grad();
                for (size_t i = 0; i < r; ++i)
                    for (size_t j = 0; j < c; ++j) pb.grad[j] += n.grad[i * c + j];
            }
            if (px.requires_grad) {
                px.ensure_grad();
                for (size_t i = 0; i < r; ++i) {
                    T dsum = T(0), dxsum = T(0);
                    for (size_t j = 0; j < c; ++j) {
                        const T dh = n.grad[i * c + j] * pg.values[j];
                        dsum += dh;
                        dxsum += dh * (*xhat)[i * c + j];
                    }
                    const T inv_c = T(1) / T(c);
                    for (size_t j = 0; j < c; ++j) {
                        const T dh = n.grad[i * c + j] * pg.values[j];
                        px.grad[i * c + j] +=
                            (*rstd)[i] * (dh - dsum * inv_c - (*xhat)[i * c + j] * dxsum * inv_c);
                    }
                }
            }
        });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
    constexpr double kInvSqrt2 = 0.7071067811865475244;
    std::vector<T> out(x.numel());
    for (size_t i = 0; i < out.size(); ++i) {
        const double v = static_cast<double>(x[i]);
        out[i] = static_cast<T>(0.5 * v * (1.0 + std::erf(v * kInvSqrt2)));
    }
    return detail::make_op<T>("gelu", x.shape(), std::move(out), {x}, [](TensorNode<T>& n) {
        auto& p = *n.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        constexpr double kInvSqrt2 = 0.7071067811865475244;
        constexpr double kInvSqrt2Pi = 0.3989422804014326779;
        for (size_t i = 0; i < n.grad.size(); ++i) {
            const double v = static_cast<double>(p.values[i]);
            const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
            p.grad[i] += n.grad[i] * static_cast<T>(cdf + v * pdf);
        }
    });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
    std::vector<T> out(x.numel());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x[i]);
    return detail::make_op<T>("tanh", x.shape(), std::move(out), {x}, [](TensorNode<T>& n) {
        auto& p = *n.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < n.grad.size(); ++i)
            p.grad[i] += n.grad[i] * (T(1) - n.values[i] * n.values[i]);
    });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    std::vector<T> out(x.numel());
    for (size_t i = 0; i < out.size(); ++i) {
        const T v = x[i];
        out[i] = v >= T(0) ? T(1) / (T(1) + std::exp(-v))
                           : std::exp(v) / (T(1) + std::exp(v));
    }
    return detail::make_op<T>("sigmoid", x.shape(), std::move(out), {x}, [](TensorNode<T>& n) {
        auto& p = *n.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < n.grad.size(); ++i)
            p.grad[i] += n.grad[i] * n.values[i] * (T(1) - n.values[i]);
    });
}

template <typename T>
Tensor<T> log(const Tensor<T>& x) {
    std::vector<T> out(x.numel());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::log(x[i]);
    return detail::make_op<T>("log", x.shape(), std::move(out), {x}, [](TensorNode<T>& n) {
        auto& p = *n.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i] / p.values[i];
    });
}

// Gradient passes only where the input lies strictly inside (lo, hi).
template <typename T>
Tensor<T> clamp(const Tensor<T>& x, T lo, T hi) {
    std::vector<T> out(x.numel());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::min(hi, std::max(lo, x[i]));
    return detail::make_op<T>("clamp", x.shape(), std::move(out), {x}, [lo, hi](TensorNode<T>& n) {
        auto& p = *n.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < n.grad.size(); ++i) {
            if (p.values[i] > lo && p.values[i] < hi) p.grad[i] += n.grad[i];
        }
    });
}

template <typename T>
Tensor<T> embedding(const Tensor<T>& table, const std::vector<int>& ids) {
    detail::require_2d(table, "embedding");
    const size_t v = table.shape()[0], d = table.shape()[1];
    if (ids.empty()) throw ContractError("embedding: empty id sequence");
    for (int id : ids) {
        if (id < 0 || static_cast<size_t>(id) >= v) {
            throw IndexError("embedding: id " + std::to_string(id) + " outside table of " +
                             std::to_string(v) + " rows");
        }
    }
    std::vector<T> out(ids.size() * d);
    for (size_t i = 0; i < ids.size(); ++i) {
        const T* row = table.values().data() + static_cast<size_t>(ids[i]) * d;
        std::copy(row, row + d, out.data() + i * d);
    }
    auto idcopy = std::make_shared<std::vector<int>>(ids);
    return detail::make_op<T>(
        "embedding", {ids.size(), d}, std::move(out), {table}, [d, idcopy](TensorNode<T>& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            for (size_t i = 0; i < idcopy->size(); ++i) {
                T* dst = p.grad.data() + static_cast<size_t>((*idcopy)[i]) * d;
                const T* g = n.grad.data() + i * d;
                for (size_t j = 0; j < d; ++j) dst[j] += g[j];
            }
        });
}

// Concatenate 2-d tensors along rows (axis 0) or columns (axis 1).
template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, int axis) {
    if (parts.empty()) throw ContractError("concat: no inputs");
    if (axis != 0 && axis != 1) throw ContractError("concat: axis must be 0 or 1");
    for (const auto& p : parts) detail::require_2d(p, "concat");
    const size_t fixed = axis == 0 ? parts[0].shape()[1] : parts[0].shape()[0];
    size_t total = 0;
    for (const auto& p : parts) {
        const size_t f = axis == 0 ? p.shape()[1] : p.shape()[0];
        if (f != fixed) {
            throw ShapeError("concat: shapes " + shape_str(parts[0].shape()) + " and " +
                             shape_str(p.shape()) + " do not conform on axis " + std::to_string(axis));
        }
        total += axis == 0 ? p.shape()[0] : p.shape()[1];
    }
    Shape oshape = axis == 0 ? Shape{total, fixed} : Shape{fixed, total};
    std::vector<T> out(total * fixed);
    if (axis == 0) {
        size_t off = 0;
        for (const auto& p : parts) {
            std::copy(p.values().begin(), p.values().end(), out.begin() + static_cast<long>(off));
            off += p.numel();
        }
    } else {
        size_t coff = 0;
        for (const auto& p : parts) {
            const size_t pc = p.shape()[1];
            for (size_t i = 0; i < fixed; ++i)
                std::copy(p.values().begin() + static_cast<long>(i * pc),
                          p.values().begin() + static_cast<long>((i + 1) * pc),
                          out.begin() + static_cast<long>(i * total + coff));
            coff += pc;
        }
    }
    return detail::make_op<T>("concat", std::move(oshape), std::move(out), parts,
                              [axis, fixed, total](TensorNode<T>& n) {
                                  size_t off = 0;
                                  for (auto& pp : n.parents) {
                                      auto& p = *pp;
                                      const size_t span = axis == 0 ? p.shape[0] : p.shape[1];
                                      if (p.requires_grad) {
                                          p.ensure_grad();
                                          if (axis == 0) {
                                              for (size_t i = 0; i < span * fixed; ++i)
                                                  p.grad[i] += n.grad[off * fixed + i];
                                          } else {
                                              for (size_t i = 0; i < fixed; ++i)
                                                  for (size_t j = 0; j < span; ++j)
                                                      p.grad[i * span + j] += n.grad[i * total + off + j];
                                          }
                                      }
                                      off += span;
                                  }
                              });
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, size_t r0, size_t nr, size_t c0, size_t nc) {
    detail::require_2d(x, "slice");
    const size_t r = x.shape()[0], c = x.shape()[1];
    if (nr == 0 || nc == 0 || r0 + nr > r || c0 + nc > c) {
        throw ShapeError("slice: window rows [" + std::to_string(r0) + "," + std::to_string(r0 + nr) +
                         ") cols [" + std::to_string(c0) + "," + std::to_string(c0 + nc) +
                         ") outside shape " + shape_str(x.shape()));
    }
    std::vector<T> out(nr * nc);
    for (size_t i = 0; i < nr; ++i)
        for (size_t j = 0; j < nc; ++j) out[i * nc + j] = x.values()[(r0 + i) * c + c0 + j];
    return detail::make_op<T>("slice", {nr, nc}, std::move(out), {x},
                              [r0, nr, c0, nc, c](TensorNode<T>& n) {
                                  auto& p = *n.parents[0];
                                  if (!p.requires_grad) return;
                                  p.ensure_grad();
                                  for (size_t i = 0; i < nr; ++i)
                                      for (size_t j = 0; j < nc; ++j)
                                          p.grad[(r0 + i) * c + c0 + j] += n.grad[i * nc + j];
                              });
}

template <typename T>
Tensor<T> row(const Tensor<T>& x, size_t i) {
    detail::require_2d(x, "row");
    return slice(x, i, 1, 0, x.shape()[1]);
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
    T acc = T(0);
    for (size_t i = 0; i < x.numel(); ++i) acc += x[i];
    return detail::make_op<T>("sum", {1}, {acc}, {x}, [](TensorNode<T>& n) {
        auto& p = *n.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += n.grad[0];
    });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
    T acc = T(0);
    for (size_t i = 0; i < x.numel(); ++i) acc += x[i];
    const size_t n = x.numel();
    acc /= T(n);
    return detail::make_op<T>("mean", {1}, {acc}, {x}, [n](TensorNode<T>& nd) {
        auto& p = *nd.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        const T g = nd.grad[0] / T(n);
        for (size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += g;
    });
}

// ---------------------------------------------------------------------------
// Reverse pass. The graph is implicit in the parent links; ComputeGraph
// materializes a topological order, runs the recorded closures once each,
// and then severs the links so a step's graph cannot be reused.
// ---------------------------------------------------------------------------

template <typename T>
class ComputeGraph {
public:
    explicit ComputeGraph(const std::shared_ptr<TensorNode<T>>& root) {
        // Iterative post-order DFS: parents appear before their consumers.
        std::vector<std::pair<TensorNode<T>*, size_t>> stack;
        std::unordered_set<TensorNode<T>*> seen;
        stack.emplace_back(root.get(), 0);
        seen.insert(root.get());
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (node->consumed) {
                throw StateError("backward: graph through op '" + std::string(node->op) +
                                 "' was already consumed");
            }
            if (next < node->parents.size()) {
                TensorNode<T>* p = node->parents[next++].get();
                if (seen.insert(p).second) stack.emplace_back(p, 0);
            } else {
                order_.push_back(node);
                stack.pop_back();
            }
        }
    }

    void run_backward() {
        TensorNode<T>* root = order_.back();
        root->ensure_grad();
        root->grad[0] = T(1);
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            TensorNode<T>* node = *it;
            if (!node->backprop) continue;
            // All consumers ran already, so this node's grad is final.
            detail::check_finite(node->grad, node->op);
            node->backprop(*node);
        }
        for (TensorNode<T>* node : order_) {
            if (!node->backprop) {
                detail::check_finite(node->grad, node->op);
                continue;
            }
            node->backprop = nullptr;
            node->parents.clear();
            node->consumed = true;
        }
    }

    size_t size() const { return order_.size(); }

private:
    std::vector<TensorNode<T>*> order_;
};

template <typename T>
void backward(const Tensor<T>& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ContractError("backward requires a scalar loss" +
                            (loss.defined() ? ", got shape " + shape_str(loss.shape()) : std::string()));
    }
    if (!loss.requires_grad()) {
        throw ContractError("backward: loss does not depend on any parameter");
    }
    ComputeGraph<T> graph(loss.node());
    graph.run_backward();
}

}  // namespace emoxgen::num
