#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "corn/rng.hpp"

namespace corn {

template <typename Real>
class Tape;

/// Dense 2-D tensor. The handle has shared-node semantics: copies alias the
/// same storage, which is what lets tape records and user code refer to one
/// node. Values are immutable while a graph built from them is alive, except
/// for explicit parameter updates between optimizer steps; grads are written
/// only by Tape::backward.
template <typename Real>
class Tensor {
public:
    Tensor() = default;

    static Tensor from(std::size_t rows, std::size_t cols, std::vector<Real> values,
                       bool requires_grad = false) {
        if (values.size() != rows * cols) {
            throw std::invalid_argument("tensor data size " + std::to_string(values.size()) +
                                        " does not match shape " + shape_str(rows, cols));
        }
        Tensor t;
        t.node_ = std::make_shared<Node>();
        t.node_->rows = rows;
        t.node_->cols = cols;
        t.node_->values = std::move(values);
        t.node_->requires_grad = requires_grad;
        return t;
    }

    static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false) {
        return from(rows, cols, std::vector<Real>(rows * cols, Real(0)), requires_grad);
    }

    static Tensor full(std::size_t rows, std::size_t cols, Real value, bool requires_grad = false) {
        return from(rows, cols, std::vector<Real>(rows * cols, value), requires_grad);
    }

    /// 1x1 convenience wrapper.
    static Tensor scalar(Real value, bool requires_grad = false) {
        return from(1, 1, {value}, requires_grad);
    }

    bool defined() const { return node_ != nullptr; }
    std::size_t rows() const { return node_->rows; }
    std::size_t cols() const { return node_->cols; }
    std::size_t size() const { return node_->values.size(); }
    bool requires_grad() const { return node_->requires_grad; }

    const std::vector<Real>& values() const { return node_->values; }

    /// Mutable access for in-place parameter updates. Must not be called
    /// between forward and backward of a graph that uses this tensor.
    std::vector<Real>& values() { return node_->values; }

    Real operator()(std::size_t r, std::size_t c) const {
        return node_->values[r * node_->cols + c];
    }

    Real item() const {
        if (size() != 1) {
            throw std::invalid_argument("item() requires a 1x1 tensor, got " +
                                        shape_str(rows(), cols()));
        }
        return node_->values[0];
    }

    bool has_grad() const { return !node_->grad.empty(); }

    const std::vector<Real>& grad() const {
        if (node_->grad.empty()) {
            throw std::logic_error("gradient not populated; run Tape::backward first");
        }
        return node_->grad;
    }

    std::vector<Real>& grad() {
        if (node_->grad.empty()) {
            throw std::logic_error("gradient not populated; run Tape::backward first");
        }
        return node_->grad;
    }

    /// Allocates (if needed) and zero-fills the gradient buffer.
    void zero_grad() { node_->grad.assign(size(), Real(0)); }

    bool same_node(const Tensor& other) const { return node_ == other.node_; }

private:
    friend class Tape<Real>;

    struct Node {
        std::size_t rows = 0;
        std::size_t cols = 0;
        std::vector<Real> values;
        std::vector<Real> grad;  // empty until backward reaches this node
        bool requires_grad = false;
    };

    static std::string shape_str(std::size_t r, std::size_t c) {
        return std::to_string(r) + "x" + std::to_string(c);
    }

    std::shared_ptr<Node> node_;
};

/// Records the operations of one forward pass, in construction order (which
/// is topological: an op's inputs always exist before the op runs), and
/// replays their gradient rules exactly once each, in reverse order, on
/// backward(). One tape supports one backward pass; build a fresh tape per
/// training step. Single-threaded by design.
template <typename Real>
class Tape {
public:
    using T = Tensor<Real>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    std::size_t num_ops() const { return records_.size(); }
    bool backward_done() const { return backward_done_; }

    /// a[m x k] * b[k x n] -> [m x n]. Gradients: dA += dC * B^T, dB += A^T * dC.
    T matmul(const T& a, const T& b) {
        if (a.cols() != b.rows()) {
            throw std::invalid_argument("matmul shape mismatch: " + shape(a) + " * " + shape(b));
        }
        T out = make_output(a.rows(), b.cols(), a.requires_grad() || b.requires_grad());
        mat(out).noalias() = cmat(a) * cmat(b);
        if (out.requires_grad()) {
            record(out, [a, b, out]() {
                if (a.requires_grad()) {
                    gmat(a).noalias() += cgmat(out) * cmat(b).transpose();
                }
                if (b.requires_grad()) {
                    gmat(b).noalias() += cmat(a).transpose() * cgmat(out);
                }
            });
        }
        return out;
    }

    T add(const T& a, const T& b) {
        check_same_shape("add", a, b);
        T out = make_output(a.rows(), a.cols(), a.requires_grad() || b.requires_grad());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out.values()[i] = a.values()[i] + b.values()[i];
        }
        if (out.requires_grad()) {
            record(out, [a, b, out]() {
                if (a.requires_grad()) accumulate(a, [&](std::size_t i) { return out.node_->grad[i]; });
                if (b.requires_grad()) accumulate(b, [&](std::size_t i) { return out.node_->grad[i]; });
            });
        }
        return out;
    }

    T sub(const T& a, const T& b) {
        check_same_shape("sub", a, b);
        T out = make_output(a.rows(), a.cols(), a.requires_grad() || b.requires_grad());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out.values()[i] = a.values()[i] - b.values()[i];
        }
        if (out.requires_grad()) {
            record(out, [a, b, out]() {
                if (a.requires_grad()) accumulate(a, [&](std::size_t i) { return out.node_->grad[i]; });
                if (b.requires_grad()) accumulate(b, [&](std::size_t i) { return -out.node_->grad[i]; });
            });
        }
        return out;
    }

    T mul(const T& a, const T& b) {
        check_same_shape("mul", a, b);
        T out = make_output(a.rows(), a.cols(), a.requires_grad() || b.requires_grad());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out.values()[i] = a.values()[i] * b.values()[i];
        }
        if (out.requires_grad()) {
            record(out, [a, b, out]() {
                if (a.requires_grad()) {
                    accumulate(a, [&](std::size_t i) { return out.node_->grad[i] * b.values()[i]; });
                }
                if (b.requires_grad()) {
                    accumulate(b, [&](std::size_t i) { return out.node_->grad[i] * a.values()[i]; });
                }
            });
        }
        return out;
    }

    /// Row-vector bias addition: a[m x n] + row[1 x n]. The only broadcast
    /// the tape supports.
    T add_row(const T& a, const T& row) {
        if (row.rows() != 1 || row.cols() != a.cols()) {
            throw std::invalid_argument("add_row expects a 1x" + std::to_string(a.cols()) +
                                        " row vector, got " + shape(row));
        }
        T out = make_output(a.rows(), a.cols(), a.requires_grad() || row.requires_grad());
        const std::size_t n = a.cols();
        for (std::size_t r = 0; r < a.rows(); ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                out.values()[r * n + c] = a.values()[r * n + c] + row.values()[c];
            }
        }
        if (out.requires_grad()) {
            record(out, [a, row, out]() {
                if (a.requires_grad()) accumulate(a, [&](std::size_t i) { return out.node_->grad[i]; });
                if (row.requires_grad()) {
                    ensure_grad(row);
                    const std::size_t n = a.cols();
                    for (std::size_t r = 0; r < a.rows(); ++r) {
                        for (std::size_t c = 0; c < n; ++c) {
                            row.node_->grad[c] += out.node_->grad[r * n + c];
                        }
                    }
                }
            });
        }
        return out;
    }

    T scale(const T& a, Real factor) {
        T out = make_output(a.rows(), a.cols(), a.requires_grad());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out.values()[i] = factor * a.values()[i];
        }
        if (out.requires_grad()) {
            record(out, [a, out, factor]() {
                accumulate(a, [&](std::size_t i) { return factor * out.node_->grad[i]; });
            });
        }
        return out;
    }

    T sum(const T& a) {
        T out = make_output(1, 1, a.requires_grad());
        Real total(0);
        for (const Real v : a.values()) total += v;
        out.values()[0] = total;
        if (out.requires_grad()) {
            record(out, [a, out]() {
                accumulate(a, [&](std::size_t) { return out.node_->grad[0]; });
            });
        }
        return out;
    }

    T mean(const T& a) {
        T out = make_output(1, 1, a.requires_grad());
        Real total(0);
        for (const Real v : a.values()) total += v;
        const Real inv = Real(1) / static_cast<Real>(a.size());
        out.values()[0] = total * inv;
        if (out.requires_grad()) {
            record(out, [a, out, inv]() {
                accumulate(a, [&](std::size_t) { return inv * out.node_->grad[0]; });
            });
        }
        return out;
    }

    /// Elementwise logistic sigmoid, evaluated without overflow on either tail.
    T sigmoid(const T& a) {
        T out = make_output(a.rows(), a.cols(), a.requires_grad());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out.values()[i] = stable_sigmoid(a.values()[i]);
        }
        if (out.requires_grad()) {
            record(out, [a, out]() {
                accumulate(a, [&](std::size_t i) {
                    const Real s = out.values()[i];
                    return out.node_->grad[i] * s * (Real(1) - s);
                });
            });
        }
        return out;
    }

    /// Elementwise log(sigmoid(x)) computed as min(x, 0) - log1p(exp(-|x|)),
    /// which stays finite for arbitrarily negative x. Gradient is sigmoid(-x).
    T logsigmoid(const T& a) {
        T out = make_output(a.rows(), a.cols(), a.requires_grad());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const Real x = a.values()[i];
            out.values()[i] = std::min(x, Real(0)) - std::log1p(std::exp(-std::abs(x)));
        }
        if (out.requires_grad()) {
            record(out, [a, out]() {
                accumulate(a, [&](std::size_t i) {
                    return out.node_->grad[i] * stable_sigmoid(-a.values()[i]);
                });
            });
        }
        return out;
    }

    /// Elementwise max(x, slope*x) for slope in (0, 1). The gradient at
    /// exactly 0 takes the positive branch (1).
    T leaky_relu(const T& a, Real slope) {
        if (!(slope > Real(0) && slope < Real(1))) {
            throw std::invalid_argument("leaky_relu slope must lie in (0,1)");
        }
        T out = make_output(a.rows(), a.cols(), a.requires_grad());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const Real x = a.values()[i];
            out.values()[i] = x >= Real(0) ? x : slope * x;
        }
        if (out.requires_grad()) {
            record(out, [a, out, slope]() {
                accumulate(a, [&](std::size_t i) {
                    const Real g = a.values()[i] >= Real(0) ? Real(1) : slope;
                    return out.node_->grad[i] * g;
                });
            });
        }
        return out;
    }

    /// Inverted dropout: in training mode each element is zeroed with
    /// probability p and survivors are scaled by 1/(1-p); in eval mode the
    /// input tensor is returned untouched (and no random numbers are drawn).
    T dropout(const T& a, Real p, bool training, Rng& rng) {
        if (!(p >= Real(0) && p < Real(1))) {
            throw std::invalid_argument("dropout probability must lie in [0,1)");
        }
        if (!training) return a;
        const Real keep_scale = Real(1) / (Real(1) - p);
        std::vector<Real> mask(a.size());
        for (std::size_t i = 0; i < mask.size(); ++i) {
            mask[i] = rng.uniform01() < static_cast<double>(p) ? Real(0) : keep_scale;
        }
        T out = make_output(a.rows(), a.cols(), a.requires_grad());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out.values()[i] = a.values()[i] * mask[i];
        }
        if (out.requires_grad()) {
            record(out, [a, out, mask = std::move(mask)]() {
                accumulate(a, [&](std::size_t i) { return out.node_->grad[i] * mask[i]; });
            });
        }
        return out;
    }

    /// Mean over rows of -log softmax(logits)[rank-1]; ranks are 1-based.
    /// Fused so the log-sum-exp never materializes unnormalized exponentials.
    T softmax_cross_entropy(const T& logits, const std::vector<int>& ranks) {
        if (ranks.size() != logits.rows()) {
            throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(ranks.size()) +
                                        " labels for " + std::to_string(logits.rows()) + " rows");
        }
        const std::size_t n = logits.cols();
        for (const int r : ranks) {
            if (r < 1 || static_cast<std::size_t>(r) > n) {
                throw std::invalid_argument("softmax_cross_entropy: rank " + std::to_string(r) +
                                            " outside {1.." + std::to_string(n) + "}");
            }
        }
        T out = make_output(1, 1, logits.requires_grad());
        std::vector<Real> softmax(logits.size());
        Real total(0);
        for (std::size_t r = 0; r < logits.rows(); ++r) {
            const Real* z = logits.values().data() + r * n;
            Real zmax = z[0];
            for (std::size_t c = 1; c < n; ++c) zmax = std::max(zmax, z[c]);
            Real denom(0);
            for (std::size_t c = 0; c < n; ++c) denom += std::exp(z[c] - zmax);
            const Real log_denom = std::log(denom);
            for (std::size_t c = 0; c < n; ++c) {
                softmax[r * n + c] = std::exp(z[c] - zmax) / denom;
            }
            const std::size_t target = static_cast<std::size_t>(ranks[r] - 1);
            total += log_denom - (z[target] - zmax);
        }
        const Real inv_batch = Real(1) / static_cast<Real>(logits.rows());
        out.values()[0] = total * inv_batch;
        if (out.requires_grad()) {
            record(out, [logits, out, ranks, softmax = std::move(softmax), inv_batch, n]() {
                ensure_grad(logits);
                const Real g = out.node_->grad[0] * inv_batch;
                for (std::size_t r = 0; r < logits.rows(); ++r) {
                    const std::size_t target = static_cast<std::size_t>(ranks[r] - 1);
                    for (std::size_t c = 0; c < n; ++c) {
                        const Real onehot = c == target ? Real(1) : Real(0);
                        logits.node_->grad[r * n + c] += g * (softmax[r * n + c] - onehot);
                    }
                }
            });
        }
        return out;
    }

    /// Seeds d(loss)/d(loss) = 1 and replays every recorded gradient rule in
    /// reverse order. Populates grads of all requires_grad tensors reachable
    /// from the loss. May be called once per tape.
    void backward(const T& loss) {
        if (!loss.defined()) {
            throw std::invalid_argument("backward: undefined loss tensor");
        }
        if (loss.rows() != 1 || loss.cols() != 1) {
            throw std::invalid_argument("backward requires a scalar (1x1) loss, got " + shape(loss));
        }
        if (backward_done_) {
            throw std::logic_error("backward already ran on this tape");
        }
        backward_done_ = true;
        ensure_grad(loss);
        loss.node_->grad[0] += Real(1);
        for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
            // Ops whose output never received a gradient are off the path
            // from the loss and contribute nothing.
            if (!it->output->grad.empty()) it->pull();
        }
    }

private:
    using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Map = Eigen::Map<Mat>;
    using ConstMap = Eigen::Map<const Mat>;
    using Index = Eigen::Index;

    struct Record {
        std::function<void()> pull;
        typename T::Node* output;
    };

    static ConstMap cmat(const T& t) {
        return ConstMap(t.values().data(), static_cast<Index>(t.rows()),
                        static_cast<Index>(t.cols()));
    }
    static Map mat(T& t) {
        return Map(t.values().data(), static_cast<Index>(t.rows()), static_cast<Index>(t.cols()));
    }
    static Map gmat(const T& t) {
        ensure_grad(t);
        return Map(t.node_->grad.data(), static_cast<Index>(t.rows()),
                   static_cast<Index>(t.cols()));
    }
    static ConstMap cgmat(const T& t) {
        return ConstMap(t.node_->grad.data(), static_cast<Index>(t.rows()),
                        static_cast<Index>(t.cols()));
    }

    static void ensure_grad(const T& t) {
        if (t.node_->grad.empty()) t.node_->grad.assign(t.size(), Real(0));
    }

    template <typename PerElement>
    static void accumulate(const T& t, PerElement contribution) {
        ensure_grad(t);
        for (std::size_t i = 0; i < t.size(); ++i) {
            t.node_->grad[i] += contribution(i);
        }
    }

    static Real stable_sigmoid(Real x) {
        if (x >= Real(0)) {
            const Real e = std::exp(-x);
            return Real(1) / (Real(1) + e);
        }
        const Real e = std::exp(x);
        return e / (Real(1) + e);
    }

    static std::string shape(const T& t) {
        return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
    }

    static void check_same_shape(const char* op, const T& a, const T& b) {
        if (a.rows() != b.rows() || a.cols() != b.cols()) {
            throw std::invalid_argument(std::string(op) + " shape mismatch: " + shape(a) +
                                        " vs " + shape(b));
        }
    }

    T make_output(std::size_t rows, std::size_t cols, bool requires_grad) {
        T out = T::zeros(rows, cols, requires_grad);
        return out;
    }

    void record(const T& out, std::function<void()> pull) {
        records_.push_back(Record{std::move(pull), out.node_.get()});
    }

    std::vector<Record> records_;
    bool backward_done_ = false;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;
using TapeF = Tape<float>;
using TapeD = Tape<double>;

}  // namespace corn
