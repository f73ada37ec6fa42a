#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emoxgen/errors.hpp"
#include "emoxgen/rng.hpp"
#include "emoxgen/tensor.hpp"
#include "emoxgen/weights.hpp"

namespace emoxgen::nn {

struct EncoderConfig {
    size_t layers = 2;
    size_t d_model = 64;
    size_t heads = 2;
    size_t d_ff = 256;
    double dropout = 0.1;
    size_t max_len = 128;
    size_t vocab_size = 8000;

    void validate() const {
        if (layers == 0 || d_model == 0 || heads == 0 || d_ff == 0 || max_len == 0 ||
            vocab_size == 0) {
            throw ConfigError("encoder config: all dimensions must be positive");
        }
        if (d_model % heads != 0) {
            throw ConfigError("encoder config: d_model " + std::to_string(d_model) +
                              " not divisible by " + std::to_string(heads) + " heads");
        }
        if (dropout < 0.0 || dropout >= 1.0) {
            throw ConfigError("encoder config: dropout must lie in [0,1)");
        }
    }
};

enum class TaskId { kHs, kEmotionGo, kEmotionEkman };
enum class OutputMode { kSigmoidBinary, kSoftmaxSingle, kSigmoidMulti };
enum class LossKind { kNll, kBce };

struct TaskSpec {
    TaskId id;
    size_t arity;
    OutputMode mode;
    LossKind loss;

    static TaskSpec hs() { return {TaskId::kHs, 1, OutputMode::kSigmoidBinary, LossKind::kNll}; }
    static TaskSpec emotion_go() {
        return {TaskId::kEmotionGo, 28, OutputMode::kSigmoidMulti, LossKind::kBce};
    }
    static TaskSpec emotion_ekman() {
        return {TaskId::kEmotionEkman, 7, OutputMode::kSoftmaxSingle, LossKind::kNll};
    }

    std::string name() const {
        switch (id) {
            case TaskId::kHs: return "hs";
            case TaskId::kEmotionGo: return "emotion-go";
            case TaskId::kEmotionEkman: return "emotion-ekman";
        }
        return "?";
    }
};

// Shared encoder plus per-task decoders under hard parameter sharing: a
// single parameter map holds one set of encoder weights, and tasks differ
// only in their "head.<task>.*" entries.
template <typename T>
struct Bundle {
    EncoderConfig cfg;
    std::vector<TaskSpec> tasks;
    std::map<std::string, num::Tensor<T>> params;

    static Bundle init(const EncoderConfig& cfg, const std::vector<TaskSpec>& tasks,
                       uint64_t seed) {
        cfg.validate();
        Bundle b;
        b.cfg = cfg;
        b.tasks = tasks;
        num::Rng rng(seed);
        // Xavier-normal for projection matrices, wider-than-BERT normals for
        // the lookup tables; from-scratch desk-scale training needs live
        // attention value paths from step one.
        auto weight = [&](const std::string& name, num::Shape shape) {
            std::vector<T> v(num::shape_numel(shape));
            const double stddev =
                shape.size() == 2
                    ? std::sqrt(2.0 / static_cast<double>(shape[0] + shape[1]))
                    : 0.02;
            for (auto& x : v) x = static_cast<T>(rng.normal(0.0, stddev));
            b.params.emplace(name, num::Tensor<T>::param(std::move(shape), std::move(v)));
        };
        auto table = [&](const std::string& name, num::Shape shape) {
            std::vector<T> v(num::shape_numel(shape));
            for (auto& x : v) x = static_cast<T>(rng.normal(0.0, 0.02));
            b.params.emplace(name, num::Tensor<T>::param(std::move(shape), std::move(v)));
        };
        auto constant = [&](const std::string& name, num::Shape shape, T value) {
            std::vector<T> v(num::shape_numel(shape), value);
            b.params.emplace(name, num::Tensor<T>::param(std::move(shape), std::move(v)));
        };

        table("emb.tok", {cfg.vocab_size, cfg.d_model});
        table("emb.pos", {cfg.max_len, cfg.d_model});
        for (size_t l = 0; l < cfg.layers; ++l) {
            const std::string p = "enc.layer" + std::to_string(l) + ".";
            for (const char* w : {"wq", "wk", "wv", "wo"}) {
                weight(p + "attn." + w, {cfg.d_model, cfg.d_model});
            }
            // No key bias: softmax is invariant to the per-row shift it
            // would add, so it would be an exactly-zero-gradient parameter.
            for (const char* bias : {"bq", "bv", "bo"}) {
                constant(p + "attn." + bias, {cfg.d_model}, T(0));
            }
            constant(p + "norm1.gamma", {cfg.d_model}, T(1));
            constant(p + "norm1.beta", {cfg.d_model}, T(0));
            weight(p + "ffn.w1", {cfg.d_model, cfg.d_ff});
            constant(p + "ffn.b1", {cfg.d_ff}, T(0));
            weight(p + "ffn.w2", {cfg.d_ff, cfg.d_model});
            constant(p + "ffn.b2", {cfg.d_model}, T(0));
            constant(p + "norm2.gamma", {cfg.d_model}, T(1));
            constant(p + "norm2.beta", {cfg.d_model}, T(0));
        }
        for (const auto& task : tasks) {
            const std::string p = "head." + task.name() + ".";
            weight(p + "hidden.w", {cfg.d_model, cfg.d_model});
            constant(p + "hidden.b", {cfg.d_model}, T(0));
            weight(p + "out.w", {cfg.d_model, task.arity});
            constant(p + "out.b", {task.arity}, T(0));
        }
        return b;
    }

    const TaskSpec& task(TaskId id) const {
        for (const auto& t : tasks) {
            if (t.id == id) return t;
        }
        throw ContractError("task is not registered in this bundle");
    }

    bool has_task(TaskId id) const {
        for (const auto& t : tasks) {
            if (t.id == id) return true;
        }
        return false;
    }

    const num::Tensor<T>& at(const std::string& name) const {
        auto it = params.find(name);
        if (it == params.end()) throw ContractError("bundle has no parameter '" + name + "'");
        return it->second;
    }

    void zero_grads() {
        for (auto& [name, p] : params) p.zero_grad();
    }

    // Parameters that a step on `task` is allowed to touch: the shared
    // encoder plus that task's own head. Hard sharing falls out of this
    // partition: other heads are never part of any other task's subset.
    std::map<std::string, num::Tensor<T>> task_params(const TaskSpec& task) const {
        std::map<std::string, num::Tensor<T>> out;
        const std::string head = "head." + task.name() + ".";
        for (const auto& [name, p] : params) {
            if (name.rfind("head.", 0) != 0 || name.rfind(head, 0) == 0) out.emplace(name, p);
        }
        return out;
    }

    std::map<std::string, std::vector<T>> snapshot() const {
        std::map<std::string, std::vector<T>> out;
        for (const auto& [name, p] : params) out.emplace(name, p.values());
        return out;
    }

    void restore(const std::map<std::string, std::vector<T>>& snap) {
        for (auto& [name, p] : params) p.set_values(snap.at(name));
    }
};

using ModelBundle = Bundle<float>;

// Dropout context for a forward pass; eval mode is the default.
template <typename T>
struct ForwardCtx {
    bool training = false;
    num::Rng* rng = nullptr;
};

// Token + positional embedding rows for a [CLS] ... [SEP] id sequence.
template <typename T>
num::Tensor<T> embed(const Bundle<T>& bundle, const std::vector<int>& tokens) {
    if (tokens.empty()) throw ContractError("embed: empty token sequence");
    if (tokens.size() > bundle.cfg.max_len) {
        throw ContractError("embed: sequence of " + std::to_string(tokens.size()) +
                            " tokens exceeds max_len " + std::to_string(bundle.cfg.max_len));
    }
    std::vector<int> positions(tokens.size());
    for (size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
    return num::add(num::embedding(bundle.at("emb.tok"), tokens),
                    num::embedding(bundle.at("emb.pos"), positions));
}

namespace detail {

template <typename T>
num::Tensor<T> dropout(const num::Tensor<T>& x, const Bundle<T>& bundle,
                       const ForwardCtx<T>& ctx) {
    const double rate = bundle.cfg.dropout;
    if (!ctx.training || rate <= 0.0) return x;
    if (ctx.rng == nullptr) throw ContractError("training forward pass needs an rng for dropout");
    std::vector<T> mask(x.numel());
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
    for (auto& m : mask) m = ctx.rng->bernoulli(rate) ? T(0) : keep_scale;
    return num::mul(x, num::Tensor<T>::from(x.shape(), std::move(mask)));
}

template <typename T>
num::Tensor<T> attention(const Bundle<T>& bundle, const num::Tensor<T>& x, size_t layer) {
    const std::string p = "enc.layer" + std::to_string(layer) + ".attn.";
    const size_t d = bundle.cfg.d_model;
    const size_t heads = bundle.cfg.heads;
    const size_t hd = d / heads;
    auto q = num::add(num::matmul(x, bundle.at(p + "wq")), bundle.at(p + "bq"));
    auto k = num::matmul(x, bundle.at(p + "wk"));
    auto v = num::add(num::matmul(x, bundle.at(p + "wv")), bundle.at(p + "bv"));
    const size_t len = x.shape()[0];
    const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
    std::vector<num::Tensor<T>> head_outs;
    head_outs.reserve(heads);
    for (size_t h = 0; h < heads; ++h) {
        auto qh = num::slice(q, 0, len, h * hd, hd);
        auto kh = num::slice(k, 0, len, h * hd, hd);
        auto vh = num::slice(v, 0, len, h * hd, hd);
        auto scores = num::scale(num::matmul(qh, num::transpose(kh)), inv_sqrt);
        head_outs.push_back(num::matmul(num::softmax(scores), vh));
    }
    auto merged = heads == 1 ? head_outs[0] : num::concat(head_outs, 1);
    return num::add(num::matmul(merged, bundle.at(p + "wo")), bundle.at(p + "bo"));
}

}  // namespace detail

// Pre-norm transformer stack; output shape equals input shape.
template <typename T>
num::Tensor<T> encode(const Bundle<T>& bundle, const num::Tensor<T>& embedded,
                      const ForwardCtx<T>& ctx = {}) {
    if (embedded.shape().size() != 2 || embedded.shape()[1] != bundle.cfg.d_model) {
        throw ShapeError("encode: expected (len," + std::to_string(bundle.cfg.d_model) +
                         "), got " + num::shape_str(embedded.shape()));
    }
    auto x = detail::dropout(embedded, bundle, ctx);
    for (size_t l = 0; l < bundle.cfg.layers; ++l) {
        const std::string p = "enc.layer" + std::to_string(l) + ".";
        auto normed = num::layer_norm(x, bundle.at(p + "norm1.gamma"), bundle.at(p + "norm1.beta"));
        x = num::add(x, detail::dropout(detail::attention(bundle, normed, l), bundle, ctx));
        auto normed2 = num::layer_norm(x, bundle.at(p + "norm2.gamma"), bundle.at(p + "norm2.beta"));
        auto h1 = num::gelu(num::add(num::matmul(normed2, bundle.at(p + "ffn.w1")),
                                     bundle.at(p + "ffn.b1")));
        auto h2 = num::add(num::matmul(h1, bundle.at(p + "ffn.w2")), bundle.at(p + "ffn.b2"));
        x = num::add(x, detail::dropout(h2, bundle, ctx));
    }
    return x;
}

// CLS pooling, one tanh hidden layer, task output layer, probability map.
template <typename T>
num::Tensor<T> pool_and_decode(const Bundle<T>& bundle, const num::Tensor<T>& hidden,
                               const TaskSpec& task) {
    if (!bundle.has_task(task.id)) {
        throw ContractError("pool_and_decode: task '" + task.name() +
                            "' is not registered in this bundle");
    }
    const std::string p = "head." + task.name() + ".";
    auto cls = num::row(hidden, 0);
    auto h = num::tanh(num::add(num::matmul(cls, bundle.at(p + "hidden.w")),
                                bundle.at(p + "hidden.b")));
    auto logits = num::add(num::matmul(h, bundle.at(p + "out.w")), bundle.at(p + "out.b"));
    return task.mode == OutputMode::kSoftmaxSingle ? num::softmax(logits) : num::sigmoid(logits);
}

// Full forward pass: tokens -> probabilities of shape (1, arity).
template <typename T>
num::Tensor<T> predict(const Bundle<T>& bundle, const std::vector<int>& tokens,
                       const TaskSpec& task, const ForwardCtx<T>& ctx = {}) {
    return pool_and_decode(bundle, encode(bundle, embed(bundle, tokens), ctx), task);
}

// Inference-only bundles skip graph recording entirely; forward passes on a
// frozen bundle are pure and safe to share read-only across threads.
template <typename T>
void freeze(Bundle<T>& bundle) {
    for (auto& [name, p] : bundle.params) p.node()->requires_grad = false;
}

// --- EMOW1 import/export ------------------------------------------------------

inline void save_bundle_weights(const ModelBundle& bundle, const std::string& path) {
    num::save_weights(path, bundle.params);
}

// Replaces every parameter's payload from an EMOW1 file. The file must cover
// the bundle exactly; shape conflicts name both sides.
inline void load_bundle_weights(ModelBundle& bundle, const std::string& path) {
    auto loaded = num::load_weights(path);
    for (auto& [name, p] : bundle.params) {
        auto it = loaded.find(name);
        if (it == loaded.end()) {
            throw SchemaError("weight file '" + path + "' has no entry '" + name + "'");
        }
        if (it->second.shape() != p.shape()) {
            throw ShapeError("weight '" + name + "': file shape " +
                             num::shape_str(it->second.shape()) + " does not match bundle shape " +
                             num::shape_str(p.shape()));
        }
        p.set_values(it->second.values());
    }
    for (const auto& [name, t] : loaded) {
        if (!bundle.params.count(name)) {
            throw SchemaError("weight file '" + path + "' has unexpected entry '" + name + "'");
        }
    }
}

}  // namespace emoxgen::nn
