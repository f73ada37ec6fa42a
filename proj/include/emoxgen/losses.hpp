#pragma once

#include <string>
#include <vector>

#include "emoxgen/errors.hpp"
#include "emoxgen/tensor.hpp"

namespace emoxgen::loss {

inline constexpr double kProbClamp = 1e-7;  // keeps log() away from 0 and 1

template <typename T>
struct LossValue {
    num::Tensor<T> value;  // scalar, >= 0
    size_t n_terms = 0;
};

namespace detail {

// y*log(p) + (1-y)*log(1-p) with clamped probabilities, elementwise.
template <typename T>
num::Tensor<T> log_likelihood_terms(const num::Tensor<T>& probs, const num::Tensor<T>& targets) {
    const T lo = static_cast<T>(kProbClamp);
    const T hi = static_cast<T>(1.0 - kProbClamp);
    auto p = num::clamp(probs, lo, hi);
    auto one_minus_p = num::clamp(num::affine(probs, T(-1), T(1)), lo, hi);
    auto one_minus_y = num::affine(targets, T(-1), T(1));
    return num::add(num::mul(targets, num::log(p)), num::mul(one_minus_y, num::log(one_minus_p)));
}

}  // namespace detail

// Summed negative log-likelihood for binary predictions, one probability of
// the positive class per example. Pass normalize=true to average instead.
template <typename T>
LossValue<T> nll_binary(const num::Tensor<T>& probs, const std::vector<int>& targets,
                        bool normalize = false) {
    if (probs.numel() != targets.size()) {
        throw ContractError("nll_binary: " + std::to_string(probs.numel()) + " predictions vs " +
                            std::to_string(targets.size()) + " targets");
    }
    std::vector<T> y(targets.size());
    for (size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] != 0 && targets[i] != 1) {
            throw ContractError("nll_binary: target must be 0 or 1, got " +
                                std::to_string(targets[i]));
        }
        y[i] = static_cast<T>(targets[i]);
    }
    auto terms = detail::log_likelihood_terms(probs, num::Tensor<T>::from(probs.shape(), std::move(y)));
    auto total = normalize ? num::mean(terms) : num::sum(terms);
    return {num::neg(total), targets.size()};
}

// Summed categorical negative log-likelihood; probs rows lie on the simplex
// and targets are class indices.
template <typename T>
LossValue<T> nll_categorical(const num::Tensor<T>& probs, const std::vector<int>& targets,
                             bool normalize = false) {
    if (probs.shape().size() != 2 || probs.shape()[0] != targets.size()) {
        throw ContractError("nll_categorical: predictions " + num::shape_str(probs.shape()) +
                            " vs " + std::to_string(targets.size()) + " targets");
    }
    const size_t classes = probs.shape()[1];
    std::vector<T> onehot(probs.numel(), T(0));
    for (size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] < 0 || static_cast<size_t>(targets[i]) >= classes) {
            throw ContractError("nll_categorical: class " + std::to_string(targets[i]) +
                                " outside " + std::to_string(classes) + " classes");
        }
        onehot[i * classes + static_cast<size_t>(targets[i])] = T(1);
    }
    const T lo = static_cast<T>(kProbClamp);
    const T hi = static_cast<T>(1.0 - kProbClamp);
    auto picked = num::mul(num::log(num::clamp(probs, lo, hi)),
                           num::Tensor<T>::from(probs.shape(), std::move(onehot)));
    auto total = normalize ? num::scale(num::sum(picked), static_cast<T>(1.0 / targets.size()))
                           : num::sum(picked);
    return {num::neg(total), targets.size()};
}

// Mean binary cross-entropy over every example-class pair of a multi-hot
// target matrix.
template <typename T>
LossValue<T> bce_multilabel(const num::Tensor<T>& probs,
                            const std::vector<std::vector<T>>& targets) {
    if (probs.shape().size() != 2 || probs.shape()[0] != targets.size()) {
        throw ContractError("bce_multilabel: predictions " + num::shape_str(probs.shape()) +
                            " vs " + std::to_string(targets.size()) + " target rows");
    }
    const size_t classes = probs.shape()[1];
    std::vector<T> y;
    y.reserve(probs.numel());
    for (const auto& row : targets) {
        if (row.size() != classes) {
            throw ContractError("bce_multilabel: target row of " + std::to_string(row.size()) +
                                " classes, expected " + std::to_string(classes));
        }
        y.insert(y.end(), row.begin(), row.end());
    }
    auto terms =
        detail::log_likelihood_terms(probs, num::Tensor<T>::from(probs.shape(), std::move(y)));
    return {num::neg(num::mean(terms)), probs.numel()};
}

}  // namespace emoxgen::loss
