#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "emoxgen/errors.hpp"
#include "emoxgen/tensor.hpp"

namespace emoxgen::num {

template <typename T>
struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long step_count = 0;
    std::map<std::string, std::vector<T>> m;
    std::map<std::string, std::vector<T>> v;
};

// Bias-corrected Adam update over a named parameter set. Gradients must be
// keyed identically to the parameters; moments are created lazily on the
// first step and mirror each parameter's size from then on.
template <typename T>
void adam_step(AdamState<T>& state, std::map<std::string, Tensor<T>>& params,
               const std::map<std::string, std::vector<T>>& grads) {
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (auto& [name, param] : params) {
        auto git = grads.find(name);
        if (git == grads.end()) {
            throw ContractError("adam_step: missing gradient for parameter '" + name + "'");
        }
        const std::vector<T>& g = git->second;
        if (g.size() != param.numel()) {
            throw ShapeError("adam_step: gradient size " + std::to_string(g.size()) +
                             " does not match parameter '" + name + "' of size " +
                             std::to_string(param.numel()));
        }
        auto& m = state.m[name];
        auto& v = state.v[name];
        if (m.empty()) m.assign(g.size(), T(0));
        if (v.empty()) v.assign(g.size(), T(0));
        std::vector<T> w = param.values();
        for (size_t i = 0; i < g.size(); ++i) {
            m[i] = static_cast<T>(state.beta1 * m[i] + (1.0 - state.beta1) * g[i]);
            v[i] = static_cast<T>(state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i]);
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] = static_cast<T>(w[i] - state.lr * mhat / (std::sqrt(vhat) + state.eps));
        }
        param.set_values(std::move(w));
    }
}

// Convenience form: pulls gradients accumulated on the parameter tensors.
template <typename T>
void adam_step(AdamState<T>& state, std::map<std::string, Tensor<T>>& params) {
    std::map<std::string, std::vector<T>> grads;
    for (auto& [name, param] : params) {
        if (!param.has_grad()) {
            throw ContractError("adam_step: missing gradient for parameter '" + name + "'");
        }
        grads.emplace(name, param.grad());
    }
    adam_step(state, params, grads);
}

}  // namespace emoxgen::num
