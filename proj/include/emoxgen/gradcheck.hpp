#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "emoxgen/errors.hpp"
#include "emoxgen/tensor.hpp"

namespace emoxgen::num {

// Compares the analytic gradient of a scalar-valued function against central
// finite differences. `f` must rebuild its graph from `params` on every call;
// returns max over all parameter entries of |analytic - numeric| /
// max(1e-12, |numeric|). Intended for double precision only.
template <typename F>
double grad_check(F&& f, std::vector<Tensor<double>>& params, double step = 1e-5) {
    for (auto& p : params) p.zero_grad();
    Tensor<double> loss = f();
    backward(loss);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (auto& p : params) analytic.push_back(p.grad());

    // Plain forward evaluations: detach the parameters so the probe passes
    // do not build graphs.
    std::vector<bool> saved;
    for (auto& p : params) {
        saved.push_back(p.requires_grad());
        p.node()->requires_grad = false;
    }
    double max_rel = 0.0;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        auto& vals = params[pi].mutable_values();
        for (size_t i = 0; i < vals.size(); ++i) {
            const double orig = vals[i];
            vals[i] = orig + step;
            const double fp = f().item();
            vals[i] = orig - step;
            const double fm = f().item();
            vals[i] = orig;
            const double numeric = (fp - fm) / (2.0 * step);
            if (!std::isfinite(numeric)) {
                throw NumericError("grad_check: non-finite finite-difference estimate");
            }
            const double rel = std::abs(analytic[pi][i] - numeric) /
                               std::max(1e-12, std::abs(numeric));
            max_rel = std::max(max_rel, rel);
        }
    }
    for (size_t pi = 0; pi < params.size(); ++pi) {
        params[pi].node()->requires_grad = saved[pi];
    }
    return max_rel;
}

}  // namespace emoxgen::num
