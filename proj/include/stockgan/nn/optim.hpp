#pragma once

#include "stockgan/nn/params.hpp"

#include <cstdint>
#include <functional>

namespace stockgan::nn {

using LossFn = std::function<Var(const ParamVars&)>;

struct ValueAndGrad {
    double loss = 0.0;
    LayerGrads grads;
};

// Exact reverse-mode gradient of a scalar loss with respect to every tensor
// in `params`. Non-finite loss or gradient raises NumericError naming the
// offending parameter.
ValueAndGrad value_and_grad(const LossFn& loss_fn, const ModelParams& params);
LayerGrads grad(const LossFn& loss_fn, const ModelParams& params);

// d fn(x) / dx for a scalar-valued fn.
Matrix input_grad(const std::function<Var(const Var&)>& fn, const Matrix& x);

struct AdamOptions {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    ModelParams first_moment;
    ModelParams second_moment;
};

AdamState make_adam_state(const ModelParams& params);

// One bias-corrected Adam update; t is the 1-based step count.
void adam_step(ModelParams& params, const LayerGrads& grads, AdamState& state, std::int64_t t,
               const AdamOptions& options);

} // namespace stockgan::nn
