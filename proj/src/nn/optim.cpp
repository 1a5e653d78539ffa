#include "stockgan/nn/optim.hpp"

#include "stockgan/errors.hpp"

#include <cmath>

namespace stockgan::nn {

ValueAndGrad value_and_grad(const LossFn& loss_fn, const ModelParams& params) {
    const ParamVars vars(params, true);
    const Var loss = loss_fn(vars);
    ValueAndGrad out;
    out.loss = loss.item();
    if (!std::isfinite(out.loss)) {
        throw NumericError("non-finite loss");
    }
    const auto grads = grad(loss, vars.vars());
    for (std::size_t i = 0; i < grads.size(); ++i) {
        check_finite(grads[i].value(), "gradient of " + vars.names()[i]);
        out.grads.add(vars.names()[i], grads[i].value());
    }
    return out;
}

LayerGrads grad(const LossFn& loss_fn, const ModelParams& params) {
    return value_and_grad(loss_fn, params).grads;
}

Matrix input_grad(const std::function<Var(const Var&)>& fn, const Matrix& x) {
    const Var input(x, true);
    const Var y = fn(input);
    const Var wrt[] = {input};
    Matrix g = grad(y, wrt).front().value();
    check_finite(g, "input gradient");
    return g;
}

AdamState make_adam_state(const ModelParams& params) {
    return {params.zeros_like(), params.zeros_like()};
}

void adam_step(ModelParams& params, const LayerGrads& grads, AdamState& state, std::int64_t t,
               const AdamOptions& options) {
    if (t < 1) {
        throw ParameterError("adam_step: step count must be >= 1, got " + std::to_string(t));
    }
    if (grads.size() != params.size() || state.first_moment.size() != params.size()) {
        throw ShapeError("adam_step: params, grads and state disagree in size");
    }
    const double correction1 = 1.0 - std::pow(options.beta1, static_cast<double>(t));
    const double correction2 = 1.0 - std::pow(options.beta2, static_cast<double>(t));
    auto& entries = params.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& [name, p] = entries[i];
        const Matrix& g = grads.entries()[i].second;
        Matrix& m = state.first_moment.entries()[i].second;
        Matrix& v = state.second_moment.entries()[i].second;
        if (grads.entries()[i].first != name || g.rows() != p.rows() || g.cols() != p.cols()) {
            throw ShapeError("adam_step: gradient for '" + name + "' does not match");
        }
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            const double gk = g.data()[k];
            double& mk = m.data()[k];
            double& vk = v.data()[k];
            mk = options.beta1 * mk + (1.0 - options.beta1) * gk;
            vk = options.beta2 * vk + (1.0 - options.beta2) * gk * gk;
            const double m_hat = mk / correction1;
            const double v_hat = vk / correction2;
            p.data()[k] -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
        }
    }
}

} // namespace stockgan::nn
