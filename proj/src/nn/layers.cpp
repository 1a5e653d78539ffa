#include "stockgan/nn/layers.hpp"

#include "stockgan/errors.hpp"

namespace stockgan::nn {

Var apply(const Activation& act, const Var& x) {
    switch (act.kind) {
    case Activation::Kind::LeakyRelu:
        return leaky_relu(x, act.slope);
    case Activation::Kind::Linear:
        break;
    }
    return x;
}

Var dense(const Var& x, const Var& weight, const Var& bias) { return add_row(matmul(x, weight), bias); }

void add_gru_params(ModelParams& params, const std::string& prefix, Eigen::Index in, Eigen::Index units,
                    std::mt19937_64& rng) {
    for (const char* gate : {"z", "r", "h"}) {
        params.add(prefix + ".W" + gate, init_uniform(in, units, in, rng));
    }
    for (const char* gate : {"z", "r", "h"}) {
        params.add(prefix + ".U" + gate, init_uniform(units, units, units, rng));
    }
    for (const char* gate : {"z", "r", "h"}) {
        params.add(prefix + ".b" + gate, init_uniform(1, units, units, rng));
    }
}

std::vector<Var> gru_sequence(const std::vector<Var>& steps, const ParamVars& params,
                              const std::string& prefix, const Var& h0) {
    const Var& wz = params[prefix + ".Wz"];
    const Var& wr = params[prefix + ".Wr"];
    const Var& wh = params[prefix + ".Wh"];
    const Var& uz = params[prefix + ".Uz"];
    const Var& ur = params[prefix + ".Ur"];
    const Var& uh = params[prefix + ".Uh"];
    const Var& bz = params[prefix + ".bz"];
    const Var& br = params[prefix + ".br"];
    const Var& bh = params[prefix + ".bh"];
    if (h0.cols() != uz.rows()) {
        throw ShapeError(prefix + ": initial state width " + std::to_string(h0.cols()) + " != units " +
                         std::to_string(uz.rows()));
    }

    std::vector<Var> out;
    out.reserve(steps.size());
    Var h = h0;
    for (const auto& x : steps) {
        if (x.cols() != wz.rows()) {
            throw ShapeError(prefix + ": input width " + std::to_string(x.cols()) + " != " +
                             std::to_string(wz.rows()));
        }
        const Var z = sigmoid(add(dense(x, wz, bz), matmul(h, uz)));
        const Var r = sigmoid(add(dense(x, wr, br), matmul(h, ur)));
        const Var candidate = tanh(add(dense(x, wh, bh), matmul(mul(r, h), uh)));
        // (1 - z) h + z h~  ==  h + z (h~ - h)
        h = add(h, mul(z, sub(candidate, h)));
        out.push_back(h);
    }
    return out;
}

void add_lstm_params(ModelParams& params, const std::string& prefix, Eigen::Index in, Eigen::Index units,
                     std::mt19937_64& rng) {
    for (const char* gate : {"i", "f", "o", "g"}) {
        params.add(prefix + ".W" + gate, init_uniform(in, units, in, rng));
    }
    for (const char* gate : {"i", "f", "o", "g"}) {
        params.add(prefix + ".U" + gate, init_uniform(units, units, units, rng));
    }
    for (const char* gate : {"i", "f", "o", "g"}) {
        params.add(prefix + ".b" + gate, init_uniform(1, units, units, rng));
    }
}

std::vector<Var> lstm_sequence(const std::vector<Var>& steps, const ParamVars& params,
                               const std::string& prefix, bool reverse) {
    const Var& wi = params[prefix + ".Wi"];
    const Var& wf = params[prefix + ".Wf"];
    const Var& wo = params[prefix + ".Wo"];
    const Var& wg = params[prefix + ".Wg"];
    const Var& ui = params[prefix + ".Ui"];
    const Var& uf = params[prefix + ".Uf"];
    const Var& uo = params[prefix + ".Uo"];
    const Var& ug = params[prefix + ".Ug"];
    const Var& bi = params[prefix + ".bi"];
    const Var& bf = params[prefix + ".bf"];
    const Var& bo = params[prefix + ".bo"];
    const Var& bg = params[prefix + ".bg"];

    std::vector<Var> out(steps.size());
    if (steps.empty()) return out;
    const Eigen::Index batch = steps.front().rows();
    const Eigen::Index units = ui.rows();
    Var h(Matrix::Zero(batch, units));
    Var c(Matrix::Zero(batch, units));
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const std::size_t t = reverse ? steps.size() - 1 - k : k;
        const Var& x = steps[t];
        if (x.cols() != wi.rows()) {
            throw ShapeError(prefix + ": input width " + std::to_string(x.cols()) + " != " +
                             std::to_string(wi.rows()));
        }
        const Var i = sigmoid(add(dense(x, wi, bi), matmul(h, ui)));
        const Var f = sigmoid(add(dense(x, wf, bf), matmul(h, uf)));
        const Var o = sigmoid(add(dense(x, wo, bo), matmul(h, uo)));
        const Var g = tanh(add(dense(x, wg, bg), matmul(h, ug)));
        c = add(mul(f, c), mul(i, g));
        h = mul(o, tanh(c));
        out[t] = h;
    }
    return out;
}

Var conv1d(const Var& x, const Var& kernel, const Var& bias, Eigen::Index length, Eigen::Index kernel_size,
           const Activation& act) {
    if (kernel.rows() != kernel_size * x.cols()) {
        throw ShapeError("conv1d: kernel has " + std::to_string(kernel.rows()) + " rows, expected " +
                         std::to_string(kernel_size * x.cols()));
    }
    return apply(act, add_row(matmul(im2col(x, length, kernel_size), kernel), bias));
}

std::vector<Var> rows_as_steps(const Matrix& x) {
    std::vector<Var> steps;
    steps.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index t = 0; t < x.rows(); ++t) steps.emplace_back(Matrix(x.row(t)));
    return steps;
}

namespace {

Matrix stack_rows(const std::vector<Var>& rows) {
    if (rows.empty()) return {};
    Matrix out(static_cast<Eigen::Index>(rows.size()), rows.front().cols());
    for (std::size_t t = 0; t < rows.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = rows[t].value().row(0);
    return out;
}

} // namespace

Matrix gru_forward(const Matrix& x, const ModelParams& params, const std::string& prefix,
                   const std::optional<Matrix>& h0) {
    NoGradGuard no_grad;
    const ParamVars vars(params, false);
    const Eigen::Index units = params.at(prefix + ".Uz").rows();
    const Var init(h0 ? *h0 : Matrix(Matrix::Zero(1, units)));
    return stack_rows(gru_sequence(rows_as_steps(x), vars, prefix, init));
}

Matrix bilstm_forward(const Matrix& x, const ModelParams& params, const std::string& prefix) {
    NoGradGuard no_grad;
    const ParamVars vars(params, false);
    const auto steps = rows_as_steps(x);
    const Matrix fwd = stack_rows(lstm_sequence(steps, vars, prefix + "_fwd", false));
    const Matrix bwd = stack_rows(lstm_sequence(steps, vars, prefix + "_bwd", true));
    Matrix out(x.rows(), fwd.cols() + bwd.cols());
    out << fwd, bwd;
    return out;
}

Matrix conv1d_forward(const Matrix& x, const Matrix& kernel, const Matrix& bias, Eigen::Index kernel_size,
                      const Activation& act) {
    NoGradGuard no_grad;
    return conv1d(Var(x), Var(kernel), Var(bias), x.rows(), kernel_size, act).value();
}

} // namespace stockgan::nn
