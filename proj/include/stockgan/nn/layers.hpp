#pragma once

#include "stockgan/nn/autodiff.hpp"
#include "stockgan/nn/params.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stockgan::nn {

struct Activation {
    enum class Kind { Linear, LeakyRelu } kind = Kind::Linear;
    double slope = 0.2;

    static Activation linear() { return {}; }
    static Activation leaky_relu(double slope) { return {Kind::LeakyRelu, slope}; }
};

Var apply(const Activation& act, const Var& x);

// x (B x in) W (in x out) + b (1 x out)
Var dense(const Var& x, const Var& weight, const Var& bias);

// Parameter names: <prefix>.Wz/.Wr/.Wh (in x U), .Uz/.Ur/.Uh (U x U), .bz/.br/.bh (1 x U).
void add_gru_params(ModelParams& params, const std::string& prefix, Eigen::Index in, Eigen::Index units,
                    std::mt19937_64& rng);

// One GRU layer over a time-major batch (steps[t] is B x in). Returns every hidden state.
std::vector<Var> gru_sequence(const std::vector<Var>& steps, const ParamVars& params,
                              const std::string& prefix, const Var& h0);

// Parameter names: <prefix>.Wi/.Wf/.Wo/.Wg, .Ui/.Uf/.Uo/.Ug, .bi/.bf/.bo/.bg.
void add_lstm_params(ModelParams& params, const std::string& prefix, Eigen::Index in, Eigen::Index units,
                     std::mt19937_64& rng);

// One LSTM direction. Output is in time order regardless of direction.
std::vector<Var> lstm_sequence(const std::vector<Var>& steps, const ParamVars& params,
                               const std::string& prefix, bool reverse);

// Same-length 1-D cross-correlation, stride 1, zero padding. x is (B*length) x C_in,
// kernel is (K*C_in) x C_out with row k*C_in + c for tap k and input channel c.
Var conv1d(const Var& x, const Var& kernel, const Var& bias, Eigen::Index length, Eigen::Index kernel_size,
           const Activation& act);

// ---- single-sequence conveniences (no graph kept) ----

// x is T x M; h0 defaults to zeros. Returns T x U.
Matrix gru_forward(const Matrix& x, const ModelParams& params, const std::string& prefix,
                   const std::optional<Matrix>& h0 = std::nullopt);

// Forward and backward passes of <prefix>_fwd / <prefix>_bwd, concatenated per step (T x 2U).
Matrix bilstm_forward(const Matrix& x, const ModelParams& params, const std::string& prefix);

// x is L x C_in, kernel (K*C_in) x C_out, bias 1 x C_out.
Matrix conv1d_forward(const Matrix& x, const Matrix& kernel, const Matrix& bias, Eigen::Index kernel_size,
                      const Activation& act);

// Time-major split of a T x M matrix into T rows of 1 x M.
std::vector<Var> rows_as_steps(const Matrix& x);

} // namespace stockgan::nn
