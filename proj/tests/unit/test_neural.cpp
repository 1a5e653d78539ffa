#include "stockgan/errors.hpp"
#include "stockgan/nn/checkpoint.hpp"
#include "stockgan/nn/networks.hpp"
#include "stockgan/nn/optim.hpp"

#include "../support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace stockgan;
using namespace stockgan::nn;

namespace {

GeneratorConfig tiny_generator(std::size_t window = 3, std::size_t features = 5, std::size_t horizon = 1) {
    GeneratorConfig cfg;
    cfg.window = window;
    cfg.features = features;
    cfg.horizon = horizon;
    cfg.gru_units = {4, 3};
    cfg.dense_units = {5, horizon};
    return cfg;
}

DiscriminatorConfig tiny_discriminator(std::size_t length = 4) {
    DiscriminatorConfig cfg;
    cfg.input_length = length;
    cfg.conv_channels = {2, 3, 4};
    cfg.dense_units = {5, 1};
    return cfg;
}

double max_abs_diff(const oracle::Vec& a, const oracle::Vec& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

} // namespace

TEST(Gru, ZeroWeightsStayAtZero) {
    std::mt19937_64 rng(1);
    ModelParams p;
    add_gru_params(p, "g", 3, 4, rng);
    for (auto& [name, m] : p.entries()) m.setZero();
    const Matrix h = gru_forward(oracle::random_matrix(5, 3, rng), p, "g");
    EXPECT_EQ(h.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gru, ClosedUpdateGateKeepsState) {
    std::mt19937_64 rng(2);
    ModelParams p;
    add_gru_params(p, "g", 2, 3, rng);
    p.at("g.bz").setConstant(-50.0);
    Matrix h0(1, 3);
    h0 << 0.3, -0.2, 0.7;
    const Matrix h = gru_forward(oracle::random_matrix(1, 2, rng), p, "g", h0);
    EXPECT_LT((h - h0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gru, MatchesScalarRecurrence) {
    std::mt19937_64 rng(3);
    ModelParams p;
    add_gru_params(p, "g", 4, 5, rng);
    oracle::randomize(p, rng);
    const Matrix x = oracle::random_matrix(6, 4, rng);
    const Matrix h = gru_forward(x, p, "g");
    const auto ref = oracle::gru(oracle::to_mat(x), p, "g");
    for (std::size_t t = 0; t < ref.size(); ++t) {
        EXPECT_LT(max_abs_diff(oracle::to_mat(h)[t], ref[t]), 1e-12);
    }
}

TEST(BiLstm, ZeroWeightsGiveZeros) {
    std::mt19937_64 rng(4);
    ModelParams p;
    add_lstm_params(p, "l_fwd", 3, 2, rng);
    add_lstm_params(p, "l_bwd", 3, 2, rng);
    for (auto& [name, m] : p.entries()) m.setZero();
    const Matrix out = bilstm_forward(oracle::random_matrix(4, 3, rng), p, "l");
    EXPECT_EQ(out.cols(), 4);
    EXPECT_EQ(out.cwiseAbs().maxCoeff(), 0.0);
}

TEST(BiLstm, PalindromeWithSharedWeightsIsMirrored) {
    std::mt19937_64 rng(5);
    ModelParams fwd;
    add_lstm_params(fwd, "l_fwd", 3, 4, rng);
    oracle::randomize(fwd, rng);
    ModelParams p = fwd;
    for (const auto& [name, m] : fwd.entries()) p.add("l_bwd" + name.substr(5), m);
    Matrix x = oracle::random_matrix(5, 3, rng);
    x.row(3) = x.row(1);
    x.row(4) = x.row(0);
    const Matrix out = bilstm_forward(x, p, "l");
    for (Eigen::Index t = 0; t < 5; ++t) {
        EXPECT_LT((out.block(t, 0, 1, 4) - out.block(4 - t, 4, 1, 4)).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(BiLstm, MatchesScalarRecurrence) {
    std::mt19937_64 rng(6);
    ModelParams p;
    add_lstm_params(p, "l_fwd", 3, 4, rng);
    add_lstm_params(p, "l_bwd", 3, 4, rng);
    oracle::randomize(p, rng);
    const Matrix x = oracle::random_matrix(5, 3, rng);
    const auto out = oracle::to_mat(bilstm_forward(x, p, "l"));
    const auto f = oracle::lstm(oracle::to_mat(x), p, "l_fwd", false);
    const auto b = oracle::lstm(oracle::to_mat(x), p, "l_bwd", true);
    for (std::size_t t = 0; t < 5; ++t) {
        oracle::Vec expected = f[t];
        expected.insert(expected.end(), b[t].begin(), b[t].end());
        EXPECT_LT(max_abs_diff(out[t], expected), 1e-12);
    }
}

TEST(Conv1d, CenteredIdentityKernelCopiesInput) {
    std::mt19937_64 rng(7);
    const Matrix x = oracle::random_matrix(6, 1, rng);
    Matrix kernel = Matrix::Zero(3, 1);
    kernel(1, 0) = 1.0;
    const Matrix y = conv1d_forward(x, kernel, Matrix::Zero(1, 1), 3, Activation::linear());
    EXPECT_EQ(y, x);
}

TEST(Conv1d, OnesKernelBoundaryArithmetic) {
    const Matrix x = Matrix::Ones(5, 1);
    const Matrix y = conv1d_forward(x, Matrix::Ones(3, 1), Matrix::Zero(1, 1), 3, Activation::linear());
    Matrix expected(5, 1);
    expected << 2, 3, 3, 3, 2;
    EXPECT_EQ(y, expected);
}

TEST(Conv1d, MatchesSlidingDotProduct) {
    std::mt19937_64 rng(8);
    const Matrix x = oracle::random_matrix(7, 3, rng);
    const Matrix kernel = oracle::random_matrix(9, 4, rng);
    const Matrix bias = oracle::random_matrix(1, 4, rng);
    const Matrix y = conv1d_forward(x, kernel, bias, 3, Activation::leaky_relu(0.2));
    const auto ref = oracle::conv1d(oracle::to_mat(x), oracle::to_mat(kernel), oracle::row0(bias), 3, true, 0.2);
    for (std::size_t t = 0; t < ref.size(); ++t) EXPECT_LT(max_abs_diff(oracle::to_mat(y)[t], ref[t]), 1e-12);
}

TEST(Conv1d, EmptyInputIsShapeError) {
    EXPECT_THROW(conv1d_forward(Matrix(0, 1), Matrix::Ones(3, 1), Matrix::Zero(1, 1), 3, Activation::linear()),
                 ShapeError);
}

TEST(Generator, ZeroParamsPredictZero) {
    std::mt19937_64 rng(9);
    const auto cfg = tiny_generator();
    ModelParams p = init_generator(cfg, rng);
    for (auto& [name, m] : p.entries()) m.setZero();
    const auto out = generator_forward(oracle::random_matrix(3, 5, rng), p, cfg);
    ASSERT_EQ(out.size(), 1U);
    EXPECT_EQ(out[0], 0.0);
}

TEST(Generator, DeterministicAndMatchesLayerOracle) {
    std::mt19937_64 rng(10);
    for (std::size_t horizon : {1U, 2U, 5U}) {
        const auto cfg = tiny_generator(3, 5, horizon);
        ModelParams p = init_generator(cfg, rng);
        oracle::randomize(p, rng);
        const Matrix x = oracle::random_matrix(3, 5, rng);
        const auto a = generator_forward(x, p, cfg);
        const auto b = generator_forward(x, p, cfg);
        EXPECT_EQ(a, b);
        ASSERT_EQ(a.size(), horizon);
        EXPECT_LT(max_abs_diff(a, oracle::generator(oracle::to_mat(x), p, cfg.leaky_slope)), 1e-12);
    }
}

TEST(Generator, WrongWindowIsShapeError) {
    std::mt19937_64 rng(11);
    const auto cfg = tiny_generator();
    const ModelParams p = init_generator(cfg, rng);
    EXPECT_THROW(generator_forward(oracle::random_matrix(4, 5, rng), p, cfg), ShapeError);
    EXPECT_THROW(generator_forward(oracle::random_matrix(3, 6, rng), p, cfg), ShapeError);
}

TEST(Generator, LastDenseWidthMustEqualHorizon) {
    auto cfg = tiny_generator();
    cfg.dense_units = {5, 2};
    EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(Discriminator, ZeroParamsScoreZero) {
    std::mt19937_64 rng(12);
    const auto cfg = tiny_discriminator();
    ModelParams p = init_discriminator(cfg, rng);
    for (auto& [name, m] : p.entries()) m.setZero();
    EXPECT_EQ(discriminator_forward({0.1, 0.2, 0.3, 0.4}, p, cfg).score, 0.0);
}

TEST(Discriminator, MatchesLayerOracleAndIsDeterministic) {
    std::mt19937_64 rng(13);
    const auto cfg = tiny_discriminator(6);
    ModelParams p = init_discriminator(cfg, rng);
    oracle::randomize(p, rng);
    const std::vector<double> x = {0.3, -0.1, 0.8, 0.2, -0.5, 0.9};
    const auto a = discriminator_forward(x, p, cfg);
    const auto b = discriminator_forward(x, p, cfg);
    EXPECT_EQ(a.score, b.score);
    EXPECT_EQ(a.features, b.features);
    const auto ref = oracle::discriminator(x, p, cfg.kernel_size, cfg.leaky_slope);
    EXPECT_NEAR(a.score, ref.score, 1e-12);
    ASSERT_EQ(a.features.size(), 6U * 4U);
    EXPECT_LT(max_abs_diff(a.features, ref.conv3), 1e-12);
}

TEST(Discriminator, WrongLengthIsShapeError) {
    std::mt19937_64 rng(14);
    const auto cfg = tiny_discriminator(4);
    const ModelParams p = init_discriminator(cfg, rng);
    EXPECT_THROW(discriminator_forward({1.0, 2.0, 3.0}, p, cfg), ShapeError);
}

TEST(Grad, SumOfSquaresGivesTwiceParam) {
    std::mt19937_64 rng(15);
    ModelParams p;
    p.add("p", oracle::random_matrix(3, 2, rng));
    p.add("q", oracle::random_matrix(1, 4, rng));
    const auto g = grad([](const ParamVars& v) { return sum_all(square(v["p"])); }, p);
    EXPECT_LT((g.at("p") - 2.0 * p.at("p")).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(g.at("q").cwiseAbs().maxCoeff(), 0.0);
}

TEST(Grad, NanGradientNamesParameter) {
    ModelParams p;
    p.add("bad", Matrix::Zero(1, 1));
    try {
        grad([](const ParamVars& v) { return sum_all(mul(v["bad"], Var(Matrix::Constant(1, 1, NAN)))); }, p);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos);
    }
    ModelParams q;
    q.add("w", Matrix::Ones(1, 1));
    try {
        grad([](const ParamVars& v) { return sum_all(mul(v["w"], Var(Matrix::Constant(1, 1, INFINITY)))); }, q);
        FAIL() << "expected NumericError";
    } catch (const NumericError&) {
    }
}

TEST(Grad, LinearCriticInputGradientIsWeight) {
    Matrix w(3, 1);
    w << 0.5, -2.0, 1.25;
    Matrix x(2, 3);
    x << 1, 2, 3, -1, 0, 4;
    const Matrix g = input_grad([&](const Var& in) { return sum_all(matmul(in, Var(w))); }, x);
    for (Eigen::Index i = 0; i < 2; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) EXPECT_EQ(g(i, j), w(j, 0));
    }
}

TEST(Grad, EveryLayerMatchesFiniteDifferences) {
    std::mt19937_64 rng(16);
    ModelParams p;
    add_gru_params(p, "gru", 3, 4, rng);
    add_lstm_params(p, "lstm", 3, 3, rng);
    p.add("conv.kernel", Matrix(9, 2));
    p.add("conv.bias", Matrix(1, 2));
    p.add("dense.W", Matrix(4, 2));
    p.add("dense.b", Matrix(1, 2));
    oracle::randomize(p, rng);
    const Matrix x = oracle::random_matrix(5, 3, rng);
    const Matrix target = oracle::random_matrix(1, 2, rng);

    auto loss = [&](const ParamVars& v) {
        const auto steps = rows_as_steps(x);
        const Var h0(Matrix::Zero(1, 4));
        const Var gru_last = gru_sequence(steps, v, "gru", h0).back();
        const Var lstm_first = lstm_sequence(steps, v, "lstm", true).front();
        const Var conv = conv1d(Var(x), v["conv.kernel"], v["conv.bias"], 5, 3, Activation::leaky_relu(0.2));
        const Var d = dense(gru_last, v["dense.W"], v["dense.b"]);
        return add(add(sum_all(square(sub(d, Var(target)))), sum_all(tanh(conv))), sum_all(lstm_first));
    };
    const auto analytic = grad(loss, p);
    const auto numeric = oracle::finite_diff(
        [&](const ModelParams& q) {
            NoGradGuard ng;
            return loss(ParamVars(q, false)).item();
        },
        p);
    EXPECT_LT(oracle::max_rel_error(analytic, numeric), 1e-4);
}

TEST(Grad, ComposedGeneratorDiscriminatorMatchesFiniteDifferences) {
    std::mt19937_64 rng(17);
    const auto gcfg = tiny_generator(3, 5, 1);
    const auto dcfg = tiny_discriminator(4);
    ModelParams g = init_generator(gcfg, rng);
    ModelParams d = init_discriminator(dcfg, rng);
    oracle::randomize(g, rng);
    oracle::randomize(d, rng);
    ModelParams joint;
    for (const auto& [n, m] : g.entries()) joint.add("g." + n, m);
    for (const auto& [n, m] : d.entries()) joint.add("d." + n, m);
    const Matrix w0 = oracle::random_matrix(4, 5, rng), w1 = oracle::random_matrix(4, 5, rng),
                 w2 = oracle::random_matrix(4, 5, rng);
    const Matrix hist = oracle::random_matrix(4, 3, rng);

    const ParamVars gv(g, true);
    const ParamVars dv(d, true);
    auto composite = [&](const ParamVars& gvars, const ParamVars& dvars) {
        const Var pred = generator_forward({Var(w0), Var(w1), Var(w2)}, gvars, gcfg);
        const auto out = discriminator_forward(concat_cols(Var(hist), pred), dvars, dcfg);
        return add(mean_all(out.score), scale(sum_all(square(out.features)), 0.1));
    };
    const Var y = composite(gv, dv);
    std::vector<Var> leaves = gv.vars();
    leaves.insert(leaves.end(), dv.vars().begin(), dv.vars().end());
    const auto grads = nn::grad(y, leaves);
    ModelParams analytic;
    for (std::size_t i = 0; i < gv.names().size(); ++i) analytic.add("g." + gv.names()[i], grads[i].value());
    for (std::size_t i = 0; i < dv.names().size(); ++i)
        analytic.add("d." + dv.names()[i], grads[gv.names().size() + i].value());

    const auto numeric = oracle::finite_diff(
        [&](const ModelParams& q) {
            NoGradGuard ng;
            ModelParams gq, dq;
            for (const auto& [n, m] : q.entries()) (n[0] == 'g' ? gq : dq).add(n.substr(2), m);
            return composite(ParamVars(gq, false), ParamVars(dq, false)).item();
        },
        joint);
    EXPECT_LT(oracle::max_rel_error(analytic, numeric), 1e-4);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    ModelParams p;
    p.add("w", (Matrix(1, 4) << 1.0, -2.0, 0.5, 3.0).finished());
    LayerGrads g;
    g.add("w", (Matrix(1, 4) << 0.3, -4.0, 1e-3, 12.0).finished());
    AdamState state = make_adam_state(p);
    const ModelParams before = p;
    adam_step(p, g, state, 1, {0.01, 0.9, 0.999, 1e-8});
    for (Eigen::Index i = 0; i < 4; ++i) {
        const double delta = before.at("w")(0, i) - p.at("w")(0, i);
        EXPECT_NEAR(std::abs(delta), 0.01, 1e-6);
        EXPECT_EQ(delta > 0, g.at("w")(0, i) > 0);
    }
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
    ModelParams p;
    p.add("w", (Matrix(2, 2) << 1, 2, 3, 4).finished());
    const ModelParams before = p;
    AdamState state = make_adam_state(p);
    adam_step(p, p.zeros_like(), state, 1, {});
    EXPECT_TRUE(p == before);
}

TEST(Adam, RejectsStepZero) {
    ModelParams p;
    p.add("w", Matrix::Ones(1, 1));
    AdamState state = make_adam_state(p);
    EXPECT_THROW(adam_step(p, p.zeros_like(), state, 0, {}), ParameterError);
}

TEST(Adam, MatchesScalarReferenceOverFiveSteps) {
    std::mt19937_64 rng(18);
    ModelParams p;
    p.add("w", oracle::random_matrix(2, 3, rng));
    AdamState state = make_adam_state(p);
    std::vector<double> ref(p.at("w").data(), p.at("w").data() + 6), m(6, 0.0), v(6, 0.0);
    const AdamOptions opt{0.05, 0.9, 0.999, 1e-8};
    for (int t = 1; t <= 5; ++t) {
        LayerGrads g;
        g.add("w", oracle::random_matrix(2, 3, rng));
        for (int i = 0; i < 6; ++i) {
            const double gi = g.at("w").data()[i];
            m[i] = 0.9 * m[i] + 0.1 * gi;
            v[i] = 0.999 * v[i] + 0.001 * gi * gi;
            const double mh = m[i] / (1.0 - std::pow(0.9, t));
            const double vh = v[i] / (1.0 - std::pow(0.999, t));
            ref[i] -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
        }
        adam_step(p, g, state, t, opt);
    }
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(p.at("w").data()[i], ref[i], 1e-12);
}

TEST(Checkpoint, RoundTripIsExactAndBytesAreStable) {
    std::mt19937_64 rng(19);
    Checkpoint ck;
    ck.params = init_generator(tiny_generator(), rng);
    ck.metadata = {{"seed", 7}, {"note", "x"}};
    const std::string bytes = encode_checkpoint(ck);
    EXPECT_EQ(bytes.substr(0, 8), "SGANCKPT");
    const Checkpoint back = decode_checkpoint(bytes);
    EXPECT_TRUE(back.params == ck.params);
    EXPECT_EQ(back.metadata, ck.metadata);
    EXPECT_EQ(encode_checkpoint(back), bytes);
}

TEST(Checkpoint, RejectsGarbage) {
    EXPECT_THROW(decode_checkpoint("not a checkpoint"), FormatError);
    std::mt19937_64 rng(20);
    Checkpoint ck;
    ck.params = init_discriminator(tiny_discriminator(), rng);
    const std::string bytes = encode_checkpoint(ck);
    EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 8)), FormatError);
}
