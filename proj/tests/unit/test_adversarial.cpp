#include "stockgan/adversarial.hpp"
#include "stockgan/errors.hpp"
#include "stockgan/synthetic.hpp"

#include "../support/adversarial_fixtures.hpp"
#include "../support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace stockgan;
using nn::Var;

namespace {

Var column(const std::vector<double>& v) {
    Matrix m(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
    return Var(m);
}

double oracle_sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

// Gradient-norm penalty of a tiny critic from finite-difference input gradients.
double penalty_oracle(const fixture::TinyModels& t, const Matrix& points, double lambda, double target) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const Matrix row = points.row(i);
        const Matrix g = oracle::finite_diff_input(
            [&](const Matrix& x) { return oracle::discriminator(oracle::row0(x), t.d_params, t.d.kernel_size, t.d.leaky_slope).score; },
            row);
        total += lambda * (g.norm() - target) * (g.norm() - target);
    }
    return total / static_cast<double>(points.rows());
}

struct SineSplit {
    Normalizer normalizer;
    SegmentSet train;
    SegmentSet test;
};

SineSplit sine_split(std::size_t bars, std::size_t window = 3, std::size_t horizon = 1) {
    SineFixtureParams p;
    p.bars = bars;
    const auto fm = build_feature_matrix(make_sine_series(p));
    const auto [train, test] = split_rows(fm, 0.7);
    SineSplit s;
    s.normalizer = fit_normalizer(train.values);
    s.train = make_segments(with_values(train, normalize(train.values, s.normalizer)), window, horizon);
    s.test = make_segments(with_values(test, normalize(test.values, s.normalizer)), window, horizon);
    return s;
}

TrainConfig tiny_train_config(Objective objective, std::size_t epochs) {
    TrainConfig cfg = TrainConfig::preset(objective);
    cfg.arch.gru_units = {8, 4};
    cfg.arch.generator_dense = 8;
    cfg.arch.conv_channels = {4, 4, 4};
    cfg.arch.discriminator_dense = 8;
    cfg.arch.lstm_units = 6;
    cfg.epochs = epochs;
    cfg.batch_size = 16;
    cfg.seed = 7;
    return cfg;
}

} // namespace

// ---- basic GAN / Wasserstein ----

TEST(BasicGan, ZeroScoresGiveTwoLnTwo) {
    const auto l = basic_gan_losses(column({0, 0, 0}), column({0, 0}));
    EXPECT_NEAR(l.d_loss.item(), 1.386294, 1e-6);
    EXPECT_NEAR(l.g_loss.item(), std::log(2.0), 1e-12);
}

TEST(BasicGan, PerfectDiscriminatorLimit) {
    const auto l = basic_gan_losses(column({40, 40}), column({-40, -40}));
    EXPECT_LT(l.d_loss.item(), 1e-12);
}

TEST(BasicGan, RandomBatchesMatchFormula) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> real(7), fake(5);
        for (auto& v : real) v = n(rng);
        for (auto& v : fake) v = n(rng);
        double lr = 0.0, lf = 0.0, lg = 0.0;
        for (double s : real) lr += std::log(std::max(oracle_sigmoid(s), 1e-12));
        for (double s : fake) {
            lf += std::log(std::max(1.0 - oracle_sigmoid(s), 1e-12));
            lg += std::log(std::max(oracle_sigmoid(s), 1e-12));
        }
        const double d = -lr / 7.0 - lf / 5.0;
        const double g = -lg / 5.0;
        const auto l = basic_gan_losses(column(real), column(fake));
        EXPECT_NEAR(l.d_loss.item(), d, 1e-12);
        EXPECT_NEAR(l.g_loss.item(), g, 1e-12);
    }
}

TEST(Wasserstein, Examples) {
    EXPECT_EQ(wasserstein_core(column({1, 2, 3}), column({1, 2, 3})).item(), 0.0);
    EXPECT_EQ(wasserstein_core(column({1, 1}), column({0, 0})).item(), -1.0);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> a(9), b(9);
        for (auto& v : a) v = n(rng);
        for (auto& v : b) v = n(rng);
        const double expected = std::accumulate(b.begin(), b.end(), 0.0) / 9.0 - std::accumulate(a.begin(), a.end(), 0.0) / 9.0;
        EXPECT_NEAR(wasserstein_core(column(a), column(b)).item(), expected, 1e-12);
    }
}

// ---- penalties ----

TEST(Penalty, LinearCriticClosedForm) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix w = oracle::random_matrix(1, 4, rng);
        const auto d = fixture::linear_critic(w, 0.3);
        const Matrix real = oracle::random_matrix(6, 4, rng, 3.0);
        const Matrix fake = oracle::random_matrix(6, 4, rng, 3.0);
        const double norm = w.norm();
        EXPECT_NEAR(gp_wgan(d, real, fake, 10.0, rng).item(), 10.0 * (norm - 1.0) * (norm - 1.0), 1e-10);
        EXPECT_NEAR(dragan_penalty(d, real, 10.0, 1.0, 10.0, rng).item(), 10.0 * (norm - 1.0) * (norm - 1.0), 1e-10);
        EXPECT_NEAR(dragan_penalty(d, real, 10.0, 2.5, 10.0, rng, NoiseScale::Literal).item(),
                    10.0 * (norm - 2.5) * (norm - 2.5), 1e-10);
    }
}

TEST(Penalty, UnitSlopeAndConstantCritic) {
    std::mt19937_64 rng(6);
    Matrix w(1, 4);
    w << 0.6, 0.0, -0.8, 0.0;
    const Matrix real = oracle::random_matrix(5, 4, rng);
    const Matrix fake = oracle::random_matrix(5, 4, rng);
    EXPECT_NEAR(gp_wgan(fixture::linear_critic(w, 0.0), real, fake, 10.0, rng).item(), 0.0, 1e-12);
    EXPECT_NEAR(dragan_penalty(fixture::linear_critic(w, 0.0), real, 10.0, 1.0, 10.0, rng).item(), 0.0, 1e-12);
    const auto flat = fixture::linear_critic(Matrix::Zero(1, 4), 2.0);
    EXPECT_DOUBLE_EQ(gp_wgan(flat, real, fake, 10.0, rng).item(), 10.0);
    EXPECT_DOUBLE_EQ(dragan_penalty(flat, real, 10.0, 1.0, 10.0, rng).item(), 10.0);
}

TEST(Penalty, DraganWithoutNoiseMatchesFiniteDifferenceOracle) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto t = fixture::tiny_models(seed);
        const nn::ParamVars dv(t.d_params, false);
        const Matrix real = real_inputs(t.batch);
        std::mt19937_64 rng(0);
        const double got = dragan_penalty(fixture::critic(dv, t.d), real, 10.0, 1.0, 0.0, rng).item();
        const double want = penalty_oracle(t, real, 10.0, 1.0);
        EXPECT_LT(std::abs(got - want) / std::max(1e-6, std::abs(want)), 1e-4);
    }
}

TEST(Penalty, WganGpFixedEpsMatchesFiniteDifferenceOracle) {
    const auto t = fixture::tiny_models(9);
    const nn::ParamVars dv(t.d_params, false);
    const Matrix real = real_inputs(t.batch);
    const Matrix fake = fake_inputs(t.batch, Var(fixture::generator_prediction(t))).value();
    std::vector<double> eps{0.1, 0.5, 0.9, 0.3, 0.7, 0.0};
    Matrix points = real;
    for (Eigen::Index i = 0; i < real.rows(); ++i) points.row(i) = eps[static_cast<std::size_t>(i)] * real.row(i) + (1 - eps[static_cast<std::size_t>(i)]) * fake.row(i);
    const double got = gp_wgan(fixture::critic(dv, t.d), real, fake, eps, 10.0).item();
    const double want = penalty_oracle(t, points, 10.0, 1.0);
    EXPECT_LT(std::abs(got - want) / std::max(1e-6, std::abs(want)), 1e-4);
}

TEST(Penalty, PermutationInvariantWithoutNoise) {
    const auto t = fixture::tiny_models(12);
    const nn::ParamVars dv(t.d_params, false);
    const Matrix real = real_inputs(t.batch);
    Matrix reversed = real.colwise().reverse();
    std::mt19937_64 rng(0);
    const auto d = fixture::critic(dv, t.d);
    EXPECT_NEAR(dragan_penalty(d, real, 10.0, 1.0, 0.0, rng).item(), dragan_penalty(d, reversed, 10.0, 1.0, 0.0, rng).item(), 1e-12);
}

TEST(Penalty, NoiseSigmaFollowsMode) {
    Matrix real(2, 2);
    real << 0, 2, 0, 2;
    EXPECT_DOUBLE_EQ(dragan_noise_sigma(real, 4.0, NoiseScale::BatchStd), 2.0);
    EXPECT_DOUBLE_EQ(dragan_noise_sigma(real, 4.0, NoiseScale::Literal), 2.0);
    EXPECT_DOUBLE_EQ(dragan_noise_sigma(real, 9.0, NoiseScale::BatchStd), 3.0);
    EXPECT_EQ(dragan_noise_sigma(real, 0.0, NoiseScale::BatchStd), 0.0);
    EXPECT_THROW(dragan_noise_sigma(real, -1.0, NoiseScale::BatchStd), ParameterError);
}

// ---- feature matching ----

TEST(FeatureMatching, Examples) {
    Matrix a(2, 2);
    a << 1, 0, 1, 0;
    EXPECT_EQ(feature_matching(Var(a), Var(a), 1.0).item(), 0.0);
    EXPECT_DOUBLE_EQ(feature_matching(Var(a), Var(Matrix::Zero(3, 2)), 1.0).item(), 1.0);
    EXPECT_THROW(feature_matching(Var(a), Var(Matrix::Zero(2, 3)), 1.0), ShapeError);
}

TEST(FeatureMatching, RandomBatchesMatchFormula) {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 100; ++rep) {
        const Matrix r = oracle::random_matrix(5, 7, rng);
        const Matrix f = oracle::random_matrix(4, 7, rng);
        double expected = 0.0;
        for (Eigen::Index j = 0; j < 7; ++j) {
            double mr = 0.0, mf = 0.0;
            for (Eigen::Index i = 0; i < 5; ++i) mr += r(i, j);
            for (Eigen::Index i = 0; i < 4; ++i) mf += f(i, j);
            expected += (mr / 5.0 - mf / 4.0) * (mr / 5.0 - mf / 4.0);
        }
        EXPECT_NEAR(feature_matching(Var(r), Var(f), 0.7).item(), 0.7 * expected, 1e-12);
    }
}

// ---- composite costs ----

TEST(DiscriminatorCost, VanishesForPerfectGeneratorAndUnitLinearCritic) {
    const auto t = fixture::tiny_models(21);
    Matrix w = Matrix::Zero(1, 4);
    w(0, 0) = 1.0;
    const Forecaster perfect = [&](const std::vector<Var>&) { return Var(t.batch.target); };
    std::mt19937_64 rng(1);
    EXPECT_NEAR(discriminator_cost(fixture::linear_critic(w, 0.0), perfect, t.batch, {10.0, 1.0, 10.0}, rng).item(), 0.0, 1e-12);
}

TEST(DiscriminatorCost, TermIsolationAndTermSum) {
    const auto t = fixture::tiny_models(22);
    const nn::ParamVars dv(t.d_params, false);
    const nn::ParamVars gv(t.g_params, false);
    const auto d = fixture::critic(dv, t.d);
    const auto g = fixture::forecaster(gv, t.g);
    const Matrix real = real_inputs(t.batch);
    const Matrix pred = fixture::generator_prediction(t);
    double real_mean = 0.0, fake_mean = 0.0;
    for (Eigen::Index i = 0; i < real.rows(); ++i) {
        std::vector<double> fake = oracle::row0(real.row(i));
        fake.back() = pred(i, 0);
        real_mean += oracle::discriminator(oracle::row0(real.row(i)), t.d_params, 3, 0.2).score;
        fake_mean += oracle::discriminator(fake, t.d_params, 3, 0.2).score;
    }
    const double core = (fake_mean - real_mean) / static_cast<double>(real.rows());
    std::mt19937_64 rng(1);
    EXPECT_NEAR(discriminator_cost(d, g, t.batch, {0.0, 1.0, 10.0}, rng).item(), core, 1e-10);
    const double cost = discriminator_cost(d, g, t.batch, {10.0, 1.0, 0.0}, rng).item();
    EXPECT_NEAR(cost, core + penalty_oracle(t, real, 10.0, 1.0), 1e-4 * std::abs(cost));
    EXPECT_EQ(discriminator_cost(d, g, t.batch, {0.0, 1.0, 10.0}, rng).item(),
              wasserstein_core(d(Var(real)).score, d(fake_inputs(t.batch, Var(pred))).score).item());
}

TEST(GeneratorCost, TermIsolation) {
    const auto t = fixture::tiny_models(23);
    const nn::ParamVars dv(t.d_params, false);
    const nn::ParamVars gv(t.g_params, false);
    const auto d = fixture::critic(dv, t.d);
    const auto g = fixture::forecaster(gv, t.g);
    const Matrix pred = fixture::generator_prediction(t);
    double fake_mean = 0.0;
    std::vector<double> real_feat_mean, fake_feat_mean;
    const Matrix real = real_inputs(t.batch);
    for (Eigen::Index i = 0; i < real.rows(); ++i) {
        std::vector<double> fake = oracle::row0(real.row(i));
        fake.back() = pred(i, 0);
        const auto rf = oracle::discriminator(oracle::row0(real.row(i)), t.d_params, 3, 0.2);
        const auto ff = oracle::discriminator(fake, t.d_params, 3, 0.2);
        fake_mean += ff.score;
        if (real_feat_mean.empty()) {
            real_feat_mean.assign(rf.conv3.size(), 0.0);
            fake_feat_mean.assign(ff.conv3.size(), 0.0);
        }
        for (std::size_t j = 0; j < rf.conv3.size(); ++j) {
            real_feat_mean[j] += rf.conv3[j] / static_cast<double>(real.rows());
            fake_feat_mean[j] += ff.conv3[j] / static_cast<double>(real.rows());
        }
    }
    fake_mean /= static_cast<double>(real.rows());
    double fm = 0.0;
    for (std::size_t j = 0; j < real_feat_mean.size(); ++j) fm += (real_feat_mean[j] - fake_feat_mean[j]) * (real_feat_mean[j] - fake_feat_mean[j]);
    EXPECT_NEAR(generator_cost(d, g, t.batch, 0.0).item(), -fake_mean, 1e-10);
    EXPECT_NEAR(generator_cost(d, g, t.batch, 2.0).item(), -fake_mean + 2.0 * fm, 1e-10);
    EXPECT_EQ(generator_cost(d, g, t.batch, 0.0).item(), -nn::mean_all(d(fake_inputs(t.batch, Var(pred))).score).item());
}

TEST(GeneratorCost, PerfectGeneratorLeavesOnlyRealScore) {
    const auto t = fixture::tiny_models(24);
    const nn::ParamVars dv(t.d_params, false);
    const auto d = fixture::critic(dv, t.d);
    const Forecaster perfect = [&](const std::vector<Var>&) { return Var(t.batch.target); };
    const double real_mean = nn::mean_all(d(Var(real_inputs(t.batch))).score).item();
    EXPECT_NEAR(generator_cost(d, perfect, t.batch, 1.0).item(), -real_mean, 1e-12);
}

TEST(CostGradients, MatchFiniteDifferences) {
    for (std::uint64_t seed : {31u, 32u}) {
        for (const auto& check : fixture::cost_gradient_checks(seed)) {
            EXPECT_LT(check.max_rel_error, 1e-4) << check.name << " seed " << seed;
        }
    }
}

// ---- config ----

TEST(TrainConfig, PresetsAndValidation) {
    EXPECT_EQ(TrainConfig::preset(Objective::WganGp).d_steps_per_g_step, 5u);
    EXPECT_EQ(TrainConfig::preset(Objective::DraganFm).d_steps_per_g_step, 1u);
    const TrainConfig def;
    EXPECT_EQ(def.lambda1, 10.0);
    EXPECT_EQ(def.lambda2, 1.0);
    EXPECT_EQ(def.k, 1.0);
    EXPECT_EQ(def.c, 10.0);
    EXPECT_EQ(def.lr, 1e-4);
    EXPECT_EQ(def.batch_size, 64u);
    EXPECT_EQ(def.epochs, 200u);
    TrainConfig bad;
    bad.batch_size = 1;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = TrainConfig{};
    bad.k = 0.0;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = TrainConfig{};
    bad.c = -1.0;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Objective, NamesRoundTrip) {
    for (auto o : all_objectives()) EXPECT_EQ(parse_objective(to_string(o)), o);
    EXPECT_THROW(parse_objective("gan"), ConfigError);
}

// ---- training ----

TEST(Train, ZeroEpochsReturnsInitialModel) {
    const auto data = sine_split(200);
    const auto cfg = tiny_train_config(Objective::DraganFm, 0);
    const auto model = train(data.train, cfg, data.normalizer);
    EXPECT_TRUE(model.history.empty());
    EXPECT_EQ(model.params, initial_model(data.train, cfg, data.normalizer).params);
}

TEST(Train, DeterministicForFixedSeed) {
    const auto data = sine_split(200);
    for (auto o : all_objectives()) {
        const auto cfg = tiny_train_config(o, 2);
        const auto a = train(data.train, cfg, data.normalizer);
        const auto b = train(data.train, cfg, data.normalizer);
        EXPECT_EQ(a.params, b.params) << to_string(o);
        ASSERT_EQ(a.history.size(), 2u);
        EXPECT_EQ(a.history[1].g_loss, b.history[1].g_loss);
        if (o == Objective::Lstm) EXPECT_EQ(a.history[0].d_loss, 0.0);
    }
    auto other = tiny_train_config(Objective::DraganFm, 1);
    const auto a = train(data.train, other, data.normalizer);
    other.seed = 8;
    EXPECT_FALSE(a.params == train(data.train, other, data.normalizer).params);
}

TEST(Train, ReducesTrainRmseOnSineFixture) {
    const auto data = sine_split(400);
    auto cfg = tiny_train_config(Objective::DraganFm, 25);
    cfg.lr = 1e-3;
    const auto before = initial_model(data.train, cfg, data.normalizer);
    const auto model = train(data.train, cfg, data.normalizer);
    const Matrix p0 = predict(before, data.train);
    double ss = 0.0;
    for (std::size_t i = 0; i < data.train.size(); ++i) {
        const double diff = denormalize_close(p0(static_cast<Eigen::Index>(i), 0), data.normalizer) -
                            denormalize_close(data.train.segments[i].target[0], data.normalizer);
        ss += diff * diff;
    }
    const double initial_rmse = std::sqrt(ss / static_cast<double>(data.train.size()));
    EXPECT_LT(model.history.back().train_rmse, initial_rmse);
}

TEST(Train, NonFiniteInputAbortsWithDiagnostic) {
    auto data = sine_split(200);
    data.train.segments[5].inputs(0, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
        train(data.train, tiny_train_config(Objective::Lstm, 1), data.normalizer);
        FAIL() << "expected TrainingError";
    } catch (const TrainingError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("epoch 1"), std::string::npos);
        EXPECT_NE(what.find("batch"), std::string::npos);
        EXPECT_NE(what.find("g_loss"), std::string::npos);
        EXPECT_EQ(e.exit_code(), 4);
    }
}

TEST(Predict, MatchesSingleSegmentForward) {
    const auto data = sine_split(200);
    const auto model = initial_model(data.train, tiny_train_config(Objective::DraganFm, 0), data.normalizer);
    const Matrix p = predict(model, data.test);
    ASSERT_EQ(static_cast<std::size_t>(p.rows()), data.test.size());
    for (std::size_t i = 0; i < data.test.size(); i += 7) {
        const auto one = nn::generator_forward(data.test.segments[i].inputs, model.params, model.generator_config());
        EXPECT_NEAR(p(static_cast<Eigen::Index>(i), 0), one[0], 1e-12);
    }
    EXPECT_TRUE(p == predict(model, data.test));
}

TEST(Predict, ZeroParamsGiveZeros) {
    const auto data = sine_split(200);
    auto model = initial_model(data.train, tiny_train_config(Objective::Lstm, 0), data.normalizer);
    for (auto& [name, m] : model.params.entries()) m.setZero();
    EXPECT_EQ(predict(model, data.test).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Predict, MultiHorizonShapes) {
    for (std::size_t h : {1u, 2u, 3u, 5u}) {
        const auto data = sine_split(200, 10, h);
        const auto model = initial_model(data.train, tiny_train_config(Objective::DraganFm, 0), data.normalizer);
        const Matrix p = predict(model, data.test);
        EXPECT_EQ(static_cast<std::size_t>(p.cols()), h);
        EXPECT_EQ(tiny_train_config(Objective::DraganFm, 0).arch.discriminator(10, h).input_length, 10 + h);
    }
}

TEST(ModelCheckpoint, RoundTripAndHistoryCsv) {
    const auto data = sine_split(200);
    auto cfg = tiny_train_config(Objective::WganGp, 2);
    cfg.noise_scale = NoiseScale::Literal;
    const auto model = train(data.train, cfg, data.normalizer);
    const auto back = from_checkpoint(nn::decode_checkpoint(nn::encode_checkpoint(to_checkpoint(model))));
    EXPECT_EQ(back.objective, model.objective);
    EXPECT_EQ(back.params, model.params);
    EXPECT_EQ(back.config.d_steps_per_g_step, 5u);
    EXPECT_EQ(back.config.noise_scale, NoiseScale::Literal);
    EXPECT_EQ(back.normalizer.per_feature_max, model.normalizer.per_feature_max);
    ASSERT_EQ(back.history.size(), 2u);
    EXPECT_EQ(back.history[1].train_rmse, model.history[1].train_rmse);
    EXPECT_TRUE(predict(back, data.test) == predict(model, data.test));
    std::ostringstream csv;
    write_history_csv(csv, model.history);
    const std::string text = csv.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "epoch,d_loss,g_loss,train_rmse");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}
