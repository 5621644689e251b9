#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "agedist/label_codec.hpp"
#include "agedist/model.hpp"
#include "agedist/rng.hpp"

using namespace agedist;

namespace {

// Easy two-class task: the feature carries the age directly.
SampleSet separable_set(int n, int bins, std::uint64_t seed) {
    Rng rng(seed);
    SampleSet set;
    set.feature_dim = 2;
    set.bins = bins;
    for (int i = 0; i < n; ++i) {
        Sample s;
        s.subject_id = i;
        s.domain_id = 0;
        s.age = 1 + (i % 2) * (bins - 1);
        s.features = {static_cast<double>(s.age) / bins + rng.uniform(-0.01, 0.01),
                      1.0 - static_cast<double>(s.age) / bins + rng.uniform(-0.01, 0.01)};
        set.samples.push_back(std::move(s));
    }
    return set;
}

double loss_at_params(const MlpModel& model, const std::vector<double>& x,
                      const std::vector<double>& q, const LossSpec& spec) {
    const std::vector<double> p = softmax(forward(model, x));
    return loss_eval(spec, p, decode_argmax(q), q).value;
}

// Finite differences over every parameter of the model; independent of the
// backward pass.
double param_grad_max_rel_err(MlpModel model, const std::vector<double>& x,
                              const std::vector<double>& q, const LossSpec& spec) {
    Gradients analytic = Gradients::zeros_like(model);
    backward(model, x, q, spec, analytic);
    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (std::size_t i = 0; i < model.weights[l].size(); ++i) {
            const double orig = model.weights[l][i];
            model.weights[l][i] = orig + h;
            const double fp = loss_at_params(model, x, q, spec);
            model.weights[l][i] = orig - h;
            const double fm = loss_at_params(model, x, q, spec);
            model.weights[l][i] = orig;
            const double numeric = (fp - fm) / (2 * h);
            const double den = std::max(
                {std::abs(analytic.weights[l][i]), std::abs(numeric), 1e-6});
            worst = std::max(worst, std::abs(analytic.weights[l][i] - numeric) / den);
        }
        for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
            const double orig = model.biases[l][i];
            model.biases[l][i] = orig + h;
            const double fp = loss_at_params(model, x, q, spec);
            model.biases[l][i] = orig - h;
            const double fm = loss_at_params(model, x, q, spec);
            model.biases[l][i] = orig;
            const double numeric = (fp - fm) / (2 * h);
            const double den =
                std::max({std::abs(analytic.biases[l][i]), std::abs(numeric), 1e-6});
            worst = std::max(worst, std::abs(analytic.biases[l][i] - numeric) / den);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("zero-weight model yields uniform predictions") {
    MlpModel model;
    model.layer_dims = {3, 4};
    model.weights = {std::vector<double>(12, 0.0)};
    model.biases = {std::vector<double>(4, 0.0)};
    const std::vector<double> logits = forward(model, {0.3, -1.0, 2.0});
    for (double z : logits) CHECK(z == 0.0);
    for (double p : softmax(logits)) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("identity layer passes its input through") {
    MlpModel model;
    model.layer_dims = {3, 3};
    model.weights = {{1, 0, 0, 0, 1, 0, 0, 0, 1}};
    model.biases = {std::vector<double>(3, 0.0)};
    const std::vector<double> logits = forward(model, {1.0, 0.0, 0.0});
    CHECK(logits == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("forward validates the input dimension") {
    const MlpModel model = init_model({4, 8, 5}, Activation::ReLU, 1);
    CHECK_THROWS_AS(forward(model, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("seeded init and forward are bit-deterministic") {
    const MlpModel a = init_model({6, 10, 7}, Activation::ReLU, 99);
    const MlpModel b = init_model({6, 10, 7}, Activation::ReLU, 99);
    CHECK(a.weights == b.weights);
    CHECK(a.biases == b.biases);
    const std::vector<double> x = {0.1, -0.2, 0.3, 0.4, -0.5, 0.6};
    CHECK(forward(a, x) == forward(b, x));
    const MlpModel c = init_model({6, 10, 7}, Activation::ReLU, 100);
    CHECK(a.weights != c.weights);
}

TEST_CASE("gradients vanish when the target equals the prediction") {
    const MlpModel model = init_model({3, 5, 4}, Activation::Tanh, 2);
    const std::vector<double> x = {0.5, -0.3, 0.8};
    const std::vector<double> q = softmax(forward(model, x));
    for (LossKind kind : {LossKind::KL, LossKind::DC}) {
        LossSpec spec;
        spec.kind = kind;
        Gradients grads = Gradients::zeros_like(model);
        backward(model, x, q, spec, grads);
        for (const auto& layer : grads.weights) {
            for (double g : layer) CHECK(std::abs(g) <= 1e-10);
        }
    }
}

TEST_CASE("backward matches finite differences over all parameters") {
    Rng rng(55);
    const std::vector<double> x = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    for (Activation act : {Activation::ReLU, Activation::Tanh}) {
        const MlpModel model = init_model({2, 2, 3}, act, 7);
        const std::vector<double> q = encode_gaussian(2, 3, 2.0);
        for (LossKind kind :
             {LossKind::CE, LossKind::KL, LossKind::CE_MV, LossKind::DC}) {
            LossSpec spec;
            spec.kind = kind;
            spec.alpha = 0.1;
            CHECK(param_grad_max_rel_err(model, x, q, spec) < 1e-4);
        }
    }
}

TEST_CASE("cemv backward degenerates to ce backward at zero lambdas") {
    const MlpModel model = init_model({3, 6, 5}, Activation::ReLU, 21);
    const std::vector<double> x = {0.2, 0.4, -0.6};
    const std::vector<double> q = encode_gaussian(3, 5, 2.0);
    LossSpec ce;
    ce.kind = LossKind::CE;
    LossSpec cemv;
    cemv.kind = LossKind::CE_MV;
    cemv.lambda1 = cemv.lambda2 = 0.0;
    Gradients ga = Gradients::zeros_like(model);
    Gradients gb = Gradients::zeros_like(model);
    const double va = backward(model, x, q, ce, ga);
    const double vb = backward(model, x, q, cemv, gb);
    CHECK(va == doctest::Approx(vb).epsilon(1e-15));
    for (std::size_t l = 0; l < ga.weights.size(); ++l) {
        for (std::size_t i = 0; i < ga.weights[l].size(); ++i) {
            CHECK(ga.weights[l][i] == doctest::Approx(gb.weights[l][i]).epsilon(1e-15));
        }
    }
}

TEST_CASE("learning rate schedule hits both endpoints geometrically") {
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.lr_start = 0.001;
    cfg.lr_end = 0.00001;
    CHECK(lr_at(0, cfg) == doctest::Approx(0.001).epsilon(1e-12));
    CHECK(lr_at(29, cfg) == doctest::Approx(0.00001).epsilon(1e-12));
    CHECK(std::sqrt(lr_at(14, cfg) * lr_at(15, cfg)) ==
          doctest::Approx(1e-4).epsilon(1e-10));
    for (int e = 0; e + 1 < cfg.epochs; ++e) {
        CHECK(lr_at(e, cfg) > lr_at(e + 1, cfg));
    }
    CHECK_THROWS_AS(lr_at(30, cfg), std::invalid_argument);
    CHECK_THROWS_AS(lr_at(-1, cfg), std::invalid_argument);

    cfg.epochs = 1;
    CHECK(lr_at(0, cfg) == 0.001);
}

TEST_CASE("training descends on an easy separable task") {
    const SampleSet data = separable_set(50, 2, 3);
    TrainConfig cfg;
    cfg.loss.kind = LossKind::DC;
    cfg.loss.alpha = 0.1;
    cfg.epochs = 10;
    cfg.batch_size = 10;
    cfg.hidden_dims = {8};
    cfg.seed = 4;
    const auto [model, trace] = train(data, cfg);
    CHECK(trace.epoch_mean_loss.size() == 10);
    CHECK(trace.epoch_lr.size() == 10);
    CHECK(trace.epoch_mean_loss.back() < trace.epoch_mean_loss.front());
    for (int e = 0; e < cfg.epochs; ++e) {
        CHECK(trace.epoch_lr[e] == lr_at(e, cfg));
    }
}

TEST_CASE("training is bit-reproducible given the seed") {
    const SampleSet data = separable_set(40, 4, 9);
    TrainConfig cfg;
    cfg.loss.kind = LossKind::KL;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    cfg.hidden_dims = {6};
    cfg.seed = 77;
    const auto [m1, t1] = train(data, cfg);
    const auto [m2, t2] = train(data, cfg);
    CHECK(m1.weights == m2.weights);
    CHECK(m1.biases == m2.biases);
    CHECK(t1.epoch_mean_loss == t2.epoch_mean_loss);
    cfg.seed = 78;
    const auto [m3, t3] = train(data, cfg);
    CHECK(m1.weights != m3.weights);
}

TEST_CASE("epoch-mean loss does not increase early on an easy task") {
    for (LossKind kind : {LossKind::CE, LossKind::KL, LossKind::CE_MV, LossKind::DC}) {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            const SampleSet data = separable_set(120, 3, seed);
            TrainConfig cfg;
            cfg.loss.kind = kind;
            cfg.loss.alpha = 0.1;
            cfg.epochs = 5;
            cfg.batch_size = 20;
            cfg.hidden_dims = {8};
            cfg.seed = seed;
            const auto [model, trace] = train(data, cfg);
            for (int e = 0; e + 1 < 5; ++e) {
                CHECK(trace.epoch_mean_loss[e + 1] <=
                      trace.epoch_mean_loss[e] + 1e-9);
            }
        }
    }
}

TEST_CASE("training aborts with context on non-finite loss") {
    SampleSet data = separable_set(8, 2, 5);
    data.samples[0].features[0] = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.hidden_dims = {4};
    cfg.activation = Activation::Tanh;  // ReLU would mask the NaN
    CHECK_THROWS_WITH_AS(train(data, cfg), doctest::Contains("epoch 0"),
                         TrainingDiverged);
}

TEST_CASE("train validates labels and dimensions") {
    SampleSet data = separable_set(10, 4, 6);
    data.samples[3].age = 9;
    TrainConfig cfg;
    CHECK_THROWS_AS(train(data, cfg), std::invalid_argument);
    CHECK_THROWS_AS(train(SampleSet{}, cfg), std::invalid_argument);
}

TEST_CASE("checkpoints round trip exactly") {
    const SampleSet data = separable_set(30, 3, 12);
    TrainConfig cfg;
    cfg.loss.kind = LossKind::CE_MV;
    cfg.epochs = 3;
    cfg.batch_size = 10;
    cfg.hidden_dims = {5, 4};
    cfg.activation = Activation::Tanh;
    cfg.seed = 31;
    const auto [model, trace] = train(data, cfg);

    const std::string path =
        (std::filesystem::temp_directory_path() / "agedist_test_model.ckpt").string();
    save_checkpoint(path, model, cfg, {"note = round trip"});
    const auto [loaded, loaded_cfg] = load_checkpoint(path);

    CHECK(loaded.layer_dims == model.layer_dims);
    CHECK(loaded.weights == model.weights);
    CHECK(loaded.biases == model.biases);
    CHECK(loaded.activation == model.activation);
    CHECK(loaded_cfg.loss.kind == cfg.loss.kind);
    CHECK(loaded_cfg.epochs == cfg.epochs);
    CHECK(loaded_cfg.momentum == cfg.momentum);
    CHECK(loaded_cfg.seed == cfg.seed);
    CHECK(loaded_cfg.hidden_dims == cfg.hidden_dims);
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader rejects corrupted files") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path();

    const fs::path bad_version = dir / "agedist_bad_version.ckpt";
    {
        std::FILE* f = std::fopen(bad_version.string().c_str(), "w");
        std::fputs("agedist-checkpoint,v9\nend\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_checkpoint(bad_version.string()), std::runtime_error);

    const fs::path truncated = dir / "agedist_truncated.ckpt";
    {
        std::FILE* f = std::fopen(truncated.string().c_str(), "w");
        std::fputs("agedist-checkpoint,v1\nloss,dc\ndims,2,3\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_checkpoint(truncated.string()), std::runtime_error);

    CHECK_THROWS_AS(load_checkpoint((dir / "agedist_missing.ckpt").string()),
                    std::runtime_error);
    fs::remove(bad_version);
    fs::remove(truncated);
}
