// Minimal feedforward network and deterministic SGD-momentum trainer.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "agedist/datagen.hpp"
#include "agedist/losses.hpp"

namespace agedist {

enum class Activation { ReLU, Tanh };

std::string activation_name(Activation act);
Activation activation_from_name(const std::string& name);

struct MlpModel {
    // layer_dims = {input dim, hidden..., output bins}
    std::vector<int> layer_dims;
    // weights[l] is row-major (layer_dims[l+1] x layer_dims[l]); biases[l]
    // has layer_dims[l+1] entries.
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    Activation activation = Activation::ReLU;

    int input_dim() const { return layer_dims.front(); }
    int output_bins() const { return layer_dims.back(); }
    std::size_t layer_count() const { return weights.size(); }
};

struct TrainConfig {
    LossSpec loss;
    int epochs = 30;
    int batch_size = 80;
    double momentum = 0.9;
    double weight_decay = 0.0005;
    double lr_start = 0.001;
    double lr_end = 0.00001;
    std::uint64_t seed = 1;
    std::vector<int> hidden_dims = {64, 64};
    Activation activation = Activation::ReLU;
    double sigma = 2.0;  // width of the Gaussian target encoding

    void validate() const;
};

struct TrainTrace {
    std::vector<double> epoch_mean_loss;
    std::vector<double> epoch_lr;
};

// Parameter gradients with the same shapes as the model parameters.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static Gradients zeros_like(const MlpModel& model);
    void scale(double factor);
};

// He-style scaled Gaussian init (std sqrt(2 / fan_in)), biases zero.
MlpModel init_model(const std::vector<int>& layer_dims, Activation act,
                    std::uint64_t seed);

std::vector<double> forward(const MlpModel& model, const std::vector<double>& x);

// Chain rule seeded by the loss module's grad_z. Returns the loss value and
// accumulates parameter gradients into `out` (caller zeroes it).
double backward(const MlpModel& model, const std::vector<double>& x,
                const std::vector<double>& q, const LossSpec& spec, Gradients& out);

// Geometric interpolation between the endpoint learning rates:
// lr(e) = lr_start * (lr_end / lr_start)^(e / (epochs - 1)).
double lr_at(int epoch, const TrainConfig& cfg);

// Deterministic single-threaded SGD with momentum and coupled weight decay:
// v <- m v - lr (g + wd w); w <- w + v. The per-batch loss is the mean over
// the batch; the last batch of an epoch may be smaller. Throws
// std::runtime_error naming the epoch/batch if the loss turns non-finite.
std::pair<MlpModel, TrainTrace> train(const SampleSet& data, const TrainConfig& cfg);

// Argmax-decoded ages for every sample in the set.
std::vector<int> predict_ages(const MlpModel& model, const SampleSet& data);

// Thrown when training hits a non-finite loss; carries epoch/batch context.
struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Versioned textual checkpoint carrying dims, activation, parameters (17
// significant digits, exact double round-trip) and the TrainConfig used.
// '#' comment lines after the header hold the caller's resolved config.
void save_checkpoint(const std::string& path, const MlpModel& model,
                     const TrainConfig& cfg,
                     const std::vector<std::string>& header_comments = {});
std::pair<MlpModel, TrainConfig> load_checkpoint(const std::string& path);

}  // namespace agedist
