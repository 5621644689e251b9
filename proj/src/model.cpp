#include "agedist/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "agedist/kvconfig.hpp"
#include "agedist/label_codec.hpp"
#include "agedist/rng.hpp"

namespace agedist {

std::string activation_name(Activation act) {
    return act == Activation::ReLU ? "relu" : "tanh";
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::ReLU;
    if (name == "tanh") return Activation::Tanh;
    throw std::invalid_argument("unknown activation '" + name + "' (expected relu|tanh)");
}

void TrainConfig::validate() const {
    loss.validate();
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch size must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw std::invalid_argument("TrainConfig: momentum must lie in [0, 1)");
    }
    if (weight_decay < 0.0) {
        throw std::invalid_argument("TrainConfig: weight decay must be non-negative");
    }
    if (!(lr_end > 0.0) || lr_start < lr_end) {
        throw std::invalid_argument("TrainConfig: need lr_start >= lr_end > 0");
    }
    if (!(sigma > 0.0)) throw std::invalid_argument("TrainConfig: sigma must be positive");
    for (int h : hidden_dims) {
        if (h < 1) throw std::invalid_argument("TrainConfig: hidden dims must be >= 1");
    }
}

Gradients Gradients::zeros_like(const MlpModel& model) {
    Gradients g;
    g.weights.reserve(model.weights.size());
    g.biases.reserve(model.biases.size());
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        g.weights.emplace_back(model.weights[l].size(), 0.0);
        g.biases.emplace_back(model.biases[l].size(), 0.0);
    }
    return g;
}

void Gradients::scale(double factor) {
    for (auto& w : weights) {
        for (double& v : w) v *= factor;
    }
    for (auto& b : biases) {
        for (double& v : b) v *= factor;
    }
}

namespace {

MlpModel init_model_with(const std::vector<int>& layer_dims, Activation act, Rng& rng) {
    if (layer_dims.size() < 2) {
        throw std::invalid_argument("init_model: need at least input and output layers");
    }
    for (int d : layer_dims) {
        if (d < 1) throw std::invalid_argument("init_model: layer dims must be >= 1");
    }
    MlpModel model;
    model.layer_dims = layer_dims;
    model.activation = act;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const int fan_in = layer_dims[l];
        const int fan_out = layer_dims[l + 1];
        const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
        std::vector<double> w(static_cast<std::size_t>(fan_out) * fan_in);
        for (double& v : w) v = rng.gaussian(0.0, std_dev);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(fan_out, 0.0);
    }
    return model;
}

// Post-activation values per layer; acts[0] is the input, acts.back() the
// logits (no activation on the output layer).
struct Workspace {
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> delta;

    explicit Workspace(const MlpModel& model) {
        acts.resize(model.layer_dims.size());
        delta.resize(model.layer_dims.size());
        for (std::size_t l = 0; l < model.layer_dims.size(); ++l) {
            acts[l].resize(model.layer_dims[l]);
            delta[l].resize(model.layer_dims[l]);
        }
    }
};

void forward_into(const MlpModel& model, const std::vector<double>& x, Workspace& ws) {
    if (static_cast<int>(x.size()) != model.input_dim()) {
        throw std::invalid_argument("forward: input has " + std::to_string(x.size()) +
                                    " features, model expects " +
                                    std::to_string(model.input_dim()));
    }
    ws.acts[0] = x;
    const std::size_t layers = model.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        const int n_in = model.layer_dims[l];
        const int n_out = model.layer_dims[l + 1];
        const double* w = model.weights[l].data();
        const double* in = ws.acts[l].data();
        double* out = ws.acts[l + 1].data();
        const bool is_output = (l + 1 == layers);
        for (int r = 0; r < n_out; ++r) {
            double v = model.biases[l][r];
            const double* wr = w + static_cast<std::size_t>(r) * n_in;
            for (int c = 0; c < n_in; ++c) v += wr[c] * in[c];
            if (!is_output) {
                v = model.activation == Activation::ReLU ? (v > 0.0 ? v : 0.0)
                                                         : std::tanh(v);
            }
            out[r] = v;
        }
    }
}

double backward_into(const MlpModel& model, const std::vector<double>& x,
                     const std::vector<double>& q, const LossSpec& spec, Workspace& ws,
                     Gradients& out) {
    forward_into(model, x, ws);
    const std::vector<double>& logits = ws.acts.back();
    const std::vector<double> p = softmax(logits);
    // CE-family losses need the scalar label; a Gaussian-encoded target peaks
    // at it, so the argmax recovers it exactly.
    const LossResult res = loss_eval(spec, p, decode_argmax(q), q);

    const std::size_t layers = model.layer_count();
    std::copy(res.grad_z.begin(), res.grad_z.end(), ws.delta[layers].begin());
    for (std::size_t l = layers; l-- > 0;) {
        const int n_in = model.layer_dims[l];
        const int n_out = model.layer_dims[l + 1];
        const double* d = ws.delta[l + 1].data();
        const double* in = ws.acts[l].data();
        double* gw = out.weights[l].data();
        double* gb = out.biases[l].data();
        for (int r = 0; r < n_out; ++r) {
            const double dr = d[r];
            double* gwr = gw + static_cast<std::size_t>(r) * n_in;
            for (int c = 0; c < n_in; ++c) gwr[c] += dr * in[c];
            gb[r] += dr;
        }
        if (l > 0) {
            const double* w = model.weights[l].data();
            double* dprev = ws.delta[l].data();
            for (int c = 0; c < n_in; ++c) dprev[c] = 0.0;
            for (int r = 0; r < n_out; ++r) {
                const double dr = d[r];
                const double* wr = w + static_cast<std::size_t>(r) * n_in;
                for (int c = 0; c < n_in; ++c) dprev[c] += dr * wr[c];
            }
            const double* a = ws.acts[l].data();
            if (model.activation == Activation::ReLU) {
                for (int c = 0; c < n_in; ++c) {
                    if (a[c] <= 0.0) dprev[c] = 0.0;
                }
            } else {
                for (int c = 0; c < n_in; ++c) dprev[c] *= 1.0 - a[c] * a[c];
            }
        }
    }
    return res.value;
}

}  // namespace

MlpModel init_model(const std::vector<int>& layer_dims, Activation act,
                    std::uint64_t seed) {
    Rng rng(seed);
    return init_model_with(layer_dims, act, rng);
}

std::vector<double> forward(const MlpModel& model, const std::vector<double>& x) {
    Workspace ws(model);
    forward_into(model, x, ws);
    return ws.acts.back();
}

double backward(const MlpModel& model, const std::vector<double>& x,
                const std::vector<double>& q, const LossSpec& spec, Gradients& out) {
    if (static_cast<int>(q.size()) != model.output_bins()) {
        throw std::invalid_argument("backward: target has " + std::to_string(q.size()) +
                                    " bins, model outputs " +
                                    std::to_string(model.output_bins()));
    }
    Workspace ws(model);
    return backward_into(model, x, q, spec, ws, out);
}

double lr_at(int epoch, const TrainConfig& cfg) {
    if (epoch < 0 || epoch >= cfg.epochs) {
        throw std::invalid_argument("lr_at: epoch " + std::to_string(epoch) +
                                    " outside [0, " + std::to_string(cfg.epochs) + ")");
    }
    if (cfg.epochs < 2) return cfg.lr_start;
    const double t = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
    return cfg.lr_start * std::pow(cfg.lr_end / cfg.lr_start, t);
}

std::pair<MlpModel, TrainTrace> train(const SampleSet& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.samples.empty()) {
        throw std::invalid_argument("train: empty sample set");
    }
    for (const Sample& s : data.samples) {
        if (s.age < 1 || s.age > data.bins) {
            throw std::invalid_argument("train: sample age " + std::to_string(s.age) +
                                        " outside [1, " + std::to_string(data.bins) + "]");
        }
        if (static_cast<int>(s.features.size()) != data.feature_dim) {
            throw std::invalid_argument("train: inconsistent feature dimension");
        }
    }

    std::vector<int> dims;
    dims.push_back(data.feature_dim);
    dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
    dims.push_back(data.bins);

    Rng rng(cfg.seed);
    MlpModel model = init_model_with(dims, cfg.activation, rng);
    Workspace ws(model);
    Gradients grads = Gradients::zeros_like(model);
    Gradients velocity = Gradients::zeros_like(model);

    // One Gaussian target per distinct age value.
    std::vector<std::vector<double>> target_by_age(data.bins + 1);
    for (int a = 1; a <= data.bins; ++a) {
        target_by_age[a] = encode_gaussian(a, data.bins, cfg.sigma);
    }

    const int n = static_cast<int>(data.samples.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;

    TrainTrace trace;
    trace.epoch_mean_loss.reserve(cfg.epochs);
    trace.epoch_lr.reserve(cfg.epochs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_at(epoch, cfg);
        rng.shuffle(order);
        double epoch_loss = 0.0;
        int batch_index = 0;
        for (int start = 0; start < n; start += cfg.batch_size, ++batch_index) {
            const int count = std::min(cfg.batch_size, n - start);
            for (auto& w : grads.weights) std::fill(w.begin(), w.end(), 0.0);
            for (auto& b : grads.biases) std::fill(b.begin(), b.end(), 0.0);

            double batch_loss = 0.0;
            for (int k = 0; k < count; ++k) {
                const Sample& s = data.samples[order[start + k]];
                batch_loss +=
                    backward_into(model, s.features, target_by_age[s.age], cfg.loss, ws,
                                  grads);
            }
            if (!std::isfinite(batch_loss)) {
                throw TrainingDiverged("train: non-finite loss at epoch " +
                                       std::to_string(epoch) + ", batch " +
                                       std::to_string(batch_index));
            }
            epoch_loss += batch_loss;
            grads.scale(1.0 / count);

            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                double* w = model.weights[l].data();
                double* v = velocity.weights[l].data();
                const double* g = grads.weights[l].data();
                for (std::size_t i = 0; i < model.weights[l].size(); ++i) {
                    v[i] = cfg.momentum * v[i] - lr * (g[i] + cfg.weight_decay * w[i]);
                    w[i] += v[i];
                }
                double* b = model.biases[l].data();
                double* vb = velocity.biases[l].data();
                const double* gb = grads.biases[l].data();
                for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
                    vb[i] = cfg.momentum * vb[i] - lr * (gb[i] + cfg.weight_decay * b[i]);
                    b[i] += vb[i];
                }
            }
        }
        trace.epoch_mean_loss.push_back(epoch_loss / n);
        trace.epoch_lr.push_back(lr);
    }
    return {std::move(model), std::move(trace)};
}

std::vector<int> predict_ages(const MlpModel& model, const SampleSet& data) {
    Workspace ws(model);
    std::vector<int> preds;
    preds.reserve(data.samples.size());
    for (const Sample& s : data.samples) {
        forward_into(model, s.features, ws);
        preds.push_back(decode_argmax(softmax(ws.acts.back())));
    }
    return preds;
}

namespace {

[[noreturn]] void bad_checkpoint(const std::string& path, const std::string& why) {
    throw std::runtime_error(path + ": " + why);
}

}  // namespace

void save_checkpoint(const std::string& path, const MlpModel& model,
                     const TrainConfig& cfg,
                     const std::vector<std::string>& header_comments) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_checkpoint: cannot open " + path);
    }
    out << "agedist-checkpoint,v1\n";
    for (const std::string& line : header_comments) {
        out << "# " << line << "\n";
    }
    out << "loss," << loss_kind_name(cfg.loss.kind) << "\n";
    out << "alpha," << format_double(cfg.loss.alpha) << "\n";
    out << "lambda1," << format_double(cfg.loss.lambda1) << "\n";
    out << "lambda2," << format_double(cfg.loss.lambda2) << "\n";
    out << "epochs," << cfg.epochs << "\n";
    out << "batch_size," << cfg.batch_size << "\n";
    out << "momentum," << format_double(cfg.momentum) << "\n";
    out << "weight_decay," << format_double(cfg.weight_decay) << "\n";
    out << "lr_start," << format_double(cfg.lr_start) << "\n";
    out << "lr_end," << format_double(cfg.lr_end) << "\n";
    out << "seed," << cfg.seed << "\n";
    out << "sigma," << format_double(cfg.sigma) << "\n";
    out << "activation," << activation_name(model.activation) << "\n";
    out << "dims";
    for (int d : model.layer_dims) out << ',' << d;
    out << "\n";
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        out << "W," << l;
        for (double v : model.weights[l]) out << ',' << format_double(v);
        out << "\n";
        out << "b," << l;
        for (double v : model.biases[l]) out << ',' << format_double(v);
        out << "\n";
    }
    out << "end\n";
    if (!out) {
        throw std::runtime_error("save_checkpoint: write failed for " + path);
    }
}

std::pair<MlpModel, TrainConfig> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_checkpoint: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != "agedist-checkpoint,v1") {
        bad_checkpoint(path, "missing or unsupported checkpoint header (want v1)");
    }

    MlpModel model;
    TrainConfig cfg;
    bool saw_end = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.empty()) continue;
        const std::string& key = f[0];
        try {
            if (key == "end") {
                saw_end = true;
                break;
            } else if (key == "loss") {
                cfg.loss.kind = loss_kind_from_name(f.at(1));
            } else if (key == "alpha") {
                cfg.loss.alpha = std::stod(f.at(1));
            } else if (key == "lambda1") {
                cfg.loss.lambda1 = std::stod(f.at(1));
            } else if (key == "lambda2") {
                cfg.loss.lambda2 = std::stod(f.at(1));
            } else if (key == "epochs") {
                cfg.epochs = std::stoi(f.at(1));
            } else if (key == "batch_size") {
                cfg.batch_size = std::stoi(f.at(1));
            } else if (key == "momentum") {
                cfg.momentum = std::stod(f.at(1));
            } else if (key == "weight_decay") {
                cfg.weight_decay = std::stod(f.at(1));
            } else if (key == "lr_start") {
                cfg.lr_start = std::stod(f.at(1));
            } else if (key == "lr_end") {
                cfg.lr_end = std::stod(f.at(1));
            } else if (key == "seed") {
                cfg.seed = std::stoull(f.at(1));
            } else if (key == "sigma") {
                cfg.sigma = std::stod(f.at(1));
            } else if (key == "activation") {
                model.activation = activation_from_name(f.at(1));
                cfg.activation = model.activation;
            } else if (key == "dims") {
                for (std::size_t i = 1; i < f.size(); ++i) {
                    model.layer_dims.push_back(std::stoi(f[i]));
                }
                if (model.layer_dims.size() < 2) {
                    bad_checkpoint(path, "dims line needs at least two layers");
                }
                cfg.hidden_dims.assign(model.layer_dims.begin() + 1,
                                       model.layer_dims.end() - 1);
            } else if (key == "W" || key == "b") {
                if (model.layer_dims.empty()) {
                    bad_checkpoint(path, "parameters before dims line");
                }
                const std::size_t l = static_cast<std::size_t>(std::stoi(f.at(1)));
                const std::size_t expect =
                    key == "W" ? static_cast<std::size_t>(model.layer_dims.at(l)) *
                                     model.layer_dims.at(l + 1)
                               : static_cast<std::size_t>(model.layer_dims.at(l + 1));
                if (f.size() != expect + 2) {
                    bad_checkpoint(path, key + std::to_string(l) + " has " +
                                             std::to_string(f.size() - 2) +
                                             " values, expected " + std::to_string(expect));
                }
                std::vector<double> values(expect);
                for (std::size_t i = 0; i < expect; ++i) values[i] = std::stod(f[i + 2]);
                auto& dst = key == "W" ? model.weights : model.biases;
                if (dst.size() != l) {
                    bad_checkpoint(path, "out-of-order parameter line for layer " +
                                             std::to_string(l));
                }
                dst.push_back(std::move(values));
            } else {
                bad_checkpoint(path, "unknown checkpoint key '" + key + "'");
            }
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception&) {
            bad_checkpoint(path, "malformed line '" + line + "'");
        }
    }
    if (!saw_end) bad_checkpoint(path, "truncated checkpoint (missing end line)");
    if (model.weights.size() + 1 != model.layer_dims.size() ||
        model.biases.size() != model.weights.size()) {
        bad_checkpoint(path, "parameter count does not match dims");
    }
    return {std::move(model), std::move(cfg)};
}

}  // namespace agedist
