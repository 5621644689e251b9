#include "agedist/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "agedist/kvconfig.hpp"
#include "agedist/label_codec.hpp"
#include "agedist/rng.hpp"

namespace agedist {

namespace {

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open output file " + path);
    }
    return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

std::vector<std::string> config_lines(const KvConfig& cfg) {
    std::vector<std::string> lines;
    lines.reserve(cfg.entries().size());
    for (const auto& [k, v] : cfg.entries()) {
        lines.push_back(k + " = " + v);
    }
    return lines;
}

std::string join_ints(const std::set<int>& ids) {
    std::string s;
    for (int id : ids) {
        if (!s.empty()) s += ',';
        s += std::to_string(id);
    }
    return s;
}

std::string join_ints(const std::vector<int>& ids) {
    std::string s;
    for (int id : ids) {
        if (!s.empty()) s += ',';
        s += std::to_string(id);
    }
    return s;
}

void add_train_config(KvConfig& kv, const TrainConfig& cfg) {
    kv.set("loss", loss_kind_name(cfg.loss.kind));
    kv.set("alpha", cfg.loss.alpha);
    kv.set("lambda1", cfg.loss.lambda1);
    kv.set("lambda2", cfg.loss.lambda2);
    kv.set("epochs", cfg.epochs);
    kv.set("batch", cfg.batch_size);
    kv.set("momentum", cfg.momentum);
    kv.set("weight_decay", cfg.weight_decay);
    kv.set("lr_start", cfg.lr_start);
    kv.set("lr_end", cfg.lr_end);
    kv.set("hidden", join_ints(cfg.hidden_dims));
    kv.set("activation", activation_name(cfg.activation));
    kv.set("sigma", cfg.sigma);
    kv.set("seed", cfg.seed);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

GradCheckReport run_gradcheck(const GradcheckParams& params) {
    params.loss.validate();
    const GradCheckReport report =
        check(params.loss, params.trials, params.tol, params.seed, params.bins,
              params.step);

    KvConfig kv;
    kv.set("command", "gradcheck");
    kv.set("loss", loss_kind_name(params.loss.kind));
    kv.set("alpha", params.loss.alpha);
    kv.set("lambda1", params.loss.lambda1);
    kv.set("lambda2", params.loss.lambda2);
    kv.set("trials", params.trials);
    kv.set("tol", params.tol);
    kv.set("bins", params.bins);
    kv.set("step", params.step);
    kv.set("seed", params.seed);
    kv.set("out", params.out);

    std::ofstream out = open_output(params.out);
    kv.write_header(out);
    out << "metric,value\n";
    out << "max_abs_err," << format_double(report.max_abs_err) << "\n";
    out << "max_rel_err," << format_double(report.max_rel_err) << "\n";
    out << "worst_index," << report.worst_index << "\n";
    out << "passed," << (report.passed ? 1 : 0) << "\n";
    finish_output(out, params.out);
    return report;
}

GradcompareResult run_gradcompare(const GradcompareParams& params) {
    if (params.n_samples < 1) {
        throw std::invalid_argument("gradcompare: need at least one sample");
    }
    if (params.max_shift < 0 || params.noise_level < 0.0) {
        throw std::invalid_argument("gradcompare: negative shift range or noise level");
    }
    if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
        throw std::invalid_argument("gradcompare: alpha must lie in (0, 1)");
    }
    const std::vector<double> q =
        encode_gaussian(params.age, params.bins, params.sigma);

    KvConfig kv;
    kv.set("command", "gradcompare");
    kv.set("age", params.age);
    kv.set("bins", params.bins);
    kv.set("sigma", params.sigma);
    kv.set("alpha", params.alpha);
    kv.set("n_samples", params.n_samples);
    kv.set("max_shift", params.max_shift);
    kv.set("noise_level", params.noise_level);
    kv.set("seed", params.seed);
    kv.set("out", params.out);

    std::ofstream out = open_output(params.out);
    kv.write_header(out);
    out << "sample,shift,kl_max_abs_grad,dc_max_abs_grad";
    for (int i = 1; i <= params.bins; ++i) out << ",kl_grad_" << i;
    for (int i = 1; i <= params.bins; ++i) out << ",dc_grad_" << i;
    out << "\n";

    Rng rng(params.seed);
    int dc_below = 0;
    for (int s = 0; s < params.n_samples; ++s) {
        const int shift = rng.uniform_int(-params.max_shift, params.max_shift);
        // Shift the ground truth; mass pushed past the ends piles up on the
        // boundary bins, then per-bin uniform noise and renormalisation.
        std::vector<double> p(params.bins, 0.0);
        for (int i = 0; i < params.bins; ++i) {
            const int j = std::clamp(i + shift, 0, params.bins - 1);
            p[j] += q[i];
        }
        double sum = 0.0;
        for (double& v : p) {
            v += rng.uniform(0.0, params.noise_level);
            sum += v;
        }
        for (double& v : p) v /= sum;

        const LossResult kl = kl_loss(p, q);
        const LossResult dc = dc_loss(p, q, params.alpha);
        const double kl_max = max_abs(kl.grad_z);
        const double dc_max = max_abs(dc.grad_z);
        if (dc_max < kl_max) ++dc_below;

        out << s << ',' << shift << ',' << format_double(kl_max) << ','
            << format_double(dc_max);
        for (double g : kl.grad_z) out << ',' << format_double(g);
        for (double g : dc.grad_z) out << ',' << format_double(g);
        out << "\n";
    }

    GradcompareResult result;
    result.samples = params.n_samples;
    result.fraction_dc_below_kl =
        static_cast<double>(dc_below) / static_cast<double>(params.n_samples);
    out << "# fraction_dc_below_kl = " << format_double(result.fraction_dc_below_kl)
        << "\n";
    finish_output(out, params.out);
    return result;
}

void run_profile(const ProfileParams& params) {
    if (params.loss.kind != LossKind::KL && params.loss.kind != LossKind::DC) {
        throw std::invalid_argument("profile: loss must be kl or dc");
    }
    const std::vector<double> q =
        encode_gaussian(params.age_truth, params.bins, params.sigma);
    const std::vector<double> p =
        encode_gaussian(params.age_pred, params.bins, params.sigma);
    const std::vector<double> contrib = profile(p, q, params.loss);

    KvConfig kv;
    kv.set("command", "profile");
    kv.set("age_truth", params.age_truth);
    kv.set("age_pred", params.age_pred);
    kv.set("bins", params.bins);
    kv.set("sigma", params.sigma);
    kv.set("loss", loss_kind_name(params.loss.kind));
    kv.set("out", params.out);

    std::ofstream out = open_output(params.out);
    kv.write_header(out);
    out << "bin,q_truth,p_pred,contribution\n";
    for (int i = 0; i < params.bins; ++i) {
        out << (i + 1) << ',' << format_double(q[i]) << ',' << format_double(p[i])
            << ',' << format_double(contrib[i]) << "\n";
    }
    finish_output(out, params.out);
}

GenDataResult run_gen_data(const GenDataParams& params) {
    if (params.holdout_frac < 0.0 || params.holdout_frac >= 1.0) {
        throw std::invalid_argument("gen-data: holdout fraction must lie in [0, 1)");
    }
    for (int d : params.train_domains) {
        if (d < 0 || d >= params.domains) {
            throw std::invalid_argument("gen-data: train domain id out of range");
        }
    }
    for (int d : params.test_domains) {
        if (d < 0 || d >= params.domains) {
            throw std::invalid_argument("gen-data: test domain id out of range");
        }
    }
    if (params.train_domains.empty() != params.test_domains.empty()) {
        throw std::invalid_argument(
            "gen-data: give both train and test domains or neither");
    }

    const std::vector<DomainSpec> specs =
        make_domain_specs(params.domains, params.feature_dim, params.noise_std,
                          params.severity, params.seed);
    // Decorrelates the sample stream from the domain-spec stream.
    const std::uint64_t gen_seed = params.seed ^ 0x9E3779B97F4A7C15ULL;
    const SampleSet full = generate(specs, params.subjects_per_domain,
                                    params.images_per_subject, params.bins,
                                    params.feature_dim, gen_seed);

    KvConfig kv;
    kv.set("command", "gen-data");
    kv.set("domains", params.domains);
    kv.set("subjects_per_domain", params.subjects_per_domain);
    kv.set("images_per_subject", params.images_per_subject);
    kv.set("bins", params.bins);
    kv.set("dim", params.feature_dim);
    kv.set("noise", params.noise_std);
    kv.set("severity", params.severity);
    kv.set("holdout", params.holdout_frac);
    kv.set("seed", params.seed);
    kv.set("out", params.out);

    GenDataResult result;
    if (params.train_domains.empty()) {
        save_dataset(params.out, full, config_lines(kv));
        result.files_written.push_back(params.out);
        return result;
    }

    kv.set("train_domains", join_ints(params.train_domains));
    kv.set("test_domains", join_ints(params.test_domains));

    SplitResult split = split_sc(full, params.train_domains, params.test_domains);
    result.dropped_overlap = split.dropped_overlap;
    kv.set("dropped_overlap", split.dropped_overlap);

    // Subject holdout inside the train domains for the intra-domain
    // measurement; the last block of subject ids covers all age strata.
    SampleSet train_out, intra_out;
    train_out.feature_dim = intra_out.feature_dim = full.feature_dim;
    train_out.bins = intra_out.bins = full.bins;
    if (params.holdout_frac > 0.0) {
        const std::set<int> subjects = subject_ids(split.train);
        const int n_hold = std::max(
            1, static_cast<int>(params.holdout_frac * static_cast<double>(subjects.size())));
        std::set<int> held;
        for (auto it = subjects.rbegin(); it != subjects.rend() &&
                                          static_cast<int>(held.size()) < n_hold;
             ++it) {
            held.insert(*it);
        }
        for (const Sample& s : split.train.samples) {
            (held.count(s.subject_id) ? intra_out : train_out).samples.push_back(s);
        }
    } else {
        train_out = split.train;
    }

    auto write_part = [&](const std::string& role, const SampleSet& part) {
        KvConfig part_kv = kv;
        part_kv.set("file_role", role);
        const std::string path = params.out + "." + role + ".csv";
        save_dataset(path, part, config_lines(part_kv));
        result.files_written.push_back(path);
    };
    write_part("train", train_out);
    if (!intra_out.samples.empty()) write_part("intra", intra_out);
    write_part("cross", split.test);
    return result;
}

namespace {

KvConfig train_kv(const TrainCliParams& params, const std::string& trace_path) {
    KvConfig kv;
    kv.set("command", "train");
    kv.set("train", params.train_path);
    kv.set("out", params.out);
    kv.set("trace", trace_path);
    add_train_config(kv, params.config);
    return kv;
}

}  // namespace

void run_train(const TrainCliParams& params) {
    params.config.validate();
    const SampleSet data = load_dataset(params.train_path);
    const std::string trace_path =
        params.trace_out.empty() ? params.out + ".trace.csv" : params.trace_out;
    const KvConfig kv = train_kv(params, trace_path);

    auto [model, trace] = train(data, params.config);
    save_checkpoint(params.out, model, params.config, config_lines(kv));

    std::ofstream out = open_output(trace_path);
    kv.write_header(out);
    out << "epoch,lr,mean_loss\n";
    for (std::size_t e = 0; e < trace.epoch_mean_loss.size(); ++e) {
        out << e << ',' << format_double(trace.epoch_lr[e]) << ','
            << format_double(trace.epoch_mean_loss[e]) << "\n";
    }
    finish_output(out, trace_path);
}

MetricsReport run_eval(const EvalParams& params) {
    auto [model, train_cfg] = load_checkpoint(params.model_path);
    const SampleSet data = load_dataset(params.data_path);
    if (data.feature_dim != model.input_dim() || data.bins != model.output_bins()) {
        throw std::invalid_argument(
            "eval: checkpoint expects D=" + std::to_string(model.input_dim()) + ", L=" +
            std::to_string(model.output_bins()) + " but dataset has D=" +
            std::to_string(data.feature_dim) + ", L=" + std::to_string(data.bins));
    }

    const std::vector<int> preds = predict_ages(model, data);
    std::vector<int> truths;
    truths.reserve(data.samples.size());
    for (const Sample& s : data.samples) truths.push_back(s.age);
    const MetricsReport report = evaluate_predictions(preds, truths, params.threshold);

    KvConfig kv;
    kv.set("command", "eval");
    kv.set("model", params.model_path);
    kv.set("data", params.data_path);
    kv.set("threshold_I", params.threshold);
    kv.set("loss", loss_kind_name(train_cfg.loss.kind));
    kv.set("seed", train_cfg.seed);
    kv.set("out", params.out);

    std::ofstream out = open_output(params.out);
    kv.write_header(out);
    out << "metric,value\n";
    out << "mae," << format_double(report.mae) << "\n";
    out << "cs," << format_double(report.cs) << "\n";
    out << "threshold_I," << report.threshold << "\n";
    out << "n," << report.n << "\n";
    finish_output(out, params.out);
    return report;
}

std::vector<SweepRow> run_sweep_alpha(const SweepAlphaParams& params) {
    if (params.alphas.empty()) {
        throw std::invalid_argument("sweep-alpha: need at least one alpha");
    }
    for (double a : params.alphas) {
        if (!(a > 0.0 && a < 1.0)) {
            throw std::invalid_argument("sweep-alpha: alpha " + format_double(a) +
                                        " outside (0, 1)");
        }
    }
    if (params.seeds < 1 || params.jobs < 1) {
        throw std::invalid_argument("sweep-alpha: seeds and jobs must be >= 1");
    }
    const SampleSet train_set = load_dataset(params.train_path);
    const SampleSet test_set = load_dataset(params.test_path);

    std::vector<SweepRow> rows(params.alphas.size() *
                               static_cast<std::size_t>(params.seeds));
    auto run_cell = [&](std::size_t index) {
        const std::size_t ai = index / params.seeds;
        const int si = static_cast<int>(index % params.seeds);
        TrainConfig cfg = params.base;
        cfg.loss.kind = LossKind::DC;
        cfg.loss.alpha = params.alphas[ai];
        cfg.seed = params.base.seed + static_cast<std::uint64_t>(si);
        auto [model, trace] = train(train_set, cfg);
        const std::vector<int> preds = predict_ages(model, test_set);
        std::vector<int> truths;
        truths.reserve(test_set.samples.size());
        for (const Sample& s : test_set.samples) truths.push_back(s.age);
        rows[index] = {cfg.loss.alpha, cfg.seed, mae(preds, truths), cs(preds, truths)};
    };

    if (params.jobs == 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        const int n_threads = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(params.jobs), rows.size()));
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= rows.size()) return;
                    try {
                        run_cell(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (std::thread& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    KvConfig kv;
    kv.set("command", "sweep-alpha");
    std::string alpha_list;
    for (double a : params.alphas) {
        if (!alpha_list.empty()) alpha_list += ',';
        alpha_list += format_double(a);
    }
    kv.set("alphas", alpha_list);
    kv.set("seeds", params.seeds);
    kv.set("jobs", params.jobs);
    kv.set("train", params.train_path);
    kv.set("test", params.test_path);
    kv.set("out", params.out);
    add_train_config(kv, params.base);
    kv.set("loss", "dc");  // the sweep always trains the dc loss

    std::ofstream out = open_output(params.out);
    kv.write_header(out);
    out << "alpha,seed,mae,cs\n";
    for (const SweepRow& row : rows) {
        out << format_double(row.alpha) << ',' << row.seed << ','
            << format_double(row.mae) << ',' << format_double(row.cs) << "\n";
    }
    finish_output(out, params.out);
    return rows;
}

TrainConfig default_task_train_config() {
    TrainConfig cfg;
    cfg.loss.kind = LossKind::DC;
    cfg.loss.alpha = 0.1;
    cfg.hidden_dims = {16};
    return cfg;
}

GenDataParams default_task_gen_params(std::uint64_t seed) {
    GenDataParams params;  // struct defaults are the default task
    params.seed = seed;
    params.train_domains = {0};
    params.test_domains = {1};
    return params;
}

}  // namespace agedist
