// Experiment drivers behind the CLI subcommands. Each writes a text artifact
// that embeds the run's resolved configuration (seed included) as '# key =
// value' comment lines, so a rerun with the same configuration reproduces
// the file byte for byte.
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "agedist/datagen.hpp"
#include "agedist/label_codec.hpp"
#include "agedist/metrics.hpp"
#include "agedist/model.hpp"
#include "agedist/numcheck.hpp"

namespace agedist {

struct GradcheckParams {
    LossSpec loss;
    int trials = 100;
    double tol = kGradCheckTol;
    int bins = kGradCheckBins;
    double step = kGradCheckStep;
    std::uint64_t seed = 7;
    std::string out = "gradcheck.csv";
};

GradCheckReport run_gradcheck(const GradcheckParams& params);

// Perturbed-distribution gradient comparison between the KL and DC losses:
// the ground-truth Gaussian is integer-shifted (clipped at the range ends),
// uniform noise in [0, noise_level] is added per bin, and the renormalised
// result plays the predicted distribution.
struct GradcompareParams {
    int age = 50;
    int bins = 100;
    double sigma = 2.0;
    double alpha = 0.01;
    int n_samples = 100;
    int max_shift = 10;
    double noise_level = 0.01;
    std::uint64_t seed = 1;
    std::string out = "gradcompare.csv";
};

struct GradcompareResult {
    double fraction_dc_below_kl = 0.0;
    int samples = 0;
};

GradcompareResult run_gradcompare(const GradcompareParams& params);

struct ProfileParams {
    int age_truth = 40;
    int age_pred = 50;
    int bins = kDefaultBins;
    double sigma = 2.0;
    LossSpec loss;  // KL or DC
    std::string out = "profile.csv";
};

void run_profile(const ProfileParams& params);

// Generates the synthetic multi-domain set. With train/test domain lists it
// also performs the subject-exclusive split and writes <out>.train.csv,
// <out>.intra.csv (held-out subjects from the train domains) and
// <out>.cross.csv; otherwise the whole set lands in a single file at <out>.
struct GenDataParams {
    int domains = 2;
    int subjects_per_domain = 6000;
    int images_per_subject = 10;
    int bins = 16;
    int feature_dim = 8;
    double noise_std = 0.05;
    double severity = 0.8;
    double holdout_frac = 0.2;
    std::uint64_t seed = 1;
    std::string out = "data";
    std::set<int> train_domains;  // empty disables splitting
    std::set<int> test_domains;
};

struct GenDataResult {
    std::vector<std::string> files_written;
    int dropped_overlap = 0;
};

GenDataResult run_gen_data(const GenDataParams& params);

struct TrainCliParams {
    std::string train_path;
    std::string out = "model.ckpt";
    std::string trace_out;  // defaults to out + ".trace.csv"
    TrainConfig config;
};

void run_train(const TrainCliParams& params);

struct EvalParams {
    std::string model_path;
    std::string data_path;
    std::string out = "metrics.csv";
    int threshold = kDefaultCsThreshold;
};

MetricsReport run_eval(const EvalParams& params);

// Trains one DC model per (alpha, seed) pair on the shared train set and
// evaluates cross-domain MAE/CS on the test set. Seeds run from
// base.seed to base.seed + seeds - 1. `jobs` > 1 runs the independent
// trainings on a small thread pool; each job is single-threaded, and rows
// are emitted in grid order, so the output is identical either way.
struct SweepAlphaParams {
    std::vector<double> alphas = {0.01, 0.05, 0.1, 0.2, 0.5, 0.8};
    int seeds = 1;
    int jobs = 1;
    std::string train_path;
    std::string test_path;
    std::string out = "sweep_alpha.csv";
    TrainConfig base;
};

struct SweepRow {
    double alpha = 0.0;
    std::uint64_t seed = 0;
    double mae = 0.0;
    double cs = 0.0;
};

std::vector<SweepRow> run_sweep_alpha(const SweepAlphaParams& params);

// Default desk-scale task shared by the trend experiments: two domains, one
// for training (with a subject holdout for the intra measurement), one as
// the cross-dataset test side.
TrainConfig default_task_train_config();
GenDataParams default_task_gen_params(std::uint64_t seed);

}  // namespace agedist
