// Command-line entry point wiring the library into the experiments:
//   gen-data, gradcheck, gradcompare, profile, train, eval, sweep-alpha.
// Each subcommand accepts --config FILE with one `key = value` per line;
// flags given on the command line take precedence over file values.
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agedist/experiments.hpp"
#include "agedist/kvconfig.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitExperimentFailed = 1;
constexpr int kExitUsage = 2;

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string tok =
            csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        values.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return values;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> values;
    for (double v : parse_double_list(csv)) values.push_back(static_cast<int>(v));
    return values;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Label-distribution age estimation losses and experiments"};
    app.require_subcommand(1);

    // gradcheck ------------------------------------------------------------
    agedist::GradcheckParams gc;
    std::string gc_loss = "dc";
    CLI::App* gradcheck = app.add_subcommand(
        "gradcheck", "Validate analytic loss gradients against finite differences");
    gradcheck->set_config("--config");
    gradcheck->add_option("--loss", gc_loss, "ce|kl|cemv|dc");
    gradcheck->add_option("--alpha", gc.loss.alpha);
    gradcheck->add_option("--lambda1", gc.loss.lambda1);
    gradcheck->add_option("--lambda2", gc.loss.lambda2);
    gradcheck->add_option("--trials", gc.trials);
    gradcheck->add_option("--tol", gc.tol);
    gradcheck->add_option("--bins", gc.bins);
    gradcheck->add_option("--step", gc.step);
    gradcheck->add_option("--seed", gc.seed);
    gradcheck->add_option("--out", gc.out);

    // gradcompare ----------------------------------------------------------
    agedist::GradcompareParams gcmp;
    CLI::App* gradcompare = app.add_subcommand(
        "gradcompare", "Compare KL and DC gradient magnitudes on perturbed targets");
    gradcompare->set_config("--config");
    gradcompare->add_option("--age", gcmp.age);
    gradcompare->add_option("--bins", gcmp.bins);
    gradcompare->add_option("--sigma", gcmp.sigma);
    gradcompare->add_option("--alpha", gcmp.alpha);
    gradcompare->add_option("--samples", gcmp.n_samples);
    gradcompare->add_option("--max-shift", gcmp.max_shift);
    gradcompare->add_option("--noise", gcmp.noise_level);
    gradcompare->add_option("--seed", gcmp.seed);
    gradcompare->add_option("--out", gcmp.out);

    // profile ----------------------------------------------------------------
    agedist::ProfileParams prof;
    std::string prof_loss = "kl";
    CLI::App* profile = app.add_subcommand(
        "profile", "Per-bin loss contributions between two Gaussian targets");
    profile->set_config("--config");
    profile->add_option("--age-truth", prof.age_truth);
    profile->add_option("--age-pred", prof.age_pred);
    profile->add_option("--bins", prof.bins);
    profile->add_option("--sigma", prof.sigma);
    profile->add_option("--loss", prof_loss, "kl|dc");
    profile->add_option("--out", prof.out);

    // gen-data ---------------------------------------------------------------
    agedist::GenDataParams gen;
    std::string gen_train_domains, gen_test_domains;
    CLI::App* gen_data = app.add_subcommand(
        "gen-data", "Generate a synthetic multi-domain dataset (optionally SC-split)");
    gen_data->set_config("--config");
    gen_data->add_option("--domains", gen.domains);
    gen_data->add_option("--subjects", gen.subjects_per_domain, "subjects per domain");
    gen_data->add_option("--images", gen.images_per_subject, "images per subject");
    gen_data->add_option("--bins", gen.bins);
    gen_data->add_option("--dim", gen.feature_dim);
    gen_data->add_option("--noise", gen.noise_std, "feature noise std");
    gen_data->add_option("--severity", gen.severity, "domain shift strength");
    gen_data->add_option("--holdout", gen.holdout_frac,
                         "subject fraction held out for the intra file");
    gen_data->add_option("--train-domains", gen_train_domains, "comma list");
    gen_data->add_option("--test-domains", gen_test_domains, "comma list");
    gen_data->add_option("--seed", gen.seed);
    gen_data->add_option("--out", gen.out, "file path, or prefix when splitting");

    // train ------------------------------------------------------------------
    agedist::TrainCliParams tr;
    std::string tr_loss = "dc", tr_activation = "relu", tr_hidden = "";
    CLI::App* train_cmd =
        app.add_subcommand("train", "Train an MLP age estimator on a dataset file");
    train_cmd->set_config("--config");
    train_cmd->add_option("--train", tr.train_path)->required();
    train_cmd->add_option("--loss", tr_loss, "ce|kl|cemv|dc");
    train_cmd->add_option("--alpha", tr.config.loss.alpha);
    train_cmd->add_option("--lambda1", tr.config.loss.lambda1);
    train_cmd->add_option("--lambda2", tr.config.loss.lambda2);
    train_cmd->add_option("--epochs", tr.config.epochs);
    train_cmd->add_option("--batch", tr.config.batch_size);
    train_cmd->add_option("--momentum", tr.config.momentum);
    train_cmd->add_option("--weight-decay", tr.config.weight_decay);
    train_cmd->add_option("--lr-start", tr.config.lr_start);
    train_cmd->add_option("--lr-end", tr.config.lr_end);
    train_cmd->add_option("--hidden", tr_hidden, "comma list of hidden widths");
    train_cmd->add_option("--activation", tr_activation, "relu|tanh");
    train_cmd->add_option("--sigma", tr.config.sigma);
    train_cmd->add_option("--seed", tr.config.seed);
    train_cmd->add_option("--out", tr.out, "checkpoint path");
    train_cmd->add_option("--trace", tr.trace_out, "trace table path");

    // eval -------------------------------------------------------------------
    agedist::EvalParams ev;
    CLI::App* eval_cmd =
        app.add_subcommand("eval", "Evaluate a checkpoint on a dataset file");
    eval_cmd->set_config("--config");
    eval_cmd->add_option("--model", ev.model_path)->required();
    eval_cmd->add_option("--data", ev.data_path)->required();
    eval_cmd->add_option("--threshold", ev.threshold, "CS threshold in years");
    eval_cmd->add_option("--out", ev.out);

    // sweep-alpha ------------------------------------------------------------
    agedist::SweepAlphaParams sw;
    sw.base = agedist::default_task_train_config();
    std::string sw_alphas, sw_hidden, sw_activation = "relu";
    CLI::App* sweep = app.add_subcommand(
        "sweep-alpha", "Cross-domain MAE of the DC loss over a list of alphas");
    sweep->set_config("--config");
    sweep->add_option("--train", sw.train_path)->required();
    sweep->add_option("--test", sw.test_path)->required();
    sweep->add_option("--alphas", sw_alphas, "comma list in (0,1)");
    sweep->add_option("--seeds", sw.seeds, "seeds per alpha");
    sweep->add_option("--jobs", sw.jobs, "parallel training jobs");
    sweep->add_option("--epochs", sw.base.epochs);
    sweep->add_option("--batch", sw.base.batch_size);
    sweep->add_option("--momentum", sw.base.momentum);
    sweep->add_option("--weight-decay", sw.base.weight_decay);
    sweep->add_option("--lr-start", sw.base.lr_start);
    sweep->add_option("--lr-end", sw.base.lr_end);
    sweep->add_option("--hidden", sw_hidden, "comma list of hidden widths");
    sweep->add_option("--activation", sw_activation, "relu|tanh");
    sweep->add_option("--sigma", sw.base.sigma);
    sweep->add_option("--seed", sw.base.seed, "base seed");
    sweep->add_option("--out", sw.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gradcheck->parsed()) {
            gc.loss.kind = agedist::loss_kind_from_name(gc_loss);
            const agedist::GradCheckReport report = agedist::run_gradcheck(gc);
            std::printf("gradcheck %s: max_rel_err=%g (tol %g) -> %s\n", gc_loss.c_str(),
                        report.max_rel_err, gc.tol, report.passed ? "passed" : "FAILED");
            return report.passed ? kExitOk : kExitExperimentFailed;
        }
        if (gradcompare->parsed()) {
            const agedist::GradcompareResult res = agedist::run_gradcompare(gcmp);
            std::printf("gradcompare: fraction_dc_below_kl=%g over %d samples -> %s\n",
                        res.fraction_dc_below_kl, res.samples, gcmp.out.c_str());
            return kExitOk;
        }
        if (profile->parsed()) {
            prof.loss.kind = agedist::loss_kind_from_name(prof_loss);
            agedist::run_profile(prof);
            std::printf("profile: wrote %s\n", prof.out.c_str());
            return kExitOk;
        }
        if (gen_data->parsed()) {
            if (!gen_train_domains.empty()) {
                for (int d : parse_int_list(gen_train_domains)) gen.train_domains.insert(d);
            }
            if (!gen_test_domains.empty()) {
                for (int d : parse_int_list(gen_test_domains)) gen.test_domains.insert(d);
            }
            const agedist::GenDataResult res = agedist::run_gen_data(gen);
            for (const std::string& f : res.files_written) {
                std::printf("gen-data: wrote %s\n", f.c_str());
            }
            if (res.dropped_overlap > 0) {
                std::printf("gen-data: dropped %d test-side samples from overlapping "
                            "subjects\n",
                            res.dropped_overlap);
            }
            return kExitOk;
        }
        if (train_cmd->parsed()) {
            tr.config.loss.kind = agedist::loss_kind_from_name(tr_loss);
            tr.config.activation = agedist::activation_from_name(tr_activation);
            if (!tr_hidden.empty()) tr.config.hidden_dims = parse_int_list(tr_hidden);
            agedist::run_train(tr);
            std::printf("train: wrote %s\n", tr.out.c_str());
            return kExitOk;
        }
        if (eval_cmd->parsed()) {
            const agedist::MetricsReport report = agedist::run_eval(ev);
            std::printf("eval: mae=%g cs=%g (I=%d, n=%d) -> %s\n", report.mae, report.cs,
                        report.threshold, report.n, ev.out.c_str());
            return kExitOk;
        }
        if (sweep->parsed()) {
            if (!sw_alphas.empty()) sw.alphas = parse_double_list(sw_alphas);
            if (!sw_hidden.empty()) sw.base.hidden_dims = parse_int_list(sw_hidden);
            sw.base.activation = agedist::activation_from_name(sw_activation);
            const std::vector<agedist::SweepRow> rows = agedist::run_sweep_alpha(sw);
            std::printf("sweep-alpha: %zu rows -> %s\n", rows.size(), sw.out.c_str());
            return kExitOk;
        }
    } catch (const agedist::TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitExperimentFailed;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
