#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "lowres/harness.hpp"

namespace {

using lowres::ExperimentConfig;

void add_options(CLI::App& app, ExperimentConfig& cfg, std::string& model_kind,
                 std::string& algorithm, bool& no_shuffle) {
    app.add_option("--seed", cfg.seed, "master experiment seed");
    app.add_option("--jobs", cfg.jobs, "worker threads for independent runs");
    app.add_option("--out", cfg.out_dir, "output directory for CSV reports");

    app.add_option("--csv", cfg.csv_path, "dataset CSV (header row, `label` column); synthetic when omitted");
    app.add_option("--label-frac", cfg.label_frac, "labeled-pool fraction for CSV datasets");
    app.add_option("--classes", cfg.synth.classes, "synthetic class count");
    app.add_option("--dim", cfg.synth.dim, "synthetic feature dimension");
    app.add_option("--separation", cfg.synth.separation, "synthetic class-mean separation");
    app.add_option("--noise", cfg.synth.noise, "synthetic noise sigma");
    app.add_option("--pool", cfg.synth.pool_size, "synthetic labeled-pool size");
    app.add_option("--test", cfg.synth.test_size, "synthetic test-set size");

    app.add_option("--model", model_kind, "model kind: logistic | mlp");
    app.add_option("--hidden", cfg.model.hidden_dim, "mlp hidden width");
    app.add_option("--dropout", cfg.model.dropout_rate, "dropout rate on hidden activations");

    app.add_option("--optimizer", algorithm, "adam | sgd");
    app.add_option("--lr", cfg.optim.learning_rate, "learning rate");
    app.add_option("--beta1", cfg.optim.beta1, "Adam beta1");
    app.add_option("--beta2", cfg.optim.beta2, "Adam beta2");
    app.add_option("--epsilon", cfg.optim.epsilon, "Adam epsilon");
    app.add_option("--batch", cfg.optim.batch_size, "mini-batch size");
    app.add_option("--max-epochs", cfg.optim.max_epochs, "epoch cap");
    app.add_flag("--no-shuffle", no_shuffle, "disable per-epoch shuffling");

    app.add_option("--pe-folds", cfg.pe_folds, "stratified folds for the stop-epoch pre-estimate");
    app.add_option("--reps", cfg.repetitions, "repetitions per table cell");
    app.add_option("--bins", cfg.bins, "calibration bin count M");
    app.add_option("--ratios", cfg.val_ratios, "training fractions for the validation-based rows");

    app.add_option("--fogip-n", cfg.fogip_candidates_n, "candidate initialization count");
    app.add_flag("--fogip-output-only", cfg.fogip_output_block_only,
                 "search only the output-layer block");

    app.add_option("--grid-lr", cfg.grid_lr, "learning-rate grid");
    app.add_option("--grid-dropout", cfg.grid_dropout, "dropout grid");
    app.add_option("--grid-batch", cfg.grid_batch, "batch-size grid");
    app.add_option("--fractions", cfg.size_fractions, "labeled-pool fractions for the size sweep");

    app.add_option("--criterion", cfg.criterion, "stop criterion for `train`: val | pe | eb | fixed");
    app.add_option("--train-frac", cfg.train_frac, "training fraction for val-based splits");
    app.add_option("--fixed-epoch", cfg.fixed_epoch, "stop epoch for criterion=fixed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Validation-free training toolkit: early stopping criteria, "
                 "initialization search, and calibration-aware evaluation"};
    app.require_subcommand(1);
    app.fallthrough(true);
    app.set_config("--config", "", "key = value config file; command-line flags win");

    ExperimentConfig cfg;
    std::string model_kind = "logistic";
    std::string algorithm = "adam";
    bool no_shuffle = false;
    add_options(app, cfg, model_kind, algorithm, no_shuffle);

    auto* compare = app.add_subcommand("compare-criteria", "stop-criterion comparison table");
    auto* fogip = app.add_subcommand("fogip-compare", "good vs normal initialization table");
    auto* grid = app.add_subcommand("hyper-grid", "hyperparameter tuning comparison");
    auto* stop = app.add_subcommand("stop-analysis", "per-epoch stop-point trace and histograms");
    auto* sweep = app.add_subcommand("size-sweep", "accuracy across labeled-pool sizes");
    auto* pe = app.add_subcommand("pe-estimate", "pre-estimate the stop epoch");
    auto* train = app.add_subcommand("train", "single training run");

    CLI11_PARSE(app, argc, argv);

    cfg.model.kind = model_kind == "mlp" ? lowres::ModelKind::mlp : lowres::ModelKind::logistic;
    cfg.optim.algorithm =
        algorithm == "sgd" ? lowres::OptAlgorithm::sgd : lowres::OptAlgorithm::adam;
    cfg.optim.shuffle = !no_shuffle;

    const char* stage = "setup";
    try {
        if (compare->parsed()) {
            stage = "compare-criteria";
            return lowres::cmd_compare_criteria(cfg);
        }
        if (fogip->parsed()) {
            stage = "fogip-compare";
            return lowres::cmd_fogip_compare(cfg);
        }
        if (grid->parsed()) {
            stage = "hyper-grid";
            return lowres::cmd_hyper_grid(cfg);
        }
        if (stop->parsed()) {
            stage = "stop-analysis";
            return lowres::cmd_stop_analysis(cfg);
        }
        if (sweep->parsed()) {
            stage = "size-sweep";
            return lowres::cmd_size_sweep(cfg);
        }
        if (pe->parsed()) {
            stage = "pe-estimate";
            return lowres::cmd_pe_estimate(cfg);
        }
        if (train->parsed()) {
            stage = "train";
            return lowres::cmd_train(cfg);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error in stage %s: %s\n", stage, e.what());
        return 1;
    }
    return 0;
}
