#pragma once

#include <optional>
#include <string>

#include "lowres/fogip.hpp"
#include "lowres/metrics.hpp"
#include "lowres/pe.hpp"

namespace lowres {

struct SyntheticSpec {
    int classes = 2;
    int dim = 20;
    double separation = 1.5;
    double noise = 1.0;
    std::size_t pool_size = 100;
    std::size_t test_size = 10000;
};

struct ExperimentConfig {
    // dataset source: CSV path, or synthetic when empty
    std::string csv_path;
    SyntheticSpec synth;
    double label_frac = 0.02;  // CSV labeled-pool fraction

    ModelSpec model{ModelKind::logistic, 20, 2, 16, 0.0};
    OptimConfig optim;

    int pe_folds = 4;
    int repetitions = 50;
    std::uint64_t seed = 0;
    int bins = 10;
    int jobs = 1;
    std::string out_dir = "out";

    // compare-criteria validation rows (training fraction of the pool)
    std::vector<double> val_ratios = {0.25, 0.50, 0.75};

    int fogip_candidates_n = 10;
    bool fogip_output_block_only = false;

    // hyper-grid search space
    std::vector<double> grid_lr = {1e-3, 1e-2, 1e-1};
    std::vector<double> grid_dropout = {0.1, 0.3};
    std::vector<std::size_t> grid_batch = {16, 32};

    std::vector<double> size_fractions = {0.25, 0.5, 0.75, 1.0};

    // `train` subcommand
    std::string criterion = "eb";  // val | pe | eb | fixed
    double train_frac = 0.75;      // val criterion split
    int fixed_epoch = 1;
};

struct RunOutcome {
    double accuracy = 0.0;
    double loss = 0.0;
    double ece = 0.0;
    double oe = 0.0;
    int stop_epoch = 0;
};

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;  // unbiased; 0 for a single run
};

Aggregate aggregate(const std::vector<double>& values);

// (labeled pool, test) for one repetition; `full` is the pre-loaded CSV
// dataset or nullptr for synthetic generation.
std::pair<Dataset, Dataset> pool_and_test(const ExperimentConfig& cfg, const Dataset* full,
                                          Rng rep_rng);

RunOutcome run_val_row(const ExperimentConfig& cfg, const Dataset& pool, const Dataset& test,
                       double train_frac, Rng rng);
RunOutcome run_pe_row(const ExperimentConfig& cfg, const Dataset& pool, const Dataset& test,
                      Rng rng, int* pe_epoch = nullptr);
RunOutcome run_eb_row(const ExperimentConfig& cfg, const Dataset& pool, const Dataset& test,
                      Rng rng);

struct FogipRepOutcome {
    RunOutcome normal_pe, normal_eb, good_pe, good_eb;
};
FogipRepOutcome run_fogip_rep(const ExperimentConfig& cfg, const Dataset& pool,
                              const Dataset& test, Rng rng);

// CLI entry points; each returns a process exit code and writes the CSV
// reports into cfg.out_dir.
int cmd_compare_criteria(const ExperimentConfig& cfg);
int cmd_fogip_compare(const ExperimentConfig& cfg);
int cmd_hyper_grid(const ExperimentConfig& cfg);
int cmd_stop_analysis(const ExperimentConfig& cfg);
int cmd_size_sweep(const ExperimentConfig& cfg);
int cmd_pe_estimate(const ExperimentConfig& cfg);
int cmd_train(const ExperimentConfig& cfg);

}  // namespace lowres
