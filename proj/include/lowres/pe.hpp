#pragma once

#include "lowres/optim.hpp"

namespace lowres {

struct PeResult {
    std::vector<int> fold_stop_epochs;
    int pe_stop_epoch = 0;  // round-half-up mean, clamped to [1, max_epochs]
    std::vector<std::string> warnings;
};

// Rounded mean of fold stop epochs, clamped to [1, max_epochs].
int pe_round(const std::vector<int>& fold_stop_epochs, int max_epochs);

// Stratified k-fold pre-runs, each fold used as validation once; every run
// stops at its minimum validation loss, and the rounded mean of the k stop
// epochs is the schedule for the final all-samples run.
PeResult estimate_pe_stop_epoch(const ModelSpec& spec, const Dataset& sample_set, int k,
                                const OptimConfig& config, Rng rng);

}  // namespace lowres
