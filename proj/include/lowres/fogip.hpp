#pragma once

#include "lowres/optim.hpp"

namespace lowres {

struct FogipConfig {
    std::vector<std::uint64_t> candidate_seeds;  // n distinct seeds
    OptimConfig optim;
    // When set, candidates share a common base initialization and differ
    // only in the output-layer blocks.
    bool output_block_only = false;
    std::uint64_t base_seed = 0;  // base init for output_block_only mode

    std::size_t candidate_count() const { return candidate_seeds.size(); }
    void validate() const;
};

struct InstabilityRecord {
    std::vector<double> phase_a;  // min validation loss, train A / validate B
    std::vector<double> phase_b;  // min validation loss, train B / validate A
    std::vector<double> total;    // phase_a + phase_b
    std::size_t selected = 0;     // argmin of total, ties to lowest index
};

// Stratified 50:50 partition; errors if any class has fewer than 2 samples.
std::pair<Dataset, Dataset> split_half(const Dataset& s, Rng rng);

// Candidate initializations from the config's seeds.
std::vector<ParameterVector> fogip_candidates(const ModelSpec& spec, const FogipConfig& config);

// For each candidate: train on t with validation-loss tracking on v up to
// max_epochs; instability is the minimum recorded validation loss.
std::vector<double> instabilities(const Dataset& t, const Dataset& v,
                                  const std::vector<ParameterVector>& candidates,
                                  const ModelSpec& spec, const OptimConfig& config, Rng rng);

struct FogipResult {
    ParameterVector good_params;  // the original, untrained candidate
    InstabilityRecord record;
};

// Two-phase swap training over the candidates; returns the candidate with
// minimum summed instability.
FogipResult fogip(const Dataset& s, const FogipConfig& config, const ModelSpec& spec, Rng rng);

}  // namespace lowres
