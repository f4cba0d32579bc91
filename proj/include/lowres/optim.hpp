#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lowres/stopping.hpp"

namespace lowres {

enum class OptAlgorithm { adam, sgd };

struct OptimConfig {
    OptAlgorithm algorithm = OptAlgorithm::adam;
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch_size = 32;
    int max_epochs = 200;
    bool shuffle = true;

    void validate() const;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long long t = 0;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_loss;
    std::optional<double> eb_statistic;
};

struct TrainingTrace {
    std::vector<EpochRecord> records;
    int stop_epoch = 0;
    StopReason stop_reason = StopReason::max_epochs_cap;
    bool stop_epoch_clamped = false;  // fixed criterion beyond max_epochs
};

struct TrainResult {
    ParameterVector params;
    TrainingTrace trace;
};

// Bias-corrected Adam update; params modified in place.
void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               const OptimConfig& config);

// Mini-batch training with seeded per-epoch shuffling. The criterion is
// evaluated at epoch boundaries; restore rule: val_based returns the
// minimum-validation-loss snapshot, fixed_epoch and eb return the
// parameters at the stop epoch.
// on_epoch, when given, observes the parameters after every trained epoch.
using EpochObserver = std::function<void(int epoch, const ParameterVector& params)>;

TrainResult train(const ModelSpec& spec, const ParameterVector& init_params,
                  const Dataset& train_set, const OptimConfig& config,
                  const StopCriterion& criterion, Rng rng, const EpochObserver& on_epoch = {});

}  // namespace lowres
