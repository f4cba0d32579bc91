#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "lowres/data.hpp"
#include "lowres/model.hpp"

namespace lowres {

// Per-coordinate mean and unbiased variance of per-sample gradients.
struct GradientStats {
    std::size_t sample_count = 0;
    std::vector<double> mean_grad;
    std::vector<double> variance;
    double var_epsilon = 1e-12;      // exclusion threshold applied below
    std::size_t effective_dims = 0;  // coordinates with variance >= var_epsilon
};

struct EbConfig {
    double var_epsilon = 1e-12;
};

// Streaming mean/variance from sums of g and g^2; variance clamped at 0.
// Requires at least two samples.
GradientStats gradient_stats(
    std::size_t dim, const std::function<void(const std::function<void(std::span<const double>)>&)>& stream,
    double var_epsilon = 1e-12);

GradientStats gradient_stats(const ModelSpec& spec, const ParameterVector& params,
                             const Dataset& sample_set, double var_epsilon = 1e-12);

// 1 - (|S| / D_eff) * sum over effective coordinates of mean^2 / variance.
// Zero-variance coordinates are excluded from both the sum and D_eff;
// D_eff = 0 degenerates to +1 (stop).
double eb_statistic(const GradientStats& stats);

// Positive statistic means stop. Dropout is disabled for the gradient pass.
std::pair<bool, double> eb_should_stop(const ModelSpec& spec, const ParameterVector& params,
                                       const Dataset& train_set, const EbConfig& config = {});

enum class StopReason { val_min, eb_triggered, pe_schedule, max_epochs_cap };

// Tagged criterion consumed by the training loop.
struct StopCriterion {
    enum class Kind { val_based, fixed_epoch, eb };
    Kind kind = Kind::fixed_epoch;
    const Dataset* validation = nullptr;  // val_based
    int stop_epoch = 0;                   // fixed_epoch
    EbConfig eb;
};

// Trains to max_epochs, then restores the parameters of the epoch with
// minimum validation loss (earliest on ties).
StopCriterion val_based_criterion(const Dataset& validation);

// Fires exactly at stop_epoch (clamped to max_epochs, flagged in the trace).
StopCriterion fixed_epoch_criterion(int stop_epoch);

StopCriterion eb_criterion(EbConfig config = {});

}  // namespace lowres
