#include "lowres/stopping.hpp"

#include <cmath>

namespace lowres {

GradientStats gradient_stats(
    std::size_t dim,
    const std::function<void(const std::function<void(std::span<const double>)>&)>& stream,
    double var_epsilon) {
    std::vector<double> sum(dim, 0.0);
    std::vector<double> sum_sq(dim, 0.0);
    std::size_t n = 0;
    stream([&](std::span<const double> g) {
        ++n;
        for (std::size_t k = 0; k < dim; ++k) {
            sum[k] += g[k];
            sum_sq[k] += g[k] * g[k];
        }
    });
    if (n < 2) throw std::invalid_argument("gradient_stats: variance estimator undefined for |S| < 2");

    GradientStats stats;
    stats.sample_count = n;
    stats.var_epsilon = var_epsilon;
    stats.mean_grad.resize(dim);
    stats.variance.resize(dim);
    const auto nd = static_cast<double>(n);
    for (std::size_t k = 0; k < dim; ++k) {
        double mean = sum[k] / nd;
        stats.mean_grad[k] = mean;
        double var = (sum_sq[k] - nd * mean * mean) / (nd - 1.0);
        stats.variance[k] = std::max(var, 0.0);
        if (stats.variance[k] >= var_epsilon) ++stats.effective_dims;
    }
    return stats;
}

GradientStats gradient_stats(const ModelSpec& spec, const ParameterVector& params,
                             const Dataset& sample_set, double var_epsilon) {
    return gradient_stats(
        params.dim(),
        [&](const std::function<void(std::span<const double>)>& visit) {
            per_sample_grads(spec, params, sample_set.features, sample_set.labels, visit);
        },
        var_epsilon);
}

double eb_statistic(const GradientStats& stats) {
    if (stats.effective_dims == 0) return 1.0;  // degenerate convergence
    double sum = 0.0;
    for (std::size_t k = 0; k < stats.mean_grad.size(); ++k) {
        if (stats.variance[k] < stats.var_epsilon) continue;
        sum += stats.mean_grad[k] * stats.mean_grad[k] / stats.variance[k];
    }
    return 1.0 - static_cast<double>(stats.sample_count) /
                     static_cast<double>(stats.effective_dims) * sum;
}

std::pair<bool, double> eb_should_stop(const ModelSpec& spec, const ParameterVector& params,
                                       const Dataset& train_set, const EbConfig& config) {
    GradientStats stats = gradient_stats(spec, params, train_set, config.var_epsilon);
    double statistic = eb_statistic(stats);
    return {statistic > 0.0, statistic};
}

StopCriterion val_based_criterion(const Dataset& validation) {
    if (validation.size() == 0)
        throw std::invalid_argument("val_based_criterion: empty validation set");
    StopCriterion c;
    c.kind = StopCriterion::Kind::val_based;
    c.validation = &validation;
    return c;
}

StopCriterion fixed_epoch_criterion(int stop_epoch) {
    if (stop_epoch < 1) throw std::invalid_argument("fixed_epoch_criterion: stop_epoch must be >= 1");
    StopCriterion c;
    c.kind = StopCriterion::Kind::fixed_epoch;
    c.stop_epoch = stop_epoch;
    return c;
}

StopCriterion eb_criterion(EbConfig config) {
    StopCriterion c;
    c.kind = StopCriterion::Kind::eb;
    c.eb = config;
    return c;
}

}  // namespace lowres
