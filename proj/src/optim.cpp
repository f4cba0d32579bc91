#include "lowres/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lowres/metrics.hpp"

namespace lowres {

void OptimConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("OptimConfig: learning_rate must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw std::invalid_argument("OptimConfig: betas must be in [0,1)");
    if (batch_size < 1) throw std::invalid_argument("OptimConfig: batch_size must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("OptimConfig: max_epochs must be >= 1");
}

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               const OptimConfig& config) {
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    ++state.t;
    const double b1 = config.beta1;
    const double b2 = config.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        state.m[k] = b1 * state.m[k] + (1.0 - b1) * grad[k];
        state.v[k] = b2 * state.v[k] + (1.0 - b2) * grad[k] * grad[k];
        double m_hat = state.m[k] / corr1;
        double v_hat = state.v[k] / corr2;
        params[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
}

TrainResult train(const ModelSpec& spec, const ParameterVector& init_params,
                  const Dataset& train_set, const OptimConfig& config,
                  const StopCriterion& criterion, Rng rng, const EpochObserver& on_epoch) {
    config.validate();
    if (train_set.size() == 0) throw std::invalid_argument("train: empty training set");
    if (criterion.kind == StopCriterion::Kind::val_based &&
        (criterion.validation == nullptr || criterion.validation->size() == 0))
        throw std::invalid_argument("train: val_based criterion needs a nonempty validation set");

    TrainResult result;
    result.params = init_params;
    AdamState adam;

    int fixed_stop = 0;
    if (criterion.kind == StopCriterion::Kind::fixed_epoch) {
        fixed_stop = std::min(criterion.stop_epoch, config.max_epochs);
        result.trace.stop_epoch_clamped = criterion.stop_epoch > config.max_epochs;
    }

    Rng shuffle_rng = rng.split("shuffle");
    Rng dropout_rng = rng.split("dropout");

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    // val_based: copy-on-improve snapshot at the earliest argmin epoch
    double best_val = 0.0;
    int best_epoch = 0;
    ParameterVector best_params;

    bool stopped = false;
    for (int epoch = 1; epoch <= config.max_epochs && !stopped; ++epoch) {
        if (config.shuffle) shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            std::size_t n = std::min(config.batch_size, order.size() - start);
            Matrix batch(n, train_set.dim());
            std::vector<int> labels(n);
            for (std::size_t i = 0; i < n; ++i) {
                auto src = train_set.features.row(order[start + i]);
                std::copy(src.begin(), src.end(), batch.row(i).begin());
                labels[i] = train_set.labels[order[start + i]];
            }
            auto [loss, grad] = loss_and_grad(spec, result.params, batch, labels,
                                              ForwardMode::train, &dropout_rng);
            loss_sum += loss * static_cast<double>(n);
            if (config.algorithm == OptAlgorithm::adam) {
                adam_step(adam, result.params.values, grad, config);
            } else {
                for (std::size_t k = 0; k < result.params.values.size(); ++k)
                    result.params.values[k] -= config.learning_rate * grad[k];
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(train_set.size());

        switch (criterion.kind) {
            case StopCriterion::Kind::val_based: {
                double val = cross_entropy(predict(spec, result.params, *criterion.validation));
                rec.val_loss = val;
                if (best_epoch == 0 || val < best_val) {
                    best_val = val;
                    best_epoch = epoch;
                    best_params = result.params;
                }
                break;
            }
            case StopCriterion::Kind::fixed_epoch:
                if (epoch == fixed_stop) {
                    stopped = true;
                    result.trace.stop_epoch = epoch;
                    result.trace.stop_reason = StopReason::pe_schedule;
                }
                break;
            case StopCriterion::Kind::eb: {
                auto [stop, statistic] = eb_should_stop(spec, result.params, train_set, criterion.eb);
                rec.eb_statistic = statistic;
                if (stop) {
                    stopped = true;
                    result.trace.stop_epoch = epoch;
                    result.trace.stop_reason = StopReason::eb_triggered;
                }
                break;
            }
        }
        result.trace.records.push_back(rec);
        if (on_epoch) on_epoch(epoch, result.params);
    }

    if (!stopped) {
        if (criterion.kind == StopCriterion::Kind::val_based) {
            result.trace.stop_epoch = best_epoch;
            result.trace.stop_reason = StopReason::val_min;
            result.params = std::move(best_params);
        } else {
            result.trace.stop_epoch = config.max_epochs;
            result.trace.stop_reason = StopReason::max_epochs_cap;
        }
    }
    return result;
}

}  // namespace lowres
