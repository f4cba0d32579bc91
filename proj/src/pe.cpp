#include "lowres/pe.hpp"

#include <algorithm>
#include <cmath>

namespace lowres {

namespace {

Dataset concat(const std::vector<const Dataset*>& parts) {
    Dataset out;
    std::size_t total = 0;
    for (const auto* p : parts) total += p->size();
    out.features = Matrix(total, parts[0]->dim());
    out.labels.reserve(total);
    out.num_classes = parts[0]->num_classes;
    out.name = parts[0]->name;
    out.label_names = parts[0]->label_names;
    std::size_t r = 0;
    for (const auto* p : parts) {
        for (std::size_t i = 0; i < p->size(); ++i, ++r) {
            auto src = p->features.row(i);
            std::copy(src.begin(), src.end(), out.features.row(r).begin());
            out.labels.push_back(p->labels[i]);
        }
    }
    return out;
}

}  // namespace

int pe_round(const std::vector<int>& fold_stop_epochs, int max_epochs) {
    if (fold_stop_epochs.empty()) throw std::invalid_argument("pe_round: no fold stop epochs");
    double sum = 0.0;
    for (int e : fold_stop_epochs) sum += static_cast<double>(e);
    double mean = sum / static_cast<double>(fold_stop_epochs.size());
    int rounded = static_cast<int>(std::floor(mean + 0.5));  // round half up
    return std::clamp(rounded, 1, max_epochs);
}

PeResult estimate_pe_stop_epoch(const ModelSpec& spec, const Dataset& sample_set, int k,
                                const OptimConfig& config, Rng rng) {
    if (k < 2) throw std::invalid_argument("estimate_pe_stop_epoch: k must be >= 2");
    auto folds = stratified_kfold(sample_set, k, rng.split("folds"));

    PeResult result;
    if (!folds.empty()) result.warnings = folds[0].warnings;
    for (int i = 0; i < k; ++i) {
        std::vector<const Dataset*> train_parts;
        for (int j = 0; j < k; ++j)
            if (j != i) train_parts.push_back(&folds[j]);
        Dataset train_set = concat(train_parts);

        Rng run_rng = rng.split("fold_run").split(static_cast<std::uint64_t>(i));
        ParameterVector init = init_params(spec, run_rng.split("init"));
        StopCriterion crit = val_based_criterion(folds[i]);
        TrainResult run = train(spec, init, train_set, config, crit, run_rng.split("train"));
        result.fold_stop_epochs.push_back(run.trace.stop_epoch);
    }
    result.pe_stop_epoch = pe_round(result.fold_stop_epochs, config.max_epochs);
    return result;
}

}  // namespace lowres
