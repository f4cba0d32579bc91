#include "lowres/fogip.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lowres {

void FogipConfig::validate() const {
    if (candidate_seeds.empty()) throw std::invalid_argument("FogipConfig: need at least one candidate");
    std::set<std::uint64_t> uniq(candidate_seeds.begin(), candidate_seeds.end());
    if (uniq.size() != candidate_seeds.size())
        throw std::invalid_argument("FogipConfig: candidate seeds must be distinct");
}

std::pair<Dataset, Dataset> split_half(const Dataset& s, Rng rng) {
    std::vector<std::size_t> per_class(s.num_classes, 0);
    for (int y : s.labels) ++per_class[y];
    for (int c = 0; c < s.num_classes; ++c)
        if (per_class[c] < 2)
            throw std::runtime_error("split_half: class " + std::to_string(c) +
                                     " has fewer than 2 samples");
    return stratified_holdout(s, 0.5, rng);
}

std::vector<ParameterVector> fogip_candidates(const ModelSpec& spec, const FogipConfig& config) {
    config.validate();
    std::vector<ParameterVector> candidates;
    candidates.reserve(config.candidate_seeds.size());

    if (!config.output_block_only) {
        for (auto seed : config.candidate_seeds)
            candidates.push_back(init_params(spec, Rng(seed)));
        return candidates;
    }

    // Shared trunk; only the output-layer weight block varies per seed.
    ParameterVector base = init_params(spec, Rng(config.base_seed));
    const std::string out_block = spec.kind == ModelKind::mlp ? "W2" : "W";
    const std::string out_bias = spec.kind == ModelKind::mlp ? "b2" : "b";
    for (auto seed : config.candidate_seeds) {
        ParameterVector p = base;
        Rng rng(seed);
        const auto& w = p.block(out_block);
        double a = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
        for (std::size_t i = 0; i < w.size(); ++i) p.values[w.offset + i] = rng.uniform(-a, a);
        const auto& b = p.block(out_bias);
        for (std::size_t i = 0; i < b.size(); ++i) p.values[b.offset + i] = 0.0;
        candidates.push_back(std::move(p));
    }
    return candidates;
}

std::vector<double> instabilities(const Dataset& t, const Dataset& v,
                                  const std::vector<ParameterVector>& candidates,
                                  const ModelSpec& spec, const OptimConfig& config, Rng rng) {
    if (t.size() == 0 || v.size() == 0)
        throw std::invalid_argument("instabilities: empty training or validation set");
    if (candidates.empty()) throw std::invalid_argument("instabilities: no candidates");

    std::vector<double> out;
    out.reserve(candidates.size());
    StopCriterion crit = val_based_criterion(v);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        TrainResult run =
            train(spec, candidates[i], t, config, crit, rng.split(static_cast<std::uint64_t>(i)));
        double min_val = *run.trace.records.front().val_loss;
        for (const auto& rec : run.trace.records) min_val = std::min(min_val, *rec.val_loss);
        out.push_back(min_val);
    }
    return out;
}

FogipResult fogip(const Dataset& s, const FogipConfig& config, const ModelSpec& spec, Rng rng) {
    config.validate();
    auto [half_a, half_b] = split_half(s, rng.split("half"));
    auto candidates = fogip_candidates(spec, config);

    FogipResult result;
    result.record.phase_a =
        instabilities(half_a, half_b, candidates, spec, config.optim, rng.split("phase_a"));
    result.record.phase_b =
        instabilities(half_b, half_a, candidates, spec, config.optim, rng.split("phase_b"));
    result.record.total.resize(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        result.record.total[i] = result.record.phase_a[i] + result.record.phase_b[i];
    result.record.selected = static_cast<std::size_t>(
        std::min_element(result.record.total.begin(), result.record.total.end()) -
        result.record.total.begin());
    result.good_params = candidates[result.record.selected];
    return result;
}

}  // namespace lowres
