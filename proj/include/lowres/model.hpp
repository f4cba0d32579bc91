#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lowres/data.hpp"
#include "lowres/numerics.hpp"

namespace lowres {

enum class ModelKind { logistic, mlp };

struct ModelSpec {
    ModelKind kind = ModelKind::logistic;
    int input_dim = 0;
    int num_classes = 0;
    int hidden_dim = 0;          // mlp only
    double dropout_rate = 0.0;   // applied to hidden activations in train mode

    void validate() const;
};

enum class ForwardMode { train, eval };

struct ParamBlock {
    std::string name;
    std::size_t offset;
    std::size_t rows;
    std::size_t cols;  // 1 for bias vectors

    std::size_t size() const { return rows * cols; }
};

// Flat parameter vector with a named block layout.
struct ParameterVector {
    std::vector<double> values;
    std::vector<ParamBlock> layout;

    std::size_t dim() const { return values.size(); }
    const ParamBlock& block(const std::string& name) const;
};

struct PredictionSet {
    Matrix probabilities;              // |S| x C
    std::vector<int> predicted_labels; // per-row argmax, ties to lowest index
    std::vector<int> true_labels;

    std::size_t size() const { return true_labels.size(); }
};

std::size_t param_dim(const ModelSpec& spec);
std::vector<ParamBlock> param_layout(const ModelSpec& spec);

// Uniform fan-scaled weights in [-a, a], a = sqrt(6 / (fan_in + fan_out));
// zero biases. Deterministic in the rng.
ParameterVector init_params(const ModelSpec& spec, Rng rng);

// Logits for a batch. Train mode applies inverted dropout to the hidden
// activations (mlp); eval mode is deterministic.
Matrix forward(const ModelSpec& spec, const ParameterVector& params, const Matrix& features,
               ForwardMode mode, Rng* rng = nullptr);

// Mean cross-entropy over the batch and the exact gradient w.r.t. the
// flat parameter vector.
std::pair<double, std::vector<double>> loss_and_grad(const ModelSpec& spec,
                                                     const ParameterVector& params,
                                                     const Matrix& features,
                                                     const std::vector<int>& labels,
                                                     ForwardMode mode, Rng* rng = nullptr);

// Streams the per-sample gradient (eval mode, no dropout) to the visitor.
void per_sample_grads(const ModelSpec& spec, const ParameterVector& params, const Matrix& features,
                      const std::vector<int>& labels,
                      const std::function<void(std::span<const double>)>& visit);

// Eval-mode class probabilities and argmax labels for a dataset.
PredictionSet predict(const ModelSpec& spec, const ParameterVector& params, const Dataset& data);

}  // namespace lowres
