#include "lowres/model.hpp"

#include <algorithm>
#include <cmath>

namespace lowres {

namespace {

constexpr double kProbFloor = 1e-300;

struct Scratch {
    std::vector<double> logits;
    std::vector<double> probs;
    std::vector<double> tanh_act;   // pre-mask tanh activations
    std::vector<double> hidden;     // post-mask activations
    std::vector<double> mask;
    std::vector<double> d_hidden;
};

// One sample: forward (and optionally backward into grad_accum, unscaled).
// mask is empty in eval mode or for logistic models.
void sample_pass(const ModelSpec& spec, const ParameterVector& params, std::span<const double> x,
                 int label, std::span<const double> mask, Scratch& s, double* loss_out,
                 std::vector<double>* grad_accum) {
    const int d = spec.input_dim;
    const int c_n = spec.num_classes;
    const double* p = params.values.data();

    s.logits.assign(c_n, 0.0);
    if (spec.kind == ModelKind::logistic) {
        // W: C x d at 0, b: C at C*d
        const double* w = p;
        const double* b = p + static_cast<std::size_t>(c_n) * d;
        for (int c = 0; c < c_n; ++c) {
            double z = b[c];
            const double* wr = w + static_cast<std::size_t>(c) * d;
            for (int j = 0; j < d; ++j) z += wr[j] * x[j];
            s.logits[c] = z;
        }
    } else {
        const int h = spec.hidden_dim;
        const double* w1 = p;
        const double* b1 = w1 + static_cast<std::size_t>(h) * d;
        const double* w2 = b1 + h;
        const double* b2 = w2 + static_cast<std::size_t>(c_n) * h;
        s.tanh_act.resize(h);
        s.hidden.resize(h);
        for (int k = 0; k < h; ++k) {
            double a = b1[k];
            const double* wr = w1 + static_cast<std::size_t>(k) * d;
            for (int j = 0; j < d; ++j) a += wr[j] * x[j];
            s.tanh_act[k] = std::tanh(a);
            s.hidden[k] = mask.empty() ? s.tanh_act[k] : s.tanh_act[k] * mask[k];
        }
        for (int c = 0; c < c_n; ++c) {
            double z = b2[c];
            const double* wr = w2 + static_cast<std::size_t>(c) * h;
            for (int k = 0; k < h; ++k) z += wr[k] * s.hidden[k];
            s.logits[c] = z;
        }
    }

    s.probs.resize(c_n);
    softmax_into(s.logits, s.probs);
    if (loss_out) *loss_out = -std::log(std::max(s.probs[label], kProbFloor));
    if (!grad_accum) return;

    // dL/dz = p - onehot
    std::vector<double>& dz = s.probs;
    dz[label] -= 1.0;

    double* g = grad_accum->data();
    if (spec.kind == ModelKind::logistic) {
        double* gw = g;
        double* gb = g + static_cast<std::size_t>(c_n) * d;
        for (int c = 0; c < c_n; ++c) {
            double* gr = gw + static_cast<std::size_t>(c) * d;
            for (int j = 0; j < d; ++j) gr[j] += dz[c] * x[j];
            gb[c] += dz[c];
        }
    } else {
        const int h = spec.hidden_dim;
        const double* w2 = p + static_cast<std::size_t>(h) * d + h;
        double* gw1 = g;
        double* gb1 = gw1 + static_cast<std::size_t>(h) * d;
        double* gw2 = gb1 + h;
        double* gb2 = gw2 + static_cast<std::size_t>(c_n) * h;

        s.d_hidden.assign(h, 0.0);
        for (int c = 0; c < c_n; ++c) {
            double* gr = gw2 + static_cast<std::size_t>(c) * h;
            const double* wr = w2 + static_cast<std::size_t>(c) * h;
            for (int k = 0; k < h; ++k) {
                gr[k] += dz[c] * s.hidden[k];
                s.d_hidden[k] += dz[c] * wr[k];
            }
            gb2[c] += dz[c];
        }
        for (int k = 0; k < h; ++k) {
            double dt = mask.empty() ? s.d_hidden[k] : s.d_hidden[k] * mask[k];
            double da = dt * (1.0 - s.tanh_act[k] * s.tanh_act[k]);
            double* gr = gw1 + static_cast<std::size_t>(k) * d;
            for (int j = 0; j < d; ++j) gr[j] += da * x[j];
            gb1[k] += da;
        }
    }
}

void draw_mask(const ModelSpec& spec, Rng& rng, std::vector<double>& mask) {
    const double keep = 1.0 - spec.dropout_rate;
    mask.resize(spec.hidden_dim);
    for (auto& m : mask) m = (rng.next_double() < keep) ? 1.0 / keep : 0.0;
}

bool uses_dropout(const ModelSpec& spec, ForwardMode mode) {
    return mode == ForwardMode::train && spec.kind == ModelKind::mlp && spec.dropout_rate > 0.0;
}

void check_batch(const ModelSpec& spec, const Matrix& features) {
    if (features.cols != static_cast<std::size_t>(spec.input_dim))
        throw std::invalid_argument("model: feature dimension mismatch");
}

}  // namespace

void ModelSpec::validate() const {
    if (num_classes < 2) throw std::invalid_argument("ModelSpec: num_classes must be >= 2");
    if (input_dim < 1) throw std::invalid_argument("ModelSpec: input_dim must be >= 1");
    if (kind == ModelKind::mlp && hidden_dim < 1)
        throw std::invalid_argument("ModelSpec: hidden_dim must be >= 1 for mlp");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw std::invalid_argument("ModelSpec: dropout_rate must be in [0,1)");
}

const ParamBlock& ParameterVector::block(const std::string& name) const {
    for (const auto& b : layout)
        if (b.name == name) return b;
    throw std::invalid_argument("ParameterVector: no block named " + name);
}

std::vector<ParamBlock> param_layout(const ModelSpec& spec) {
    spec.validate();
    const auto d = static_cast<std::size_t>(spec.input_dim);
    const auto c = static_cast<std::size_t>(spec.num_classes);
    std::vector<ParamBlock> layout;
    if (spec.kind == ModelKind::logistic) {
        layout.push_back({"W", 0, c, d});
        layout.push_back({"b", c * d, c, 1});
    } else {
        const auto h = static_cast<std::size_t>(spec.hidden_dim);
        std::size_t off = 0;
        layout.push_back({"W1", off, h, d});
        off += h * d;
        layout.push_back({"b1", off, h, 1});
        off += h;
        layout.push_back({"W2", off, c, h});
        off += c * h;
        layout.push_back({"b2", off, c, 1});
    }
    return layout;
}

std::size_t param_dim(const ModelSpec& spec) {
    std::size_t n = 0;
    for (const auto& b : param_layout(spec)) n += b.size();
    return n;
}

ParameterVector init_params(const ModelSpec& spec, Rng rng) {
    ParameterVector pv;
    pv.layout = param_layout(spec);
    pv.values.assign(param_dim(spec), 0.0);
    for (const auto& b : pv.layout) {
        if (b.cols == 1) continue;  // bias
        // fan_in = cols, fan_out = rows
        double a = std::sqrt(6.0 / static_cast<double>(b.rows + b.cols));
        for (std::size_t i = 0; i < b.size(); ++i)
            pv.values[b.offset + i] = rng.uniform(-a, a);
    }
    return pv;
}

Matrix forward(const ModelSpec& spec, const ParameterVector& params, const Matrix& features,
               ForwardMode mode, Rng* rng) {
    check_batch(spec, features);
    const bool dropout = uses_dropout(spec, mode);
    if (dropout && !rng) throw std::invalid_argument("forward: train-mode dropout needs an rng");

    Matrix logits(features.rows, spec.num_classes);
    Scratch s;
    std::vector<double> mask;
    for (std::size_t i = 0; i < features.rows; ++i) {
        if (dropout) draw_mask(spec, *rng, mask);
        sample_pass(spec, params, features.row(i), 0,
                    dropout ? std::span<const double>(mask) : std::span<const double>{}, s,
                    nullptr, nullptr);
        std::copy(s.logits.begin(), s.logits.end(), logits.row(i).begin());
    }
    return logits;
}

std::pair<double, std::vector<double>> loss_and_grad(const ModelSpec& spec,
                                                     const ParameterVector& params,
                                                     const Matrix& features,
                                                     const std::vector<int>& labels,
                                                     ForwardMode mode, Rng* rng) {
    check_batch(spec, features);
    if (labels.empty() || features.rows != labels.size())
        throw std::invalid_argument("loss_and_grad: empty batch or label count mismatch");
    for (int y : labels)
        if (y < 0 || y >= spec.num_classes)
            throw std::invalid_argument("loss_and_grad: label out of range");
    const bool dropout = uses_dropout(spec, mode);
    if (dropout && !rng) throw std::invalid_argument("loss_and_grad: train-mode dropout needs an rng");

    std::vector<double> grad(params.dim(), 0.0);
    Scratch s;
    std::vector<double> mask;
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < features.rows; ++i) {
        if (dropout) draw_mask(spec, *rng, mask);
        double loss = 0.0;
        sample_pass(spec, params, features.row(i), labels[i],
                    dropout ? std::span<const double>(mask) : std::span<const double>{}, s, &loss,
                    &grad);
        loss_sum += loss;
    }
    const double inv_n = 1.0 / static_cast<double>(features.rows);
    for (auto& g : grad) g *= inv_n;
    return {loss_sum * inv_n, std::move(grad)};
}

void per_sample_grads(const ModelSpec& spec, const ParameterVector& params, const Matrix& features,
                      const std::vector<int>& labels,
                      const std::function<void(std::span<const double>)>& visit) {
    check_batch(spec, features);
    if (labels.empty() || features.rows != labels.size())
        throw std::invalid_argument("per_sample_grads: empty sample set or label count mismatch");

    Scratch s;
    std::vector<double> grad(params.dim());
    for (std::size_t i = 0; i < features.rows; ++i) {
        std::fill(grad.begin(), grad.end(), 0.0);
        sample_pass(spec, params, features.row(i), labels[i], {}, s, nullptr, &grad);
        visit(grad);
    }
}

PredictionSet predict(const ModelSpec& spec, const ParameterVector& params, const Dataset& data) {
    Matrix logits = forward(spec, params, data.features, ForwardMode::eval);
    PredictionSet out;
    out.probabilities = Matrix(logits.rows, logits.cols);
    out.predicted_labels.reserve(logits.rows);
    out.true_labels = data.labels;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        softmax_into(logits.row(i), out.probabilities.row(i));
        auto row = out.probabilities.row(i);
        int best = 0;
        for (std::size_t c = 1; c < row.size(); ++c)
            if (row[c] > row[best]) best = static_cast<int>(c);
        out.predicted_labels.push_back(best);
    }
    return out;
}

}  // namespace lowres
