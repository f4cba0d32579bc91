#include "lowres/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace lowres {

namespace {

double row_confidence(const PredictionSet& pred, std::size_t i) {
    auto row = pred.probabilities.row(i);
    return *std::max_element(row.begin(), row.end());
}

// bin index for Eq-style ranges ((m-1)/M, m/M], 0-based result
int bin_index(double confidence, int num_bins) {
    int m = static_cast<int>(std::ceil(confidence * num_bins));
    return std::clamp(m, 1, num_bins) - 1;
}

}  // namespace

double accuracy(const PredictionSet& pred) {
    if (pred.size() == 0) throw std::invalid_argument("accuracy: empty prediction set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred.predicted_labels[i] == pred.true_labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double cross_entropy(const PredictionSet& pred) {
    if (pred.size() == 0) throw std::invalid_argument("cross_entropy: empty prediction set");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double p = pred.probabilities(i, pred.true_labels[i]);
        sum += -std::log(std::max(p, 1e-300));
    }
    return sum / static_cast<double>(pred.size());
}

CalibrationBins calibration_bins(const PredictionSet& pred, int num_bins) {
    if (num_bins < 1) throw std::invalid_argument("calibration_bins: M must be >= 1");
    CalibrationBins out;
    out.num_bins = num_bins;
    out.total = pred.size();
    out.bins.assign(num_bins, {});
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double conf = row_confidence(pred, i);
        auto& b = out.bins[bin_index(conf, num_bins)];
        ++b.count;
        b.confidence += conf;
        if (pred.predicted_labels[i] == pred.true_labels[i]) b.accuracy += 1.0;
    }
    for (auto& b : out.bins) {
        if (b.count == 0) continue;
        b.confidence /= static_cast<double>(b.count);
        b.accuracy /= static_cast<double>(b.count);
    }
    return out;
}

double ece(const CalibrationBins& bins) {
    if (bins.total == 0) return 0.0;
    double sum = 0.0;
    for (const auto& b : bins.bins)
        sum += static_cast<double>(b.count) / static_cast<double>(bins.total) *
               std::abs(b.accuracy - b.confidence);
    return sum;
}

double oe(const CalibrationBins& bins) {
    if (bins.total == 0) return 0.0;
    double sum = 0.0;
    for (const auto& b : bins.bins)
        sum += static_cast<double>(b.count) / static_cast<double>(bins.total) * b.confidence *
               std::max(b.confidence - b.accuracy, 0.0);
    return sum;
}

ConfidenceHistogram confidence_histogram(const PredictionSet& pred, int num_bins) {
    if (num_bins < 1) throw std::invalid_argument("confidence_histogram: M must be >= 1");
    ConfidenceHistogram out;
    out.counts.assign(num_bins, 0);
    double conf_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double conf = row_confidence(pred, i);
        ++out.counts[bin_index(conf, num_bins)];
        conf_sum += conf;
        if (pred.predicted_labels[i] == pred.true_labels[i]) ++correct;
    }
    if (pred.size() > 0) {
        out.mean_confidence = conf_sum / static_cast<double>(pred.size());
        out.accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());
    }
    out.gap = out.mean_confidence - out.accuracy;
    return out;
}

MetricReport evaluate(const PredictionSet& pred, int num_bins) {
    MetricReport r;
    r.accuracy = accuracy(pred);
    r.loss = cross_entropy(pred);
    r.bins = calibration_bins(pred, num_bins);
    r.ece = ece(r.bins);
    r.oe = oe(r.bins);
    return r;
}

}  // namespace lowres
