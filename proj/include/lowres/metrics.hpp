#pragma once

#include <vector>

#include "lowres/model.hpp"

namespace lowres {

struct CalibrationBin {
    std::size_t count = 0;
    double accuracy = 0.0;    // Acc(B_m), 0 for empty bins
    double confidence = 0.0;  // Conf(B_m), 0 for empty bins
};

// Confidence bins over ((m-1)/M, m/M], m = 1..M.
struct CalibrationBins {
    int num_bins = 0;
    std::size_t total = 0;
    std::vector<CalibrationBin> bins;
};

struct ConfidenceHistogram {
    std::vector<std::size_t> counts;
    double mean_confidence = 0.0;
    double accuracy = 0.0;
    double gap = 0.0;  // mean_confidence - accuracy
};

struct MetricReport {
    double accuracy = 0.0;
    double loss = 0.0;
    double ece = 0.0;
    double oe = 0.0;
    CalibrationBins bins;
};

double accuracy(const PredictionSet& pred);

// Mean categorical cross-entropy; probabilities floored at 1e-300.
double cross_entropy(const PredictionSet& pred);

CalibrationBins calibration_bins(const PredictionSet& pred, int num_bins);

// Bin-weighted |Acc - Conf|.
double ece(const CalibrationBins& bins);

// Bin-weighted Conf * max(Conf - Acc, 0).
double oe(const CalibrationBins& bins);

ConfidenceHistogram confidence_histogram(const PredictionSet& pred, int num_bins);

MetricReport evaluate(const PredictionSet& pred, int num_bins);

}  // namespace lowres
