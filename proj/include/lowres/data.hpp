#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lowres/numerics.hpp"

namespace lowres {

// Feature matrix with integer labels in [0, num_classes).
struct Dataset {
    Matrix features;               // |S| x d
    std::vector<int> labels;       // |S|
    int num_classes = 0;
    std::string name;
    std::vector<std::string> label_names;  // original labels, first-appearance order (CSV only)
    std::vector<std::string> warnings;     // e.g. classes absent from some fold

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols; }

    Dataset subset(const std::vector<std::size_t>& indices) const;
};

// CSV with a header row and a `label` column; every other column is a
// numeric feature. Labels are mapped to contiguous integers by first
// appearance. Throws std::runtime_error with row/column positions.
Dataset load_csv(const std::string& path);

// Gaussian blobs: class c is centered at separation * u_c for fixed
// near-orthonormal directions u_c derived from the rng, with isotropic
// noise of the given sigma.
Dataset synth_gaussian(int classes, int dim, const std::vector<std::size_t>& per_class_counts,
                       double separation, double noise, Rng rng);

// Stratified split with largest-remainder per-class allocation.
std::pair<Dataset, Dataset> stratified_holdout(const Dataset& s, double train_frac, Rng rng);

// Stratified k folds: disjoint, union = s, per-class counts across folds
// differ by at most 1. A class smaller than k triggers a recorded warning.
std::vector<Dataset> stratified_kfold(const Dataset& s, int k, Rng rng);

// R independent (labeled pool, test) stratified splits with label_frac of
// the samples in the pool.
std::vector<std::pair<Dataset, Dataset>> low_resource_protocol(const Dataset& s, double label_frac,
                                                               int repetitions, Rng rng);

}  // namespace lowres
