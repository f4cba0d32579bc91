#include "lowres/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lowres {

namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& s) {
    std::vector<std::vector<std::size_t>> by_class(s.num_classes);
    for (std::size_t i = 0; i < s.size(); ++i) by_class[s.labels[i]].push_back(i);
    return by_class;
}

// Largest-remainder allocation of frac * n_c per class.
std::vector<std::size_t> largest_remainder(const std::vector<std::size_t>& class_counts,
                                           double frac) {
    std::size_t total = 0;
    double target_sum = 0.0;
    std::vector<std::size_t> base(class_counts.size());
    std::vector<double> remainder(class_counts.size());
    for (std::size_t c = 0; c < class_counts.size(); ++c) {
        double target = frac * static_cast<double>(class_counts[c]);
        base[c] = static_cast<std::size_t>(std::floor(target));
        remainder[c] = target - static_cast<double>(base[c]);
        target_sum += target;
        total += base[c];
    }
    auto goal = static_cast<std::size_t>(std::llround(target_sum));
    std::vector<std::size_t> order(class_counts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t c : order) {
        if (total >= goal) break;
        if (base[c] < class_counts[c]) {
            ++base[c];
            ++total;
        }
    }
    return base;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.features = Matrix(indices.size(), features.cols);
    out.labels.reserve(indices.size());
    out.num_classes = num_classes;
    out.name = name;
    out.label_names = label_names;
    for (std::size_t r = 0; r < indices.size(); ++r) {
        auto src = features.row(indices[r]);
        std::copy(src.begin(), src.end(), out.features.row(r).begin());
        out.labels.push_back(labels[indices[r]]);
    }
    return out;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty dataset: " + path);
    auto header = split_line(line);
    std::size_t label_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == "label") {
            label_col = i;
            break;
        }
    }
    if (label_col == header.size())
        throw std::runtime_error("load_csv: missing label column in " + path);

    Dataset ds;
    std::vector<std::vector<double>> rows;
    std::size_t row_no = 0;  // 1-based data row
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row_no;
        auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("load_csv: row " + std::to_string(row_no) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        }
        std::vector<double> feats;
        feats.reserve(header.size() - 1);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_col) continue;
            std::string cell = trim(cells[c]);
            const char* begin = cell.c_str();
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (cell.empty() || end != begin + cell.size()) {
                throw std::runtime_error("load_csv: non-numeric feature cell \"" + cell +
                                         "\" at row " + std::to_string(row_no) + ", column " +
                                         std::to_string(c + 1));
            }
            feats.push_back(v);
        }
        std::string label = trim(cells[label_col]);
        auto it = std::find(ds.label_names.begin(), ds.label_names.end(), label);
        int id;
        if (it == ds.label_names.end()) {
            id = static_cast<int>(ds.label_names.size());
            ds.label_names.push_back(label);
        } else {
            id = static_cast<int>(it - ds.label_names.begin());
        }
        ds.labels.push_back(id);
        rows.push_back(std::move(feats));
    }
    if (rows.empty()) throw std::runtime_error("load_csv: empty dataset: " + path);

    ds.num_classes = static_cast<int>(ds.label_names.size());
    ds.features = Matrix(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(rows[r].begin(), rows[r].end(), ds.features.row(r).begin());

    std::string mapping;
    for (std::size_t i = 0; i < ds.label_names.size(); ++i) {
        if (i) mapping += ",";
        mapping += ds.label_names[i];
    }
    ds.name = "csv:" + path + ";labels=" + mapping;
    return ds;
}

Dataset synth_gaussian(int classes, int dim, const std::vector<std::size_t>& per_class_counts,
                       double separation, double noise, Rng rng) {
    if (classes < 2) throw std::invalid_argument("synth_gaussian: classes must be >= 2");
    if (dim < 1) throw std::invalid_argument("synth_gaussian: dim must be >= 1");
    if (static_cast<int>(per_class_counts.size()) != classes)
        throw std::invalid_argument("synth_gaussian: per_class_counts size mismatch");
    if (!(noise > 0.0)) throw std::invalid_argument("synth_gaussian: noise must be positive");
    for (std::size_t n : per_class_counts)
        if (n < 1) throw std::invalid_argument("synth_gaussian: per-class count must be >= 1");

    // Class directions: Gram-Schmidt over seeded Gaussian draws.
    Rng dir_rng = rng.split("directions");
    std::vector<std::vector<double>> dirs;
    for (int c = 0; c < classes; ++c) {
        std::vector<double> u(dim);
        for (auto& v : u) v = dir_rng.normal();
        for (const auto& prev : dirs) {
            double dot = std::inner_product(u.begin(), u.end(), prev.begin(), 0.0);
            for (int j = 0; j < dim; ++j) u[j] -= dot * prev[j];
        }
        double norm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
        if (norm < 1e-9) {
            // more classes than dimensions; fall back to a raw unit vector
            for (auto& v : u) v = dir_rng.normal();
            norm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
        }
        for (auto& v : u) v /= norm;
        dirs.push_back(std::move(u));
    }

    std::size_t total = std::accumulate(per_class_counts.begin(), per_class_counts.end(),
                                        std::size_t{0});
    Dataset ds;
    ds.num_classes = classes;
    ds.features = Matrix(total, dim);
    ds.labels.reserve(total);
    ds.name = "synth(C=" + std::to_string(classes) + ",d=" + std::to_string(dim) + ")";

    Rng noise_rng = rng.split("noise");
    std::size_t r = 0;
    for (int c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class_counts[c]; ++i, ++r) {
            auto row = ds.features.row(r);
            for (int j = 0; j < dim; ++j)
                row[j] = separation * dirs[c][j] + noise * noise_rng.normal();
            ds.labels.push_back(c);
        }
    }
    return ds;
}

std::pair<Dataset, Dataset> stratified_holdout(const Dataset& s, double train_frac, Rng rng) {
    if (!(train_frac > 0.0 && train_frac < 1.0))
        throw std::invalid_argument("stratified_holdout: train_frac must be in (0,1)");
    auto by_class = indices_by_class(s);
    std::vector<std::size_t> counts;
    counts.reserve(by_class.size());
    for (const auto& v : by_class) counts.push_back(v.size());
    auto take = largest_remainder(counts, train_frac);

    std::vector<std::size_t> train_idx, hold_idx;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        rng.shuffle(by_class[c]);
        for (std::size_t i = 0; i < by_class[c].size(); ++i)
            (i < take[c] ? train_idx : hold_idx).push_back(by_class[c][i]);
    }
    if (train_idx.empty() || hold_idx.empty())
        throw std::runtime_error("stratified_holdout: allocation yields empty part");
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(hold_idx.begin(), hold_idx.end());
    return {s.subset(train_idx), s.subset(hold_idx)};
}

std::vector<Dataset> stratified_kfold(const Dataset& s, int k, Rng rng) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
    if (static_cast<std::size_t>(k) > s.size())
        throw std::invalid_argument("stratified_kfold: k exceeds sample count");

    auto by_class = indices_by_class(s);
    std::vector<std::vector<std::size_t>> fold_idx(k);
    std::vector<std::string> warnings;
    std::size_t cursor = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (!by_class[c].empty() && by_class[c].size() < static_cast<std::size_t>(k))
            warnings.push_back("class " + std::to_string(c) + " has fewer samples than folds");
        rng.shuffle(by_class[c]);
        for (std::size_t idx : by_class[c]) fold_idx[cursor++ % k].push_back(idx);
    }
    std::vector<Dataset> folds;
    folds.reserve(k);
    for (auto& idx : fold_idx) {
        std::sort(idx.begin(), idx.end());
        Dataset f = s.subset(idx);
        f.warnings = warnings;
        folds.push_back(std::move(f));
    }
    return folds;
}

std::vector<std::pair<Dataset, Dataset>> low_resource_protocol(const Dataset& s, double label_frac,
                                                               int repetitions, Rng rng) {
    if (!(label_frac > 0.0 && label_frac < 1.0))
        throw std::invalid_argument("low_resource_protocol: label_frac must be in (0,1)");
    if (repetitions < 1)
        throw std::invalid_argument("low_resource_protocol: repetitions must be >= 1");
    auto pool_size = static_cast<std::size_t>(
        std::llround(label_frac * static_cast<double>(s.size())));
    if (pool_size < static_cast<std::size_t>(s.num_classes))
        throw std::runtime_error("low_resource_protocol: labeled pool smaller than class count");

    std::vector<std::pair<Dataset, Dataset>> out;
    out.reserve(repetitions);
    for (int r = 0; r < repetitions; ++r)
        out.push_back(stratified_holdout(s, label_frac, rng.split(static_cast<std::uint64_t>(r))));
    return out;
}

}  // namespace lowres
