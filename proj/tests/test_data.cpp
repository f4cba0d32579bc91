#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "lowres/data.hpp"

using namespace lowres;

namespace {

std::string write_temp(const std::string& content) {
    static int counter = 0;
    auto path = std::filesystem::temp_directory_path() /
                ("lowres_test_" + std::to_string(counter++) + ".csv");
    std::ofstream out(path);
    out << content;
    return path.string();
}

std::vector<std::size_t> class_counts(const Dataset& ds) {
    std::vector<std::size_t> counts(ds.num_classes, 0);
    for (int y : ds.labels) ++counts[y];
    return counts;
}

// multiset of rows identified by (first feature, label)
std::multiset<std::pair<double, int>> row_keys(const Dataset& ds) {
    std::multiset<std::pair<double, int>> keys;
    for (std::size_t i = 0; i < ds.size(); ++i) keys.insert({ds.features(i, 0), ds.labels[i]});
    return keys;
}

}  // namespace

TEST_CASE("load_csv maps labels by first appearance") {
    auto path = write_temp("f1,label,f2\n1.0,a,2.0\n3.0,b,4.0\n5.0,a,6.0\n");
    Dataset ds = load_csv(path);
    CHECK(ds.num_classes == 2);
    CHECK(ds.labels == std::vector<int>{0, 1, 0});
    CHECK(ds.features(0, 0) == 1.0);
    CHECK(ds.features(0, 1) == 2.0);
    CHECK(ds.label_names == std::vector<std::string>{"a", "b"});
    std::remove(path.c_str());
}

TEST_CASE("load_csv error paths") {
    auto empty = write_temp("f1,f2,label\n");
    CHECK_THROWS_WITH_AS(load_csv(empty), doctest::Contains("empty dataset"), std::runtime_error);
    std::remove(empty.c_str());

    auto nolabel = write_temp("f1,f2\n1,2\n");
    CHECK_THROWS_WITH_AS(load_csv(nolabel), doctest::Contains("missing label column"),
                         std::runtime_error);
    std::remove(nolabel.c_str());

    auto bad = write_temp("f1,f2,label\n1,2,a\n1,x,b\n");
    CHECK_THROWS_WITH_AS(load_csv(bad), doctest::Contains("row 2, column 2"), std::runtime_error);
    std::remove(bad.c_str());
}

TEST_CASE("synth_gaussian determinism and counts") {
    auto a = synth_gaussian(2, 5, {10, 20}, 1.5, 1.0, Rng(3));
    auto b = synth_gaussian(2, 5, {10, 20}, 1.5, 1.0, Rng(3));
    CHECK(a.features.data == b.features.data);
    CHECK(a.labels == b.labels);
    CHECK(a.size() == 30);
    auto counts = class_counts(a);
    CHECK(counts[0] == 10);
    CHECK(counts[1] == 20);
}

TEST_CASE("stratified_holdout largest remainder") {
    auto ds = synth_gaussian(2, 3, {50, 50}, 1.0, 1.0, Rng(1));
    auto [train, hold] = stratified_holdout(ds, 0.75, Rng(2));
    CHECK(train.size() == 75);
    CHECK(hold.size() == 25);
    auto counts = class_counts(train);
    CHECK(counts[0] + counts[1] == 75);
    CHECK(std::abs(static_cast<long>(counts[0]) - 38) <= 1);

    auto even = synth_gaussian(2, 3, {4, 4}, 1.0, 1.0, Rng(1));
    auto [t2, h2] = stratified_holdout(even, 0.5, Rng(2));
    CHECK(class_counts(t2) == std::vector<std::size_t>{2, 2});
    CHECK(class_counts(h2) == std::vector<std::size_t>{2, 2});
}

TEST_CASE("stratified_holdout is deterministic and partitions") {
    auto ds = synth_gaussian(3, 4, {11, 7, 5}, 1.0, 1.0, Rng(9));
    auto [a1, b1] = stratified_holdout(ds, 0.6, Rng(5));
    auto [a2, b2] = stratified_holdout(ds, 0.6, Rng(5));
    CHECK(a1.features.data == a2.features.data);
    CHECK(b1.labels == b2.labels);

    auto merged = row_keys(a1);
    for (auto& k : row_keys(b1)) merged.insert(k);
    CHECK(merged == row_keys(ds));
}

TEST_CASE("stratified_kfold fold shape") {
    auto ds = synth_gaussian(2, 3, {4, 4}, 1.0, 1.0, Rng(1));
    auto folds = stratified_kfold(ds, 4, Rng(2));
    REQUIRE(folds.size() == 4);
    for (const auto& f : folds) CHECK(class_counts(f) == std::vector<std::size_t>{1, 1});

    auto ds2 = synth_gaussian(2, 3, {6, 4}, 1.0, 1.0, Rng(1));
    auto folds2 = stratified_kfold(ds2, 2, Rng(2));
    CHECK(folds2[0].size() == 5);
    CHECK(folds2[1].size() == 5);
}

TEST_CASE("stratified_kfold warns on a class smaller than k") {
    auto ds = synth_gaussian(2, 3, {8, 1}, 1.0, 1.0, Rng(1));
    auto folds = stratified_kfold(ds, 4, Rng(2));
    std::size_t holders = 0;
    for (const auto& f : folds) {
        auto counts = class_counts(f);
        holders += counts[1];
        CHECK_FALSE(f.warnings.empty());
    }
    CHECK(holders == 1);
}

TEST_CASE("stratified_kfold rejects bad k") {
    auto ds = synth_gaussian(2, 3, {3, 3}, 1.0, 1.0, Rng(1));
    CHECK_THROWS(stratified_kfold(ds, 1, Rng(2)));
    CHECK_THROWS(stratified_kfold(ds, 7, Rng(2)));
}

TEST_CASE("split properties over randomized cases") {
    Rng meta(77);
    for (int trial = 0; trial < 120; ++trial) {
        int classes = 2 + static_cast<int>(meta.below(3));
        std::vector<std::size_t> counts(classes);
        for (auto& c : counts) c = 4 + meta.below(20);
        auto ds = synth_gaussian(classes, 3, counts, 1.0, 1.0, meta.split(trial));

        int k = 2 + static_cast<int>(meta.below(3));
        auto folds = stratified_kfold(ds, k, meta.split(trial).split("k"));
        std::multiset<std::pair<double, int>> merged;
        std::map<int, std::pair<std::size_t, std::size_t>> minmax;  // class -> (min,max)
        for (const auto& f : folds) {
            for (auto& key : row_keys(f)) merged.insert(key);
            auto cc = class_counts(f);
            for (int c = 0; c < classes; ++c) {
                auto& [lo, hi] = minmax.try_emplace(c, cc[c], cc[c]).first->second;
                lo = std::min(lo, cc[c]);
                hi = std::max(hi, cc[c]);
            }
        }
        CHECK(merged == row_keys(ds));
        for (auto& [c, mm] : minmax) CHECK(mm.second - mm.first <= 1);

        double frac = 0.3 + 0.4 * meta.next_double();
        auto [train, hold] = stratified_holdout(ds, frac, meta.split(trial).split("h"));
        auto keys = row_keys(train);
        for (auto& key : row_keys(hold)) keys.insert(key);
        CHECK(keys == row_keys(ds));
        auto tc = class_counts(train);
        for (int c = 0; c < classes; ++c)
            CHECK(std::abs(static_cast<double>(tc[c]) - frac * static_cast<double>(counts[c])) <=
                  1.0);
    }
}

TEST_CASE("low_resource_protocol") {
    auto ds = synth_gaussian(2, 3, {200, 200}, 1.0, 1.0, Rng(1));
    auto pairs = low_resource_protocol(ds, 0.1, 3, Rng(4));
    REQUIRE(pairs.size() == 3);
    for (auto& [pool, test] : pairs) {
        CHECK(pool.size() == 40);
        CHECK(test.size() == 360);
    }
    // distinct derived seeds give distinct pools
    CHECK(pairs[0].first.features.data != pairs[1].first.features.data);
    CHECK_THROWS(low_resource_protocol(ds, 0.001, 1, Rng(4)));
}
