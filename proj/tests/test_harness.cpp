#include <doctest.h>

#include <cmath>

#include "lowres/harness.hpp"

using namespace lowres;

TEST_CASE("aggregate mean and unbiased std") {
    auto a = aggregate({2.0, 4.0, 6.0});
    CHECK(a.mean == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(a.stddev == doctest::Approx(2.0).epsilon(1e-12));

    auto single = aggregate({7.5});
    CHECK(single.mean == 7.5);
    CHECK(single.stddev == 0.0);

    auto constant = aggregate({3.0, 3.0, 3.0, 3.0});
    CHECK(constant.mean == 3.0);
    CHECK(constant.stddev == 0.0);

    CHECK_THROWS(aggregate({}));
}

TEST_CASE("pe_round hand cases") {
    CHECK(pe_round({3, 4, 5, 4}, 200) == 4);
    CHECK(pe_round({2, 3}, 200) == 3);    // .5 rounds up
    CHECK(pe_round({1, 2}, 200) == 2);    // 1.5 -> 2
    CHECK(pe_round({7}, 200) == 7);
    CHECK(pe_round({190, 200}, 200) == 195);
    CHECK(pe_round({200, 200}, 100) == 100);  // clamped above
    CHECK(pe_round({1, 1, 1}, 200) == 1);
    CHECK_THROWS(pe_round({}, 200));
}

TEST_CASE("pe_round randomized bounds") {
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        int max_epochs = 5 + static_cast<int>(rng.below(300));
        std::size_t k = 1 + rng.below(8);
        std::vector<int> epochs(k);
        int lo = max_epochs, hi = 1;
        for (auto& e : epochs) {
            e = 1 + static_cast<int>(rng.below(max_epochs));
            lo = std::min(lo, e);
            hi = std::max(hi, e);
        }
        int r = pe_round(epochs, max_epochs);
        CHECK(r >= 1);
        CHECK(r <= max_epochs);
        CHECK(r >= lo);
        CHECK(r <= hi);

        double mean = 0.0;
        for (int e : epochs) mean += e;
        mean /= static_cast<double>(k);
        CHECK(std::abs(r - mean) <= 0.5 + 1e-9);
    }
}

TEST_CASE("estimate_pe_stop_epoch mechanics") {
    ModelSpec spec{ModelKind::logistic, 3, 2, 0, 0.0};
    auto ds = synth_gaussian(2, 3, {12, 12}, 1.5, 1.0, Rng(1));
    OptimConfig cfg;
    cfg.max_epochs = 30;

    auto res = estimate_pe_stop_epoch(spec, ds, 4, cfg, Rng(2));
    REQUIRE(res.fold_stop_epochs.size() == 4);
    for (int e : res.fold_stop_epochs) {
        CHECK(e >= 1);
        CHECK(e <= 30);
    }
    CHECK(res.pe_stop_epoch == pe_round(res.fold_stop_epochs, 30));

    auto res2 = estimate_pe_stop_epoch(spec, ds, 4, cfg, Rng(2));
    CHECK(res2.fold_stop_epochs == res.fold_stop_epochs);

    auto res3 = estimate_pe_stop_epoch(spec, ds, 4, cfg, Rng(3));
    CHECK(res3.pe_stop_epoch >= 1);  // different rng still valid
}

TEST_CASE("pool_and_test synthetic sizes and shared structure") {
    ExperimentConfig cfg;
    cfg.synth.pool_size = 60;
    cfg.synth.test_size = 300;
    auto [pool, test] = pool_and_test(cfg, nullptr, Rng(5));
    CHECK(pool.size() == 60);
    CHECK(test.size() == 300);
    CHECK(pool.dim() == 20);
    CHECK(pool.num_classes == 2);

    auto [pool2, test2] = pool_and_test(cfg, nullptr, Rng(5));
    CHECK(pool.features.data == pool2.features.data);
    CHECK(test.labels == test2.labels);

    auto [pool3, test3] = pool_and_test(cfg, nullptr, Rng(6));
    CHECK(pool.features.data != pool3.features.data);
}

TEST_CASE("pool_and_test from a preloaded dataset") {
    ExperimentConfig cfg;
    cfg.csv_path = "whatever.csv";
    cfg.label_frac = 0.1;
    auto full = synth_gaussian(2, 4, {100, 100}, 1.0, 1.0, Rng(7));
    auto [pool, test] = pool_and_test(cfg, &full, Rng(8));
    CHECK(pool.size() == 20);
    CHECK(test.size() == 180);
    std::size_t c0 = 0;
    for (int y : pool.labels) c0 += y == 0;
    CHECK(c0 == 10);
}

TEST_CASE("single-rep rows produce sane outcomes") {
    ExperimentConfig cfg;
    cfg.synth.pool_size = 40;
    cfg.synth.test_size = 400;
    cfg.model.input_dim = 20;
    cfg.optim.max_epochs = 30;
    auto [pool, test] = pool_and_test(cfg, nullptr, Rng(9));

    auto val = run_val_row(cfg, pool, test, 0.5, Rng(10));
    CHECK(val.accuracy >= 0.0);
    CHECK(val.accuracy <= 1.0);
    CHECK(val.loss > 0.0);
    CHECK(val.stop_epoch >= 1);
    CHECK(val.ece >= 0.0);
    CHECK(val.oe >= 0.0);

    int pe_epoch = 0;
    auto pe = run_pe_row(cfg, pool, test, Rng(11), &pe_epoch);
    CHECK(pe.stop_epoch == pe_epoch);
    CHECK(pe_epoch >= 1);
    CHECK(pe_epoch <= 30);

    auto eb = run_eb_row(cfg, pool, test, Rng(12));
    CHECK(eb.stop_epoch >= 1);
    CHECK(eb.stop_epoch <= 30);

    // determinism across identical calls
    auto val2 = run_val_row(cfg, pool, test, 0.5, Rng(10));
    CHECK(val2.accuracy == val.accuracy);
    CHECK(val2.loss == val.loss);
}
