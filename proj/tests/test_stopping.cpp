#include <doctest.h>

#include <cmath>

#include "lowres/stopping.hpp"

using namespace lowres;

namespace {

// feed explicit gradient rows through the streaming estimator
GradientStats stats_of(const std::vector<std::vector<double>>& grads, double eps = 1e-12) {
    return gradient_stats(
        grads[0].size(),
        [&](const std::function<void(std::span<const double>)>& visit) {
            for (const auto& g : grads) visit(g);
        },
        eps);
}

}  // namespace

TEST_CASE("gradient_stats hand cases") {
    auto same = stats_of({{2.5}, {2.5}});
    CHECK(same.mean_grad[0] == 2.5);
    CHECK(same.variance[0] == 0.0);
    CHECK(same.effective_dims == 0);

    auto pair = stats_of({{1.0}, {3.0}});
    CHECK(pair.mean_grad[0] == 2.0);
    CHECK(pair.variance[0] == 2.0);
    CHECK(pair.effective_dims == 1);

    // |S|=2 identity: mean (a+b)/2, variance (a-b)^2/2
    auto two = stats_of({{1.0, -4.0}, {7.0, 2.0}});
    CHECK(two.mean_grad[0] == 4.0);
    CHECK(two.variance[0] == doctest::Approx(18.0).epsilon(1e-14));
    CHECK(two.variance[1] == doctest::Approx(18.0).epsilon(1e-14));

    CHECK_THROWS_WITH_AS(stats_of({{1.0}}), doctest::Contains("variance estimator undefined"),
                         std::invalid_argument);
}

TEST_CASE("gradient_stats matches a two-pass oracle") {
    Rng rng(41);
    const std::size_t n = 50;
    const std::size_t d = 7;
    std::vector<std::vector<double>> grads(n, std::vector<double>(d));
    for (auto& g : grads)
        for (auto& v : g) v = rng.uniform(-3.0, 3.0);

    auto stats = stats_of(grads);
    for (std::size_t k = 0; k < d; ++k) {
        double mean = 0.0;
        for (const auto& g : grads) mean += g[k];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& g : grads) var += (g[k] - mean) * (g[k] - mean);
        var /= static_cast<double>(n - 1);
        CHECK(std::abs(stats.mean_grad[k] - mean) <= 1e-10);
        CHECK(std::abs(stats.variance[k] - var) <= 1e-10);
        CHECK(stats.variance[k] >= 0.0);
    }
}

TEST_CASE("eb_statistic hand cases") {
    // antisymmetric gradients: zero mean, statistic exactly 1
    auto anti = stats_of({{0.3}, {-0.3}});
    CHECK(eb_statistic(anti) == 1.0);

    // {1, 3}: 1 - (2/1) * (4/2) = -3
    auto pair = stats_of({{1.0}, {3.0}});
    CHECK(eb_statistic(pair) == -3.0);

    // all-equal gradients: every coordinate excluded, degenerate stop
    auto equal = stats_of({{2.0, -1.0}, {2.0, -1.0}, {2.0, -1.0}});
    CHECK(equal.effective_dims == 0);
    CHECK(eb_statistic(equal) == 1.0);
}

TEST_CASE("eb_statistic is scale invariant") {
    Rng rng(5);
    std::vector<std::vector<double>> grads(10, std::vector<double>(4));
    for (auto& g : grads)
        for (auto& v : g) v = rng.uniform(-1.0, 1.0);
    double base = eb_statistic(stats_of(grads));
    for (double c : {2.0, -3.0, 1e3}) {
        auto scaled = grads;
        for (auto& g : scaled)
            for (auto& v : g) v *= c;
        CHECK(eb_statistic(stats_of(scaled)) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("constant coordinates never change the statistic") {
    Rng rng(6);
    std::vector<std::vector<double>> grads(8, std::vector<double>(3));
    for (auto& g : grads)
        for (auto& v : g) v = rng.uniform(-1.0, 1.0);
    double base = eb_statistic(stats_of(grads));

    auto padded = grads;
    for (auto& g : padded) g.push_back(0.7);  // identical across samples
    CHECK(eb_statistic(stats_of(padded)) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("eb_should_stop on constructed datasets") {
    // one weight, two samples engineered to give antisymmetric gradients:
    // zero params, C=2, inputs +x and -x with the same label
    ModelSpec spec{ModelKind::logistic, 1, 2, 0, 0.0};
    ParameterVector params;
    params.layout = param_layout(spec);
    params.values.assign(param_dim(spec), 0.0);

    Dataset anti;
    anti.num_classes = 2;
    anti.features = Matrix(2, 1);
    anti.features(0, 0) = 1.0;
    anti.features(1, 0) = -1.0;
    anti.labels = {0, 0};
    auto [stop, stat] = eb_should_stop(spec, params, anti);
    // weight gradients are antisymmetric; bias coordinates are identical
    // across the two samples and get excluded
    CHECK(stop);
    CHECK(stat == 1.0);
}

TEST_CASE("criterion factories") {
    CHECK_THROWS(val_based_criterion(Dataset{}));
    CHECK_THROWS(fixed_epoch_criterion(0));
    auto fixed = fixed_epoch_criterion(5);
    CHECK(fixed.kind == StopCriterion::Kind::fixed_epoch);
    CHECK(fixed.stop_epoch == 5);
    auto eb = eb_criterion();
    CHECK(eb.kind == StopCriterion::Kind::eb);
}
