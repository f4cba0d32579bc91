#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace lowres {

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

// Splittable deterministic generator (splitmix64 core). Children derived
// via split() depend only on the seed and the label, not on how many
// draws the parent has made.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();
    double next_double();  // [0, 1)
    double uniform(double lo, double hi);
    double normal();       // standard normal, Box-Muller
    std::size_t below(std::size_t n);  // [0, n), n >= 1

    Rng split(std::uint64_t label) const;
    Rng split(std::string_view label) const;

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = below(i + 1);
            std::swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

// Stable softmax via max subtraction. Throws on empty input.
std::vector<double> softmax(std::span<const double> logits);
void softmax_into(std::span<const double> logits, std::span<double> out);

// ln(sum exp(x_i)), stable for large magnitudes. Throws on empty input.
double log_sum_exp(std::span<const double> logits);

}  // namespace lowres
