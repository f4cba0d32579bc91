#include "lowres/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace lowres {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double Rng::next_double() {
    // 53 high bits -> [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

double Rng::normal() {
    double u1 = next_double();
    double u2 = next_double();
    // guard against log(0)
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

std::size_t Rng::below(std::size_t n) {
    return static_cast<std::size_t>(next_u64() % n);
}

Rng Rng::split(std::uint64_t label) const {
    return Rng(mix64(mix64(seed_ + kGolden) ^ mix64(label ^ 0x517CC1B727220A95ULL)));
}

Rng Rng::split(std::string_view label) const {
    return split(fnv1a64(label));
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] /= sum;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size());
    softmax_into(logits, out);
    return out;
}

double log_sum_exp(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("log_sum_exp: empty input");
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - mx);
    return mx + std::log(sum);
}

}  // namespace lowres
