#include "blowfly/rng.hpp"

#include <random>

namespace blowfly {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c,
                                           std::array<std::uint32_t, 2> k) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kPhiloxW0;
            k[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, c[0], hi0, lo0);
        mulhilo(kPhiloxM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

RngStream::RngStream(const RngStreamKey& key) noexcept
    : key_{static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)},
      particle_(key.particle_index),
      time_(key.time_index),
      // 28 bits of iteration, 4 bits of channel
      tag_((key.iteration << 4) | (static_cast<std::uint32_t>(key.channel) & 0xFu)) {}

RngStream::result_type RngStream::operator()() noexcept {
    if (available_ == 0) {
        const auto out = philox4x32_10({block_++, particle_, time_, tag_}, key_);
        buffer_[0] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
        buffer_[1] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
        available_ = 2;
    }
    return buffer_[2 - available_--];
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double draw_gamma(RngStream& rng, double shape, double scale) {
    std::gamma_distribution<double> dist(shape, scale);
    return dist(rng);
}

std::int64_t draw_poisson(RngStream& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(rng);
}

std::int64_t draw_binomial(RngStream& rng, std::int64_t trials, double prob) {
    if (trials <= 0 || !(prob > 0.0)) return 0;
    if (prob >= 1.0) return trials;
    std::binomial_distribution<std::int64_t> dist(trials, prob);
    return dist(rng);
}

double draw_normal(RngStream& rng, double mean, double sd) {
    std::normal_distribution<double> dist(mean, sd);
    return dist(rng);
}

}  // namespace blowfly
