#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace blowfly {

// Independent draw purposes; each gets its own counter space.
enum class Channel : std::uint32_t {
    RecruitmentGamma = 0,
    RecruitmentPoisson = 1,
    SurvivalGamma = 2,
    SurvivalBinomial = 3,
    Measurement = 4,
    Perturbation = 5,
    Resampling = 6,
    Auxiliary = 7,
};

/// Coordinates of one random stream. Two keys that differ in any field address
/// disjoint Philox counter blocks, so streams never overlap.
struct RngStreamKey {
    std::uint64_t seed = 0;
    std::uint32_t iteration = 0;
    std::uint32_t time_index = 0;
    std::uint32_t particle_index = 0;
    Channel channel = Channel::Auxiliary;

    RngStreamKey with(Channel c) const noexcept {
        RngStreamKey k = *this;
        k.channel = c;
        return k;
    }
    RngStreamKey at_particle(std::uint32_t i) const noexcept {
        RngStreamKey k = *this;
        k.particle_index = i;
        return k;
    }
    RngStreamKey at_time(std::uint32_t t) const noexcept {
        RngStreamKey k = *this;
        k.time_index = t;
        return k;
    }
};

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based stream satisfying UniformRandomBitGenerator. Cheap to
/// construct; the state is the key plus a block counter.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(const RngStreamKey& key) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t particle_;
    std::uint32_t time_;
    std::uint32_t tag_;
    std::uint32_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int available_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for replicate `r` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t r) noexcept {
    return splitmix64(seed ^ splitmix64(r + 0x632BE59BD9B4E019ULL));
}

double draw_gamma(RngStream& rng, double shape, double scale);
std::int64_t draw_poisson(RngStream& rng, double mean);
std::int64_t draw_binomial(RngStream& rng, std::int64_t trials, double prob);
double draw_normal(RngStream& rng, double mean, double sd);

}  // namespace blowfly
