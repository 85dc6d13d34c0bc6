#pragma once

#include <array>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blowfly/error.hpp"
#include "blowfly/rng.hpp"

namespace blowfly {

/// Natural-scale parameters of the blowfly POMP model. Rates are per day,
/// noise scales per square-root day, and the structural constants in days.
struct BlowflyParams {
    double P = 0.0;           // per-capita recruitment rate
    double N0 = 0.0;          // competition scale (adults)
    double delta_rate = 0.0;  // adult death rate
    double sigma_p = 0.0;     // recruitment noise scale
    double sigma_d = 0.0;     // survival noise scale
    double sigma_y = 0.0;     // measurement overdispersion
    int delta = 1;            // Euler step
    int tau = 14;             // maturation delay

    static constexpr std::size_t kEstimated = 6;
    static constexpr std::array<const char*, kEstimated> kNames{"P", "N0", "delta_rate", "sigma_p", "sigma_d", "sigma_y"};

    std::array<double, kEstimated> estimated() const { return {P, N0, delta_rate, sigma_p, sigma_d, sigma_y}; }
    static BlowflyParams from_estimated(std::span<const double> v, int delta, int tau);

    /// Throws NonPositiveParameter or InvalidArgument on a violated invariant.
    void validate() const;
};

/// The published Δ = 1 day maximum likelihood estimate.
BlowflyParams published_mle();

/// Estimation-scale image of BlowflyParams: log of the six positive
/// parameters, with Δ and τ carried through unchanged.
struct EstimationParams {
    std::array<double, BlowflyParams::kEstimated> values{};
    int delta = 1;
    int tau = 14;
};

EstimationParams to_estimation_scale(const BlowflyParams& p);
BlowflyParams to_natural_scale(const EstimationParams& e);

/// Fixed-length history (N(t), N(t-Δ), ..., N(t-τ)) stored as a ring buffer so
/// advancing one step is O(1).
template <class T>
class BasicDelayState {
public:
    using value_type = T;

    BasicDelayState() = default;
    BasicDelayState(const std::vector<T>& newest_first, int current_time, int delta)
        : buffer_(newest_first), time_(current_time), delta_(delta) {}

    std::size_t size() const noexcept { return buffer_.size(); }
    int current_time() const noexcept { return time_; }
    int delta() const noexcept { return delta_; }

    /// Value `lag` steps back; at(0) = N(t).
    T at(std::size_t lag) const noexcept { return buffer_[(head_ + lag) % buffer_.size()]; }
    T current() const noexcept { return at(0); }
    T lagged() const noexcept { return at(buffer_.size() - 1); }

    /// Shift the window forward one step: `next` becomes N(t + Δ) and the
    /// oldest value drops out.
    void push(T next) noexcept {
        head_ = (head_ + buffer_.size() - 1) % buffer_.size();
        buffer_[head_] = next;
        time_ += delta_;
    }

    std::vector<T> values() const {
        std::vector<T> out(buffer_.size());
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = at(j);
        return out;
    }

    bool operator==(const BasicDelayState& other) const { return values() == other.values() && time_ == other.time_; }

private:
    std::vector<T> buffer_;
    std::size_t head_ = 0;
    int time_ = 0;
    int delta_ = 1;
};

using DelayState = BasicDelayState<std::int64_t>;
using SkeletonState = BasicDelayState<double>;

SkeletonState to_skeleton_state(const DelayState& s);

/// Simulated sample path. Index 0 is the initial state; observations are
/// present only at observation times.
struct Trajectory {
    std::vector<int> times;
    std::vector<double> N;
    std::vector<std::int64_t> y;
    std::vector<bool> observed;
};

/// Gamma random effect with mean 1 and variance sigma^2 / delta: shape
/// delta/sigma^2, scale sigma^2/delta. Returns exactly 1 when sigma < 1e-8.
double gamma_effect(const RngStreamKey& key, double sigma, double delta);

/// Per-particle parameter rows, either one row shared by every particle or a
/// J x dim table.
class ParticleParams {
public:
    ParticleParams() = default;
    static ParticleParams shared(std::vector<double> row) {
        ParticleParams p;
        p.dim_ = row.size();
        p.values_ = std::move(row);
        p.shared_ = true;
        return p;
    }
    static ParticleParams swarm(std::size_t count, std::vector<double> row) {
        ParticleParams p;
        p.dim_ = row.size();
        p.values_.resize(count * row.size());
        for (std::size_t i = 0; i < count; ++i)
            std::copy(row.begin(), row.end(), p.values_.begin() + static_cast<std::ptrdiff_t>(i * row.size()));
        return p;
    }

    std::size_t dim() const noexcept { return dim_; }
    bool is_shared() const noexcept { return shared_; }
    std::size_t rows() const noexcept { return shared_ ? 1 : (dim_ == 0 ? 0 : values_.size() / dim_); }

    std::span<const double> row(std::size_t i) const noexcept {
        return {values_.data() + (shared_ ? 0 : i * dim_), dim_};
    }
    std::span<double> row(std::size_t i) noexcept { return {values_.data() + (shared_ ? 0 : i * dim_), dim_}; }

    std::vector<double>& raw() noexcept { return values_; }
    const std::vector<double>& raw() const noexcept { return values_; }

private:
    std::vector<double> values_;
    std::size_t dim_ = 0;
    bool shared_ = false;
};

/// What the particle filter and iterated filtering need from a model.
/// Parameters are passed on the natural scale as flat rows of length
/// parameter_count(); the model supplies its own estimation-scale map.
template <class M>
concept PompModel = requires(const M& m, typename M::State& s, const typename M::State& cs,
                             std::span<const double> theta, std::span<double> out, std::size_t k,
                             const RngStreamKey& key, std::span<const typename M::State> states,
                             const ParticleParams& params, double y) {
    typename M::State;
    { m.parameter_count() } -> std::convertible_to<std::size_t>;
    { m.parameter_names() } -> std::convertible_to<std::vector<std::string>>;
    { m.initial_state(theta) } -> std::same_as<typename M::State>;
    // advance from observation time k-1 to observation time k
    m.advance(s, theta, k, key);
    // log measurement density of y for every state; params has one row or one per state
    m.log_weights(states, params, y, out);
    { m.observed_value(cs) } -> std::convertible_to<double>;
    m.to_estimation(theta, out);
    m.to_natural(theta, out);
};

}  // namespace blowfly
