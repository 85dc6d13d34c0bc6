#include "blowfly/blowfly.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "blowfly/kernels.hpp"

namespace blowfly {

StepOutcome process_step(std::int64_t current, std::int64_t lagged, std::span<const double> theta, int delta,
                         const RngStreamKey& key_base) {
    const double P = theta[0];
    const double N0 = theta[1];
    const double death = theta[2];
    const double dt = static_cast<double>(delta);

    StepOutcome out;
    const double e = gamma_effect(key_base.with(Channel::RecruitmentGamma), theta[3], dt);
    if (lagged > 0) {
        const double lag = static_cast<double>(lagged);
        RngStream rng(key_base.with(Channel::RecruitmentPoisson));
        out.recruits = draw_poisson(rng, lag * P * std::exp(-lag / N0) * dt * e);
    }
    const double eps = gamma_effect(key_base.with(Channel::SurvivalGamma), theta[4], dt);
    if (current > 0) {
        RngStream rng(key_base.with(Channel::SurvivalBinomial));
        out.survivors = draw_binomial(rng, current, std::exp(-death * dt * eps));
    }
    out.next_N = out.recruits + out.survivors;
    return out;
}

StepOutcome process_step(const DelayState& state, const BlowflyParams& params, const RngStreamKey& key_base) {
    const auto theta = params.estimated();
    return process_step(state.current(), state.lagged(), theta, params.delta, key_base);
}

double log_rising_factorial(double r, double y) {
    if (y == 0.0) return 0.0;
    if (r < 1e5) return std::lgamma(r + y) - std::lgamma(r);
    // Stirling series difference; the omitted terms are O(r^-3).
    return (r - 0.5) * std::log1p(y / r) + y * std::log(r + y) - y - y / (12.0 * r * (r + y));
}

double measurement_logpdf(std::int64_t y, std::int64_t N, double sigma_y) {
    if (!(sigma_y > 0.0)) throw Error(ErrorCode::InvalidSigma, "sigma_y must be positive");
    if (y < 0) return -std::numeric_limits<double>::infinity();
    if (N <= 0) return y == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    const double r = 1.0 / (sigma_y * sigma_y);
    const double yd = static_cast<double>(y);
    const double Nd = static_cast<double>(N);
    return log_rising_factorial(r, yd) - std::lgamma(yd + 1.0) + yd * (std::log(Nd) - std::log(r + Nd)) -
           r * std::log1p(Nd / r);
}

std::int64_t measurement_draw(std::int64_t N, double sigma_y, const RngStreamKey& key) {
    if (!(sigma_y > 0.0)) throw Error(ErrorCode::InvalidSigma, "sigma_y must be positive");
    if (N <= 0) return 0;
    const double r = 1.0 / (sigma_y * sigma_y);
    RngStream rng(key);
    const double rate = static_cast<double>(N) * draw_gamma(rng, r, 1.0 / r);
    return draw_poisson(rng, rate);
}

double skeleton_step(const SkeletonState& state, const BlowflyParams& params) {
    const double dt = static_cast<double>(params.delta);
    const double lag = state.lagged();
    return lag * params.P * dt * std::exp(-lag / params.N0) + state.current() * std::exp(-params.delta_rate * dt);
}

double skeleton_fixed_point(const BlowflyParams& params) {
    const double dt = static_cast<double>(params.delta);
    return params.N0 * std::log(params.P * dt / (1.0 - std::exp(-params.delta_rate * dt)));
}

std::vector<double> skeleton_trajectory(SkeletonState init, const BlowflyParams& params, std::size_t n_steps) {
    std::vector<double> path;
    path.reserve(n_steps + 1);
    path.push_back(init.current());
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double next = skeleton_step(init, params);
        init.push(next);
        path.push_back(next);
    }
    return path;
}

void XTParams::validate() const {
    if (!(c > 0.0) || !(N0_xt > 0.0) || !(alpha > 0.0))
        throw Error(ErrorCode::NonPositiveParameter, "c, alpha and N0_xt must be positive");
    if (!(nu > 0.0 && nu < 1.0)) throw Error(ErrorCode::InvalidArgument, "nu must lie in (0, 1)");
    if (tau <= 0 || tau % 2 != 0) throw Error(ErrorCode::IndivisibleLag, "tau must be a positive even number of days");
}

double xt_skeleton_step(double current, double lagged, const XTParams& params) {
    const double recruitment =
        params.c == 0.0 ? 0.0 : params.c * std::pow(lagged, params.alpha) * std::exp(-lagged / params.N0_xt);
    return params.nu * current + recruitment;
}

Trajectory simulate(const BlowflyParams& params, const DelayState& init, std::size_t n_steps, std::uint64_t seed,
                    bool with_measurement) {
    params.validate();
    Trajectory traj;
    traj.times.reserve(n_steps + 1);
    traj.N.reserve(n_steps + 1);
    traj.times.push_back(init.current_time());
    traj.N.push_back(static_cast<double>(init.current()));
    traj.y.push_back(0);
    traj.observed.push_back(false);

    const auto theta = params.estimated();
    DelayState state = init;
    for (std::size_t step = 0; step < n_steps; ++step) {
        const RngStreamKey key{seed, 0, static_cast<std::uint32_t>(step), 0, Channel::Auxiliary};
        const StepOutcome out = process_step(state.current(), state.lagged(), theta, params.delta, key);
        state.push(out.next_N);
        traj.times.push_back(state.current_time());
        traj.N.push_back(static_cast<double>(out.next_N));
        const bool observe = with_measurement && state.current_time() % 2 == 0;
        traj.observed.push_back(observe);
        traj.y.push_back(observe ? measurement_draw(out.next_N, params.sigma_y, key.with(Channel::Measurement)) : 0);
    }
    return traj;
}

BlowflyModel::BlowflyModel(DelayState init, int delta, int tau)
    : init_(std::move(init)), delta_(delta), tau_(tau), steps_per_obs_(0) {
    if (delta <= 0 || 2 % delta != 0)
        throw Error(ErrorCode::InvalidArgument, "delta must divide the 2-day observation interval");
    if (tau % delta != 0) throw Error(ErrorCode::IndivisibleLag, "delta does not divide tau");
    if (init_.size() != static_cast<std::size_t>(tau / delta) + 1 || init_.delta() != delta)
        throw Error(ErrorCode::InvalidArgument, "initial state does not match delta and tau");
    steps_per_obs_ = static_cast<std::size_t>(2 / delta);
}

std::vector<std::string> BlowflyModel::parameter_names() const {
    return {BlowflyParams::kNames.begin(), BlowflyParams::kNames.end()};
}

void BlowflyModel::advance(DelayState& state, std::span<const double> theta, std::size_t k,
                           const RngStreamKey& key) const {
    for (std::size_t sub = 0; sub < steps_per_obs_; ++sub) {
        const auto step = static_cast<std::uint32_t>((k - 1) * steps_per_obs_ + sub);
        const StepOutcome out = process_step(state.current(), state.lagged(), theta, delta_, key.at_time(step));
        state.push(out.next_N);
    }
}

void BlowflyModel::log_weights(std::span<const DelayState> states, const ParticleParams& params, double y,
                               std::span<double> out) const {
    const std::size_t n = states.size();
    std::vector<double> counts(n);
    std::vector<double> sizes(n);
    for (std::size_t i = 0; i < n; ++i) {
        counts[i] = static_cast<double>(states[i].current());
        const double sy = params.row(i)[5];
        sizes[i] = 1.0 / (sy * sy);
    }
    kernels::nb_log_terms(y, counts, sizes, out);
    const double log_y_fact = std::lgamma(y + 1.0);
    if (params.is_shared()) {
        const double norm = log_rising_factorial(sizes[0], y) - log_y_fact;
        for (std::size_t i = 0; i < n; ++i) out[i] += norm;
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] += log_rising_factorial(sizes[i], y) - log_y_fact;
    }
}

void BlowflyModel::to_estimation(std::span<const double> natural, std::span<double> est) const {
    for (std::size_t i = 0; i < BlowflyParams::kEstimated; ++i) est[i] = std::log(natural[i]);
}

void BlowflyModel::to_natural(std::span<const double> est, std::span<double> natural) const {
    for (std::size_t i = 0; i < BlowflyParams::kEstimated; ++i) natural[i] = std::exp(est[i]);
}

}  // namespace blowfly
