#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "blowfly/error.hpp"
#include "blowfly/kernels.hpp"
#include "blowfly/model_core.hpp"
#include "blowfly/parallel.hpp"
#include "blowfly/rng.hpp"

namespace blowfly {

struct FilterOptions {
    std::size_t particles = 1000;
    std::uint64_t seed = 0;
    std::uint32_t iteration = 0;  // key coordinate; iterated filtering uses 1..M
    unsigned threads = 0;         // 0: hardware concurrency
};

struct FilterResult {
    double loglik = 0.0;
    std::vector<double> cond_logliks;
    std::vector<double> ess;
    std::vector<double> filter_means;
    std::optional<double> loglik_se;
    std::size_t particles = 0;
    std::uint64_t seed = 0;
};

/// All particles had zero likelihood at observation `step` (1-based). The
/// diagnostics accumulated up to that point travel with the exception.
class ParticleDepletionError : public Error {
public:
    ParticleDepletionError(std::size_t step, FilterResult partial)
        : Error(ErrorCode::ParticleDepletion, "every particle has zero weight at observation " + std::to_string(step),
                step),
          step_(step),
          partial_(std::move(partial)) {}

    std::size_t step() const noexcept { return step_; }
    const FilterResult& partial() const noexcept { return partial_; }

private:
    std::size_t step_;
    FilterResult partial_;
};

/// Systematic resampling from unnormalized weights `w` (summing to `total`)
/// with offset u in [0, 1): ancestors of the grid (i + u) / J.
void systematic_ancestors(std::span<const double> w, double total, double u, std::span<std::size_t> ancestors);

/// Systematic resampling from log weights; the offset is drawn from `key`.
/// Throws AllWeightsDegenerate when no weight is finite.
std::vector<std::size_t> systematic_resample(std::span<const double> log_weights, const RngStreamKey& key);

/// log of the mean of exp(values), computed with a max shift.
double log_mean_exp(std::span<const double> values);

struct ReplicateEstimate {
    double loglik = 0.0;
    double se = 0.0;
    std::vector<double> replicates;
};

/// Combines replicate log-likelihoods by log-mean-exp; the standard error is
/// the jackknife over replicates. Needs at least two values.
ReplicateEstimate combine_replicates(std::span<const double> logliks);

namespace detail {

// Hook run before the propagation to observation k; may modify the natural-
// scale parameter rows in place.
using PerturbHook = std::function<void(ParticleParams&, std::size_t)>;

template <PompModel M>
FilterResult run_filter(const M& model, ParticleParams& params, std::span<const double> y, const FilterOptions& opts,
                        const PerturbHook& perturb) {
    using State = typename M::State;
    const std::size_t J = opts.particles;
    if (J < 2) throw Error(ErrorCode::InvalidArgument, "need at least two particles");
    if (!params.is_shared() && params.rows() != J)
        throw Error(ErrorCode::InvalidArgument, "parameter swarm size differs from particle count");

    FilterResult result;
    result.particles = J;
    result.seed = opts.seed;
    result.cond_logliks.reserve(y.size());
    result.ess.reserve(y.size());
    result.filter_means.reserve(y.size());

    std::vector<State> states(J);
    for (std::size_t i = 0; i < J; ++i) states[i] = model.initial_state(params.row(i));
    std::vector<State> next_states(J);
    ParticleParams next_params = params;

    std::vector<double> lw(J), w(J), observed(J);
    std::vector<std::size_t> ancestors(J);
    const RngStreamKey base{opts.seed, opts.iteration, 0, 0, Channel::Auxiliary};

    for (std::size_t k = 1; k <= y.size(); ++k) {
        if (perturb) perturb(params, k);

        parallel_for(J, opts.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i)
                model.advance(states[i], params.row(i), k, base.at_particle(static_cast<std::uint32_t>(i)));
        });

        model.log_weights(std::span<const State>(states), params, y[k - 1], lw);
        for (auto& v : lw)
            if (std::isnan(v)) v = -std::numeric_limits<double>::infinity();

        const double shift = kernels::max_value(lw);
        if (!std::isfinite(shift)) {
            result.loglik = -std::numeric_limits<double>::infinity();
            throw ParticleDepletionError(k, std::move(result));
        }
        const double total = kernels::exp_shift_sum(lw, shift, w);
        const double cond = shift + std::log(total / static_cast<double>(J));
        result.cond_logliks.push_back(cond);
        result.loglik += cond;
        result.ess.push_back(total * total / kernels::sum_squares(w));
        for (std::size_t i = 0; i < J; ++i) observed[i] = model.observed_value(states[i]);
        result.filter_means.push_back(kernels::dot(w, observed) / total);

        RngStream rng(base.at_time(static_cast<std::uint32_t>(k)).with(Channel::Resampling));
        systematic_ancestors(w, total, rng.uniform(), ancestors);
        for (std::size_t i = 0; i < J; ++i) next_states[i] = states[ancestors[i]];
        states.swap(next_states);
        if (!params.is_shared()) {
            const std::size_t d = params.dim();
            auto& src = params.raw();
            auto& dst = next_params.raw();
            for (std::size_t i = 0; i < J; ++i)
                std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(ancestors[i] * d), d,
                            dst.begin() + static_cast<std::ptrdiff_t>(i * d));
            std::swap(params, next_params);
        }
    }
    return result;
}

}  // namespace detail

/// Bootstrap particle filter: propagate, weight by the measurement density,
/// and resample systematically at every observation. `theta` is a natural-
/// scale parameter row; `y` holds the observations to be scored in order.
template <PompModel M>
FilterResult pfilter(const M& model, std::span<const double> theta, std::span<const double> y,
                     const FilterOptions& opts) {
    if (theta.size() != model.parameter_count())
        throw Error(ErrorCode::InvalidArgument, "parameter row has the wrong length");
    ParticleParams params = ParticleParams::shared({theta.begin(), theta.end()});
    return detail::run_filter(model, params, y, opts, {});
}

/// Runs pfilter once per seed and combines the results.
template <PompModel M>
ReplicateEstimate replicate_loglik(const M& model, std::span<const double> theta, std::span<const double> y,
                                   std::size_t particles, std::span<const std::uint64_t> seeds, unsigned threads = 0) {
    if (seeds.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two replicates");
    std::vector<double> lls;
    lls.reserve(seeds.size());
    for (const auto s : seeds) lls.push_back(pfilter(model, theta, y, FilterOptions{particles, s, 0, threads}).loglik);
    return combine_replicates(lls);
}

std::vector<std::uint64_t> replicate_seeds(std::uint64_t seed, std::size_t n_reps);

template <PompModel M>
ReplicateEstimate replicate_loglik(const M& model, std::span<const double> theta, std::span<const double> y,
                                   std::size_t particles, std::size_t n_reps, std::uint64_t seed,
                                   unsigned threads = 0) {
    const auto seeds = replicate_seeds(seed, n_reps);
    return replicate_loglik(model, theta, y, particles, std::span<const std::uint64_t>(seeds), threads);
}

}  // namespace blowfly
