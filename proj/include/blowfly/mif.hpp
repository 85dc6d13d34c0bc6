#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blowfly/error.hpp"
#include "blowfly/parallel.hpp"
#include "blowfly/smc.hpp"

namespace blowfly {

struct MifConfig {
    std::size_t particles = 5000;
    std::size_t iterations = 60;
    std::vector<double> rw_sd;  // estimation scale, one per parameter
    double cooling = 0.95;      // geometric factor per iteration
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::size_t final_reps = 10;       // replicates for the closing likelihood
    std::size_t final_particles = 0;   // 0: same as particles

    void validate(std::size_t dim) const;
};

struct MifIteration {
    std::size_t iteration = 0;
    double loglik = 0.0;           // perturbed filter of this iteration
    std::vector<double> mean;      // swarm mean, natural scale
};

struct MifTrace {
    std::vector<std::string> names;
    std::vector<MifIteration> iterations;
    std::vector<double> final_params;
    double final_loglik = 0.0;
    double final_loglik_se = 0.0;
};

/// Random-walk sd at 1-based iteration m: rw_sd * cooling^(m-1).
inline double cooled_sd(double rw_sd, double cooling, std::size_t m) {
    return rw_sd * std::pow(cooling, static_cast<double>(m - 1));
}

/// Natural-scale mean of the swarm rows. Rows identical in a coordinate
/// return that coordinate exactly.
std::vector<double> swarm_mean(const ParticleParams& swarm, std::size_t particles);

/// Iterated filtering with a perturbed parameter swarm. Each particle carries
/// its own parameters, which receive Gaussian noise on the estimation scale
/// before every observation and are resampled together with the states. The
/// swarm surviving one iteration seeds the next.
template <PompModel M>
MifTrace mif_search(const M& model, std::span<const double> start, std::span<const double> y,
                    const MifConfig& config) {
    const std::size_t d = model.parameter_count();
    if (start.size() != d) throw Error(ErrorCode::InvalidArgument, "start has the wrong length");
    config.validate(d);

    MifTrace trace;
    trace.names = model.parameter_names();
    ParticleParams swarm = ParticleParams::swarm(config.particles, {start.begin(), start.end()});

    for (std::size_t m = 1; m <= config.iterations; ++m) {
        std::vector<double> sd(d);
        bool any = false;
        for (std::size_t j = 0; j < d; ++j) {
            sd[j] = cooled_sd(config.rw_sd[j], config.cooling, m);
            any = any || sd[j] > 0.0;
        }
        detail::PerturbHook perturb;
        if (any) {
            perturb = [&, sd](ParticleParams& p, std::size_t k) {
                parallel_for(config.particles, config.threads, [&](std::size_t begin, std::size_t end) {
                    std::vector<double> est(d);
                    for (std::size_t i = begin; i < end; ++i) {
                        RngStream rng(RngStreamKey{config.seed, static_cast<std::uint32_t>(m),
                                                   static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(i),
                                                   Channel::Perturbation});
                        auto row = p.row(i);
                        model.to_estimation(row, est);
                        std::vector<double> nat(d);
                        for (std::size_t j = 0; j < d; ++j) {
                            if (sd[j] <= 0.0) continue;
                            est[j] += draw_normal(rng, 0.0, sd[j]);
                        }
                        model.to_natural(est, nat);
                        for (std::size_t j = 0; j < d; ++j)
                            if (sd[j] > 0.0) row[j] = nat[j];
                    }
                });
            };
        }

        const FilterOptions opts{config.particles, config.seed, static_cast<std::uint32_t>(m), config.threads};
        FilterResult pass;
        try {
            pass = detail::run_filter(model, swarm, y, opts, perturb);
        } catch (const ParticleDepletionError& e) {
            throw Error(ErrorCode::ParticleDepletion,
                        "iteration " + std::to_string(m) + ", observation " + std::to_string(e.step()), m);
        }

        MifIteration it;
        it.iteration = m;
        it.loglik = pass.loglik;
        it.mean = swarm_mean(swarm, config.particles);
        for (std::size_t j = 0; j < d; ++j)
            if (!std::isfinite(it.mean[j]))
                throw Error(ErrorCode::Divergence,
                            "parameter " + trace.names[j] + " left the finite range at iteration " + std::to_string(m),
                            m);
        trace.iterations.push_back(std::move(it));
    }

    trace.final_params = trace.iterations.empty() ? std::vector<double>(start.begin(), start.end())
                                                  : trace.iterations.back().mean;
    const std::size_t final_j = config.final_particles == 0 ? config.particles : config.final_particles;
    const auto estimate = replicate_loglik(model, trace.final_params, y, final_j, config.final_reps,
                                           derive_seed(config.seed, 0xF17A1ULL), config.threads);
    trace.final_loglik = estimate.loglik;
    trace.final_loglik_se = estimate.se;
    return trace;
}

struct MifRestarts {
    std::vector<std::vector<double>> starts;
    std::vector<MifTrace> runs;
    std::size_t best = 0;
};

/// Start `r` of a restart set: restart 0 is `start`; the others are jittered
/// on the estimation scale by Gaussian noise with sd jitter_scale * rw_sd.
template <PompModel M>
std::vector<double> jittered_start(const M& model, std::span<const double> start, const MifConfig& config,
                                   std::size_t r, double jitter_scale) {
    std::vector<double> out(start.begin(), start.end());
    if (r == 0) return out;
    std::vector<double> est(start.size());
    model.to_estimation(start, est);
    RngStream rng(RngStreamKey{config.seed, 0, 0, static_cast<std::uint32_t>(r), Channel::Perturbation});
    for (std::size_t j = 0; j < est.size(); ++j) {
        const double sd = jitter_scale * config.rw_sd[j];
        if (sd > 0.0) est[j] += draw_normal(rng, 0.0, sd);
    }
    std::vector<double> nat(start.size());
    model.to_natural(est, nat);
    for (std::size_t j = 0; j < est.size(); ++j)
        if (config.rw_sd[j] * jitter_scale > 0.0) out[j] = nat[j];
    return out;
}

/// Runs mif_search from `restarts` starts with independent seeds; the run with
/// the highest final log-likelihood wins, ties going to the lowest index.
template <PompModel M>
MifRestarts mif_restarts(const M& model, std::span<const double> start, std::span<const double> y,
                         const MifConfig& config, std::size_t restarts, double jitter_scale = 10.0) {
    if (restarts == 0) throw Error(ErrorCode::InvalidArgument, "need at least one restart");
    MifRestarts out;
    for (std::size_t r = 0; r < restarts; ++r) {
        out.starts.push_back(jittered_start(model, start, config, r, jitter_scale));
        MifConfig cfg = config;
        cfg.seed = derive_seed(config.seed, 1000 + r);
        out.runs.push_back(mif_search(model, out.starts.back(), y, cfg));
        if (out.runs.back().final_loglik > out.runs[out.best].final_loglik) out.best = r;
    }
    return out;
}

}  // namespace blowfly
