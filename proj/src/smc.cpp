#include "blowfly/smc.hpp"

#include <algorithm>

namespace blowfly {

void systematic_ancestors(std::span<const double> w, double total, double u, std::span<std::size_t> ancestors) {
    const std::size_t n = w.size();
    const std::size_t J = ancestors.size();
    std::size_t j = 0;
    double cumulative = w[0];
    const double step = total / static_cast<double>(J);
    for (std::size_t i = 0; i < J; ++i) {
        const double target = (static_cast<double>(i) + u) * step;
        while (j + 1 < n && cumulative <= target) cumulative += w[++j];
        ancestors[i] = j;
    }
}

std::vector<std::size_t> systematic_resample(std::span<const double> log_weights, const RngStreamKey& key) {
    const std::size_t J = log_weights.size();
    if (J == 0) throw Error(ErrorCode::AllWeightsDegenerate, "no weights");
    double shift = -std::numeric_limits<double>::infinity();
    for (const double v : log_weights)
        if (v > shift) shift = v;
    if (!std::isfinite(shift)) throw Error(ErrorCode::AllWeightsDegenerate, "no finite log weight");
    std::vector<double> w(J);
    double total = 0.0;
    for (std::size_t i = 0; i < J; ++i) {
        w[i] = std::isnan(log_weights[i]) ? 0.0 : std::exp(log_weights[i] - shift);
        total += w[i];
    }
    RngStream rng(key.with(Channel::Resampling));
    std::vector<std::size_t> ancestors(J);
    systematic_ancestors(w, total, rng.uniform(), ancestors);
    return ancestors;
}

double log_mean_exp(std::span<const double> values) {
    const double shift = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(shift)) return shift;
    double s = 0.0;
    for (const double v : values) s += std::exp(v - shift);
    return shift + std::log(s / static_cast<double>(values.size()));
}

ReplicateEstimate combine_replicates(std::span<const double> logliks) {
    const std::size_t n = logliks.size();
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least two replicates");
    ReplicateEstimate out;
    out.replicates.assign(logliks.begin(), logliks.end());
    out.loglik = log_mean_exp(logliks);

    std::vector<double> loo(n);
    std::vector<double> rest(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) rest[r++] = logliks[j];
        loo[i] = log_mean_exp(rest);
    }
    double mean = 0.0;
    for (const double v : loo) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const double v : loo) ss += (v - mean) * (v - mean);
    out.se = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
    return out;
}

std::vector<std::uint64_t> replicate_seeds(std::uint64_t seed, std::size_t n_reps) {
    std::vector<std::uint64_t> seeds(n_reps);
    for (std::size_t r = 0; r < n_reps; ++r) seeds[r] = derive_seed(seed, r);
    return seeds;
}

}  // namespace blowfly
