#include "blowfly/model_core.hpp"

#include <cmath>

namespace blowfly {

BlowflyParams BlowflyParams::from_estimated(std::span<const double> v, int delta, int tau) {
    if (v.size() != kEstimated) throw Error(ErrorCode::InvalidArgument, "expected 6 blowfly parameters");
    return BlowflyParams{v[0], v[1], v[2], v[3], v[4], v[5], delta, tau};
}

void BlowflyParams::validate() const {
    const auto values = estimated();
    for (std::size_t i = 0; i < kEstimated; ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            throw Error(ErrorCode::NonPositiveParameter, std::string(kNames[i]) + " must be positive and finite", i);
    }
    if (sigma_y < 1e-8) throw Error(ErrorCode::InvalidSigma, "sigma_y below 1e-8");
    if (delta <= 0 || tau <= 0) throw Error(ErrorCode::InvalidArgument, "delta and tau must be positive days");
    if (tau % delta != 0) throw Error(ErrorCode::IndivisibleLag, "delta must divide tau");
}

BlowflyParams published_mle() {
    return BlowflyParams{3.28, 680.0, 0.161, 1.35, 0.747, 0.0266, 1, 14};
}

EstimationParams to_estimation_scale(const BlowflyParams& p) {
    EstimationParams e;
    const auto values = p.estimated();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            throw Error(ErrorCode::NonPositiveParameter,
                        std::string(BlowflyParams::kNames[i]) + " must be positive to take its log", i);
        e.values[i] = std::log(values[i]);
    }
    e.delta = p.delta;
    e.tau = p.tau;
    return e;
}

BlowflyParams to_natural_scale(const EstimationParams& e) {
    std::array<double, BlowflyParams::kEstimated> v{};
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(e.values[i]);
    return BlowflyParams::from_estimated(v, e.delta, e.tau);
}

SkeletonState to_skeleton_state(const DelayState& s) {
    const auto counts = s.values();
    return SkeletonState(std::vector<double>(counts.begin(), counts.end()), s.current_time(), s.delta());
}

double gamma_effect(const RngStreamKey& key, double sigma, double delta) {
    if (sigma < 1e-8) return 1.0;
    const double variance = sigma * sigma / delta;
    RngStream rng(key);
    return draw_gamma(rng, 1.0 / variance, variance);
}

}  // namespace blowfly
