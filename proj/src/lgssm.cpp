#include "blowfly/lgssm.hpp"

#include <cmath>
#include <numbers>

namespace blowfly {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

void LinearGaussianModel::advance(double& state, std::span<const double> theta, std::size_t k,
                                  const RngStreamKey& key) const {
    RngStream rng(key.at_time(static_cast<std::uint32_t>(k)).with(Channel::Auxiliary));
    state = theta[0] * state + draw_normal(rng, 0.0, theta[1]);
}

void LinearGaussianModel::log_weights(std::span<const double> states, const ParticleParams& params, double y,
                                      std::span<double> out) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double sd = params.row(i)[2];
        const double z = (y - states[i]) / sd;
        out[i] = -0.5 * (kLog2Pi + z * z) - std::log(sd);
    }
}

void LinearGaussianModel::to_estimation(std::span<const double> natural, std::span<double> est) const {
    est[0] = std::atanh(natural[0]);
    est[1] = std::log(natural[1]);
    est[2] = std::log(natural[2]);
}

void LinearGaussianModel::to_natural(std::span<const double> est, std::span<double> natural) const {
    natural[0] = std::tanh(est[0]);
    natural[1] = std::exp(est[1]);
    natural[2] = std::exp(est[2]);
}

double kalman_loglik(double phi, double sigma_x, double sigma_y, std::span<const double> y) {
    double mean = 0.0;
    double var = 0.0;
    double ll = 0.0;
    const double q = sigma_x * sigma_x;
    const double r = sigma_y * sigma_y;
    for (const double obs : y) {
        // predict
        mean = phi * mean;
        var = phi * phi * var + q;
        // update
        const double f = var + r;
        const double v = obs - mean;
        ll += -0.5 * (kLog2Pi + std::log(f) + v * v / f);
        const double gain = var / f;
        mean += gain * v;
        var *= 1.0 - gain;
    }
    return ll;
}

std::vector<double> simulate_linear_gaussian(double phi, double sigma_x, double sigma_y, std::size_t n,
                                             std::uint64_t seed) {
    std::vector<double> y(n);
    double x = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        RngStream rng(RngStreamKey{seed, 0, static_cast<std::uint32_t>(k), 0, Channel::Auxiliary});
        x = phi * x + draw_normal(rng, 0.0, sigma_x);
        y[k] = x + draw_normal(rng, 0.0, sigma_y);
    }
    return y;
}

}  // namespace blowfly
