#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blowfly/model_core.hpp"

namespace blowfly {

/// Scalar linear-Gaussian state space model used as a correctness oracle:
///   x_0 = 0,  x_k = phi x_{k-1} + sigma_x eta_k,  y_k = x_k + sigma_y eps_k.
/// Parameter rows are (phi, sigma_x, sigma_y); phi maps to atanh on the
/// estimation scale and the two scales to log.
class LinearGaussianModel {
public:
    using State = double;

    std::size_t parameter_count() const noexcept { return 3; }
    std::vector<std::string> parameter_names() const { return {"phi", "sigma_x", "sigma_y"}; }

    double initial_state(std::span<const double>) const { return 0.0; }
    void advance(double& state, std::span<const double> theta, std::size_t k, const RngStreamKey& key) const;
    void log_weights(std::span<const double> states, const ParticleParams& params, double y,
                     std::span<double> out) const;
    double observed_value(double state) const { return state; }
    void to_estimation(std::span<const double> natural, std::span<double> est) const;
    void to_natural(std::span<const double> est, std::span<double> natural) const;
};

/// Exact log-likelihood by the Kalman filter.
double kalman_loglik(double phi, double sigma_x, double sigma_y, std::span<const double> y);

std::vector<double> simulate_linear_gaussian(double phi, double sigma_x, double sigma_y, std::size_t n,
                                             std::uint64_t seed);

}  // namespace blowfly
