#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "blowfly/error.hpp"
#include "blowfly/fit_result.hpp"

namespace blowfly {

/// ARMA(p, q) on z_k = log y_k:
///   (z_k - mu) - sum ar_i (z_{k-i} - mu) = e_k + sum ma_j e_{k-j},  e ~ N(0, var).
struct ArmaParams {
    std::vector<double> ar;
    std::vector<double> ma;
    double intercept = 0.0;
    double var = 1.0;
};

/// Durbin-Levinson map from partial autocorrelations in (-1, 1) to the
/// coefficients of a stationary AR polynomial, and its inverse. The inverse
/// returns an empty vector when the coefficients are not stationary.
std::vector<double> pacf_to_ar(std::span<const double> pacf);
std::vector<double> ar_to_pacf(std::span<const double> ar);

bool is_stationary(std::span<const double> ar);
/// MA polynomial 1 + ma_1 z + ... has all roots outside the unit circle.
bool is_invertible(std::span<const double> ma);

/// Exact stationary Gaussian log-likelihood of `z` by the Kalman filter on the
/// Harvey state-space form. Throws NonStationary or NonInvertible.
double arma_gaussian_loglik(const ArmaParams& params, std::span<const double> z);

/// Log-ARMA likelihood of positive counts. With `count_scale` the Jacobian
/// -sum log y is included so the value is a density on the count scale.
/// Throws ZeroCount with the offending index.
double arma_loglik(const ArmaParams& params, std::span<const double> counts, bool count_scale);

struct ArmaFitOptions {
    std::size_t restarts = 20;
    std::uint64_t seed = 20110601;
    double jitter_sd = 0.5;
    LoglikScale scale = LoglikScale::Count;
};

struct ArmaFit {
    ArmaParams params;
    FitResult result;
    double start_loglik = 0.0;  // method-of-moments start, same scale as result
};

/// Method-of-moments start: sample mean, Durbin-Levinson partial
/// autocorrelations for the AR block, zero MA, matching innovation variance.
ArmaParams arma_moments_start(std::span<const double> z, std::size_t p, std::size_t q);

/// Maximum likelihood fit of ARMA(p, q) to `z` directly (no log transform).
ArmaFit arma_fit_gaussian(std::span<const double> z, std::size_t p, std::size_t q, const ArmaFitOptions& options = {});

/// Maximum likelihood log-ARMA(p, q) fit to positive counts.
ArmaFit arma_fit(std::span<const double> counts, std::size_t p, std::size_t q, const ArmaFitOptions& options = {});

/// Sum of log y, the Jacobian between log and count scales.
double log_jacobian(std::span<const double> counts);

}  // namespace blowfly
