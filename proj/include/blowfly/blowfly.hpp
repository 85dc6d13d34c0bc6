#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blowfly/model_core.hpp"
#include "blowfly/rng.hpp"

namespace blowfly {

struct StepOutcome {
    std::int64_t recruits = 0;
    std::int64_t survivors = 0;
    std::int64_t next_N = 0;
};

/// One Euler step of the stochastic delay model:
///   R ~ Poisson(N(t-tau) P exp(-N(t-tau)/N0) delta e),
///   S ~ Binomial(N(t), exp(-delta_rate delta eps)),
/// with e, eps independent mean-one Gamma effects. The caller shifts the state.
StepOutcome process_step(const DelayState& state, const BlowflyParams& params, const RngStreamKey& key_base);

/// Same draw from raw values; `theta` is (P, N0, delta_rate, sigma_p, sigma_d, ...).
StepOutcome process_step(std::int64_t current, std::int64_t lagged, std::span<const double> theta, int delta,
                         const RngStreamKey& key_base);

/// log Gamma(r + y) - log Gamma(r), stable for very large r.
double log_rising_factorial(double r, double y);

/// Negative binomial log-pmf with mean N and size 1/sigma_y^2, so the variance
/// is N + (sigma_y N)^2. N = 0 puts all mass at y = 0.
double measurement_logpdf(std::int64_t y, std::int64_t N, double sigma_y);

/// Gamma-Poisson draw from the same negative binomial.
std::int64_t measurement_draw(std::int64_t N, double sigma_y, const RngStreamKey& key);

/// Deterministic map of means: N(t-tau) P delta exp(-N(t-tau)/N0) + N(t) exp(-delta_rate delta).
double skeleton_step(const SkeletonState& state, const BlowflyParams& params);

/// Constant state mapped to itself by skeleton_step, N0 log(P delta / (1 - exp(-delta_rate delta))).
double skeleton_fixed_point(const BlowflyParams& params);

/// Iterates skeleton_step; element 0 is the current value of `init`.
std::vector<double> skeleton_trajectory(SkeletonState init, const BlowflyParams& params, std::size_t n_steps);

/// XT nonlinear autoregression parameters, in bi-day steps.
struct XTParams {
    double c = 0.0;
    double alpha = 1.0;
    double N0_xt = 0.0;
    double nu = 0.0;
    int tau = 14;            // days; the recursion lag is tau / 2 bi-day steps
    double sigma2 = -1.0;    // negative means "profile out"

    bool profiled() const noexcept { return sigma2 < 0.0; }
    std::size_t lag_steps() const noexcept { return static_cast<std::size_t>(tau / 2); }
    void validate() const;
};

/// nu * N_now + c * N_lag^alpha * exp(-N_lag / N0_xt)
double xt_skeleton_step(double current, double lagged, const XTParams& params);

/// Sample path from `init`. Measurements are drawn at even day-stamps when
/// `with_measurement` is set.
Trajectory simulate(const BlowflyParams& params, const DelayState& init, std::size_t n_steps, std::uint64_t seed,
                    bool with_measurement);

/// The Appendix POMP model, advancing in Euler steps of `delta` days between
/// bi-daily observations.
class BlowflyModel {
public:
    using State = DelayState;

    BlowflyModel(DelayState init, int delta, int tau);

    std::size_t parameter_count() const noexcept { return BlowflyParams::kEstimated; }
    std::vector<std::string> parameter_names() const;
    int delta() const noexcept { return delta_; }
    int tau() const noexcept { return tau_; }
    std::size_t steps_per_observation() const noexcept { return steps_per_obs_; }

    DelayState initial_state(std::span<const double>) const { return init_; }
    void advance(DelayState& state, std::span<const double> theta, std::size_t k, const RngStreamKey& key) const;
    void log_weights(std::span<const DelayState> states, const ParticleParams& params, double y,
                     std::span<double> out) const;
    double observed_value(const DelayState& state) const { return static_cast<double>(state.current()); }
    void to_estimation(std::span<const double> natural, std::span<double> est) const;
    void to_natural(std::span<const double> est, std::span<double> natural) const;

    BlowflyParams params_from(std::span<const double> theta) const {
        return BlowflyParams::from_estimated(theta, delta_, tau_);
    }

private:
    DelayState init_;
    int delta_;
    int tau_;
    std::size_t steps_per_obs_;
};

}  // namespace blowfly
