#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "blowfly/blowfly.hpp"
#include "blowfly/fit_result.hpp"

namespace blowfly {

/// Average prediction error over horizons 1..horizon. An empty weight vector
/// means uniform weights.
struct ApeConfig {
    std::size_t horizon = 1;
    std::vector<double> weights;

    static ApeConfig one_step() { return {}; }
    static ApeConfig catch_all(std::size_t horizon = 10) { return ApeConfig{horizon, {}}; }

    double weight(std::size_t m) const { return weights.empty() ? 1.0 : weights[m - 1]; }
    void validate() const;
};

/// Index (0-based) of the first scored observation, y_9.
inline constexpr std::size_t kFirstScored = 8;

/// One-step predictions from observed history, then the Gaussian
/// log-likelihood of the residuals on the count scale. Uses params.sigma2, or
/// RSS/n when sigma2 is profiled. `counts` holds y_1..y_T; y_{first+1}.. are scored.
double xt_gaussian_loglik(const XTParams& params, std::span<const double> counts, std::size_t first = kFirstScored);

/// Residual sum of squares and count of the one-step predictions.
struct OneStepResiduals {
    double rss = 0.0;
    std::size_t n = 0;
};
OneStepResiduals xt_one_step_residuals(const XTParams& params, std::span<const double> counts,
                                       std::size_t first = kFirstScored);

/// m-step prediction of index k from origin k - m: the recursion is iterated
/// m times on its own outputs, with observed values at and before the origin.
double xt_predict(const XTParams& params, std::span<const double> counts, std::size_t k, std::size_t m);

/// sum_m w_m mean_k (y_k - yhat_{k|k-m})^2 / sum_m w_m.
double ape_objective(const XTParams& params, std::span<const double> counts, const ApeConfig& config,
                     std::size_t first = kFirstScored);

struct XtFit {
    XTParams params;
    double objective = 0.0;
    FitResult result;  // loglik is the profiled Gaussian log-likelihood at the optimum
};

/// Nelder-Mead over (log c, log alpha, log N0_xt, logit nu) from each start;
/// the lowest objective wins.
XtFit ape_fit(std::span<const double> counts, const ApeConfig& config, std::span<const XTParams> starts,
              std::size_t first = kFirstScored);

struct DerivedQuantities {
    double eggs_rate = 0.0;             // c
    double recruit_maximizer = 0.0;     // alpha * N0
    double life_expectancy_days = 0.0;  // 2 / (1 - nu)
};

DerivedQuantities derived_quantities(const XTParams& params);

/// Inverse of derived_quantities for a given alpha.
XTParams params_from_derived(const DerivedQuantities& q, double alpha, int tau = 14);

/// Published APE_1 and APE_T estimates expressed as XTParams (sigma2 profiled).
XTParams ape1_published();
XTParams apeT_published();

struct ChisqReport {
    double twice_diff = 0.0;
    double threshold_95 = 0.0;
    std::size_t df = 0;
    bool plausible_both = false;
};

ChisqReport chisq_compare(double loglik_a, double loglik_b, std::size_t df);

struct ComparisonRow {
    std::string model;
    std::size_t k = 0;
    double loglik = 0.0;
    double aic = 0.0;
    std::string notes;
};

/// Fills in AIC for each row and sorts ascending (stable on ties).
std::vector<ComparisonRow> aic_table(std::vector<ComparisonRow> rows);

}  // namespace blowfly
