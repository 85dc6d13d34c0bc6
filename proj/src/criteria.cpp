#include "blowfly/criteria.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>

#include "blowfly/optim.hpp"

namespace blowfly {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_history(const XTParams& params, std::span<const double> counts, std::size_t first) {
    const std::size_t lag = params.lag_steps();
    if (first < lag + 1) throw Error(ErrorCode::InsufficientHistory, "scoring starts before the lag is available", first);
    if (first >= counts.size()) throw Error(ErrorCode::InsufficientHistory, "nothing left to score", first);
}

}  // namespace

void ApeConfig::validate() const {
    if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be at least 1");
    if (!weights.empty()) {
        if (weights.size() != horizon) throw Error(ErrorCode::InvalidArgument, "one weight per horizon");
        double total = 0.0;
        for (const double w : weights) {
            if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must be non-negative");
            total += w;
        }
        if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must not all be zero");
    }
}

double xt_predict(const XTParams& params, std::span<const double> counts, std::size_t k, std::size_t m) {
    const std::size_t lag = params.lag_steps();
    const std::size_t origin = k - m;
    // predicted[s] holds the forecast for index origin + 1 + s
    std::vector<double> predicted(m);
    auto value = [&](std::size_t t) { return t <= origin ? counts[t] : predicted[t - origin - 1]; };
    for (std::size_t s = 0; s < m; ++s) {
        const std::size_t t = origin + 1 + s;
        predicted[s] = xt_skeleton_step(value(t - 1), value(t - 1 - lag), params);
    }
    return predicted[m - 1];
}

OneStepResiduals xt_one_step_residuals(const XTParams& params, std::span<const double> counts, std::size_t first) {
    require_history(params, counts, first);
    OneStepResiduals out;
    const std::size_t lag = params.lag_steps();
    for (std::size_t k = first; k < counts.size(); ++k) {
        const double r = counts[k] - xt_skeleton_step(counts[k - 1], counts[k - 1 - lag], params);
        out.rss += r * r;
        ++out.n;
    }
    return out;
}

double xt_gaussian_loglik(const XTParams& params, std::span<const double> counts, std::size_t first) {
    const auto res = xt_one_step_residuals(params, counts, first);
    const double n = static_cast<double>(res.n);
    if (params.profiled()) {
        const double s2 = res.rss / n;
        return -0.5 * n * (kLog2Pi + std::log(s2) + 1.0);
    }
    return -0.5 * n * (kLog2Pi + std::log(params.sigma2)) - 0.5 * res.rss / params.sigma2;
}

double ape_objective(const XTParams& params, std::span<const double> counts, const ApeConfig& config,
                     std::size_t first) {
    config.validate();
    require_history(params, counts, first);
    const std::size_t lag = params.lag_steps();
    double total = 0.0;
    double weight_sum = 0.0;
    for (std::size_t m = 1; m <= config.horizon; ++m) {
        const double w = config.weight(m);
        if (w == 0.0) continue;
        const std::size_t start = std::max(first, lag + m);
        if (start >= counts.size()) throw Error(ErrorCode::InsufficientHistory, "horizon longer than the series", m);
        double sse = 0.0;
        for (std::size_t k = start; k < counts.size(); ++k) {
            const double r = counts[k] - xt_predict(params, counts, k, m);
            sse += r * r;
        }
        total += w * sse / static_cast<double>(counts.size() - start);
        weight_sum += w;
    }
    return total / weight_sum;
}

XtFit ape_fit(std::span<const double> counts, const ApeConfig& config, std::span<const XTParams> starts,
              std::size_t first) {
    config.validate();
    if (starts.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one start");
    const int tau = starts.front().tau;
    auto decode = [tau](std::span<const double> x) {
        XTParams p;
        p.c = std::exp(x[0]);
        p.alpha = std::exp(x[1]);
        p.N0_xt = std::exp(x[2]);
        p.nu = 1.0 / (1.0 + std::exp(-x[3]));
        p.tau = tau;
        return p;
    };
    const Objective objective = [&](std::span<const double> x) {
        const XTParams p = decode(x);
        if (!(p.nu > 0.0 && p.nu < 1.0)) return std::numeric_limits<double>::infinity();
        return ape_objective(p, counts, config, first);
    };

    NelderMeadOptions nm;
    nm.initial_step.assign(4, 0.2);
    nm.max_evaluations = 8000;
    NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        s.validate();
        std::vector<double> x0{std::log(s.c), std::log(s.alpha), std::log(s.N0_xt), std::log(s.nu / (1.0 - s.nu))};
        NelderMeadResult run = nelder_mead_polished(objective, x0, nm);
        if (run.value < best.value) best = std::move(run);
    }
    if (!std::isfinite(best.value)) throw Error(ErrorCode::OptimFailed, "no start reached a finite objective");

    XtFit fit;
    fit.params = decode(best.x);
    fit.objective = best.value;
    fit.result.model = "xt-gaussian";
    fit.result.params = {{"c", fit.params.c}, {"alpha", fit.params.alpha}, {"N0_xt", fit.params.N0_xt}, {"nu", fit.params.nu}};
    fit.result.loglik = xt_gaussian_loglik(fit.params, counts, first);
    fit.result.k = 5;  // c, alpha, N0, nu, sigma2
    fit.result.aic = aic(fit.result.loglik, fit.result.k);
    fit.result.diagnostics = {{"objective", fit.objective},
                              {"horizon", static_cast<double>(config.horizon)},
                              {"evaluations", static_cast<double>(best.evaluations)}};
    return fit;
}

DerivedQuantities derived_quantities(const XTParams& params) {
    return {params.c, params.alpha * params.N0_xt, 2.0 / (1.0 - params.nu)};
}

XTParams params_from_derived(const DerivedQuantities& q, double alpha, int tau) {
    XTParams p;
    p.c = q.eggs_rate;
    p.alpha = alpha;
    p.N0_xt = q.recruit_maximizer / alpha;
    p.nu = 1.0 - 2.0 / q.life_expectancy_days;
    p.tau = tau;
    return p;
}

XTParams ape1_published() { return params_from_derived({20.1, 499.0, 8.33}, 0.846); }

XTParams apeT_published() { return params_from_derived({592.0, 344.0, 5.67}, 0.263); }

ChisqReport chisq_compare(double loglik_a, double loglik_b, std::size_t df) {
    if (df < 1) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be at least 1");
    ChisqReport report;
    report.df = df;
    report.twice_diff = 2.0 * std::abs(loglik_a - loglik_b);
    report.threshold_95 = boost::math::quantile(boost::math::chi_squared(static_cast<double>(df)), 0.95);
    report.plausible_both = report.twice_diff <= report.threshold_95;
    return report;
}

std::vector<ComparisonRow> aic_table(std::vector<ComparisonRow> rows) {
    for (auto& r : rows) r.aic = aic(r.loglik, r.k);
    std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) { return a.aic < b.aic; });
    return rows;
}

}  // namespace blowfly
