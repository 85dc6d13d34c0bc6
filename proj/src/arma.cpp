#include "blowfly/arma.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "blowfly/error.hpp"
#include "blowfly/optim.hpp"
#include "blowfly/rng.hpp"

namespace blowfly {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::vector<double> negated(std::span<const double> v) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](double x) { return -x; });
    return out;
}

struct Layout {
    std::size_t p;
    std::size_t q;
    std::size_t size() const { return p + q + 2; }
};

// Unconstrained coordinates: atanh of AR and MA partial autocorrelations,
// intercept, log variance.
ArmaParams decode(std::span<const double> x, const Layout& layout) {
    std::vector<double> u(layout.p);
    for (std::size_t i = 0; i < layout.p; ++i) u[i] = std::tanh(x[i]);
    std::vector<double> v(layout.q);
    for (std::size_t i = 0; i < layout.q; ++i) v[i] = std::tanh(x[layout.p + i]);
    ArmaParams out;
    out.ar = pacf_to_ar(u);
    out.ma = negated(pacf_to_ar(v));
    out.intercept = x[layout.p + layout.q];
    out.var = std::exp(x[layout.p + layout.q + 1]);
    return out;
}

std::vector<double> encode(const ArmaParams& params, const Layout& layout) {
    std::vector<double> x(layout.size());
    auto clamp_atanh = [](double u) { return std::atanh(std::clamp(u, -0.95, 0.95)); };
    auto u = ar_to_pacf(params.ar);
    if (u.size() != layout.p) u.assign(layout.p, 0.0);
    for (std::size_t i = 0; i < layout.p; ++i) x[i] = clamp_atanh(u[i]);
    auto v = ar_to_pacf(negated(params.ma));
    if (v.size() != layout.q) v.assign(layout.q, 0.0);
    for (std::size_t i = 0; i < layout.q; ++i) x[layout.p + i] = clamp_atanh(v[i]);
    x[layout.p + layout.q] = params.intercept;
    x[layout.p + layout.q + 1] = std::log(params.var);
    return x;
}

double mean_of(std::span<const double> z) {
    double s = 0.0;
    for (const double v : z) s += v;
    return s / static_cast<double>(z.size());
}

}  // namespace

std::vector<double> pacf_to_ar(std::span<const double> pacf) {
    std::vector<double> phi;
    std::vector<double> prev;
    for (std::size_t k = 0; k < pacf.size(); ++k) {
        prev = phi;
        phi.assign(k + 1, 0.0);
        phi[k] = pacf[k];
        for (std::size_t j = 0; j < k; ++j) phi[j] = prev[j] - pacf[k] * prev[k - 1 - j];
    }
    return phi;
}

std::vector<double> ar_to_pacf(std::span<const double> ar) {
    std::vector<double> phi(ar.begin(), ar.end());
    std::vector<double> pacf(ar.size());
    for (std::size_t k = ar.size(); k-- > 0;) {
        const double u = phi[k];
        if (!(std::abs(u) < 1.0)) return {};
        pacf[k] = u;
        std::vector<double> prev(k);
        for (std::size_t j = 0; j < k; ++j) prev[j] = (phi[j] + u * phi[k - 1 - j]) / (1.0 - u * u);
        phi = std::move(prev);
    }
    return pacf;
}

bool is_stationary(std::span<const double> ar) { return ar.empty() || !ar_to_pacf(ar).empty(); }

bool is_invertible(std::span<const double> ma) { return ma.empty() || !ar_to_pacf(negated(ma)).empty(); }

double arma_gaussian_loglik(const ArmaParams& params, std::span<const double> z) {
    if (!is_stationary(params.ar)) throw Error(ErrorCode::NonStationary, "AR polynomial has a root inside the unit circle");
    if (!is_invertible(params.ma)) throw Error(ErrorCode::NonInvertible, "MA polynomial has a root inside the unit circle");
    if (!(params.var > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "innovation variance must be positive");

    const std::size_t p = params.ar.size();
    const std::size_t q = params.ma.size();
    const auto r = static_cast<Eigen::Index>(std::max(p, q + 1));

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(r, r);
    for (std::size_t i = 0; i < p; ++i) T(static_cast<Eigen::Index>(i), 0) = params.ar[i];
    for (Eigen::Index i = 0; i + 1 < r; ++i) T(i, i + 1) = 1.0;
    Eigen::VectorXd R = Eigen::VectorXd::Zero(r);
    R(0) = 1.0;
    for (std::size_t j = 0; j < q; ++j) R(static_cast<Eigen::Index>(j + 1)) = params.ma[j];
    const Eigen::MatrixXd Q = params.var * R * R.transpose();

    // Stationary covariance: vec(P) = (I - T kron T)^{-1} vec(Q).
    const Eigen::Index r2 = r * r;
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(r2, r2);
    for (Eigen::Index a = 0; a < r; ++a)
        for (Eigen::Index b = 0; b < r; ++b)
            for (Eigen::Index c = 0; c < r; ++c)
                for (Eigen::Index d = 0; d < r; ++d) K(a * r + c, b * r + d) -= T(a, b) * T(c, d);
    const Eigen::VectorXd vecQ = Eigen::Map<const Eigen::VectorXd>(Q.data(), r2);
    const Eigen::VectorXd vecP = K.partialPivLu().solve(vecQ);
    Eigen::MatrixXd P = Eigen::Map<const Eigen::MatrixXd>(vecP.data(), r, r);
    P = 0.5 * (P + P.transpose());

    Eigen::VectorXd a = Eigen::VectorXd::Zero(r);
    double ll = 0.0;
    for (const double obs : z) {
        const double F = P(0, 0);
        const double v = obs - params.intercept - a(0);
        ll += -0.5 * (kLog2Pi + std::log(F) + v * v / F);
        const Eigen::VectorXd gain = P.col(0) / F;
        a += gain * v;
        P -= gain * P.row(0);
        a = T * a;
        P = T * P * T.transpose() + Q;
    }
    return ll;
}

double log_jacobian(std::span<const double> counts) {
    double s = 0.0;
    for (const double y : counts) s += std::log(y);
    return s;
}

double arma_loglik(const ArmaParams& params, std::span<const double> counts, bool count_scale) {
    std::vector<double> z(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (!(counts[k] > 0.0)) throw Error(ErrorCode::ZeroCount, "log of a zero count at index " + std::to_string(k), k);
        z[k] = std::log(counts[k]);
    }
    const double ll = arma_gaussian_loglik(params, z);
    return count_scale ? ll - log_jacobian(counts) : ll;
}

ArmaParams arma_moments_start(std::span<const double> z, std::size_t p, std::size_t q) {
    const std::size_t n = z.size();
    const double mu = mean_of(z);
    std::vector<double> acov(p + 1, 0.0);
    for (std::size_t lag = 0; lag <= p && lag < n; ++lag) {
        for (std::size_t t = lag; t < n; ++t) acov[lag] += (z[t] - mu) * (z[t - lag] - mu);
        acov[lag] /= static_cast<double>(n);
    }
    ArmaParams start;
    start.intercept = mu;
    start.ma.assign(q, 0.0);

    // Durbin-Levinson on the sample autocovariances.
    std::vector<double> pacf;
    std::vector<double> phi;
    double v = acov[0];
    for (std::size_t k = 1; k <= p && v > 0.0; ++k) {
        double num = acov[k];
        for (std::size_t j = 0; j + 1 < k; ++j) num -= phi[j] * acov[k - 1 - j];
        const double u = std::clamp(num / v, -0.95, 0.95);
        pacf.push_back(u);
        phi = pacf_to_ar(pacf);
        v *= 1.0 - u * u;
    }
    pacf.resize(p, 0.0);
    start.ar = pacf_to_ar(pacf);
    start.var = v > 0.0 ? v : 1.0;
    return start;
}

ArmaFit arma_fit_gaussian(std::span<const double> z, std::size_t p, std::size_t q, const ArmaFitOptions& options) {
    if (z.size() < p + q + 2) throw Error(ErrorCode::InvalidArgument, "series too short for the requested order");
    const Layout layout{p, q};
    const ArmaParams start = arma_moments_start(z, p, q);
    const std::vector<double> x0 = encode(start, layout);

    const double mu = mean_of(z);
    double zvar = 0.0;
    for (const double v : z) zvar += (v - mu) * (v - mu);
    const double sd = std::max(std::sqrt(zvar / static_cast<double>(z.size())), 1e-8);

    const Objective objective = [&](std::span<const double> x) {
        try {
            return -arma_gaussian_loglik(decode(x, layout), z);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    NelderMeadOptions nm;
    nm.max_evaluations = 4000 * layout.size();
    nm.initial_step.assign(layout.size(), 0.2);
    nm.initial_step[p + q] = 0.1 * sd;

    const double start_value = objective(x0);
    NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r <= options.restarts; ++r) {
        std::vector<double> x = x0;
        if (r > 0) {
            RngStream rng(RngStreamKey{options.seed, 0, 0, static_cast<std::uint32_t>(r), Channel::Auxiliary});
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double scale = i == p + q ? sd : 1.0;
                x[i] += draw_normal(rng, 0.0, options.jitter_sd * scale);
            }
        }
        NelderMeadResult run = nelder_mead_polished(objective, x, nm);
        if (run.value < best.value) best = std::move(run);
    }
    if (!std::isfinite(best.value)) throw Error(ErrorCode::OptimFailed, "no restart reached a finite likelihood");

    ArmaFit fit;
    fit.params = decode(best.x, layout);
    fit.start_loglik = -start_value;
    fit.result.model = "arma";
    fit.result.loglik = -best.value;
    fit.result.k = p + q + 2;
    fit.result.aic = aic(fit.result.loglik, fit.result.k);
    fit.result.scale = LoglikScale::Log;
    for (std::size_t i = 0; i < p; ++i) fit.result.params.emplace_back("ar" + std::to_string(i + 1), fit.params.ar[i]);
    for (std::size_t j = 0; j < q; ++j) fit.result.params.emplace_back("ma" + std::to_string(j + 1), fit.params.ma[j]);
    fit.result.params.emplace_back("intercept", fit.params.intercept);
    fit.result.params.emplace_back("var", fit.params.var);
    fit.result.diagnostics.emplace_back("evaluations", static_cast<double>(best.evaluations));
    fit.result.diagnostics.emplace_back("converged", best.converged ? 1.0 : 0.0);
    return fit;
}

ArmaFit arma_fit(std::span<const double> counts, std::size_t p, std::size_t q, const ArmaFitOptions& options) {
    std::vector<double> z(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (!(counts[k] > 0.0)) throw Error(ErrorCode::ZeroCount, "log of a zero count at index " + std::to_string(k), k);
        z[k] = std::log(counts[k]);
    }
    ArmaFit fit = arma_fit_gaussian(z, p, q, options);
    fit.result.model = "log-arma";
    if (options.scale == LoglikScale::Count) {
        const double jac = log_jacobian(counts);
        fit.result.loglik -= jac;
        fit.start_loglik -= jac;
        fit.result.aic = aic(fit.result.loglik, fit.result.k);
    }
    fit.result.scale = options.scale;
    return fit;
}

}  // namespace blowfly
