#include "blowfly/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace blowfly {

namespace {

double safe_eval(const Objective& f, std::span<const double> x, std::size_t& count) {
    ++count;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options) {
    const std::size_t n = x0.size();
    NelderMeadResult result;
    std::size_t evals = 0;
    if (n == 0) {
        result.x = x0;
        result.value = safe_eval(f, x0, evals);
        result.evaluations = evals;
        result.converged = true;
        return result;
    }

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        const double step = options.initial_step.empty() ? options.default_step : options.initial_step[i];
        simplex[i + 1][i] += step;
    }
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = safe_eval(f, simplex[i], evals);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), second(n);
    auto along = [&](double t, std::vector<double>& out) {
        // out = centroid + t * (centroid - worst)
        const auto& worst = simplex[order[n]];
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (centroid[j] - worst[j]);
    };

    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order[0];
        const std::size_t worst = order[n];

        double size = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                size = std::max(size, std::abs(simplex[order[i]][j] - simplex[best][j]));
        const double spread = values[worst] - values[best];
        if (std::isfinite(values[best]) && spread <= options.f_tolerance && size <= options.x_tolerance) {
            result.converged = true;
            break;
        }
        if (evals >= options.max_evaluations) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[order[i]][j];
        for (auto& c : centroid) c /= static_cast<double>(n);

        along(options.reflection, trial);
        const double fr = safe_eval(f, trial, evals);
        if (fr < values[best]) {
            along(options.reflection * options.expansion, second);
            const double fe = safe_eval(f, second, evals);
            if (fe < fr) {
                simplex[worst] = second;
                values[worst] = fe;
            } else {
                simplex[worst] = trial;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[order[n - 1]]) {
            simplex[worst] = trial;
            values[worst] = fr;
            continue;
        }
        if (fr < values[worst]) {
            along(options.reflection * options.contraction, second);  // outside contraction
            const double fc = safe_eval(f, second, evals);
            if (fc <= fr) {
                simplex[worst] = second;
                values[worst] = fc;
                continue;
            }
        } else {
            along(-options.contraction, second);  // inside contraction
            const double fc = safe_eval(f, second, evals);
            if (fc < values[worst]) {
                simplex[worst] = second;
                values[worst] = fc;
                continue;
            }
        }
        for (std::size_t i = 1; i <= n; ++i) {
            auto& v = simplex[order[i]];
            for (std::size_t j = 0; j < n; ++j) v[j] = simplex[best][j] + options.shrink * (v[j] - simplex[best][j]);
            values[order[i]] = safe_eval(f, v, evals);
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    result.x = simplex[best];
    result.value = values[best];
    result.evaluations = evals;
    return result;
}

NelderMeadResult nelder_mead_polished(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options,
                                      std::size_t max_passes, double improvement) {
    NelderMeadResult best = nelder_mead(f, std::move(x0), options);
    std::size_t total = best.evaluations;
    for (std::size_t pass = 1; pass < max_passes; ++pass) {
        NelderMeadResult next = nelder_mead(f, best.x, options);
        total += next.evaluations;
        const bool better = next.value < best.value;
        const double gain = best.value - next.value;
        if (better) best = std::move(next);
        if (!better || gain < improvement) break;
    }
    best.evaluations = total;
    return best;
}

}  // namespace blowfly
