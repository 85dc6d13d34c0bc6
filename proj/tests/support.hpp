#pragma once

#include <cmath>
#include <filesystem>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "blowfly/data.hpp"

namespace blowfly::test {

inline std::filesystem::path source_dir() { return BLOWFLY_SOURCE_DIR; }

/// The Nicholson series, when data/blowflies.csv is present.
inline std::optional<ObservationSeries> nicholson() {
    const auto path = source_dir() / "data" / "blowflies.csv";
    if (!std::filesystem::exists(path)) return std::nullopt;
    return load_series(path);
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // unbiased
    std::size_t n = 0;
    double se_mean() const { return std::sqrt(var / static_cast<double>(n)); }
    // normal-theory standard error of the sample variance, using the fourth central moment
    double m4 = 0.0;
    double se_var() const {
        const double nn = static_cast<double>(n);
        return std::sqrt((m4 - var * var * (nn - 3.0) / (nn - 1.0)) / nn);
    }
};

inline Moments moments(std::span<const double> x) {
    Moments m;
    m.n = x.size();
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m.n);
    double s2 = 0.0;
    double s4 = 0.0;
    for (const double v : x) {
        const double d = v - m.mean;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    m.var = s2 / static_cast<double>(m.n - 1);
    m.m4 = s4 / static_cast<double>(m.n);
    return m;
}

}  // namespace blowfly::test
