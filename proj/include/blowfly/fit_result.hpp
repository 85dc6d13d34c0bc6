#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace blowfly {

enum class LoglikScale { Count, Log };

inline const char* to_string(LoglikScale s) { return s == LoglikScale::Count ? "count" : "log"; }

/// Parameter estimate plus log-likelihood, reported the same way for every
/// model family.
struct FitResult {
    std::string model;
    std::vector<std::pair<std::string, double>> params;
    double loglik = 0.0;
    std::optional<double> loglik_se;
    std::size_t k = 0;  // estimated parameter count
    double aic = 0.0;
    LoglikScale scale = LoglikScale::Count;
    std::vector<std::pair<std::string, double>> diagnostics;
};

inline double aic(double loglik, std::size_t k) { return -2.0 * loglik + 2.0 * static_cast<double>(k); }

}  // namespace blowfly
