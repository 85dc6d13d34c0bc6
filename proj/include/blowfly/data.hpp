#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <vector>

#include "blowfly/model_core.hpp"

namespace blowfly {

/// Bi-daily adult counts y_1..y_T observed at day-stamps spaced 2 days apart.
struct ObservationSeries {
    std::vector<int> times;
    std::vector<std::int64_t> counts;

    std::size_t size() const noexcept { return counts.size(); }
};

inline constexpr std::size_t kInitLength = 8;
inline constexpr int kObservationSpacing = 2;

/// The first eight observations, used to build the initial delay state at
/// anchor_time = t_8.
struct InitWindow {
    int anchor_time = 0;
    std::vector<int> times;
    std::vector<std::int64_t> counts;
};

/// Throws NonUniformSpacing, NegativeCount or WindowTooShort.
void validate_series(const ObservationSeries& series);

/// Parses `day,count` CSV with a header line. Line numbers in errors are
/// 1-based and count the header.
ObservationSeries parse_series(std::istream& in);
ObservationSeries load_series(const std::filesystem::path& path);

InitWindow init_window(const ObservationSeries& series);

/// Counts y_9..y_T as doubles, the observations a likelihood is computed for.
std::vector<double> fit_observations(const ObservationSeries& series);

/// Natural cubic spline (zero second derivative at both ends) through
/// strictly increasing knots.
class NaturalCubicSpline {
public:
    NaturalCubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double at) const;

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> second_;  // second derivatives at the knots
};

/// Initial delay state at t_8 for step `delta` and lag `tau` (days). With
/// delta = 2 the history is the reversed window counts; otherwise a natural
/// cubic spline through the window is sampled at t_8 - j*delta, rounded
/// half-up and clamped at zero.
DelayState initial_state(const InitWindow& window, int delta, int tau);

}  // namespace blowfly
