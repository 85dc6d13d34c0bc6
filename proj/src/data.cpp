#include "blowfly/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>

namespace blowfly {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
    s = trim(s);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

void validate_series(const ObservationSeries& series) {
    if (series.times.size() != series.counts.size())
        throw Error(ErrorCode::InvalidArgument, "times and counts differ in length");
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (series.counts[k] < 0) throw Error(ErrorCode::NegativeCount, "negative count at row " + std::to_string(k + 1), k);
        if (k > 0 && series.times[k] - series.times[k - 1] != kObservationSpacing)
            throw Error(ErrorCode::NonUniformSpacing,
                        "day " + std::to_string(series.times[k]) + " does not follow day " +
                            std::to_string(series.times[k - 1]) + " by 2",
                        k);
    }
    if (series.size() < kInitLength + 1)
        throw Error(ErrorCode::WindowTooShort, "need at least 9 observations, got " + std::to_string(series.size()));
}

ObservationSeries parse_series(std::istream& in) {
    ObservationSeries series;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (!header_seen) {
            header_seen = true;
            if (view != "day,count")
                throw Error(ErrorCode::MalformedRow, "expected header 'day,count' on line 1", line_no);
            continue;
        }
        if (view.empty()) continue;
        const auto comma = view.find(',');
        if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos)
            throw Error(ErrorCode::MalformedRow, "expected two fields on line " + std::to_string(line_no), line_no);
        int day = 0;
        std::int64_t count = 0;
        if (!parse_int(view.substr(0, comma), day) || !parse_int(view.substr(comma + 1), count))
            throw Error(ErrorCode::MalformedRow, "non-integer field on line " + std::to_string(line_no), line_no);
        series.times.push_back(day);
        series.counts.push_back(count);
    }
    if (!header_seen) throw Error(ErrorCode::MalformedRow, "empty file", 0);
    validate_series(series);
    return series;
}

ObservationSeries load_series(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
    return parse_series(in);
}

InitWindow init_window(const ObservationSeries& series) {
    if (series.size() < kInitLength) throw Error(ErrorCode::WindowTooShort, "need eight observations");
    InitWindow w;
    w.times.assign(series.times.begin(), series.times.begin() + kInitLength);
    w.counts.assign(series.counts.begin(), series.counts.begin() + kInitLength);
    w.anchor_time = w.times.back();
    return w;
}

std::vector<double> fit_observations(const ObservationSeries& series) {
    if (series.size() <= kInitLength) throw Error(ErrorCode::WindowTooShort, "no observations after the window");
    return {series.counts.begin() + kInitLength, series.counts.end()};
}

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)), second_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw Error(ErrorCode::InvalidArgument, "spline needs matching knots, at least two");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw Error(ErrorCode::InvalidArgument, "spline knots must increase");
    if (n == 2) return;

    // Tridiagonal system for the interior second derivatives (Thomas algorithm).
    const std::size_t m = n - 2;
    std::vector<double> diag(m), upper(m), rhs(m);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < m; ++i) {
        const double lower = x_[i + 1] - x_[i];  // h_i, symmetric with upper[i-1]
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    second_[m] = rhs[m - 1] / diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) second_[i + 1] = (rhs[i] - upper[i] * second_[i + 2]) / diag[i];
}

double NaturalCubicSpline::operator()(double at) const {
    std::size_t i = 0;
    while (i + 2 < x_.size() && at > x_[i + 1]) ++i;
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - at) / h;
    const double b = (at - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) * h * h / 6.0;
}

DelayState initial_state(const InitWindow& window, int delta, int tau) {
    if (delta <= 0 || tau <= 0) throw Error(ErrorCode::InvalidArgument, "delta and tau must be positive");
    if (tau % delta != 0) throw Error(ErrorCode::IndivisibleLag, "delta does not divide tau");
    if (window.counts.size() != kInitLength || window.times.size() != kInitLength)
        throw Error(ErrorCode::WindowTooShort, "initial window must hold eight observations");
    const int span = window.times.back() - window.times.front();
    if (tau > span) throw Error(ErrorCode::WindowTooShort, "lag reaches before the first observation");

    const std::size_t length = static_cast<std::size_t>(tau / delta) + 1;
    std::vector<std::int64_t> history(length);
    if (delta == kObservationSpacing) {
        for (std::size_t j = 0; j < length; ++j) history[j] = window.counts[kInitLength - 1 - j];
    } else {
        std::vector<double> x(window.times.begin(), window.times.end());
        std::vector<double> y(window.counts.begin(), window.counts.end());
        const NaturalCubicSpline spline(std::move(x), std::move(y));
        for (std::size_t j = 0; j < length; ++j) {
            const double v = spline(static_cast<double>(window.anchor_time - static_cast<int>(j) * delta));
            history[j] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(v + 0.5)));
        }
    }
    return DelayState(history, window.anchor_time, delta);
}

}  // namespace blowfly
