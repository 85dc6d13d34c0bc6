#include <cmath>
#include <limits>

#include "blowfly/kernels.hpp"

namespace blowfly::kernels {
namespace {

double max_value(const double* x, std::size_t n) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] > m) m = x[i];
    return m;
}

double exp_shift_sum(const double* lw, std::size_t n, double shift, double* w) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::exp(lw[i] - shift);
        s += w[i];
    }
    return s;
}

double sum_squares(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void nb_log_terms(double y, const double* counts, const double* size, std::size_t n, double* out) {
    const double at_zero = y > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double N = counts[i];
        const double r = size[i];
        if (N <= 0.0) {
            out[i] = at_zero;
            continue;
        }
        out[i] = y * (std::log(N) - std::log(r + N)) - r * std::log1p(N / r);
    }
}

void exp_array(const double* x, std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void log_array(const double* x, std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::log(x[i]);
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{Isa::Scalar, max_value, exp_shift_sum, sum_squares, dot,
                               nb_log_terms, exp_array, log_array};
}

}  // namespace blowfly::kernels
