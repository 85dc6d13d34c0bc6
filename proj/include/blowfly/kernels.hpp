#pragma once

// Data-parallel inner loops of the particle filter. Every kernel has a scalar
// reference implementation; vector variants are selected once at runtime from
// CPU features and must agree with the reference to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace blowfly::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

struct KernelTable {
    Isa isa;
    // max over x; -inf for an all -inf input
    double (*max_value)(const double* x, std::size_t n);
    // w[i] = exp(lw[i] - shift); returns sum of w
    double (*exp_shift_sum)(const double* lw, std::size_t n, double shift, double* w);
    double (*sum_squares)(const double* x, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    // Count-dependent part of the negative binomial log-pmf with mean N and size r:
    //   out[i] = y * (log N - log(r + N)) - r * log1p(N / r)
    // with out = 0 when N = 0 and y = 0, and -inf when N = 0 and y > 0.
    void (*nb_log_terms)(double y, const double* counts, const double* size, std::size_t n, double* out);
    // Elementwise exp and log, exposed for equivalence testing.
    void (*exp_array)(const double* x, std::size_t n, double* out);
    void (*log_array)(const double* x, std::size_t n, double* out);
};

bool isa_available(Isa isa);

/// Kernel table for a specific ISA. Throws if the ISA is unavailable.
const KernelTable& table(Isa isa);

/// The table chosen at first use: the widest available ISA, unless the
/// environment variable BLOWFLY_SIMD=scalar forces the reference path.
const KernelTable& active();

namespace detail {
extern const KernelTable kScalarTable;
#if defined(BLOWFLY_HAVE_AVX2_KERNELS)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

// Span conveniences over the active table.
inline double max_value(std::span<const double> x) { return active().max_value(x.data(), x.size()); }
inline double exp_shift_sum(std::span<const double> lw, double shift, std::span<double> w) {
    return active().exp_shift_sum(lw.data(), lw.size(), shift, w.data());
}
inline double sum_squares(std::span<const double> x) { return active().sum_squares(x.data(), x.size()); }
inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline void nb_log_terms(double y, std::span<const double> counts, std::span<const double> size,
                         std::span<double> out) {
    active().nb_log_terms(y, counts.data(), size.data(), counts.size(), out.data());
}

}  // namespace blowfly::kernels
