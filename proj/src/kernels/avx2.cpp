// AVX2 + FMA variants. Compiled with -mavx2 -mfma; only reached through the
// dispatch table after a CPU feature check.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "blowfly/kernels.hpp"

namespace blowfly::kernels {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_max_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

// Cephes exp: range reduction by ln 2 in two parts, rational approximation on
// [-ln2/2, ln2/2], then exponent reconstruction.
inline __m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125E-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212E-6);
    const __m256d hi_limit = _mm256_set1_pd(709.78);
    const __m256d lo_limit = _mm256_set1_pd(-708.0);

    const __m256d overflow = _mm256_cmp_pd(x, hi_limit, _CMP_GT_OQ);
    const __m256d underflow = _mm256_cmp_pd(x, lo_limit, _CMP_LT_OQ);
    const __m256d is_nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
    __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo_limit), hi_limit);

    const __m256d fx = _mm256_round_pd(_mm256_mul_pd(xc, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    xc = _mm256_fnmadd_pd(fx, c1, xc);
    xc = _mm256_fnmadd_pd(fx, c2, xc);
    const __m256d xx = _mm256_mul_pd(xc, xc);

    __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
    p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(3.02994407707441961300E-2));
    p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(9.99999999999999999910E-1));
    p = _mm256_mul_pd(p, xc);

    __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.52448340349684104192E-3));
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.27265548208155028766E-1));
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.00000000000000000009E0));

    __m256d r = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    r = _mm256_fmadd_pd(r, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

    // 2^fx through the exponent field; fx + 1023 stays within [1, 2046].
    const __m256d magic = _mm256_set1_pd(4503599627370496.0 + 1023.0);
    const __m256i biased = _mm256_castpd_si256(_mm256_add_pd(fx, magic));
    const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(biased, 52));
    r = _mm256_mul_pd(r, scale);

    r = _mm256_blendv_pd(r, _mm256_setzero_pd(), underflow);
    r = _mm256_blendv_pd(r, _mm256_set1_pd(std::numeric_limits<double>::infinity()), overflow);
    return _mm256_blendv_pd(r, x, is_nan);
}

// Cephes log for normal positive inputs; zero, negative, inf and NaN lanes are
// patched afterwards. Subnormal inputs are not supported.
inline __m256d log_pd(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256i exp_field = _mm256_srli_epi64(bits, 52);
    const __m256d two52 = _mm256_set1_pd(4503599627370496.0);
    __m256d e = _mm256_sub_pd(
        _mm256_castsi256_pd(_mm256_or_si256(exp_field, _mm256_castpd_si256(two52))), two52);
    e = _mm256_sub_pd(e, _mm256_set1_pd(1022.0));

    const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i half_bits = _mm256_set1_epi64x(0x3FE0000000000000LL);
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_bits));

    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
    e = _mm256_sub_pd(e, _mm256_and_pd(one, small));
    m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(m, small)), one);

    const __m256d z = _mm256_mul_pd(m, m);

    __m256d p = _mm256_set1_pd(1.01875663804580931796E-4);
    p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(4.97494994976747001425E-1));
    p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(4.70579119878881725854E0));
    p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(1.44989225341610930846E1));
    p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(1.79368678507819816313E1));
    p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(7.70838733755885391666E0));

    __m256d q = _mm256_add_pd(m, _mm256_set1_pd(1.12873587189167450590E1));
    q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(4.52279145837532221105E1));
    q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(8.29875266912776603211E1));
    q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(7.11544750618563894466E1));
    q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(2.31251620126765340583E1));

    __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, p), q));
    y = _mm256_fmadd_pd(e, _mm256_set1_pd(-2.121944400546905827679e-4), y);
    y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
    __m256d r = _mm256_add_pd(m, y);
    r = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);

    const __m256d zero = _mm256_setzero_pd();
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    r = _mm256_blendv_pd(r, _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN()),
                         _mm256_cmp_pd(x, zero, _CMP_NGE_UQ));
    r = _mm256_blendv_pd(r, _mm256_sub_pd(zero, inf), _mm256_cmp_pd(x, zero, _CMP_EQ_OQ));
    r = _mm256_blendv_pd(r, inf, _mm256_cmp_pd(x, inf, _CMP_EQ_OQ));
    return r;
}

// log1p via log(1 + x) corrected by x / ((1 + x) - 1).
inline __m256d log1p_pd(__m256d x) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d u = _mm256_add_pd(one, x);
    const __m256d d = _mm256_sub_pd(u, one);
    const __m256d exact = _mm256_cmp_pd(d, _mm256_setzero_pd(), _CMP_EQ_OQ);
    const __m256d safe_d = _mm256_blendv_pd(d, one, exact);
    const __m256d r = _mm256_mul_pd(log_pd(u), _mm256_div_pd(x, safe_d));
    return _mm256_blendv_pd(r, x, exact);
}

double max_value(const double* x, std::size_t n) {
    const double ninf = -std::numeric_limits<double>::infinity();
    __m256d m0 = _mm256_set1_pd(ninf);
    __m256d m1 = m0;
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        m0 = _mm256_max_pd(m0, _mm256_loadu_pd(x + i));
        m1 = _mm256_max_pd(m1, _mm256_loadu_pd(x + i + 4));
    }
    double m = hmax(_mm256_max_pd(m0, m1));
    for (; i < n; ++i)
        if (x[i] > m) m = x[i];
    return m;
}

double exp_shift_sum(const double* lw, std::size_t n, double shift, double* w) {
    const __m256d s = _mm256_set1_pd(shift);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d e = exp_pd(_mm256_sub_pd(_mm256_loadu_pd(lw + i), s));
        _mm256_storeu_pd(w + i, e);
        acc = _mm256_add_pd(acc, e);
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        w[i] = std::exp(lw[i] - shift);
        total += w[i];
    }
    return total;
}

double sum_squares(const double* x, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d v0 = _mm256_loadu_pd(x + i);
        const __m256d v1 = _mm256_loadu_pd(x + i + 4);
        a0 = _mm256_fmadd_pd(v0, v0, a0);
        a1 = _mm256_fmadd_pd(v1, v1, a1);
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), a1);
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void nb_log_terms(double y, const double* counts, const double* size, std::size_t n, double* out) {
    const double at_zero = y > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
    const __m256d vy = _mm256_set1_pd(y);
    const __m256d vzero_val = _mm256_set1_pd(at_zero);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d N = _mm256_loadu_pd(counts + i);
        const __m256d r = _mm256_loadu_pd(size + i);
        const __m256d empty = _mm256_cmp_pd(N, zero, _CMP_LE_OQ);
        // keep log finite on empty lanes; they are overwritten below
        const __m256d Nsafe = _mm256_blendv_pd(N, one, empty);
        const __m256d ratio = _mm256_sub_pd(log_pd(Nsafe), log_pd(_mm256_add_pd(r, Nsafe)));
        const __m256d l1p = log1p_pd(_mm256_div_pd(Nsafe, r));
        const __m256d v = _mm256_fnmadd_pd(r, l1p, _mm256_mul_pd(vy, ratio));
        _mm256_storeu_pd(out + i, _mm256_blendv_pd(v, vzero_val, empty));
    }
    for (; i < n; ++i) {
        const double N = counts[i];
        const double r = size[i];
        out[i] = N <= 0.0 ? at_zero : y * (std::log(N) - std::log(r + N)) - r * std::log1p(N / r);
    }
}

void exp_array(const double* x, std::size_t n, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = std::exp(x[i]);
}

void log_array(const double* x, std::size_t n, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, log_pd(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = std::log(x[i]);
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::Avx2, max_value, exp_shift_sum, sum_squares, dot,
                             nb_log_terms, exp_array, log_array};
}

}  // namespace blowfly::kernels
