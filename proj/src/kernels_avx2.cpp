// AVX2 kernel variants. Compiled with -mavx2 -mfma; only ever called after a
// runtime CPU check in active().

#include "nspolar/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)

#include <immintrin.h>

#include <bit>
#include <cmath>
#include <cstring>

namespace nspolar::kern {

namespace {

const __m256d kSignMask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000LL));
const __m256d kAbsMask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

// exp(-t) for t >= 0, ~1 ulp. Cody-Waite reduction, degree-13 Taylor core,
// exponent reassembly. Underflow (t > 708) flushes to 0, which is the right
// answer for the log1p(exp(-t)) composition.
inline __m256d exp_neg(__m256d t) {
    const __m256d x = _mm256_sub_pd(_mm256_setzero_pd(), t);
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);

    const __m256d kf =
        _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(kf, ln2_hi, x);
    r = _mm256_fnmadd_pd(kf, ln2_lo, r);

    // Taylor coefficients 1/13! ... 1/2!, then 1, 1.
    __m256d p = _mm256_set1_pd(1.6059043836821613e-10);
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.0876756987868096e-09));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.5052108385441720e-08));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.7557319223985893e-07));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.7557319223985888e-06));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.4801587301587302e-05));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.9841269841269841e-04));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.3888888888888889e-03));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(8.3333333333333333e-03));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(4.1666666666666664e-02));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.6666666666666666e-01));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(5.0e-01));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

    // 2^k via exponent field; k >= -1022 whenever t <= 708.
    const __m128i k32 = _mm256_cvtpd_epi32(kf);
    const __m256i k64 = _mm256_cvtepi32_epi64(k32);
    const __m256i biased = _mm256_add_epi64(k64, _mm256_set1_epi64x(1023));
    const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(biased, 52));
    __m256d result = _mm256_mul_pd(p, scale);

    const __m256d underflow = _mm256_cmp_pd(t, _mm256_set1_pd(708.0), _CMP_GT_OQ);
    return _mm256_andnot_pd(underflow, result);
}

// log1p(x) for x in [0, 1]: 2 atanh(s) with s = x/(x+2), s in [0, 1/3].
inline __m256d log1p_01(__m256d x) {
    const __m256d s = _mm256_div_pd(x, _mm256_add_pd(x, _mm256_set1_pd(2.0)));
    const __m256d t = _mm256_mul_pd(s, s);
    // atanh(s)/s = sum t^k / (2k+1), truncated at k = 16.
    __m256d p = _mm256_set1_pd(1.0 / 33.0);
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 31.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 29.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 27.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 25.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 23.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 21.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 19.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 17.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 15.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 13.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 11.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 9.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 7.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 5.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0 / 3.0));
    p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.0));
    return _mm256_mul_pd(_mm256_add_pd(s, s), p);
}

inline __m256d f_minsum_vec(__m256d a, __m256d b) {
    const __m256d sign = _mm256_and_pd(_mm256_xor_pd(a, b), kSignMask);
    const __m256d m = _mm256_min_pd(_mm256_and_pd(a, kAbsMask), _mm256_and_pd(b, kAbsMask));
    return _mm256_or_pd(m, sign);
}

void xor_into_avx2(uint8_t* dst, const uint8_t* src, size_t n) {
    size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
        const __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_xor_si256(d, s));
    }
    for (; i < n; ++i) dst[i] ^= src[i];
}

size_t mismatch_count_avx2(const uint8_t* x, const uint8_t* y, size_t n) {
    size_t count = 0;
    size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + i));
        const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(y + i));
        const uint32_t eq = _mm256_movemask_epi8(_mm256_cmpeq_epi8(a, b));
        count += 32u - std::popcount(eq);
    }
    for (; i < n; ++i) count += x[i] != y[i];
    return count;
}

void f_minsum_avx2(double* out, const double* a, const double* b, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i,
                         f_minsum_vec(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) {
        const double m = std::fmin(std::fabs(a[i]), std::fabs(b[i]));
        out[i] = (std::signbit(a[i]) != std::signbit(b[i])) ? -m : m;
    }
}

void f_tanh_avx2(double* out, const double* a, const double* b, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vb = _mm256_loadu_pd(b + i);
        const __m256d base = f_minsum_vec(va, vb);
        const __m256d sum = _mm256_and_pd(_mm256_add_pd(va, vb), kAbsMask);
        const __m256d dif = _mm256_and_pd(_mm256_sub_pd(va, vb), kAbsMask);
        const __m256d corr =
            _mm256_sub_pd(log1p_01(exp_neg(sum)), log1p_01(exp_neg(dif)));
        _mm256_storeu_pd(out + i, _mm256_add_pd(base, corr));
    }
    for (; i < n; ++i) {
        const double m = std::fmin(std::fabs(a[i]), std::fabs(b[i]));
        const double base = (std::signbit(a[i]) != std::signbit(b[i])) ? -m : m;
        out[i] = base + std::log1p(std::exp(-std::fabs(a[i] + b[i]))) -
                 std::log1p(std::exp(-std::fabs(a[i] - b[i])));
    }
}

void g_update_avx2(double* out, const double* a, const double* b, const uint8_t* bits,
                   size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        uint32_t packed;
        std::memcpy(&packed, bits + i, 4);
        const __m256i lanes = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(static_cast<int>(packed)));
        const __m256d flip = _mm256_castsi256_pd(_mm256_slli_epi64(lanes, 63));
        const __m256d va = _mm256_xor_pd(_mm256_loadu_pd(a + i), flip);
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(b + i), va));
    }
    for (; i < n; ++i) out[i] = bits[i] ? b[i] - a[i] : b[i] + a[i];
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable table{"avx2",        xor_into_avx2, mismatch_count_avx2,
                                   f_minsum_avx2, f_tanh_avx2,   g_update_avx2};
    return &table;
}

}  // namespace nspolar::kern

#else

namespace nspolar::kern {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace nspolar::kern

#endif
