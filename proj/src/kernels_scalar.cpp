#include <cmath>

#include "nspolar/kernels.hpp"

namespace nspolar::kern {

namespace {

void xor_into_scalar(uint8_t* dst, const uint8_t* src, size_t n) {
    for (size_t i = 0; i < n; ++i) dst[i] ^= src[i];
}

size_t mismatch_count_scalar(const uint8_t* x, const uint8_t* y, size_t n) {
    size_t count = 0;
    for (size_t i = 0; i < n; ++i) count += x[i] != y[i];
    return count;
}

void f_minsum_scalar(double* out, const double* a, const double* b, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        const double m = std::fmin(std::fabs(a[i]), std::fabs(b[i]));
        out[i] = (std::signbit(a[i]) != std::signbit(b[i])) ? -m : m;
    }
}

void f_tanh_scalar(double* out, const double* a, const double* b, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        const double m = std::fmin(std::fabs(a[i]), std::fabs(b[i]));
        const double base = (std::signbit(a[i]) != std::signbit(b[i])) ? -m : m;
        out[i] = base + std::log1p(std::exp(-std::fabs(a[i] + b[i]))) -
                 std::log1p(std::exp(-std::fabs(a[i] - b[i])));
    }
}

void g_update_scalar(double* out, const double* a, const double* b, const uint8_t* bits,
                     size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = bits[i] ? b[i] - a[i] : b[i] + a[i];
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{"scalar",        xor_into_scalar, mismatch_count_scalar,
                                   f_minsum_scalar, f_tanh_scalar,   g_update_scalar};
    return table;
}

}  // namespace nspolar::kern
