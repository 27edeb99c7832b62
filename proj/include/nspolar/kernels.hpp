#pragma once

#include <cstddef>
#include <cstdint>

// Hot inner loops of the encoder, SC decoder and Monte Carlo tallies.
// A scalar reference implementation always exists; an AVX2 variant is
// selected at runtime when the CPU supports it. Both variants are
// equivalence-tested against each other (bitwise for the algebraic ops,
// to tight absolute tolerance for the transcendental check-node op).
namespace nspolar::kern {

struct KernelTable {
    const char* name;
    // dst[i] ^= src[i], bytes (encode butterfly stage, partial-sum combine)
    void (*xor_into)(uint8_t* dst, const uint8_t* src, size_t n);
    // number of positions with x[i] != y[i] (bit-error tallies)
    size_t (*mismatch_count)(const uint8_t* x, const uint8_t* y, size_t n);
    // out[i] = sign(a[i]) sign(b[i]) min(|a[i]|, |b[i]|)
    void (*f_minsum)(double* out, const double* a, const double* b, size_t n);
    // exact check-node op: 2 atanh(tanh(a/2) tanh(b/2)), evaluated as
    // sign(a)sign(b)min(|a|,|b|) + log1p(exp(-|a+b|)) - log1p(exp(-|a-b|))
    void (*f_tanh)(double* out, const double* a, const double* b, size_t n);
    // out[i] = b[i] + (1 - 2 bits[i]) a[i], bits in {0,1}
    void (*g_update)(double* out, const double* a, const double* b, const uint8_t* bits,
                     size_t n);
};

const KernelTable& scalar_table();

// Null when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_table();

// Best table for this machine. NSPOLAR_KERNELS=scalar|avx2 overrides.
const KernelTable& active();

}  // namespace nspolar::kern
