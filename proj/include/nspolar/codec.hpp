#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nspolar/construction.hpp"

namespace nspolar {

// x = u G with G the n-fold Kronecker power of [[1,0],[1,1]], computed by the
// in-place butterfly. No bit-reversal inside the transform; bit-reversal
// exists only as an explicit channel permutation. Involution: applying it
// twice gives back the input.
std::vector<uint8_t> polar_transform(std::vector<uint8_t> u);

struct SystematicCodeword {
    std::vector<uint8_t> x;  // codeword with x restricted to the information set equal to data
    std::vector<uint8_t> u;  // matching transform input, frozen positions at frozen values
};

// Systematic encoding: u_F = frozen values and (uG)_I = data. Uses the
// two-pass transform construction (valid because the frozen set selected by
// the Z-recursion is closed under bitwise-subset), with an O(N^2)
// substitution fallback for hand-built specs; the postcondition x_I = data is
// always verified.
SystematicCodeword systematic_encode(const CodeSpec& spec, std::span<const uint8_t> data);

struct DecodeResult {
    std::vector<uint8_t> u_hat;
    std::vector<uint8_t> x_hat;  // re-encoded codeword estimate
};

enum class CheckNodeRule : uint8_t { tanh_exact, min_sum };

// Successive-cancellation decoder. LLRs arrive in codeword order (already
// inverse-permuted), punctured entries exactly 0. Frozen positions are forced
// to their frozen values; LLR ties resolve to bit 0. The workspace is sized
// once and reused across decodes (and across code specs of the same length).
class ScDecoder {
  public:
    explicit ScDecoder(size_t block_length, CheckNodeRule rule = CheckNodeRule::tanh_exact);
    const DecodeResult& decode(const CodeSpec& spec, std::span<const double> llrs);

  private:
    void decode_node(const CodeSpec& spec, int depth, size_t base);

    size_t block_length_;
    int levels_;
    CheckNodeRule rule_;
    std::vector<uint8_t> frozen_value_at_;  // size N, zero at information positions
    std::vector<std::vector<double>> llr_;
    std::vector<std::vector<uint8_t>> bits_;
    DecodeResult result_;
};

std::vector<uint8_t> data_from_u(const CodeSpec& spec, std::span<const uint8_t> u);
std::vector<uint8_t> data_from_x(const CodeSpec& spec, std::span<const uint8_t> x);

// Storage mapping per the channel-assignment convention z[perm(i)] = x[i].
// Punctured codeword positions are not stored; the storage layer forces a 1
// in the corresponding physical cell.
std::vector<uint8_t> map_to_physical(const CodeSpec& spec, std::span<const uint8_t> x);

// LLR[i] = llr(channel perm(i), y_physical[perm(i)]); punctured positions 0.
std::vector<double> map_from_physical(const CodeSpec& spec, std::span<const uint8_t> y_physical,
                                      double saturation = kDefaultLlrSaturation);
std::vector<double> map_from_physical(const CodeSpec& spec,
                                      std::span<const HardObservation> y_physical,
                                      double saturation = kDefaultLlrSaturation);

// Golden-vector regression format: per-record (u, x, z, llrs, u_hat) tuples
// referencing a code spec file.
struct GoldenVector {
    std::vector<uint8_t> u, x, z;
    std::vector<double> llrs;
    std::vector<uint8_t> u_hat;
};

void write_golden_vectors(std::ostream& out, const std::string& spec_ref,
                          std::span<const GoldenVector> records);
std::vector<GoldenVector> read_golden_vectors(std::istream& in, std::string* spec_ref = nullptr);

}  // namespace nspolar
