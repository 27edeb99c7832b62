#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace nspolar {

enum class ChannelKind : uint8_t { bec, bsc, bac };

// Hard channel observation. Erasures exist only for the BEC; punctured
// positions carry zero information by convention (LLR exactly 0).
enum class HardObservation : uint8_t { zero = 0, one = 1, erased = 2, punctured = 3 };

inline HardObservation observation_from_bit(uint8_t b) {
    return b ? HardObservation::one : HardObservation::zero;
}

// Finite LLR stand-in for +/-inf on noiseless observations. 40 nats exceeds
// any sum of realistic finite LLRs at N=1024.
inline constexpr double kDefaultLlrSaturation = 40.0;

// Binary-input channel: BEC(eps), BSC(p <= 1/2) or BAC(p01, p10).
// BAC(p, p) behaves identically to BSC(p) under every operation.
class ChannelModel {
  public:
    static ChannelModel bec(double erasure_prob);
    static ChannelModel bsc(double crossover_prob);
    // Accepts estimates above 1/2: relabels the output alphabet (p -> 1-p)
    // and records the flip so LLR computation stays consistent.
    static ChannelModel bsc_normalized(double estimate);
    static ChannelModel bac(double p01, double p10);

    ChannelKind kind() const { return kind_; }
    // BEC: (eps, 0). BSC: (p, p). BAC: (p01, p10).
    double param_a() const { return a_; }
    double param_b() const { return b_; }
    bool relabeled() const { return relabeled_; }

    // Symmetric capacity in bits, evaluated as the double sum over the
    // channel's discrete output alphabet (base-2 logs).
    double capacity() const;

    // Bhattacharyya parameter: BEC -> eps, BSC -> 2 sqrt(p(1-p)),
    // BAC -> sqrt((1-p01) p10) + sqrt(p01 (1-p10)).
    double bhattacharyya() const;

    // Natural-log likelihood ratio ln W(y|0)/W(y|1), clamped to
    // [-saturation, saturation]. Positive means 0 more likely.
    // PUNCTURED -> exactly 0 for every kind. ERASED is rejected on non-BEC.
    double llr(HardObservation y, double saturation = kDefaultLlrSaturation) const;

    // Transition probability table. BEC uses outputs {0, erasure, 1},
    // BSC/BAC use {0, 1} (third column zero).
    size_t output_count() const { return kind_ == ChannelKind::bec ? 3 : 2; }
    std::array<double, 3> transition_row(int input) const;

  private:
    ChannelModel(ChannelKind k, double a, double b, bool relabeled)
        : kind_(k), a_(a), b_(b), relabeled_(relabeled) {}

    ChannelKind kind_;
    double a_;
    double b_;
    bool relabeled_;
};

// Smoothing clamp for probabilities estimated as exactly 0 from finite
// training data: p = 1/(2*sample_count).
inline double clamp_zero_estimate(double p, size_t sample_count) {
    if (p > 0.0) return p;
    return 1.0 / (2.0 * static_cast<double>(sample_count ? sample_count : 1));
}

}  // namespace nspolar
