#include "nspolar/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nspolar {

namespace {

void require_prob(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " out of [0,1]");
}

double clamp_llr(double v, double sat) { return std::clamp(v, -sat, sat); }

}  // namespace

ChannelModel ChannelModel::bec(double erasure_prob) {
    require_prob(erasure_prob, "BEC erasure probability");
    return ChannelModel(ChannelKind::bec, erasure_prob, 0.0, false);
}

ChannelModel ChannelModel::bsc(double crossover_prob) {
    require_prob(crossover_prob, "BSC crossover probability");
    if (crossover_prob > 0.5) throw std::invalid_argument("BSC crossover probability above 1/2");
    return ChannelModel(ChannelKind::bsc, crossover_prob, crossover_prob, false);
}

ChannelModel ChannelModel::bsc_normalized(double estimate) {
    require_prob(estimate, "BSC crossover estimate");
    if (estimate <= 0.5) return bsc(estimate);
    return ChannelModel(ChannelKind::bsc, 1.0 - estimate, 1.0 - estimate, true);
}

ChannelModel ChannelModel::bac(double p01, double p10) {
    require_prob(p01, "BAC p01");
    require_prob(p10, "BAC p10");
    if (p01 >= 1.0 || p10 >= 1.0) throw std::invalid_argument("BAC probabilities must be < 1");
    return ChannelModel(ChannelKind::bac, p01, p10, false);
}

std::array<double, 3> ChannelModel::transition_row(int input) const {
    switch (kind_) {
        case ChannelKind::bec:
            // outputs {0, erasure, 1}
            return input == 0 ? std::array<double, 3>{1.0 - a_, a_, 0.0}
                              : std::array<double, 3>{0.0, a_, 1.0 - a_};
        case ChannelKind::bsc:
        case ChannelKind::bac:
            // outputs {0, 1}; a_ = P(1|0), b_ = P(0|1)
            return input == 0 ? std::array<double, 3>{1.0 - a_, a_, 0.0}
                              : std::array<double, 3>{b_, 1.0 - b_, 0.0};
    }
    throw std::logic_error("unreachable channel kind");
}

double ChannelModel::capacity() const {
    const auto r0 = transition_row(0);
    const auto r1 = transition_row(1);
    const size_t m = output_count();
    double sum = 0.0;
    for (size_t y = 0; y < m; ++y) {
        const double wy = 0.5 * (r0[y] + r1[y]);
        if (r0[y] > 0.0) sum += 0.5 * r0[y] * std::log2(r0[y] / wy);
        if (r1[y] > 0.0) sum += 0.5 * r1[y] * std::log2(r1[y] / wy);
    }
    return std::clamp(sum, 0.0, 1.0);
}

double ChannelModel::bhattacharyya() const {
    switch (kind_) {
        case ChannelKind::bec:
            return a_;
        case ChannelKind::bsc:
        case ChannelKind::bac:
            // identical expression for both so that BAC(p,p) matches BSC(p)
            // bit for bit
            return std::sqrt((1.0 - a_) * b_) + std::sqrt(a_ * (1.0 - b_));
    }
    throw std::logic_error("unreachable channel kind");
}

double ChannelModel::llr(HardObservation y, double saturation) const {
    if (y == HardObservation::punctured) return 0.0;
    if (kind_ == ChannelKind::bec) {
        switch (y) {
            case HardObservation::zero: return saturation;
            case HardObservation::one: return -saturation;
            case HardObservation::erased: return 0.0;
            default: break;
        }
        throw std::logic_error("unreachable observation");
    }
    if (y == HardObservation::erased)
        throw std::invalid_argument("erased observation on a non-BEC channel");
    uint8_t bit = (y == HardObservation::one) ? 1 : 0;
    if (relabeled_) bit ^= 1;
    // a_ = P(read 1 | stored 0), b_ = P(read 0 | stored 1)
    const double v = bit ? std::log(a_ / (1.0 - b_)) : std::log((1.0 - a_) / b_);
    return clamp_llr(v, saturation);
}

}  // namespace nspolar
