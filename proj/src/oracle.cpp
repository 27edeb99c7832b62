#include "nspolar/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nspolar {

namespace {

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

DiscreteChannel::DiscreteChannel(std::vector<double> row0, std::vector<double> row1)
    : row0_(std::move(row0)), row1_(std::move(row1)) {
    if (row0_.size() != row1_.size() || row0_.empty())
        throw std::invalid_argument("transition rows must be non-empty and equal-sized");
    for (const auto* row : {&row0_, &row1_}) {
        double sum = 0.0;
        for (double p : *row) {
            if (p < 0.0) throw std::invalid_argument("negative transition probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("transition row does not sum to 1");
    }
}

DiscreteChannel DiscreteChannel::from_model(const ChannelModel& w) {
    const auto r0 = w.transition_row(0);
    const auto r1 = w.transition_row(1);
    const size_t m = w.output_count();
    return DiscreteChannel(std::vector<double>(r0.begin(), r0.begin() + m),
                           std::vector<double>(r1.begin(), r1.begin() + m));
}

double DiscreteChannel::capacity() const {
    double sum = 0.0;
    for (size_t y = 0; y < row0_.size(); ++y) {
        const double wy = 0.5 * (row0_[y] + row1_[y]);
        if (row0_[y] > 0.0) sum += 0.5 * row0_[y] * std::log2(row0_[y] / wy);
        if (row1_[y] > 0.0) sum += 0.5 * row1_[y] * std::log2(row1_[y] / wy);
    }
    return sum;
}

double DiscreteChannel::bhattacharyya() const {
    double sum = 0.0;
    for (size_t y = 0; y < row0_.size(); ++y) sum += std::sqrt(row0_[y] * row1_[y]);
    return sum;
}

std::optional<double> DiscreteChannel::as_bec(double tol) const {
    double e0 = 0.0, e1 = 0.0;
    for (size_t y = 0; y < row0_.size(); ++y) {
        const double a = row0_[y], b = row1_[y];
        if (a <= tol && b <= tol) continue;
        if (a > tol && b > tol) {
            if (std::abs(a - b) > tol * std::max(a, b)) return std::nullopt;
            e0 += a;
            e1 += b;
        }
    }
    if (std::abs(e0 - e1) > tol) return std::nullopt;
    return 0.5 * (e0 + e1);
}

std::pair<DiscreteChannel, DiscreteChannel> single_step(const DiscreteChannel& w0,
                                                        const DiscreteChannel& w1,
                                                        size_t alphabet_cap) {
    const size_t m0 = w0.alphabet_size(), m1 = w1.alphabet_size();
    if (m0 * m1 * 2 > alphabet_cap)
        throw std::length_error("polarized output alphabet exceeds the configured cap");

    std::vector<double> up0(m0 * m1), up1(m0 * m1);
    std::vector<double> dn0(m0 * m1 * 2), dn1(m0 * m1 * 2);
    for (size_t y0 = 0; y0 < m0; ++y0) {
        for (size_t y1 = 0; y1 < m1; ++y1) {
            const size_t idx = y0 * m1 + y1;
            // W'(y0,y1|u0) = 1/2 sum_{u1} W0(y0|u0^u1) W1(y1|u1)
            up0[idx] = 0.5 * (w0.prob(0, y0) * w1.prob(0, y1) + w0.prob(1, y0) * w1.prob(1, y1));
            up1[idx] = 0.5 * (w0.prob(1, y0) * w1.prob(0, y1) + w0.prob(0, y0) * w1.prob(1, y1));
            // W''(y0,y1,u0|u1) = 1/2 W0(y0|u0^u1) W1(y1|u1)
            for (int u0 = 0; u0 < 2; ++u0) {
                dn0[idx * 2 + u0] = 0.5 * w0.prob(u0, y0) * w1.prob(0, y1);
                dn1[idx * 2 + u0] = 0.5 * w0.prob(u0 ^ 1, y0) * w1.prob(1, y1);
            }
        }
    }
    return {DiscreteChannel(std::move(up0), std::move(up1)),
            DiscreteChannel(std::move(dn0), std::move(dn1))};
}

std::vector<DiscreteChannel> polarize_exact(const std::vector<DiscreteChannel>& channels,
                                            size_t alphabet_cap) {
    const size_t n = channels.size();
    if (!is_power_of_two(n)) throw std::invalid_argument("channel count must be a power of two");

    // Scalar shortcut when every input is (equivalent to) a BEC.
    {
        std::vector<double> eps;
        eps.reserve(n);
        bool all_bec = true;
        for (const auto& ch : channels) {
            auto e = ch.as_bec();
            if (!e) {
                all_bec = false;
                break;
            }
            eps.push_back(*e);
        }
        if (all_bec) {
            for (size_t block = 2; block <= n; block <<= 1) {
                const size_t half = block / 2;
                for (size_t base = 0; base < n; base += block) {
                    for (size_t j = 0; j < half; ++j) {
                        const double a = eps[base + j], b = eps[base + half + j];
                        eps[base + j] = a + b - a * b;
                        eps[base + half + j] = a * b;
                    }
                }
            }
            std::vector<DiscreteChannel> out;
            out.reserve(n);
            for (double e : eps) out.push_back(DiscreteChannel::from_model(ChannelModel::bec(e)));
            return out;
        }
    }

    std::vector<DiscreteChannel> cur = channels;
    for (size_t block = 2; block <= n; block <<= 1) {
        const size_t half = block / 2;
        for (size_t base = 0; base < n; base += block) {
            for (size_t j = 0; j < half; ++j) {
                auto [up, dn] = single_step(cur[base + j], cur[base + half + j], alphabet_cap);
                cur[base + j] = std::move(up);
                cur[base + half + j] = std::move(dn);
            }
        }
    }
    return cur;
}

namespace {

std::vector<double> capacity_vector(const std::vector<DiscreteChannel>& channels,
                                    const std::vector<uint32_t>& perm, size_t alphabet_cap) {
    std::vector<DiscreteChannel> ordered;
    ordered.reserve(channels.size());
    for (uint32_t p : perm) ordered.push_back(channels[p]);
    auto polarized = polarize_exact(ordered, alphabet_cap);
    std::vector<double> caps(polarized.size());
    for (size_t i = 0; i < polarized.size(); ++i) caps[i] = polarized[i].capacity();
    return caps;
}

}  // namespace

std::vector<PermutationClass> permutation_classes(const std::vector<DiscreteChannel>& channels,
                                                  double tol, size_t alphabet_cap) {
    const size_t n = channels.size();
    if (n > 8) throw std::length_error("exhaustive enumeration limited to N <= 8");
    std::vector<uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    std::vector<PermutationClass> classes;
    do {
        auto caps = capacity_vector(channels, perm, alphabet_cap);
        bool found = false;
        for (auto& cls : classes) {
            bool match = true;
            for (size_t i = 0; i < n && match; ++i)
                match = std::abs(cls.capacities[i] - caps[i]) <= tol;
            if (match) {
                cls.members.push_back(perm);
                found = true;
                break;
            }
        }
        if (!found) classes.push_back({std::move(caps), {perm}});
    } while (std::next_permutation(perm.begin(), perm.end()));
    return classes;
}

double permutation_objective(const std::vector<DiscreteChannel>& channels,
                             const std::vector<uint32_t>& perm, size_t k, size_t alphabet_cap) {
    auto caps = capacity_vector(channels, perm, alphabet_cap);
    std::sort(caps.begin(), caps.end(), std::greater<>());
    return std::accumulate(caps.begin(), caps.begin() + std::min(k, caps.size()), 0.0);
}

std::vector<uint32_t> best_permutation(const std::vector<DiscreteChannel>& channels, size_t k,
                                       size_t alphabet_cap) {
    const size_t n = channels.size();
    if (n > 8) throw std::length_error("exhaustive search limited to N <= 8");
    std::vector<uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    std::vector<uint32_t> best = perm;
    double best_obj = permutation_objective(channels, perm, k, alphabet_cap);
    while (std::next_permutation(perm.begin(), perm.end())) {
        const double obj = permutation_objective(channels, perm, k, alphabet_cap);
        if (obj > best_obj) {
            best_obj = obj;
            best = perm;
        }
    }
    return best;
}

}  // namespace nspolar
