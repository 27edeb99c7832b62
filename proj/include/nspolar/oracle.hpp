#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "nspolar/channel.hpp"

namespace nspolar {

// Exact finite-alphabet B-DMC, used as ground truth at tiny blocklengths.
// probs(x, y) = W(y | x); each row sums to 1.
class DiscreteChannel {
  public:
    DiscreteChannel(std::vector<double> row0, std::vector<double> row1);
    static DiscreteChannel from_model(const ChannelModel& w);

    size_t alphabet_size() const { return row0_.size(); }
    double prob(int input, size_t y) const { return input == 0 ? row0_[y] : row1_[y]; }

    double capacity() const;       // base-2 double sum
    double bhattacharyya() const;  // sum_y sqrt(W(y|0) W(y|1))

    // BEC-equivalence detection: every output has support on at most one
    // input, except erasure-like outputs where both rows agree. Returns the
    // erasure probability when the structure matches.
    std::optional<double> as_bec(double tol = 1e-12) const;

  private:
    std::vector<double> row0_, row1_;
};

inline constexpr size_t kDefaultAlphabetCap = 1u << 20;

// Single polarization step (W0, W1) -> (W', W''), probabilities exactly by
// the transform definition. W' lives on Y0 x Y1, W'' on Y0 x Y1 x {0,1}.
// Throws when the W'' alphabet would exceed `alphabet_cap`.
std::pair<DiscreteChannel, DiscreteChannel> single_step(const DiscreteChannel& w0,
                                                        const DiscreteChannel& w1,
                                                        size_t alphabet_cap = kDefaultAlphabetCap);

// Full n-level polarization of 2^n channels, exact. All-BEC inputs take the
// scalar erasure-probability shortcut and work at any n; generic channels are
// limited by the alphabet cap (n <= 3 in practice).
std::vector<DiscreteChannel> polarize_exact(const std::vector<DiscreteChannel>& channels,
                                            size_t alphabet_cap = kDefaultAlphabetCap);

struct PermutationClass {
    std::vector<double> capacities;               // synthesized capacity vector
    std::vector<std::vector<uint32_t>> members;   // permutations in the class
};

// Groups all N! channel orderings by their exact synthesized-capacity vector
// (componentwise match within `tol`). N <= 8.
std::vector<PermutationClass> permutation_classes(const std::vector<DiscreteChannel>& channels,
                                                  double tol = 1e-10,
                                                  size_t alphabet_cap = kDefaultAlphabetCap);

// Exhaustively maximizes the sum of the k largest synthesized capacities.
// Returns the lexicographically smallest maximizing permutation.
std::vector<uint32_t> best_permutation(const std::vector<DiscreteChannel>& channels, size_t k,
                                       size_t alphabet_cap = kDefaultAlphabetCap);

// Objective of one ordering: sum of the k largest synthesized capacities.
double permutation_objective(const std::vector<DiscreteChannel>& channels,
                             const std::vector<uint32_t>& perm, size_t k,
                             size_t alphabet_cap = kDefaultAlphabetCap);

}  // namespace nspolar
