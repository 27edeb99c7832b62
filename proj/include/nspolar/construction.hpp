#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nspolar/channel.hpp"

namespace nspolar {

// Channel-assignment permutation: codeword symbol x_i traverses physical
// channel perm(i).
class Permutation {
  public:
    explicit Permutation(std::vector<uint32_t> map);
    static Permutation identity(size_t n);
    // psi: reverse the n_levels-bit binary representation; self-inverse.
    static Permutation bit_reversal(int n_levels);
    static Permutation random_shuffle(size_t n, uint64_t seed);

    size_t size() const { return map_.size(); }
    uint32_t operator()(size_t i) const { return map_[i]; }
    const std::vector<uint32_t>& map() const { return map_; }
    Permutation inverse() const;

    bool operator==(const Permutation& o) const { return map_ == o.map_; }

  private:
    std::vector<uint32_t> map_;
};

// (a o b)(i) = a(b(i)).
Permutation compose(const Permutation& a, const Permutation& b);

// keep[i] = 0 marks codeword position i as punctured (not stored).
struct PuncturePattern {
    std::vector<uint8_t> keep;
    size_t punctured_count() const;
    bool punctured(size_t i) const { return keep[i] == 0; }
};

// Quasi-uniform puncturing: Np leading zeros, then bit-reversal.
PuncturePattern qup_pattern(size_t n_total, size_t n_punctured);

// Expected fraction of stored 1s when punctured cells hold 1: 1/2 + Np/(2N).
double ones_frequency(size_t n_total, size_t n_punctured);

// Final-stage Bhattacharyya upper bounds, kept in log-domain (natural log)
// to survive deep polarization without underflow.
struct ReliabilityTable {
    std::vector<double> z_log;
    std::vector<double> z_linear() const;
};

// Bhattacharyya-bound recursion over all polarization levels:
// Z' = a + b - ab, Z'' = ab, computed in log-domain.
ReliabilityTable zn_recursion(const std::vector<double>& z0);
ReliabilityTable zn_recursion_log(std::vector<double> z0_log);

// Indices of the N-k largest final Z values (the least reliable synthesized
// channels), ties broken lowest-index-first. Sorted ascending.
// k may not exceed N - Np: punctured positions enter with Z = 1 and can
// never carry information.
std::vector<uint32_t> select_frozen_set(const ReliabilityTable& table, size_t k,
                                        size_t n_punctured = 0);

enum class PermKind : uint8_t {
    identity,
    bit_reversal,
    ordered,
    ordered_bit_reversal,
    explicit_map,
    random,
};

// Which scalar orders the physical channels for pi_ord. The default follows
// the symmetric-capacity definition; Bhattacharyya ordering is offered
// because the two can disagree for asymmetric channels.
enum class OrderingMetric : uint8_t { capacity, bhattacharyya };

// pi_ord: stable ascending sort of the physical channels by the metric.
Permutation ordering_permutation(const std::vector<ChannelModel>& channels,
                                 OrderingMetric metric = OrderingMetric::capacity);

struct CodeSpec {
    int n = 0;          // log2 blocklength
    size_t block_length = 0;
    size_t dimension = 0;
    std::vector<uint32_t> frozen_set;    // sorted ascending, size N - k
    std::vector<uint8_t> frozen_values;  // aligned with frozen_set
    Permutation perm = Permutation::identity(0);
    PuncturePattern puncture;
    std::vector<ChannelModel> channels;  // codeword order: channels[i] = physical[perm(i)]
    std::vector<uint8_t> is_frozen;      // size N
    ReliabilityTable reliability;

    size_t info_count() const { return dimension; }
    std::vector<uint32_t> information_set() const;
};

struct BuildOptions {
    PermKind perm_kind = PermKind::identity;
    size_t n_punctured = 0;
    std::optional<Permutation> explicit_perm;
    uint64_t random_perm_seed = 0;
    OrderingMetric ordering_metric = OrderingMetric::capacity;
    std::vector<uint8_t> frozen_values;  // empty = all zero
};

// Full construction: permutation, initial Z values in codeword order
// (punctured positions overridden to Z = 1), log-domain recursion, frozen-set
// selection.
CodeSpec build_code(const std::vector<ChannelModel>& physical_channels, size_t k,
                    const BuildOptions& opts = {});

// Replayable serialization (JSON; doubles round-trip bit-exactly).
void save_code_spec(const CodeSpec& spec, const std::string& path);
CodeSpec load_code_spec(const std::string& path);
void write_code_spec(const CodeSpec& spec, std::ostream& out);
CodeSpec read_code_spec(std::istream& in);

}  // namespace nspolar
