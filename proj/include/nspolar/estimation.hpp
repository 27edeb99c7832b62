#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nspolar/channel.hpp"
#include "nspolar/crossbar.hpp"

namespace nspolar {

// Training reads: stored arrays and the currents they produced.
struct TrainingSet {
    std::vector<BitMatrix> stored;
    std::vector<CurrentMap> currents;
    size_t trials() const { return stored.size(); }
};

// Uniform random arrays read through the crossbar model. When
// `force_one_cells` is given (row-major flags), those cells store 1 in every
// trial so the estimates match deployment statistics of a punctured system.
TrainingSet generate_training(const CrossbarConfig& cfg, size_t trials, uint64_t master_seed,
                              std::span<const uint8_t> force_one_cells = {});

struct ThresholdFit {
    std::vector<double> thresholds;  // amperes, one per row; predict 1 (HRS) when current < t
    std::vector<uint8_t> degenerate;  // rows where the labels were constant
};

// Per-row decision thresholds from a 1-D logistic regression on
// (current -> stored bit), pooled over the row's cells and trials. The
// returned boundary is the current where the fitted probability is 1/2.
ThresholdFit fit_thresholds(const TrainingSet& train, const CrossbarConfig& cfg);

// Exhaustive minimizer of the empirical row BER over all candidate
// thresholds; independent alternative to the logistic fit and its oracle.
ThresholdFit fit_thresholds_exhaustive(const TrainingSet& train, const CrossbarConfig& cfg);

// Empirical per-row error rate of a threshold rule on a data set.
double threshold_error_rate(const TrainingSet& data, std::span<const double> thresholds);

enum class CharacterizationMode : uint8_t { bsc, bac };

struct CellCharacterization {
    size_t rows = 0, cols = 0;
    CharacterizationMode mode = CharacterizationMode::bsc;
    std::vector<double> thresholds;      // per row
    std::vector<ChannelModel> cells;     // row-major
    std::vector<uint8_t> clamped;        // row-major; estimate hit the smoothing clamp
    size_t trials = 0;

    const ChannelModel& cell(size_t i, size_t j) const { return cells[i * cols + j]; }
};

// Symmetric per-cell model: pooled 0->1 and 1->0 miscounts over T trials,
// zero estimates clamped to 1/(2T).
CellCharacterization estimate_bsc(const TrainingSet& train, const ThresholdFit& fit);

// Asymmetric per-cell model: conditional miscounts given the stored symbol,
// independently clamped.
CellCharacterization estimate_bac(const TrainingSet& train, const ThresholdFit& fit);

// p_avg with N (1 - h(p_avg)) = sum_i (1 - h(p_i)); bisection on the binary
// entropy over [0, 1/2].
double average_design_channel(std::span<const double> crossover_probs);

double binary_entropy(double p);

// Serialization (JSON) so one characterization can be reused across runs.
void save_characterization(const CellCharacterization& c, const std::string& path);
CellCharacterization load_characterization(const std::string& path);
void write_characterization(const CellCharacterization& c, std::ostream& out);
CellCharacterization read_characterization(std::istream& in);

}  // namespace nspolar
