#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nspolar/codec.hpp"
#include "nspolar/construction.hpp"
#include "nspolar/crossbar.hpp"
#include "nspolar/estimation.hpp"

namespace nspolar {

struct ExperimentConfig {
    std::string kind;
    uint64_t seed = 0;
    bool seed_set = false;

    // code
    int n = 10;
    double rate = 0.5;
    size_t dimension_override = 0;  // 0 -> floor(rate * N)
    std::string perm = "ordered_bitreversal";
    size_t n_punctured = 0;
    std::string ordering_metric = "capacity";
    std::string check_node = "tanh";  // tanh | minsum
    double llr_saturation = 40.0;

    // synthetic-bsc
    std::vector<double> p_centers = {0.05, 0.065, 0.08, 0.095, 0.11};
    double p_max_deviation = 0.045;
    size_t random_perms = 200;
    std::string encoding = "both";  // both | systematic

    // trial budget: run `frames`, then extend until every reported point has
    // at least `min_bit_errors` bit errors or `max_frames` is reached
    size_t frames = 10000;
    bool adaptive_frames = true;
    size_t min_bit_errors = 100;
    size_t max_frames = 100000;

    // crossbar
    size_t array_rows = 32;
    size_t array_cols = 32;
    std::vector<double> rw_sweep;  // empty -> per-kind default
    double r_lrs = 1e3;
    double r_hrs = 1e6;
    double read_voltage = 1.0;
    double solver_rel_tol = 1e-10;
    size_t training_trials = 2000;
    size_t holdout_trials = 500;
    std::string mode = "bsc";  // bsc | bac
    std::vector<size_t> np_grid;  // empty -> 0..120 step 8

    // permclass
    size_t permclass_trials = 1000;

    // io
    std::string out = "results.csv";

    static ExperimentConfig from_json_file(const std::string& path);
    void apply_json_text(const std::string& text);
    std::string canonical_json() const;
    std::string config_hash() const;
    void validate() const;

    std::vector<double> resolved_rw_sweep() const;
    std::vector<size_t> resolved_np_grid() const;
    size_t dimension(size_t block_length) const;
    CrossbarConfig crossbar_config(double rw) const;
    CheckNodeRule check_node_rule() const;
    PermKind perm_kind() const;
    OrderingMetric ordering() const;
};

struct ResultRow {
    std::string sweep_name;
    double sweep_value = 0.0;
    std::string scenario;
    std::string encoding;  // systematic | nonsystematic
    std::string mode;      // bsc | bac | "-"
    size_t frames = 0;
    size_t bits_total = 0;
    size_t bit_errors = 0;
    size_t frame_errors = 0;
    double uncoded_ber = -1.0;  // negative = not applicable
    std::string config_hash;

    double ber() const { return bits_total ? double(bit_errors) / double(bits_total) : 0.0; }
    double fer() const { return frames ? double(frame_errors) / double(frames) : 0.0; }
};

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);
void write_manifest(std::ostream& out, const ExperimentConfig& cfg, size_t row_count);
void save_results(const ExperimentConfig& cfg, std::span<const ResultRow> rows);

// BSCs with linearly spaced crossover probabilities around one center,
// worst channel first (descending Bhattacharyya).
std::vector<double> synthetic_p_profile(size_t block_length, double center, double deviation);

// Regular polar baseline vs no permutation vs bit-reversal vs the average of
// `random_perms` random permutations, all over the same noise realizations.
std::vector<ResultRow> run_synthetic_bsc(const ExperimentConfig& cfg);

// Full read pipeline over a simulated crossbar: characterize, construct
// (four permutation scenarios), store, read, threshold, decode.
std::vector<ResultRow> run_crossbar_ber(const ExperimentConfig& cfg);

// Same pipeline twice, BSC vs BAC characterization.
std::vector<ResultRow> run_bsc_vs_bac(const ExperimentConfig& cfg);

// QUP sweep with deployment-biased training at fixed dimension.
std::vector<ResultRow> run_puncture_sweep(const ExperimentConfig& cfg);

struct PermclassReport {
    bool passed = true;
    std::string text;
    std::vector<ResultRow> rows;
};

// Exhaustive permutation-class counts, rate-1/2 optimality of [0,3,1,2] over
// random descending BEC quadruples, closed-form cross-checks.
PermclassReport run_permclass(const ExperimentConfig& cfg);

// One full characterize step (training, thresholds, per-cell estimates).
struct CharacterizationBundle {
    ThresholdFit fit;
    CellCharacterization bsc;
    CellCharacterization bac;
};
CharacterizationBundle characterize_crossbar(const CrossbarConfig& ccfg, size_t trials,
                                             uint64_t seed,
                                             std::span<const uint8_t> force_one_cells = {});

}  // namespace nspolar
