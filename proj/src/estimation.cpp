#include "nspolar/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nspolar/rng.hpp"

namespace nspolar {

TrainingSet generate_training(const CrossbarConfig& cfg, size_t trials, uint64_t master_seed,
                              std::span<const uint8_t> force_one_cells) {
    if (!force_one_cells.empty() && force_one_cells.size() != cfg.rows * cfg.cols)
        throw std::invalid_argument("force_one_cells size mismatch");
    TrainingSet out;
    out.stored.reserve(trials);
    out.currents.reserve(trials);
    for (size_t t = 0; t < trials; ++t) {
        Rng rng(stream_seed(master_seed, "train", t));
        BitMatrix bits(cfg.rows, cfg.cols);
        for (size_t c = 0; c < bits.bits.size(); ++c)
            bits.bits[c] = (!force_one_cells.empty() && force_one_cells[c]) ? 1 : rng.bit();
        out.currents.push_back(read_array(cfg, bits));
        out.stored.push_back(std::move(bits));
    }
    return out;
}

namespace {

double ideal_midpoint(const CrossbarConfig& cfg) {
    return 0.5 * (cfg.read_voltage / cfg.r_lrs + cfg.read_voltage / cfg.r_hrs);
}

// Damped Newton fit of P(stored = 1 | current) = sigmoid(w0 + w1 z) on
// standardized currents. Returns the decision boundary in amperes, or the
// ideal midpoint for degenerate rows.
struct RowFit {
    double threshold;
    bool degenerate;
};

RowFit logistic_row_fit(std::span<const double> currents, std::span<const uint8_t> labels,
                        double fallback) {
    const size_t m = currents.size();
    size_t ones = 0;
    for (uint8_t b : labels) ones += b;
    if (ones == 0 || ones == m) return {fallback, true};

    double mean = 0.0;
    for (double c : currents) mean += c;
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (double c : currents) var += (c - mean) * (c - mean);
    const double sd = std::sqrt(var / static_cast<double>(m));
    if (sd == 0.0) return {fallback, true};

    double w0 = 0.0, w1 = 0.0;
    auto negative_log_likelihood = [&](double a, double b) {
        double nll = 0.0;
        for (size_t s = 0; s < m; ++s) {
            const double eta = a + b * (currents[s] - mean) / sd;
            // log(1 + e^eta) - y eta, stable for both signs
            nll += (eta > 0 ? eta : 0.0) + std::log1p(std::exp(-std::fabs(eta))) -
                   (labels[s] ? eta : 0.0);
        }
        return nll;
    };

    double nll = negative_log_likelihood(w0, w1);
    for (int iter = 0; iter < 100; ++iter) {
        double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
        for (size_t s = 0; s < m; ++s) {
            const double z = (currents[s] - mean) / sd;
            const double eta = w0 + w1 * z;
            const double mu = 1.0 / (1.0 + std::exp(-eta));
            const double r = mu - (labels[s] ? 1.0 : 0.0);
            const double w = mu * (1.0 - mu);
            g0 += r;
            g1 += r * z;
            h00 += w;
            h01 += w * z;
            h11 += w * z * z;
        }
        if (std::max(std::fabs(g0), std::fabs(g1)) < 1e-10 * static_cast<double>(m)) break;
        const double det = h00 * h11 - h01 * h01;
        if (det <= 0.0) break;
        double d0 = (h11 * g0 - h01 * g1) / det;
        double d1 = (h00 * g1 - h01 * g0) / det;
        double step = 1.0;
        for (int halving = 0; halving < 30; ++halving) {
            const double cand = negative_log_likelihood(w0 - step * d0, w1 - step * d1);
            if (cand <= nll) {
                w0 -= step * d0;
                w1 -= step * d1;
                nll = cand;
                break;
            }
            step *= 0.5;
        }
    }

    if (w1 == 0.0) return {fallback, true};
    // sigmoid = 1/2 at w0 + w1 z = 0; stored 1 (HRS) sits at low current, so a
    // healthy fit has w1 < 0.
    const double threshold = mean - sd * w0 / w1;
    if (w1 > 0.0) return {threshold, true};
    return {threshold, false};
}

}  // namespace

ThresholdFit fit_thresholds(const TrainingSet& train, const CrossbarConfig& cfg) {
    if (train.trials() == 0) throw std::invalid_argument("empty training set");
    const size_t rows = train.stored[0].rows, cols = train.stored[0].cols;
    ThresholdFit fit;
    fit.thresholds.resize(rows);
    fit.degenerate.assign(rows, 0);

    std::vector<double> currents(train.trials() * cols);
    std::vector<uint8_t> labels(train.trials() * cols);
    for (size_t i = 0; i < rows; ++i) {
        size_t pos = 0;
        for (size_t t = 0; t < train.trials(); ++t) {
            for (size_t j = 0; j < cols; ++j, ++pos) {
                currents[pos] = train.currents[t].at(i, j);
                labels[pos] = train.stored[t].at(i, j);
            }
        }
        const RowFit rf = logistic_row_fit(currents, labels, ideal_midpoint(cfg));
        fit.thresholds[i] = rf.threshold;
        fit.degenerate[i] = rf.degenerate;
    }
    return fit;
}

ThresholdFit fit_thresholds_exhaustive(const TrainingSet& train, const CrossbarConfig& cfg) {
    if (train.trials() == 0) throw std::invalid_argument("empty training set");
    const size_t rows = train.stored[0].rows, cols = train.stored[0].cols;
    ThresholdFit fit;
    fit.thresholds.resize(rows);
    fit.degenerate.assign(rows, 0);

    for (size_t i = 0; i < rows; ++i) {
        std::vector<std::pair<double, uint8_t>> samples;
        samples.reserve(train.trials() * cols);
        size_t ones = 0;
        for (size_t t = 0; t < train.trials(); ++t)
            for (size_t j = 0; j < cols; ++j) {
                samples.emplace_back(train.currents[t].at(i, j), train.stored[t].at(i, j));
                ones += train.stored[t].at(i, j);
            }
        if (ones == 0 || ones == samples.size()) {
            fit.thresholds[i] = ideal_midpoint(cfg);
            fit.degenerate[i] = 1;
            continue;
        }
        std::sort(samples.begin(), samples.end());
        // Sweep candidate cuts between consecutive distinct currents.
        // Predicting 1 below the cut: errors(cut) = zeros below + ones above.
        size_t zeros_below = 0, ones_below = 0;
        size_t best_errors = ones;  // cut below everything: all predicted 0
        double best_threshold = samples.front().first * 0.5;
        for (size_t s = 0; s < samples.size(); ++s) {
            (samples[s].second ? ones_below : zeros_below) += 1;
            if (s + 1 < samples.size() && samples[s + 1].first == samples[s].first) continue;
            const size_t errors = zeros_below + (ones - ones_below);
            if (errors < best_errors) {
                best_errors = errors;
                best_threshold = s + 1 < samples.size()
                                     ? 0.5 * (samples[s].first + samples[s + 1].first)
                                     : samples[s].first * 2.0;
            }
        }
        fit.thresholds[i] = best_threshold;
    }
    return fit;
}

double threshold_error_rate(const TrainingSet& data, std::span<const double> thresholds) {
    if (data.trials() == 0) return 0.0;
    const size_t rows = data.stored[0].rows, cols = data.stored[0].cols;
    size_t errors = 0, total = 0;
    for (size_t t = 0; t < data.trials(); ++t)
        for (size_t i = 0; i < rows; ++i)
            for (size_t j = 0; j < cols; ++j) {
                const uint8_t predicted = data.currents[t].at(i, j) < thresholds[i];
                errors += predicted != data.stored[t].at(i, j);
                ++total;
            }
    return static_cast<double>(errors) / static_cast<double>(total);
}

CellCharacterization estimate_bsc(const TrainingSet& train, const ThresholdFit& fit) {
    const size_t rows = train.stored[0].rows, cols = train.stored[0].cols;
    const size_t trials = train.trials();
    CellCharacterization out;
    out.rows = rows;
    out.cols = cols;
    out.mode = CharacterizationMode::bsc;
    out.thresholds = fit.thresholds;
    out.trials = trials;
    out.clamped.assign(rows * cols, 0);
    out.cells.reserve(rows * cols);

    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) {
            size_t errors = 0;
            for (size_t t = 0; t < trials; ++t) {
                const uint8_t predicted = train.currents[t].at(i, j) < fit.thresholds[i];
                errors += predicted != train.stored[t].at(i, j);
            }
            double p = static_cast<double>(errors) / static_cast<double>(trials);
            if (errors == 0) {
                p = clamp_zero_estimate(0.0, trials);
                out.clamped[i * cols + j] = 1;
            }
            out.cells.push_back(ChannelModel::bsc_normalized(p));
        }
    }
    return out;
}

CellCharacterization estimate_bac(const TrainingSet& train, const ThresholdFit& fit) {
    const size_t rows = train.stored[0].rows, cols = train.stored[0].cols;
    const size_t trials = train.trials();
    CellCharacterization out;
    out.rows = rows;
    out.cols = cols;
    out.mode = CharacterizationMode::bac;
    out.thresholds = fit.thresholds;
    out.trials = trials;
    out.clamped.assign(rows * cols, 0);
    out.cells.reserve(rows * cols);

    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) {
            size_t stored0 = 0, stored1 = 0, err0 = 0, err1 = 0;
            for (size_t t = 0; t < trials; ++t) {
                const uint8_t predicted = train.currents[t].at(i, j) < fit.thresholds[i];
                if (train.stored[t].at(i, j)) {
                    ++stored1;
                    err1 += predicted == 0;
                } else {
                    ++stored0;
                    err0 += predicted == 1;
                }
            }
            double p01 = stored0 ? static_cast<double>(err0) / static_cast<double>(stored0) : 0.0;
            double p10 = stored1 ? static_cast<double>(err1) / static_cast<double>(stored1) : 0.0;
            uint8_t clamped = 0;
            if (err0 == 0) {
                p01 = clamp_zero_estimate(0.0, stored0);
                clamped = 1;
            }
            if (err1 == 0) {
                p10 = clamp_zero_estimate(0.0, stored1);
                clamped = 1;
            }
            // A symbol never seen in training leaves that direction at the
            // most conservative clamp.
            out.clamped[i * cols + j] = clamped;
            out.cells.push_back(ChannelModel::bac(std::min(p01, 1.0 - 1e-12),
                                                  std::min(p10, 1.0 - 1e-12)));
        }
    }
    return out;
}

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double average_design_channel(std::span<const double> crossover_probs) {
    if (crossover_probs.empty()) throw std::invalid_argument("empty probability list");
    double target = 0.0;
    for (double p : crossover_probs) {
        if (!(p >= 0.0 && p <= 0.5))
            throw std::invalid_argument("crossover probabilities must lie in [0, 1/2]");
        target += binary_entropy(p);
    }
    target /= static_cast<double>(crossover_probs.size());

    double lo = 0.0, hi = 0.5;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (binary_entropy(mid) < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-18 || std::fabs(binary_entropy(0.5 * (lo + hi)) - target) < 1e-12) break;
    }
    return 0.5 * (lo + hi);
}

void write_characterization(const CellCharacterization& c, std::ostream& out) {
    nlohmann::json j;
    j["format"] = "nspolar-characterization-v1";
    j["rows"] = c.rows;
    j["cols"] = c.cols;
    j["mode"] = c.mode == CharacterizationMode::bsc ? "bsc" : "bac";
    j["trials"] = c.trials;
    j["thresholds"] = c.thresholds;
    j["clamped"] = c.clamped;
    auto& cells = j["cells"] = nlohmann::json::array();
    for (const auto& w : c.cells) {
        if (c.mode == CharacterizationMode::bsc) {
            nlohmann::json cj;
            cj["p"] = w.param_a();
            if (w.relabeled()) cj["relabeled"] = true;
            cells.push_back(std::move(cj));
        } else {
            cells.push_back({{"p01", w.param_a()}, {"p10", w.param_b()}});
        }
    }
    out << j.dump(2) << '\n';
}

CellCharacterization read_characterization(std::istream& in) {
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("format", "") != "nspolar-characterization-v1")
        throw std::invalid_argument("not a characterization file");
    CellCharacterization c;
    c.rows = j.at("rows");
    c.cols = j.at("cols");
    c.mode = j.at("mode") == "bsc" ? CharacterizationMode::bsc : CharacterizationMode::bac;
    c.trials = j.at("trials");
    c.thresholds = j.at("thresholds").get<std::vector<double>>();
    c.clamped = j.at("clamped").get<std::vector<uint8_t>>();
    for (const auto& cj : j.at("cells")) {
        if (c.mode == CharacterizationMode::bsc) {
            const double p = cj.at("p");
            c.cells.push_back(cj.value("relabeled", false) ? ChannelModel::bsc_normalized(1.0 - p)
                                                           : ChannelModel::bsc(p));
        } else {
            c.cells.push_back(ChannelModel::bac(cj.at("p01"), cj.at("p10")));
        }
    }
    if (c.cells.size() != c.rows * c.cols || c.thresholds.size() != c.rows)
        throw std::invalid_argument("inconsistent characterization file");
    return c;
}

void save_characterization(const CellCharacterization& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_characterization(c, out);
}

CellCharacterization load_characterization(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_characterization(in);
}

}  // namespace nspolar
