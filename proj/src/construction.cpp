#include "nspolar/construction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nspolar/rng.hpp"

namespace nspolar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

int log2_exact(size_t n) {
    if (!is_power_of_two(n)) throw std::invalid_argument("length must be a power of two");
    int l = 0;
    while ((size_t{1} << l) < n) ++l;
    return l;
}

// ln(a + b - ab) from ln a, ln b. Stable for tiny and for near-1 inputs:
// a + b - ab = hi (1 + (lo/hi)(1 - hi)) with hi = max(a, b).
double log_z_upper(double la, double lb) {
    const double hi = std::max(la, lb);
    const double lo = std::min(la, lb);
    if (hi == kNegInf) return kNegInf;  // both zero
    if (lo == kNegInf) return hi;       // a + b - ab = max when min is 0
    return hi + std::log1p(std::exp(lo - hi) * (-std::expm1(hi)));
}

}  // namespace

Permutation::Permutation(std::vector<uint32_t> map) : map_(std::move(map)) {
    std::vector<uint8_t> seen(map_.size(), 0);
    for (uint32_t v : map_) {
        if (v >= map_.size() || seen[v]) throw std::invalid_argument("map is not a permutation");
        seen[v] = 1;
    }
}

Permutation Permutation::identity(size_t n) {
    std::vector<uint32_t> m(n);
    std::iota(m.begin(), m.end(), 0);
    return Permutation(std::move(m));
}

Permutation Permutation::bit_reversal(int n_levels) {
    if (n_levels < 0) throw std::invalid_argument("negative level count");
    const size_t n = size_t{1} << n_levels;
    std::vector<uint32_t> m(n);
    for (size_t i = 0; i < n; ++i) {
        uint32_t r = 0;
        for (int b = 0; b < n_levels; ++b)
            if (i & (size_t{1} << b)) r |= uint32_t{1} << (n_levels - 1 - b);
        m[i] = r;
    }
    return Permutation(std::move(m));
}

Permutation Permutation::random_shuffle(size_t n, uint64_t seed) {
    std::vector<uint32_t> m(n);
    std::iota(m.begin(), m.end(), 0);
    Rng rng(seed);
    rng.shuffle(m);
    return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
    std::vector<uint32_t> inv(map_.size());
    for (size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = static_cast<uint32_t>(i);
    return Permutation(std::move(inv));
}

Permutation compose(const Permutation& a, const Permutation& b) {
    if (a.size() != b.size()) throw std::invalid_argument("permutation length mismatch");
    std::vector<uint32_t> m(a.size());
    for (size_t i = 0; i < a.size(); ++i) m[i] = a(b(i));
    return Permutation(std::move(m));
}

size_t PuncturePattern::punctured_count() const {
    return static_cast<size_t>(std::count(keep.begin(), keep.end(), uint8_t{0}));
}

PuncturePattern qup_pattern(size_t n_total, size_t n_punctured) {
    if (n_punctured >= n_total && n_total > 0)
        throw std::invalid_argument("puncture count must be below the blocklength");
    const int levels = log2_exact(n_total);
    const Permutation psi = Permutation::bit_reversal(levels);
    PuncturePattern out;
    out.keep.assign(n_total, 1);
    for (size_t i = 0; i < n_punctured; ++i) out.keep[psi(i)] = 0;
    return out;
}

double ones_frequency(size_t n_total, size_t n_punctured) {
    if (n_punctured > n_total) throw std::invalid_argument("puncture count above blocklength");
    return 0.5 + static_cast<double>(n_punctured) / (2.0 * static_cast<double>(n_total));
}

std::vector<double> ReliabilityTable::z_linear() const {
    std::vector<double> out(z_log.size());
    for (size_t i = 0; i < z_log.size(); ++i) out[i] = std::exp(z_log[i]);
    return out;
}

ReliabilityTable zn_recursion_log(std::vector<double> z0_log) {
    const size_t n = z0_log.size();
    log2_exact(n);
    for (double v : z0_log)
        if (v > 0.0 || std::isnan(v)) throw std::invalid_argument("log Z values must be <= 0");

    for (size_t block = 2; block <= n; block <<= 1) {
        const size_t half = block / 2;
        for (size_t base = 0; base < n; base += block) {
            for (size_t j = 0; j < half; ++j) {
                const double la = z0_log[base + j];
                const double lb = z0_log[base + half + j];
                z0_log[base + j] = log_z_upper(la, lb);
                z0_log[base + half + j] = la + lb;
            }
        }
    }
    return ReliabilityTable{std::move(z0_log)};
}

ReliabilityTable zn_recursion(const std::vector<double>& z0) {
    std::vector<double> logs(z0.size());
    for (size_t i = 0; i < z0.size(); ++i) {
        if (!(z0[i] >= 0.0 && z0[i] <= 1.0))
            throw std::invalid_argument("initial Z values must lie in [0,1]");
        logs[i] = std::log(z0[i]);
    }
    return zn_recursion_log(std::move(logs));
}

std::vector<uint32_t> select_frozen_set(const ReliabilityTable& table, size_t k,
                                        size_t n_punctured) {
    const size_t n = table.z_log.size();
    if (k > n) throw std::invalid_argument("dimension above blocklength");
    if (k + n_punctured > n)
        throw std::invalid_argument(
            "dimension exceeds the number of non-punctured positions; information bits would "
            "land on zero-capacity synthesized channels");

    std::vector<uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    // Frozen = largest Z first; on ties the lower index freezes first.
    std::sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
        if (table.z_log[a] != table.z_log[b]) return table.z_log[a] > table.z_log[b];
        return a < b;
    });
    std::vector<uint32_t> frozen(idx.begin(), idx.begin() + static_cast<long>(n - k));
    std::sort(frozen.begin(), frozen.end());
    return frozen;
}

Permutation ordering_permutation(const std::vector<ChannelModel>& channels,
                                 OrderingMetric metric) {
    std::vector<double> key(channels.size());
    for (size_t i = 0; i < channels.size(); ++i) {
        // Bhattacharyya is a noise measure: ascending capacity corresponds to
        // descending Z, so negate to keep "worst channel first" either way.
        key[i] = metric == OrderingMetric::capacity ? channels[i].capacity()
                                                    : -channels[i].bhattacharyya();
    }
    std::vector<uint32_t> idx(channels.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) { return key[a] < key[b]; });
    return Permutation(std::move(idx));
}

std::vector<uint32_t> CodeSpec::information_set() const {
    std::vector<uint32_t> info;
    info.reserve(dimension);
    for (size_t i = 0; i < block_length; ++i)
        if (!is_frozen[i]) info.push_back(static_cast<uint32_t>(i));
    return info;
}

CodeSpec build_code(const std::vector<ChannelModel>& physical_channels, size_t k,
                    const BuildOptions& opts) {
    const size_t n = physical_channels.size();
    const int levels = log2_exact(n);

    Permutation perm = Permutation::identity(n);
    switch (opts.perm_kind) {
        case PermKind::identity:
            break;
        case PermKind::bit_reversal:
            perm = Permutation::bit_reversal(levels);
            break;
        case PermKind::ordered:
            perm = ordering_permutation(physical_channels, opts.ordering_metric);
            break;
        case PermKind::ordered_bit_reversal:
            perm = compose(ordering_permutation(physical_channels, opts.ordering_metric),
                           Permutation::bit_reversal(levels));
            break;
        case PermKind::explicit_map:
            if (!opts.explicit_perm) throw std::invalid_argument("explicit permutation missing");
            if (opts.explicit_perm->size() != n)
                throw std::invalid_argument("explicit permutation length mismatch");
            perm = *opts.explicit_perm;
            break;
        case PermKind::random:
            perm = Permutation::random_shuffle(n, opts.random_perm_seed);
            break;
    }

    CodeSpec spec;
    spec.n = levels;
    spec.block_length = n;
    spec.dimension = k;
    spec.perm = perm;
    spec.puncture = qup_pattern(n, opts.n_punctured);

    spec.channels.reserve(n);
    std::vector<double> z0_log(n);
    for (size_t i = 0; i < n; ++i) {
        spec.channels.push_back(physical_channels[perm(i)]);
        z0_log[i] = spec.puncture.punctured(i) ? 0.0  // Z = 1: stored 1s carry no information
                                               : std::log(spec.channels[i].bhattacharyya());
    }

    spec.reliability = zn_recursion_log(std::move(z0_log));
    spec.frozen_set = select_frozen_set(spec.reliability, k, opts.n_punctured);

    if (!opts.frozen_values.empty() && opts.frozen_values.size() != spec.frozen_set.size())
        throw std::invalid_argument("frozen value count mismatch");
    spec.frozen_values =
        opts.frozen_values.empty() ? std::vector<uint8_t>(spec.frozen_set.size(), 0)
                                   : opts.frozen_values;

    spec.is_frozen.assign(n, 0);
    for (uint32_t f : spec.frozen_set) spec.is_frozen[f] = 1;
    return spec;
}

namespace {

nlohmann::json channel_to_json(const ChannelModel& w) {
    nlohmann::json j;
    switch (w.kind()) {
        case ChannelKind::bec:
            j["kind"] = "bec";
            j["eps"] = w.param_a();
            break;
        case ChannelKind::bsc:
            j["kind"] = "bsc";
            j["p"] = w.param_a();
            if (w.relabeled()) j["relabeled"] = true;
            break;
        case ChannelKind::bac:
            j["kind"] = "bac";
            j["p01"] = w.param_a();
            j["p10"] = w.param_b();
            break;
    }
    return j;
}

ChannelModel channel_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind");
    if (kind == "bec") return ChannelModel::bec(j.at("eps"));
    if (kind == "bsc") {
        const double p = j.at("p");
        return j.value("relabeled", false) ? ChannelModel::bsc_normalized(1.0 - p)
                                           : ChannelModel::bsc(p);
    }
    if (kind == "bac") return ChannelModel::bac(j.at("p01"), j.at("p10"));
    throw std::invalid_argument("unknown channel kind: " + kind);
}

}  // namespace

void write_code_spec(const CodeSpec& spec, std::ostream& out) {
    nlohmann::json j;
    j["format"] = "nspolar-code-spec-v1";
    j["n"] = spec.n;
    j["k"] = spec.dimension;
    j["perm"] = spec.perm.map();
    j["frozen_set"] = spec.frozen_set;
    j["frozen_values"] = spec.frozen_values;
    j["puncture"] = spec.puncture.keep;
    auto& chans = j["channels"] = nlohmann::json::array();
    for (const auto& w : spec.channels) chans.push_back(channel_to_json(w));
    out << j.dump(2) << '\n';
}

CodeSpec read_code_spec(std::istream& in) {
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("format", "") != "nspolar-code-spec-v1")
        throw std::invalid_argument("not a code spec file");

    CodeSpec spec;
    spec.n = j.at("n");
    spec.block_length = size_t{1} << spec.n;
    spec.dimension = j.at("k");
    spec.perm = Permutation(j.at("perm").get<std::vector<uint32_t>>());
    spec.frozen_set = j.at("frozen_set").get<std::vector<uint32_t>>();
    spec.frozen_values = j.at("frozen_values").get<std::vector<uint8_t>>();
    spec.puncture.keep = j.at("puncture").get<std::vector<uint8_t>>();
    for (const auto& cj : j.at("channels")) spec.channels.push_back(channel_from_json(cj));

    if (spec.perm.size() != spec.block_length || spec.channels.size() != spec.block_length ||
        spec.puncture.keep.size() != spec.block_length)
        throw std::invalid_argument("inconsistent code spec file");

    spec.is_frozen.assign(spec.block_length, 0);
    for (uint32_t f : spec.frozen_set) spec.is_frozen[f] = 1;

    std::vector<double> z0_log(spec.block_length);
    for (size_t i = 0; i < spec.block_length; ++i)
        z0_log[i] =
            spec.puncture.punctured(i) ? 0.0 : std::log(spec.channels[i].bhattacharyya());
    spec.reliability = zn_recursion_log(std::move(z0_log));
    return spec;
}

void save_code_spec(const CodeSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_code_spec(spec, out);
}

CodeSpec load_code_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_code_spec(in);
}

}  // namespace nspolar
