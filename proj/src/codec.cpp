#include "nspolar/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nspolar/kernels.hpp"

namespace nspolar {

namespace {

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Substitution solve of (uG)_I = data, u_F = frozen, processing positions
// from high to low: x_j depends on u_j and u_i for i > j only.
std::vector<uint8_t> solve_u_by_substitution(const CodeSpec& spec,
                                             std::span<const uint8_t> data) {
    const size_t n = spec.block_length;
    std::vector<uint8_t> u(n, 0);
    std::vector<uint8_t> data_at(n, 0);
    {
        size_t pos = 0;
        for (size_t i = 0; i < n; ++i)
            if (!spec.is_frozen[i]) data_at[i] = data[pos++];
    }
    std::vector<uint8_t> frozen_at(n, 0);
    for (size_t f = 0; f < spec.frozen_set.size(); ++f)
        frozen_at[spec.frozen_set[f]] = spec.frozen_values[f];

    for (size_t j = n; j-- > 0;) {
        if (spec.is_frozen[j]) {
            u[j] = frozen_at[j];
            continue;
        }
        uint8_t acc = data_at[j];
        for (size_t i = j + 1; i < n; ++i)
            if ((i & j) == j) acc ^= u[i];
        u[j] = acc;
    }
    return u;
}

}  // namespace

std::vector<uint8_t> polar_transform(std::vector<uint8_t> u) {
    const size_t n = u.size();
    if (!is_power_of_two(n)) throw std::invalid_argument("length must be a power of two");
    const auto& k = kern::active();
    for (size_t inc = 1; inc < n; inc <<= 1)
        for (size_t base = 0; base < n; base += 2 * inc) k.xor_into(&u[base], &u[base + inc], inc);
    return u;
}

SystematicCodeword systematic_encode(const CodeSpec& spec, std::span<const uint8_t> data) {
    const size_t n = spec.block_length;
    if (data.size() != spec.dimension) throw std::invalid_argument("data length mismatch");

    // Codeword carrying the frozen values with zero data.
    std::vector<uint8_t> u_frozen(n, 0);
    bool any_frozen_value = false;
    for (size_t f = 0; f < spec.frozen_set.size(); ++f) {
        u_frozen[spec.frozen_set[f]] = spec.frozen_values[f];
        any_frozen_value |= spec.frozen_values[f] != 0;
    }
    std::vector<uint8_t> x_frozen =
        any_frozen_value ? polar_transform(u_frozen) : std::vector<uint8_t>(n, 0);

    // Zero-frozen systematic core: transform, zero the frozen positions,
    // transform again.
    std::vector<uint8_t> v(n, 0);
    {
        size_t pos = 0;
        for (size_t i = 0; i < n; ++i)
            if (!spec.is_frozen[i]) v[i] = static_cast<uint8_t>(data[pos] ^ x_frozen[i]), ++pos;
    }
    std::vector<uint8_t> t = polar_transform(std::move(v));
    for (uint32_t f : spec.frozen_set) t[f] = 0;
    std::vector<uint8_t> x2 = polar_transform(t);

    SystematicCodeword out;
    out.x.resize(n);
    for (size_t i = 0; i < n; ++i) out.x[i] = static_cast<uint8_t>(x2[i] ^ x_frozen[i]);
    out.u = polar_transform(out.x);  // involution: u = xG

    // Postcondition x_I = data; fall back to the exact substitution solve for
    // frozen sets that are not subset-closed (possible only in hand-built specs).
    bool ok = true;
    {
        size_t pos = 0;
        for (size_t i = 0; i < n && ok; ++i)
            if (!spec.is_frozen[i]) ok = out.x[i] == data[pos++];
        for (size_t f = 0; f < spec.frozen_set.size() && ok; ++f)
            ok = out.u[spec.frozen_set[f]] == spec.frozen_values[f];
    }
    if (!ok) {
        out.u = solve_u_by_substitution(spec, data);
        out.x = polar_transform(out.u);
        size_t pos = 0;
        for (size_t i = 0; i < n; ++i)
            if (!spec.is_frozen[i] && out.x[i] != data[pos++])
                throw std::logic_error("systematic encoding postcondition failed");
    }
    return out;
}

ScDecoder::ScDecoder(size_t block_length, CheckNodeRule rule)
    : block_length_(block_length), rule_(rule) {
    if (!is_power_of_two(block_length))
        throw std::invalid_argument("blocklength must be a power of two");
    levels_ = 0;
    while ((size_t{1} << levels_) < block_length) ++levels_;
    frozen_value_at_.assign(block_length, 0);
    llr_.resize(static_cast<size_t>(levels_) + 1);
    bits_.resize(static_cast<size_t>(levels_) + 1);
    for (int d = 0; d <= levels_; ++d) {
        llr_[d].resize(block_length >> d);
        bits_[d].resize(block_length >> d);
    }
    result_.u_hat.resize(block_length);
    result_.x_hat.resize(block_length);
}

void ScDecoder::decode_node(const CodeSpec& spec, int depth, size_t base) {
    const size_t len = block_length_ >> depth;
    double* llr = llr_[depth].data();
    uint8_t* bits = bits_[depth].data();
    if (len == 1) {
        const uint8_t bit = spec.is_frozen[base] ? frozen_value_at_[base]
                                                 : static_cast<uint8_t>(llr[0] < 0.0);
        result_.u_hat[base] = bit;
        bits[0] = bit;
        return;
    }
    const size_t half = len / 2;
    double* child_llr = llr_[depth + 1].data();
    uint8_t* child_bits = bits_[depth + 1].data();
    const auto& k = kern::active();

    if (rule_ == CheckNodeRule::tanh_exact)
        k.f_tanh(child_llr, llr, llr + half, half);
    else
        k.f_minsum(child_llr, llr, llr + half, half);
    decode_node(spec, depth + 1, base);
    std::memcpy(bits, child_bits, half);

    k.g_update(child_llr, llr, llr + half, bits, half);
    decode_node(spec, depth + 1, base + half);
    k.xor_into(bits, child_bits, half);
    std::memcpy(bits + half, child_bits, half);
}

const DecodeResult& ScDecoder::decode(const CodeSpec& spec, std::span<const double> llrs) {
    if (spec.block_length != block_length_)
        throw std::invalid_argument("code spec length does not match the decoder workspace");
    if (llrs.size() != block_length_) throw std::invalid_argument("LLR length mismatch");
    std::fill(frozen_value_at_.begin(), frozen_value_at_.end(), 0);
    for (size_t f = 0; f < spec.frozen_set.size(); ++f)
        frozen_value_at_[spec.frozen_set[f]] = spec.frozen_values[f];
    std::memcpy(llr_[0].data(), llrs.data(), llrs.size() * sizeof(double));
    decode_node(spec, 0, 0);
    std::memcpy(result_.x_hat.data(), bits_[0].data(), block_length_);
    return result_;
}

std::vector<uint8_t> data_from_u(const CodeSpec& spec, std::span<const uint8_t> u) {
    std::vector<uint8_t> d;
    d.reserve(spec.dimension);
    for (size_t i = 0; i < spec.block_length; ++i)
        if (!spec.is_frozen[i]) d.push_back(u[i]);
    return d;
}

std::vector<uint8_t> data_from_x(const CodeSpec& spec, std::span<const uint8_t> x) {
    std::vector<uint8_t> d;
    d.reserve(spec.dimension);
    for (size_t i = 0; i < spec.block_length; ++i)
        if (!spec.is_frozen[i]) d.push_back(x[i]);
    return d;
}

std::vector<uint8_t> map_to_physical(const CodeSpec& spec, std::span<const uint8_t> x) {
    if (x.size() != spec.block_length) throw std::invalid_argument("codeword length mismatch");
    std::vector<uint8_t> z(spec.block_length);
    for (size_t i = 0; i < spec.block_length; ++i)
        z[spec.perm(i)] = spec.puncture.punctured(i) ? uint8_t{1} : x[i];
    return z;
}

std::vector<double> map_from_physical(const CodeSpec& spec, std::span<const uint8_t> y_physical,
                                      double saturation) {
    if (y_physical.size() != spec.block_length)
        throw std::invalid_argument("observation length mismatch");
    std::vector<double> llrs(spec.block_length);
    for (size_t i = 0; i < spec.block_length; ++i)
        llrs[i] = spec.puncture.punctured(i)
                      ? 0.0
                      : spec.channels[i].llr(observation_from_bit(y_physical[spec.perm(i)]),
                                             saturation);
    return llrs;
}

std::vector<double> map_from_physical(const CodeSpec& spec,
                                      std::span<const HardObservation> y_physical,
                                      double saturation) {
    if (y_physical.size() != spec.block_length)
        throw std::invalid_argument("observation length mismatch");
    std::vector<double> llrs(spec.block_length);
    for (size_t i = 0; i < spec.block_length; ++i)
        llrs[i] = spec.puncture.punctured(i)
                      ? 0.0
                      : spec.channels[i].llr(y_physical[spec.perm(i)], saturation);
    return llrs;
}

namespace {

void write_bits(std::ostream& out, const char* key, std::span<const uint8_t> bits) {
    out << key << ' ';
    for (uint8_t b : bits) out << static_cast<int>(b);
    out << '\n';
}

std::vector<uint8_t> parse_bits(const std::string& s) {
    std::vector<uint8_t> out;
    out.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1') throw std::invalid_argument("bad bit string");
        out.push_back(static_cast<uint8_t>(c - '0'));
    }
    return out;
}

}  // namespace

void write_golden_vectors(std::ostream& out, const std::string& spec_ref,
                          std::span<const GoldenVector> records) {
    out << "# nspolar golden vectors v1\n";
    out << "spec " << spec_ref << '\n';
    out.precision(17);
    for (const auto& r : records) {
        out << "record\n";
        write_bits(out, "u", r.u);
        write_bits(out, "x", r.x);
        write_bits(out, "z", r.z);
        out << "llr";
        for (double v : r.llrs) out << ' ' << v;
        out << '\n';
        write_bits(out, "u_hat", r.u_hat);
        out << "end\n";
    }
}

std::vector<GoldenVector> read_golden_vectors(std::istream& in, std::string* spec_ref) {
    std::vector<GoldenVector> records;
    GoldenVector cur;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "spec") {
            std::string ref;
            ls >> ref;
            if (spec_ref) *spec_ref = ref;
        } else if (key == "record") {
            cur = GoldenVector{};
        } else if (key == "u" || key == "x" || key == "z" || key == "u_hat") {
            std::string bits;
            ls >> bits;
            auto parsed = parse_bits(bits);
            if (key == "u")
                cur.u = std::move(parsed);
            else if (key == "x")
                cur.x = std::move(parsed);
            else if (key == "z")
                cur.z = std::move(parsed);
            else
                cur.u_hat = std::move(parsed);
        } else if (key == "llr") {
            double v;
            while (ls >> v) cur.llrs.push_back(v);
        } else if (key == "end") {
            records.push_back(std::move(cur));
        } else {
            throw std::invalid_argument("unknown golden vector key: " + key);
        }
    }
    return records;
}

}  // namespace nspolar
