#include "dpg/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>


namespace dpg {

namespace {

/// exp(c * (u >> 10)) over a 31-bit draw; lands in (0, 1] for c < 0.
double exponential_value(SplitMix64& rng, double c) {
    return std::exp(c * static_cast<double>(rng.next_random31() >> 10));
}

/// Map a value in [0, 1] to key bytes, big-endian fixed point, so that byte
/// order equals numeric order. Trailing bytes (beyond 8) are left to the
/// caller as tie-breaking randomness.
void value_to_key(double value, std::uint8_t* key, std::size_t key_len) {
    const double clamped = std::min(1.0, std::max(0.0, value));
    const auto fixed =
        static_cast<std::uint64_t>(clamped * static_cast<double>(1ULL << 62));
    const std::size_t prefix = std::min<std::size_t>(8, key_len);
    for (std::size_t b = 0; b < prefix; ++b)
        key[b] = static_cast<std::uint8_t>(fixed >> (56 - 8 * b));
}

void fill_random(SplitMix64& rng, std::uint8_t* dst, std::size_t len) {
    std::size_t i = 0;
    for (; i + 8 <= len; i += 8) {
        const std::uint64_t v = rng.next();
        std::memcpy(dst + i, &v, 8);
    }
    if (i < len) {
        const std::uint64_t v = rng.next();
        std::memcpy(dst + i, &v, len - i);
    }
}

void gen_key(SplitMix64& rng, const KeyDistribution& distribution, std::uint8_t* key,
             std::size_t key_len) {
    if (distribution.kind == KeyDistribution::Kind::kUniform) {
        fill_random(rng, key, key_len);
        return;
    }
    if (distribution.c >= 0)
        throw ConfigError("exponential distribution needs c < 0");
    fill_random(rng, key, key_len); // tail bytes stay random
    value_to_key(exponential_value(rng, distribution.c), key, key_len);
}

} // namespace

RecordFile gen_record_file(std::size_t n, std::size_t record_size, std::size_t key_len,
                           const KeyDistribution& distribution, std::uint64_t seed) {
    RecordFile file(n, record_size, key_len);
    SplitMix64 rng(seed);
    std::uint8_t* data = file.bytes().data();
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t* rec = data + i * record_size;
        gen_key(rng, distribution, rec, key_len);
        fill_random(rng, rec + key_len, record_size - key_len);
    }
    return file;
}

std::pair<RecordFile, RecordFile> gen_fk_pair(const RelationSpec& spec,
                                              std::uint64_t seed) {
    if (spec.n_r < 1 || spec.n_f < 1)
        throw ConfigError("relation sizes must be >= 1");
    if (spec.duplicates == DuplicatePolicy::kNone && spec.n_r > spec.n_f)
        throw ConfigError("duplicate-free R needs n_r <= n_f (" +
                          std::to_string(spec.n_r) + " > " + std::to_string(spec.n_f) +
                          ")");

    SplitMix64 rng(seed);

    // F: unique keys per the distribution; collisions are redrawn.
    RecordFile f_file(spec.n_f, spec.record_size_f, spec.key_len);
    {
        std::unordered_set<std::string> seen;
        seen.reserve(spec.n_f);
        std::vector<std::uint8_t> key(spec.key_len);
        for (std::size_t i = 0; i < spec.n_f; ++i) {
            for (;;) {
                gen_key(rng, spec.distribution, key.data(), spec.key_len);
                std::string probe(reinterpret_cast<const char*>(key.data()),
                                  spec.key_len);
                if (seen.insert(std::move(probe)).second) break;
            }
            std::uint8_t* rec = f_file.bytes().data() + i * spec.record_size_f;
            std::memcpy(rec, key.data(), spec.key_len);
            fill_random(rng, rec + spec.key_len, spec.record_size_f - spec.key_len);
        }
    }

    // R: keys sampled uniformly from F's key set.
    RecordFile r_file(spec.n_r, spec.record_size_r, spec.key_len);
    std::vector<Rid> pick(spec.n_r);
    if (spec.duplicates == DuplicatePolicy::kNone) {
        std::vector<Rid> all(spec.n_f);
        for (std::size_t i = 0; i < spec.n_f; ++i) all[i] = static_cast<Rid>(i);
        for (std::size_t i = 0; i < spec.n_r; ++i) {
            const std::size_t j = i + rng.next_below(spec.n_f - i);
            std::swap(all[i], all[j]);
            pick[i] = all[i];
        }
    } else {
        for (std::size_t i = 0; i < spec.n_r; ++i)
            pick[i] = static_cast<Rid>(rng.next_below(spec.n_f));
    }
    for (std::size_t i = 0; i < spec.n_r; ++i) {
        std::uint8_t* rec = r_file.bytes().data() + i * spec.record_size_r;
        std::memcpy(rec, f_file.key(pick[i]).data(), spec.key_len);
        fill_random(rng, rec + spec.key_len, spec.record_size_r - spec.key_len);
    }
    return {std::move(r_file), std::move(f_file)};
}

RidSequence gen_rid_sequence(std::size_t m, std::size_t n,
                             const KeyDistribution& distribution, std::uint64_t seed) {
    if (n == 0) throw ConfigError("rid domain must be non-empty");
    RidSequence rids(m);
    SplitMix64 rng(seed);
    if (distribution.kind == KeyDistribution::Kind::kUniform) {
        for (std::size_t i = 0; i < m; ++i)
            rids[i] = static_cast<Rid>(rng.next_below(n));
    } else {
        if (distribution.c >= 0)
            throw ConfigError("exponential distribution needs c < 0");
        for (std::size_t i = 0; i < m; ++i) {
            const double v = exponential_value(rng, distribution.c);
            rids[i] = static_cast<Rid>(
                std::min<std::uint64_t>(n - 1, static_cast<std::uint64_t>(v * n)));
        }
    }
    return rids;
}

RidSequence gen_permutation(std::size_t n, std::uint64_t seed) {
    RidSequence rids(n);
    for (std::size_t i = 0; i < n; ++i) rids[i] = static_cast<Rid>(i);
    SplitMix64 rng(seed);
    for (std::size_t i = n; i > 1; --i)
        std::swap(rids[i - 1], rids[rng.next_below(i)]);
    return rids;
}

void write_manifest(const std::string& path, std::size_t n, std::size_t record_size,
                    std::size_t key_len, const KeyDistribution& distribution,
                    std::uint64_t seed) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "n=" << n << "\nrecord_size=" << record_size << "\nkey_len=" << key_len
        << "\ndist="
        << (distribution.kind == KeyDistribution::Kind::kUniform ? "uniform" : "exp")
        << "\n";
    if (distribution.kind == KeyDistribution::Kind::kExponential)
        out << "c=" << distribution.c << "\n";
    out << "seed=" << seed << "\n";
}

} // namespace dpg
