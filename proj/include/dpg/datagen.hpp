#pragma once

#include <cstdint>
#include <string>

#include "dpg/random.hpp"
#include "dpg/records.hpp"

namespace dpg {

/// Key value distribution. Exponential keys follow exp(c * (u >> 10)) over
/// 31-bit draws u, with c < 0 (the constant defaults to -1e-7).
struct KeyDistribution {
    enum class Kind { kUniform, kExponential };
    Kind kind = Kind::kUniform;
    double c = -1e-7;

    static KeyDistribution uniform() { return {Kind::kUniform, 0.0}; }
    static KeyDistribution exponential(double c = -1e-7) {
        return {Kind::kExponential, c};
    }
};

enum class DuplicatePolicy { kNone, kRandomWithDuplicates };

/// Shape of a generated foreign-key relation pair: R references F's unique
/// keys; F's key values follow `distribution`.
struct RelationSpec {
    std::size_t n_r = 0;
    std::size_t n_f = 0;
    std::size_t record_size_r = 100;
    std::size_t record_size_f = 100;
    std::size_t key_len = 10;
    DuplicatePolicy duplicates = DuplicatePolicy::kRandomWithDuplicates;
    KeyDistribution distribution;
};

/// Deterministic record file: keys drawn per distribution, payload bytes
/// pseudorandom from the same seed stream. Exponential values map into key
/// bytes big-endian so byte order matches numeric order.
RecordFile gen_record_file(std::size_t n, std::size_t record_size, std::size_t key_len,
                           const KeyDistribution& distribution, std::uint64_t seed);

/// Foreign-key pair: F gets n_f unique keys; every R key is sampled from
/// F's key set, so referential integrity holds by construction. Policy
/// kNone draws a duplicate-free subset and requires n_r <= n_f.
std::pair<RecordFile, RecordFile> gen_fk_pair(const RelationSpec& spec,
                                              std::uint64_t seed);

/// Rid sequence over [0, n): uniform draws or the exponential generator
/// mapped into the rid domain (skewed toward high rids).
RidSequence gen_rid_sequence(std::size_t m, std::size_t n,
                             const KeyDistribution& distribution, std::uint64_t seed);

/// Fisher-Yates permutation of [0, n).
RidSequence gen_permutation(std::size_t n, std::uint64_t seed);

/// Sidecar text manifest recording what was generated and from which seed.
void write_manifest(const std::string& path, std::size_t n, std::size_t record_size,
                    std::size_t key_len, const KeyDistribution& distribution,
                    std::uint64_t seed);

} // namespace dpg
