#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "dpg/records.hpp"

namespace dpg {

/// Key-rid pairs in structure-of-arrays form: all keys share one fixed
/// length and live in a flat buffer. Keys order as unsigned bytes,
/// lexicographic; equal keys order by rid ascending (the tie rule every
/// sort backend follows, making their outputs byte-comparable).
struct KeyRidList {
    std::size_t key_len = 0;
    std::vector<std::uint8_t> keys;
    std::vector<Rid> rids;

    std::size_t size() const { return rids.size(); }
    std::span<const std::uint8_t> key(std::size_t i) const {
        return {keys.data() + i * key_len, key_len};
    }
    void append(std::span<const std::uint8_t> key_bytes, Rid rid) {
        keys.insert(keys.end(), key_bytes.begin(), key_bytes.end());
        rids.push_back(rid);
    }

    /// key-then-rid comparison of elements i and j.
    bool less(std::size_t i, std::size_t j) const {
        const int c = std::memcmp(keys.data() + i * key_len, keys.data() + j * key_len,
                                  key_len);
        if (c != 0) return c < 0;
        return rids[i] < rids[j];
    }

    KeyRidList permuted(std::span<const std::uint32_t> order) const;

    bool operator==(const KeyRidList& other) const = default;
};

enum class SortMethod { kAlpha, kSuperscalar, kCountBucket };

/// Backend selector for the key-rid sorting phase.
struct SortBackend {
    SortMethod method = SortMethod::kAlpha;
    std::size_t run_size = 0;    ///< alpha: records per quicksorted run; 0 = derive from cache
    unsigned prefix_bits = 7;    ///< superscalar: key bits used for bucketing, in [1,16]
    unsigned bits_per_pass = 10; ///< count bucket: radix bits per pass, in [1,16]
};

enum class RetrievalMethod { kNaive, kDpg };

/// Phase 1 of three-phase sorting: one sequential scan pulling each
/// record's key next to its rid.
KeyRidList extract_key_rids(const RecordFile& file);

/// Quicksort fixed-size runs, then merge them through a tournament
/// (selection) tree. Works for any key distribution.
KeyRidList alpha_sort(const KeyRidList& pairs, std::size_t run_size);

/// Distribute pairs into 2^prefix_bits buckets by the top bits of the key,
/// sort each bucket, and concatenate. Balance (not correctness) relies on
/// keys being roughly uniform in those bits. Output is identical to
/// alpha_sort's.
KeyRidList superscalar_sort(const KeyRidList& pairs, unsigned prefix_bits);

/// Stable LSD count bucket sort: per pass over bits_per_pass key bits,
/// count bucket occupancy, set boundaries by prefix sums, then scatter.
/// Keys must be < 2^key_bits.
template <typename T, typename KeyFn>
std::vector<T> count_bucket_sort(std::vector<T> items, unsigned key_bits,
                                 unsigned bits_per_pass, KeyFn key_of) {
    if (key_bits == 0 || key_bits > 64)
        throw ConfigError("key_bits must be in [1, 64]");
    if (bits_per_pass == 0 || bits_per_pass > 16)
        throw ConfigError("bits_per_pass must be in [1, 16]");
    for (std::size_t i = 0; i < items.size(); ++i) {
        const std::uint64_t k = key_of(items[i]);
        if (key_bits < 64 && (k >> key_bits) != 0)
            throw RangeError("sort key " + std::to_string(k) + " at index " +
                             std::to_string(i) + " exceeds " +
                             std::to_string(key_bits) + " bits");
    }

    std::vector<T> scratch(items.size());
    for (unsigned shift = 0; shift < key_bits; shift += bits_per_pass) {
        const unsigned bits = std::min(bits_per_pass, key_bits - shift);
        const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
        std::vector<std::size_t> bucket_start(std::size_t{1} << bits, 0);
        for (const T& item : items) ++bucket_start[(key_of(item) >> shift) & mask];
        std::size_t offset = 0;
        for (std::size_t& start : bucket_start) {
            const std::size_t count = start;
            start = offset;
            offset += count;
        }
        for (T& item : items) scratch[bucket_start[(key_of(item) >> shift) & mask]++] =
            std::move(item);
        items.swap(scratch);
    }
    return items;
}

/// Three-phase sort of a record file: extract key-rid pairs, sort them with
/// the chosen backend, retrieve the records in sorted rid order (naive or
/// DPG, with the run length derived from cache_capacity). The result is
/// independent of backend and retrieval choice. The count-bucket backend
/// needs key_len <= 8 (keys reinterpreted as big-endian integers).
RecordFile full_sort(const RecordFile& file, const SortBackend& backend,
                     RetrievalMethod retrieval, std::uint64_t cache_capacity);

} // namespace dpg
