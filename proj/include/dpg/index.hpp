#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dpg/sort.hpp"

namespace dpg {

/// A flat list of fixed-length lookup keys.
struct KeyList {
    std::size_t key_len = 0;
    std::vector<std::uint8_t> keys;

    std::size_t size() const { return key_len == 0 ? 0 : keys.size() / key_len; }
    std::span<const std::uint8_t> key(std::size_t i) const {
        return {keys.data() + i * key_len, key_len};
    }
    void append(std::span<const std::uint8_t> key_bytes) {
        keys.insert(keys.end(), key_bytes.begin(), key_bytes.end());
    }
};

/// Per-key lookup results; disengaged entries mean the key was absent.
using LookupResults = std::vector<std::optional<Rid>>;

/// Diagnostics from a batch B+ tree lookup, for verifying the pass-2
/// locality contract: while one lower subtree is active no node of another
/// lower subtree is visited.
struct BatchLookupTrace {
    std::vector<std::uint32_t> subtree_of_key; ///< pass-1 tag per key
    /// Nodes visited per activated subtree, as (level << 32 | node) ids.
    std::vector<std::vector<std::uint64_t>> subtree_visits;
};

/// Bulk-built, read-only B+ tree over unique (key, rid) pairs in which every
/// node slot is occupied except possibly the rightmost node of each level.
/// Internal entries are routers: the smallest key under child i. The upper
/// ceil(height/2) levels form the cache-resident top half used by the first
/// pass of batch lookup.
class EnhancedBPlusTree {
public:
    /// pairs must be sorted ascending with unique keys; fanout >= 2.
    static EnhancedBPlusTree build(const KeyRidList& pairs, std::size_t fanout);

    std::size_t size() const { return size_; }
    std::size_t fanout() const { return fanout_; }
    std::size_t key_len() const { return key_len_; }
    std::size_t height() const { return levels_.size(); }
    std::size_t top_levels() const { return (height() + 1) / 2; }
    /// Number of nodes on one level (level 0 is the root).
    std::size_t node_count(std::size_t level) const;
    /// Total node slots in the top half, the footprint that must fit in cache.
    std::size_t top_half_slots() const;

    /// Root-to-leaf walk of exactly height() node visits.
    std::optional<Rid> lookup(std::span<const std::uint8_t> key,
                              std::size_t* node_visits = nullptr) const;

    /// Leaf-level scan; reproduces the build input.
    KeyRidList leaf_pairs() const;

private:
    friend LookupResults batch_lookup_bptree(const EnhancedBPlusTree&, const KeyList&,
                                             BatchLookupTrace*);

    struct Level {
        std::size_t entry_count = 0;
        std::vector<std::uint8_t> keys; ///< entry_count fixed-length keys
        std::vector<Rid> rids;          ///< leaf level only
    };

    std::span<const std::uint8_t> entry_key(const Level& level, std::size_t i) const {
        return {level.keys.data() + i * key_len_, key_len_};
    }
    /// Greatest entry in [first, last) whose key is <= key; first if all are
    /// greater (the descent then bottoms out at a leaf miss).
    std::size_t route(const Level& level, std::size_t first, std::size_t last,
                      std::span<const std::uint8_t> key) const;
    std::size_t descend_one(std::size_t level, std::size_t node,
                            std::span<const std::uint8_t> key) const;
    std::optional<Rid> search_leaf(std::size_t node,
                                   std::span<const std::uint8_t> key) const;

    std::size_t size_ = 0;
    std::size_t fanout_ = 0;
    std::size_t key_len_ = 0;
    std::vector<Level> levels_; ///< levels_[0] is the root level
};

/// Build per the spec operation name.
EnhancedBPlusTree build_bptree(const KeyRidList& pairs, std::size_t fanout);

/// Two-pass batch lookup. Pass 1 routes every key through the top half,
/// tagging it with the lower subtree that owns it (distribute). Pass 2
/// finishes the descent subtree by subtree (probe). Pass 3 merges results
/// back into input key order (gather). Element-wise equal to calling
/// lookup() per key.
LookupResults batch_lookup_bptree(const EnhancedBPlusTree& tree, const KeyList& keys,
                                  BatchLookupTrace* trace = nullptr);

/// Read-only hash index: a primary array holding one (key, rid) pair per
/// slot plus an overflow directory heading per-slot collision chains.
/// Seeded multiplicative hashing over the key bytes.
class HashIndex {
public:
    /// Unique keys; num_slots >= pairs.size().
    static HashIndex build(const KeyRidList& pairs, std::size_t num_slots,
                           std::uint64_t seed);

    std::size_t size() const { return size_; }
    std::size_t num_slots() const { return num_slots_; }
    std::size_t key_len() const { return key_len_; }
    std::uint64_t seed() const { return seed_; }

    std::uint64_t hash(std::span<const std::uint8_t> key) const;
    std::size_t slot_of(std::span<const std::uint8_t> key) const {
        return static_cast<std::size_t>(hash(key) % num_slots_);
    }

    /// probes counts primary-slot and chain-entry key inspections.
    std::optional<Rid> lookup(std::span<const std::uint8_t> key,
                              std::size_t* probes = nullptr) const;

private:
    std::optional<Rid> lookup_in_slot(std::size_t slot, std::span<const std::uint8_t> key,
                                      std::size_t* probes) const;
    friend LookupResults batch_lookup_hash(const HashIndex&, const KeyList&,
                                           std::uint64_t);

    std::size_t size_ = 0;
    std::size_t num_slots_ = 0;
    std::size_t key_len_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<std::uint8_t> slot_keys_;
    std::vector<Rid> slot_rids_;
    std::vector<std::uint8_t> slot_used_;
    std::vector<std::int32_t> overflow_head_; ///< per-slot chain head, -1 = none
    std::vector<std::uint8_t> pool_keys_;
    std::vector<Rid> pool_rids_;
    std::vector<std::int32_t> pool_next_;
};

HashIndex build_hash_index(const KeyRidList& pairs, std::size_t num_slots,
                           std::uint64_t seed);

/// Two-pass batch lookup against the hash index: hash all keys in one scan,
/// distribute (key, hash) pairs into runs by contiguous partitions of the
/// hash array, probe partition by partition, gather rids back to input
/// order. Partition size is chosen so half of cache_capacity holds one
/// partition of the primary array.
LookupResults batch_lookup_hash(const HashIndex& index, const KeyList& keys,
                                std::uint64_t cache_capacity = 64 * 1024);

} // namespace dpg
