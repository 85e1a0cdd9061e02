#pragma once

#include <cstdint>
#include <vector>

#include "dpg/index.hpp"
#include "dpg/records.hpp"
#include "dpg/sort.hpp"

namespace dpg {

/// Join triples (key, rid_R, rid_F) in structure-of-arrays form, ordered by
/// rid_R ascending (the order a file scan of R produces).
struct JoinTripleList {
    std::size_t key_len = 0;
    std::vector<std::uint8_t> keys;
    std::vector<Rid> rid_r;
    std::vector<Rid> rid_f;

    std::size_t size() const { return rid_r.size(); }
    std::span<const std::uint8_t> key(std::size_t i) const {
        return {keys.data() + i * key_len, key_len};
    }
};

enum class LookupMode { kIndividual, kBatch };

/// Scan R in file order and resolve each record's key in F's index. Every R
/// key must resolve (foreign-key referential integrity); a miss throws
/// IntegrityError naming the offending rid_R. Batch and individual modes
/// produce identical triples.
JoinTripleList construct_join_triples(const RecordFile& R,
                                      const EnhancedBPlusTree& f_index,
                                      LookupMode mode);
JoinTripleList construct_join_triples(const RecordFile& R, const HashIndex& f_index,
                                      LookupMode mode);

/// Joined output rows are R record bytes followed by F record bytes;
/// record_size is the sum of the input record sizes and key_len is R's.
/// Only row order differs between join methods.

/// DPG-Move join: retrieve F's records in the rid_F order of the triples
/// (which is R's file order) and splice them onto a sequential scan of R.
/// No sorting or hashing involved. Rows come out in R order.
RecordFile dpg_move_join(const RecordFile& R, const RecordFile& F,
                         const JoinTripleList& triples, std::uint64_t cache_capacity);

/// DPG-Sort join: count-bucket-sort the rid pairs by rid_F (two radix
/// passes over the low log2|F| bits), retrieve R's records in the sorted
/// rid_R order, and scan F sequentially. Rows come out in F order.
RecordFile dpg_sort_join(const RecordFile& R, const RecordFile& F,
                         const JoinTripleList& triples, std::uint64_t cache_capacity);

/// Classic sort-merge equijoin: full_sort both relations on the join key,
/// then merge, emitting the cross product of every equal-key group. Rows
/// come out in key order.
RecordFile sort_merge_join(const RecordFile& R, const RecordFile& F,
                           const SortBackend& backend, RetrievalMethod retrieval,
                           std::uint64_t cache_capacity);

/// Radix join: partition both relations into 2^radix_bits clusters by the
/// low bits of the key (counting then scattering), then hash-join matching
/// cluster pairs, building on the smaller side. Keys must fit in 8 bytes.
/// Skew only unbalances the partitions; correctness is unaffected.
RecordFile radix_join(const RecordFile& R, const RecordFile& F, unsigned radix_bits,
                      std::uint64_t cache_capacity);

/// Pick a radix fan-out so an average partition of the larger relation fits
/// in half the cache.
unsigned choose_radix_bits(const RecordFile& R, const RecordFile& F,
                           std::uint64_t cache_capacity);

/// Quadratic correctness oracle: all key-equal pairs, R-major order.
RecordFile nested_loop_join(const RecordFile& R, const RecordFile& F);

} // namespace dpg
