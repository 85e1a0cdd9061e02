#include "dpg/join.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <unordered_map>

#include "dpg/dpg.hpp"

namespace dpg {

namespace {

void check_joinable(const RecordFile& R, const RecordFile& F) {
    if (R.key_len() != F.key_len())
        throw ConfigError("join key lengths differ: " + std::to_string(R.key_len()) +
                          " vs " + std::to_string(F.key_len()));
}

RecordFile make_joined_file(std::size_t rows, const RecordFile& R, const RecordFile& F) {
    return RecordFile(rows, R.record_size() + F.record_size(), R.key_len(),
                      R.key_offset());
}

KeyList extract_keys(const RecordFile& file) {
    KeyList keys;
    keys.key_len = file.key_len();
    keys.keys.reserve(file.size() * file.key_len());
    for (std::size_t i = 0; i < file.size(); ++i) keys.append(file.key(static_cast<Rid>(i)));
    return keys;
}

template <typename Index>
JoinTripleList construct_triples_impl(const RecordFile& R, const Index& f_index,
                                      LookupMode mode) {
    if (R.key_len() != f_index.key_len())
        throw ConfigError("R key_len does not match the index key_len");

    const KeyList keys = extract_keys(R);
    LookupResults rids_f;
    if (mode == LookupMode::kBatch) {
        if constexpr (std::is_same_v<Index, EnhancedBPlusTree>)
            rids_f = batch_lookup_bptree(f_index, keys);
        else
            rids_f = batch_lookup_hash(f_index, keys);
    } else {
        rids_f.reserve(keys.size());
        for (std::size_t i = 0; i < keys.size(); ++i)
            rids_f.push_back(f_index.lookup(keys.key(i)));
    }

    JoinTripleList triples;
    triples.key_len = R.key_len();
    triples.keys = keys.keys;
    triples.rid_r.resize(R.size());
    triples.rid_f.resize(R.size());
    for (std::size_t i = 0; i < R.size(); ++i) {
        if (!rids_f[i])
            throw IntegrityError("foreign key of R record " + std::to_string(i) +
                                 " not found in F's index");
        triples.rid_r[i] = static_cast<Rid>(i);
        triples.rid_f[i] = *rids_f[i];
    }
    return triples;
}

} // namespace

JoinTripleList construct_join_triples(const RecordFile& R,
                                      const EnhancedBPlusTree& f_index,
                                      LookupMode mode) {
    return construct_triples_impl(R, f_index, mode);
}

JoinTripleList construct_join_triples(const RecordFile& R, const HashIndex& f_index,
                                      LookupMode mode) {
    return construct_triples_impl(R, f_index, mode);
}

RecordFile dpg_move_join(const RecordFile& R, const RecordFile& F,
                         const JoinTripleList& triples, std::uint64_t cache_capacity) {
    check_joinable(R, F);
    if (triples.size() == 0) return make_joined_file(0, R, F);
    RidSequence rid_f(triples.rid_f.begin(), triples.rid_f.end());
    const RunLayout layout =
        choose_run_length(cache_capacity, F.record_size(), sizeof(Rid), F.size());
    const RecordFile moved = dpg_retrieve(F, rid_f, layout);

    RecordFile out = make_joined_file(triples.size(), R, F);
    for (std::size_t i = 0; i < triples.size(); ++i) {
        std::uint8_t* dst = out.bytes().data() + i * out.record_size();
        std::memcpy(dst, R.record(triples.rid_r[i]).data(), R.record_size());
        std::memcpy(dst + R.record_size(), moved.record(static_cast<Rid>(i)).data(),
                    F.record_size());
    }
    return out;
}

RecordFile dpg_sort_join(const RecordFile& R, const RecordFile& F,
                         const JoinTripleList& triples, std::uint64_t cache_capacity) {
    check_joinable(R, F);
    if (triples.size() == 0) return make_joined_file(0, R, F);

    struct RidPair {
        Rid r, f;
    };
    std::vector<RidPair> pairs(triples.size());
    for (std::size_t i = 0; i < triples.size(); ++i)
        pairs[i] = {triples.rid_r[i], triples.rid_f[i]};

    // The low log2|F| bits identify any rid of F; split them over two
    // count-bucket passes.
    const unsigned key_bits = std::max<unsigned>(
        1, static_cast<unsigned>(std::bit_width(
               F.size() > 1 ? static_cast<std::uint64_t>(F.size() - 1) : 1ULL)));
    const unsigned bits_per_pass = std::min(16u, (key_bits + 1) / 2);
    pairs = count_bucket_sort(std::move(pairs), key_bits, bits_per_pass,
                              [](const RidPair& p) { return std::uint64_t{p.f}; });

    RidSequence rid_r(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) rid_r[i] = pairs[i].r;
    const RunLayout layout =
        choose_run_length(cache_capacity, R.record_size(), sizeof(Rid), R.size());
    const RecordFile moved = dpg_retrieve(R, rid_r, layout);

    // Sequential pass over F; unmatched F records are simply skipped.
    RecordFile out = make_joined_file(pairs.size(), R, F);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        std::uint8_t* dst = out.bytes().data() + i * out.record_size();
        std::memcpy(dst, moved.record(static_cast<Rid>(i)).data(), R.record_size());
        std::memcpy(dst + R.record_size(), F.record(pairs[i].f).data(), F.record_size());
    }
    return out;
}

RecordFile sort_merge_join(const RecordFile& R, const RecordFile& F,
                           const SortBackend& backend, RetrievalMethod retrieval,
                           std::uint64_t cache_capacity) {
    check_joinable(R, F);
    if (R.empty() || F.empty()) return make_joined_file(0, R, F);
    const RecordFile sorted_r = full_sort(R, backend, retrieval, cache_capacity);
    const RecordFile sorted_f = full_sort(F, backend, retrieval, cache_capacity);

    const auto key_cmp = [&](const RecordFile& a, std::size_t i, const RecordFile& b,
                             std::size_t j) {
        return std::memcmp(a.key(static_cast<Rid>(i)).data(),
                           b.key(static_cast<Rid>(j)).data(), a.key_len());
    };

    std::vector<std::uint8_t> rows;
    std::size_t i = 0, j = 0, count = 0;
    while (i < sorted_r.size() && j < sorted_f.size()) {
        const int c = key_cmp(sorted_r, i, sorted_f, j);
        if (c < 0) {
            ++i;
        } else if (c > 0) {
            ++j;
        } else {
            // Equal-key groups: emit the full cross product.
            std::size_t i_end = i + 1, j_end = j + 1;
            while (i_end < sorted_r.size() && key_cmp(sorted_r, i_end, sorted_r, i) == 0)
                ++i_end;
            while (j_end < sorted_f.size() && key_cmp(sorted_f, j_end, sorted_f, j) == 0)
                ++j_end;
            for (std::size_t a = i; a < i_end; ++a)
                for (std::size_t b = j; b < j_end; ++b) {
                    rows.insert(rows.end(), sorted_r.record(static_cast<Rid>(a)).begin(),
                                sorted_r.record(static_cast<Rid>(a)).end());
                    rows.insert(rows.end(), sorted_f.record(static_cast<Rid>(b)).begin(),
                                sorted_f.record(static_cast<Rid>(b)).end());
                    ++count;
                }
            i = i_end;
            j = j_end;
        }
    }
    RecordFile out = make_joined_file(count, R, F);
    if (!rows.empty()) std::memcpy(out.bytes().data(), rows.data(), rows.size());
    return out;
}

namespace {

std::uint64_t key_as_integer(const RecordFile& file, Rid r) {
    std::uint64_t v = 0;
    for (const std::uint8_t byte : file.key(r)) v = (v << 8) | byte;
    return v;
}

struct KeyedRid {
    std::uint64_t key;
    Rid rid;
};

std::vector<std::vector<KeyedRid>> radix_partition(const RecordFile& file,
                                                   unsigned radix_bits) {
    const std::uint64_t mask = radix_bits >= 64 ? ~0ULL : (1ULL << radix_bits) - 1;
    const std::size_t clusters = std::size_t{1} << radix_bits;
    std::vector<std::size_t> counts(clusters, 0);
    std::vector<KeyedRid> keyed(file.size());
    for (std::size_t i = 0; i < file.size(); ++i) {
        keyed[i] = {key_as_integer(file, static_cast<Rid>(i)), static_cast<Rid>(i)};
        ++counts[keyed[i].key & mask];
    }
    std::vector<std::vector<KeyedRid>> parts(clusters);
    for (std::size_t c = 0; c < clusters; ++c) parts[c].reserve(counts[c]);
    for (const KeyedRid& k : keyed) parts[k.key & mask].push_back(k);
    return parts;
}

} // namespace

RecordFile radix_join(const RecordFile& R, const RecordFile& F, unsigned radix_bits,
                      std::uint64_t cache_capacity) {
    (void)cache_capacity; // fan-out is the caller's choice; see choose_radix_bits
    check_joinable(R, F);
    if (R.key_len() > 8)
        throw ConfigError("radix join needs integer-representable keys (key_len <= 8)");
    if (radix_bits > 16) throw ConfigError("radix_bits must be in [0, 16]");

    const auto parts_r = radix_partition(R, radix_bits);
    const auto parts_f = radix_partition(F, radix_bits);

    std::vector<std::uint8_t> rows;
    std::size_t count = 0;
    for (std::size_t c = 0; c < parts_r.size(); ++c) {
        const auto& pr = parts_r[c];
        const auto& pf = parts_f[c];
        if (pr.empty() || pf.empty()) continue;
        // Hash the smaller side of the cluster pair, probe with the other.
        const bool build_f = pf.size() <= pr.size();
        const auto& build = build_f ? pf : pr;
        const auto& probe = build_f ? pr : pf;
        std::unordered_multimap<std::uint64_t, Rid> table;
        table.reserve(build.size());
        for (const KeyedRid& k : build) table.emplace(k.key, k.rid);
        for (const KeyedRid& k : probe) {
            const auto [first, last] = table.equal_range(k.key);
            for (auto it = first; it != last; ++it) {
                const Rid rid_r = build_f ? k.rid : it->second;
                const Rid rid_f = build_f ? it->second : k.rid;
                rows.insert(rows.end(), R.record(rid_r).begin(), R.record(rid_r).end());
                rows.insert(rows.end(), F.record(rid_f).begin(), F.record(rid_f).end());
                ++count;
            }
        }
    }
    RecordFile out = make_joined_file(count, R, F);
    if (!rows.empty()) std::memcpy(out.bytes().data(), rows.data(), rows.size());
    return out;
}

unsigned choose_radix_bits(const RecordFile& R, const RecordFile& F,
                           std::uint64_t cache_capacity) {
    const std::uint64_t larger_bytes =
        std::max<std::uint64_t>(R.size() * R.record_size(), F.size() * F.record_size());
    const std::uint64_t half_cache = std::max<std::uint64_t>(1, cache_capacity / 2);
    unsigned bits = 0;
    while (bits < 16 && (larger_bytes >> bits) > half_cache) ++bits;
    return bits;
}

RecordFile nested_loop_join(const RecordFile& R, const RecordFile& F) {
    check_joinable(R, F);
    if (R.size() * F.size() > 100'000'000ULL)
        throw ConfigError("nested loop oracle is limited to 10^8 comparisons");

    std::vector<std::uint8_t> rows;
    std::size_t count = 0;
    for (std::size_t i = 0; i < R.size(); ++i)
        for (std::size_t j = 0; j < F.size(); ++j)
            if (std::memcmp(R.key(static_cast<Rid>(i)).data(),
                            F.key(static_cast<Rid>(j)).data(), R.key_len()) == 0) {
                rows.insert(rows.end(), R.record(static_cast<Rid>(i)).begin(),
                            R.record(static_cast<Rid>(i)).end());
                rows.insert(rows.end(), F.record(static_cast<Rid>(j)).begin(),
                            F.record(static_cast<Rid>(j)).end());
                ++count;
            }
    RecordFile out = make_joined_file(count, R, F);
    if (!rows.empty()) std::memcpy(out.bytes().data(), rows.data(), rows.size());
    return out;
}

} // namespace dpg
