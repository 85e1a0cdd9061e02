#include <algorithm>
#include <numeric>
#include <ostream>

#include "dpg/dpg.hpp"
#include "dpg/harness.hpp"
#include "dpg/index.hpp"
#include "dpg/join.hpp"
#include "dpg/random.hpp"
#include "dpg/sort.hpp"

namespace dpg {

namespace {

struct PropertyLog {
    std::ostream& out;
    int failures = 0;

    void pass(const std::string& name, std::size_t instances) {
        out << "[ok]   " << name << ": " << instances << " instances\n";
    }
    void fail(const std::string& name, std::size_t instance, std::uint64_t seed,
              const std::string& detail) {
        ++failures;
        out << "[FAIL] " << name << ": instance " << instance << " (seed " << seed
            << "): " << detail << "\n";
    }
};

RecordFile random_file(SplitMix64& rng, std::size_t n, std::size_t record_size,
                       std::size_t key_len, std::size_t distinct_keys) {
    RecordFile file(n, record_size, key_len);
    auto bytes = file.bytes();
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.next());
    if (distinct_keys > 0) {
        // Draw keys from a small pool to exercise duplicate handling.
        std::vector<std::vector<std::uint8_t>> pool(distinct_keys,
                                                    std::vector<std::uint8_t>(key_len));
        for (auto& key : pool)
            for (auto& b : key) b = static_cast<std::uint8_t>(rng.next());
        for (std::size_t i = 0; i < n; ++i) {
            const auto& key = pool[rng.next_below(distinct_keys)];
            std::copy(key.begin(), key.end(), bytes.begin() + i * record_size);
        }
    }
    return file;
}

RidSequence random_rids(SplitMix64& rng, std::size_t n) {
    switch (rng.next_below(3)) {
    case 0: return gen_permutation(n, rng.next());
    case 1: { // random with duplicates, length may differ from n
        RidSequence rids(rng.next_below(2 * n + 1));
        for (auto& r : rids) r = static_cast<Rid>(rng.next_below(n));
        return rids;
    }
    default: { // subset of a permutation
        RidSequence rids = gen_permutation(n, rng.next());
        rids.resize(rng.next_below(n + 1));
        return rids;
    }
    }
}

void check_dpg_vs_naive(PropertyLog& log, std::uint64_t seed, std::size_t instances) {
    SplitMix64 rng(seed);
    for (std::size_t it = 0; it < instances; ++it) {
        const std::uint64_t case_seed = rng.next();
        SplitMix64 case_rng(case_seed);
        const std::size_t sizes[] = {8, 17, 32, 64};
        const std::size_t record_size = sizes[case_rng.next_below(4)];
        const std::size_t n = 1 + case_rng.next_below(3000);
        RecordFile file = random_file(case_rng, n, record_size,
                                      std::min<std::size_t>(record_size, 10), 0);
        const RidSequence rids = random_rids(case_rng, n);

        RunLayout layout;
        if (!rids.empty() && case_rng.next_below(4) == 0)
            layout = skew_partition(rids, 1 + case_rng.next_below(16),
                                    std::max<std::size_t>(16, rids.size() / 4) + 16,
                                    case_rng.next());
        else if (case_rng.next_below(2) == 0)
            layout = choose_run_length(4096, record_size, sizeof(Rid), n, 64);
        else
            layout = make_uniform_layout(n, 1 + case_rng.next_below(n));

        const RecordFile expected = naive_retrieve(file, rids);
        const RecordFile got = dpg_retrieve(file, rids, layout);
        if (!(got == expected)) {
            log.fail("dpg-vs-naive", it, case_seed,
                     "dpg_retrieve differs from naive_retrieve (n=" + std::to_string(n) +
                         ", m=" + std::to_string(rids.size()) + ")");
            return;
        }
    }
    log.pass("dpg-vs-naive", instances);
}

KeyRidList reference_sorted(const KeyRidList& pairs) {
    std::vector<std::uint32_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return pairs.less(a, b); });
    return pairs.permuted(order);
}

void check_sort_backends(PropertyLog& log, std::uint64_t seed, std::size_t instances) {
    SplitMix64 rng(seed);
    for (std::size_t it = 0; it < instances; ++it) {
        const std::uint64_t case_seed = rng.next();
        SplitMix64 case_rng(case_seed);
        const std::size_t key_lens[] = {1, 2, 4, 8, 10};
        const std::size_t key_len = key_lens[case_rng.next_below(5)];
        const std::size_t n = 1 + case_rng.next_below(2000);
        const std::size_t distinct = case_rng.next_below(2) ? 0 : 1 + case_rng.next_below(8);
        const RecordFile file =
            random_file(case_rng, n, std::max<std::size_t>(key_len, 12), key_len, distinct);
        const KeyRidList pairs = extract_key_rids(file);

        const KeyRidList expected = reference_sorted(pairs);
        const std::size_t run_sizes[] = {2, 7, 64};
        const unsigned prefixes[] = {1, 5, 7, 16};
        if (!(alpha_sort(pairs, run_sizes[case_rng.next_below(3)]) == expected)) {
            log.fail("sort-backends", it, case_seed, "alpha_sort mismatch");
            return;
        }
        if (!(superscalar_sort(pairs, prefixes[case_rng.next_below(4)]) == expected)) {
            log.fail("sort-backends", it, case_seed, "superscalar_sort mismatch");
            return;
        }
        if (key_len <= 8) {
            SortBackend backend{SortMethod::kCountBucket, 0, 7,
                                static_cast<unsigned>(1 + case_rng.next_below(16))};
            std::vector<std::uint32_t> order(pairs.size());
            std::iota(order.begin(), order.end(), 0u);
            auto sorted = count_bucket_sort(
                std::move(order), static_cast<unsigned>(8 * key_len),
                backend.bits_per_pass, [&](std::uint32_t i) {
                    std::uint64_t v = 0;
                    for (const auto byte : pairs.key(i)) v = (v << 8) | byte;
                    return v;
                });
            if (!(pairs.permuted(sorted) == expected)) {
                log.fail("sort-backends", it, case_seed, "count_bucket_sort mismatch");
                return;
            }
        }
    }
    log.pass("sort-backends", instances);
}

void check_joins(PropertyLog& log, std::uint64_t seed, std::size_t instances) {
    SplitMix64 rng(seed);
    constexpr std::uint64_t kCache = 16 * 1024;
    for (std::size_t it = 0; it < instances; ++it) {
        const std::uint64_t case_seed = rng.next();
        SplitMix64 case_rng(case_seed);
        RelationSpec spec;
        spec.n_f = 1 + case_rng.next_below(300);
        spec.duplicates = case_rng.next_below(2) ? DuplicatePolicy::kRandomWithDuplicates
                                                 : DuplicatePolicy::kNone;
        spec.n_r = spec.duplicates == DuplicatePolicy::kNone
                       ? 1 + case_rng.next_below(spec.n_f)
                       : 1 + case_rng.next_below(300);
        const std::size_t key_lens[] = {4, 8, 10};
        spec.key_len = key_lens[case_rng.next_below(3)];
        spec.record_size_r = spec.key_len + 6;
        spec.record_size_f = spec.key_len + 13;
        spec.distribution = case_rng.next_below(2) ? KeyDistribution::uniform()
                                                   : KeyDistribution::exponential();
        const auto [r_file, f_file] = gen_fk_pair(spec, case_rng.next());

        const auto expected = canonical_rows(nested_loop_join(r_file, f_file));
        const auto check = [&](const char* what, const RecordFile& got) {
            if (canonical_rows(got) != expected) {
                log.fail("join-multiset", it, case_seed,
                         std::string(what) + " output multiset differs from the "
                                             "nested-loop oracle");
                return false;
            }
            return true;
        };

        KeyRidList f_pairs = extract_key_rids(f_file);
        const auto tree = build_bptree(reference_sorted(f_pairs), 4);
        const auto hash = HashIndex::build(f_pairs, 2 * f_pairs.size(), case_rng.next());
        const auto mode =
            case_rng.next_below(2) ? LookupMode::kBatch : LookupMode::kIndividual;
        const auto triples = case_rng.next_below(2)
                                 ? construct_join_triples(r_file, tree, mode)
                                 : construct_join_triples(r_file, hash, mode);

        if (!check("dpg_move_join", dpg_move_join(r_file, f_file, triples, kCache)))
            return;
        if (!check("dpg_sort_join", dpg_sort_join(r_file, f_file, triples, kCache)))
            return;
        for (const auto method : {SortMethod::kAlpha, SortMethod::kSuperscalar})
            for (const auto retrieval : {RetrievalMethod::kNaive, RetrievalMethod::kDpg}) {
                SortBackend backend;
                backend.method = method;
                if (!check("sort_merge_join",
                           sort_merge_join(r_file, f_file, backend, retrieval, kCache)))
                    return;
            }
        if (spec.key_len <= 8) {
            const unsigned bits = static_cast<unsigned>(case_rng.next_below(9));
            if (!check("radix_join", radix_join(r_file, f_file, bits, kCache))) return;
        }
    }
    log.pass("join-multiset", instances);
}

void check_batch_lookup(PropertyLog& log, std::uint64_t seed, std::size_t instances) {
    SplitMix64 rng(seed);
    for (std::size_t it = 0; it < instances; ++it) {
        const std::uint64_t case_seed = rng.next();
        SplitMix64 case_rng(case_seed);
        const std::size_t n = 1 + case_rng.next_below(3000);
        const std::size_t key_len = 8;
        const RecordFile file = random_file(case_rng, n, 16, key_len, 0);
        KeyRidList pairs = extract_key_rids(file);
        auto sorted = reference_sorted(pairs);
        // Equal keys would violate the unique-key build contract; keep the
        // first of each group.
        KeyRidList unique;
        unique.key_len = key_len;
        for (std::size_t i = 0; i < sorted.size(); ++i)
            if (i == 0 || std::memcmp(sorted.key(i - 1).data(), sorted.key(i).data(),
                                      key_len) != 0)
                unique.append(sorted.key(i), sorted.rids[i]);

        const std::size_t fanouts[] = {2, 4, 16, 64};
        const auto tree =
            build_bptree(unique, fanouts[case_rng.next_below(4)]);
        const auto hash =
            HashIndex::build(unique, 2 * unique.size(), case_rng.next());

        KeyList probes;
        probes.key_len = key_len;
        std::vector<std::uint8_t> scratch(key_len);
        const std::size_t m = case_rng.next_below(2 * n + 2);
        for (std::size_t i = 0; i < m; ++i) {
            if (case_rng.next_below(2)) {
                probes.append(unique.key(case_rng.next_below(unique.size())));
            } else {
                for (auto& b : scratch) b = static_cast<std::uint8_t>(case_rng.next());
                probes.append(scratch);
            }
        }

        LookupResults tree_expected(probes.size()), hash_expected(probes.size());
        for (std::size_t i = 0; i < probes.size(); ++i) {
            tree_expected[i] = tree.lookup(probes.key(i));
            hash_expected[i] = hash.lookup(probes.key(i));
        }
        if (batch_lookup_bptree(tree, probes) != tree_expected) {
            log.fail("batch-lookup", it, case_seed, "B+ tree batch != individual");
            return;
        }
        if (batch_lookup_hash(hash, probes, 4096) != hash_expected) {
            log.fail("batch-lookup", it, case_seed, "hash batch != individual");
            return;
        }
    }
    log.pass("batch-lookup", instances);
}

} // namespace

int verify_suite(std::uint64_t seed, std::ostream& log_stream) {
    PropertyLog log{log_stream};
    check_dpg_vs_naive(log, seed ^ 0x01, 100);
    check_sort_backends(log, seed ^ 0x02, 100);
    check_joins(log, seed ^ 0x03, 50);
    check_batch_lookup(log, seed ^ 0x04, 20);
    return log.failures;
}

} // namespace dpg
