#include "dpg/sort.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "dpg/dpg.hpp"

namespace dpg {

KeyRidList KeyRidList::permuted(std::span<const std::uint32_t> order) const {
    KeyRidList out;
    out.key_len = key_len;
    out.keys.resize(order.size() * key_len);
    out.rids.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        std::memcpy(out.keys.data() + i * key_len, keys.data() + order[i] * key_len,
                    key_len);
        out.rids[i] = rids[order[i]];
    }
    return out;
}

KeyRidList extract_key_rids(const RecordFile& file) {
    if (file.empty()) throw ConfigError("cannot extract key-rid pairs from an empty file");
    KeyRidList pairs;
    pairs.key_len = file.key_len();
    pairs.keys.resize(file.size() * file.key_len());
    pairs.rids.resize(file.size());
    for (std::size_t i = 0; i < file.size(); ++i) {
        const auto key = file.key(static_cast<Rid>(i));
        std::memcpy(pairs.keys.data() + i * pairs.key_len, key.data(), pairs.key_len);
        pairs.rids[i] = static_cast<Rid>(i);
    }
    return pairs;
}

namespace {

/// Tournament (winner) tree merging presorted runs of the index array.
class TournamentMerge {
public:
    TournamentMerge(const KeyRidList& pairs, const std::vector<std::uint32_t>& order,
                    std::size_t run_size)
        : pairs_(pairs), order_(order), run_size_(run_size) {
        const std::size_t num_runs = (order.size() + run_size - 1) / run_size;
        cursor_.resize(num_runs);
        end_.resize(num_runs);
        for (std::size_t k = 0; k < num_runs; ++k) {
            cursor_[k] = k * run_size;
            end_[k] = std::min(order.size(), (k + 1) * run_size);
        }
        leaves_ = std::bit_ceil(std::max<std::size_t>(num_runs, 1));
        tree_.assign(2 * leaves_, kExhausted);
        for (std::size_t k = 0; k < num_runs; ++k) tree_[leaves_ + k] = k;
        for (std::size_t node = leaves_ - 1; node >= 1; --node)
            tree_[node] = winner(tree_[2 * node], tree_[2 * node + 1]);
    }

    bool done() const { return tree_[1] == kExhausted; }

    std::uint32_t pop() {
        const std::size_t run = tree_[1];
        const std::uint32_t element = order_[cursor_[run]++];
        std::size_t node = leaves_ + run;
        if (cursor_[run] == end_[run]) tree_[node] = kExhausted;
        for (node /= 2; node >= 1; node /= 2)
            tree_[node] = winner(tree_[2 * node], tree_[2 * node + 1]);
        return element;
    }

private:
    static constexpr std::size_t kExhausted = static_cast<std::size_t>(-1);

    std::size_t winner(std::size_t a, std::size_t b) const {
        if (a == kExhausted) return b;
        if (b == kExhausted) return a;
        return pairs_.less(order_[cursor_[b]], order_[cursor_[a]]) ? b : a;
    }

    const KeyRidList& pairs_;
    const std::vector<std::uint32_t>& order_;
    std::size_t run_size_;
    std::vector<std::size_t> cursor_, end_;
    std::size_t leaves_ = 1;
    std::vector<std::size_t> tree_;
};

std::vector<std::uint32_t> iota_order(std::size_t n) {
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    return order;
}

} // namespace

KeyRidList alpha_sort(const KeyRidList& pairs, std::size_t run_size) {
    if (run_size < 2) throw ConfigError("alpha_sort run_size must be >= 2");
    if (pairs.size() == 0) return pairs;

    auto order = iota_order(pairs.size());
    const auto less = [&pairs](std::uint32_t a, std::uint32_t b) {
        return pairs.less(a, b);
    };
    for (std::size_t start = 0; start < order.size(); start += run_size) {
        const std::size_t stop = std::min(order.size(), start + run_size);
        std::sort(order.begin() + start, order.begin() + stop, less);
    }

    TournamentMerge merge(pairs, order, run_size);
    std::vector<std::uint32_t> merged;
    merged.reserve(order.size());
    while (!merge.done()) merged.push_back(merge.pop());
    return pairs.permuted(merged);
}

KeyRidList superscalar_sort(const KeyRidList& pairs, unsigned prefix_bits) {
    if (prefix_bits < 1 || prefix_bits > 16)
        throw ConfigError("prefix_bits must be in [1, 16]");
    if (pairs.size() == 0) return pairs;

    // Bucket index = top prefix_bits of the key, read big-endian from its
    // first two bytes (shorter keys are zero-padded on the right).
    const auto bucket_of = [&](std::size_t i) -> std::uint32_t {
        const auto key = pairs.key(i);
        std::uint32_t hi = static_cast<std::uint32_t>(key[0]) << 8;
        if (pairs.key_len > 1) hi |= key[1];
        return hi >> (16 - prefix_bits);
    };

    const std::size_t num_buckets = std::size_t{1} << prefix_bits;
    std::vector<std::size_t> start(num_buckets + 1, 0);
    for (std::size_t i = 0; i < pairs.size(); ++i) ++start[bucket_of(i) + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());

    std::vector<std::uint32_t> order(pairs.size());
    {
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (std::size_t i = 0; i < pairs.size(); ++i)
            order[fill[bucket_of(i)]++] = static_cast<std::uint32_t>(i);
    }
    const auto less = [&pairs](std::uint32_t a, std::uint32_t b) {
        return pairs.less(a, b);
    };
    for (std::size_t b = 0; b < num_buckets; ++b)
        std::sort(order.begin() + start[b], order.begin() + start[b + 1], less);
    return pairs.permuted(order);
}

namespace {

std::uint64_t key_as_u64(const KeyRidList& pairs, std::size_t i) {
    std::uint64_t v = 0;
    const auto key = pairs.key(i);
    for (std::size_t b = 0; b < pairs.key_len; ++b) v = (v << 8) | key[b];
    return v;
}

KeyRidList sort_pairs(const KeyRidList& pairs, const SortBackend& backend,
                      std::size_t default_run_size) {
    switch (backend.method) {
    case SortMethod::kAlpha: {
        const std::size_t run_size =
            backend.run_size != 0 ? backend.run_size : std::max<std::size_t>(2, default_run_size);
        return alpha_sort(pairs, run_size);
    }
    case SortMethod::kSuperscalar:
        return superscalar_sort(pairs, backend.prefix_bits);
    case SortMethod::kCountBucket: {
        if (pairs.key_len > 8)
            throw ConfigError("count bucket sort needs key_len <= 8, got " +
                              std::to_string(pairs.key_len));
        // Stable LSD radix on indices; extract order is rid-ascending, so
        // stability realizes the rid tie rule.
        auto order = count_bucket_sort(
            iota_order(pairs.size()), static_cast<unsigned>(8 * pairs.key_len),
            backend.bits_per_pass,
            [&pairs](std::uint32_t i) { return key_as_u64(pairs, i); });
        return pairs.permuted(order);
    }
    }
    throw ConfigError("unknown sort method");
}

} // namespace

RecordFile full_sort(const RecordFile& file, const SortBackend& backend,
                     RetrievalMethod retrieval, std::uint64_t cache_capacity) {
    if (file.empty()) return file;
    const RunLayout layout =
        choose_run_length(cache_capacity, file.record_size(), sizeof(Rid), file.size());

    const KeyRidList sorted =
        sort_pairs(extract_key_rids(file), backend, layout.run_length);

    const RidSequence& order = sorted.rids;
    return retrieval == RetrievalMethod::kNaive ? naive_retrieve(file, order)
                                                : dpg_retrieve(file, order, layout);
}

} // namespace dpg
