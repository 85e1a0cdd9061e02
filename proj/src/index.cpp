#include "dpg/index.hpp"

#include <algorithm>
#include <cstring>

namespace dpg {

namespace {

int compare_keys(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    return std::memcmp(a.data(), b.data(), a.size());
}

} // namespace

EnhancedBPlusTree EnhancedBPlusTree::build(const KeyRidList& pairs, std::size_t fanout) {
    if (fanout < 2) throw ConfigError("B+ tree fanout must be >= 2");
    if (pairs.size() == 0) throw ConfigError("cannot build a B+ tree over zero pairs");
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        const int c = compare_keys(pairs.key(i - 1), pairs.key(i));
        if (c > 0) throw ConfigError("B+ tree build input not sorted at index " +
                                     std::to_string(i));
        if (c == 0) throw ConfigError("duplicate key in B+ tree build input at index " +
                                      std::to_string(i));
    }

    EnhancedBPlusTree tree;
    tree.size_ = pairs.size();
    tree.fanout_ = fanout;
    tree.key_len_ = pairs.key_len;

    Level leaf;
    leaf.entry_count = pairs.size();
    leaf.keys = pairs.keys;
    leaf.rids = pairs.rids;
    std::vector<Level> bottom_up;
    bottom_up.push_back(std::move(leaf));

    // Each upper level holds one router (the smallest key of the node) per
    // node below; entry index therefore doubles as the child node id.
    while ((bottom_up.back().entry_count + fanout - 1) / fanout > 1) {
        const Level& below = bottom_up.back();
        const std::size_t child_nodes = (below.entry_count + fanout - 1) / fanout;
        Level level;
        level.entry_count = child_nodes;
        level.keys.resize(child_nodes * tree.key_len_);
        for (std::size_t node = 0; node < child_nodes; ++node)
            std::memcpy(level.keys.data() + node * tree.key_len_,
                        below.keys.data() + node * fanout * tree.key_len_,
                        tree.key_len_);
        bottom_up.push_back(std::move(level));
    }

    tree.levels_.assign(bottom_up.rbegin(), bottom_up.rend());
    return tree;
}

std::size_t EnhancedBPlusTree::node_count(std::size_t level) const {
    return (levels_[level].entry_count + fanout_ - 1) / fanout_;
}

std::size_t EnhancedBPlusTree::top_half_slots() const {
    std::size_t slots = 0;
    for (std::size_t l = 0; l < top_levels(); ++l) slots += node_count(l) * fanout_;
    return slots;
}

std::size_t EnhancedBPlusTree::route(const Level& level, std::size_t first,
                                     std::size_t last,
                                     std::span<const std::uint8_t> key) const {
    // Greatest entry in [first, last) with entry_key <= key.
    std::size_t lo = first, hi = last;
    while (lo + 1 < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (compare_keys(entry_key(level, mid), key) <= 0)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

std::size_t EnhancedBPlusTree::descend_one(std::size_t level, std::size_t node,
                                           std::span<const std::uint8_t> key) const {
    const Level& lvl = levels_[level];
    const std::size_t first = node * fanout_;
    const std::size_t last = std::min(lvl.entry_count, first + fanout_);
    return route(lvl, first, last, key);
}

std::optional<Rid> EnhancedBPlusTree::search_leaf(std::size_t node,
                                                  std::span<const std::uint8_t> key) const {
    const Level& leaf = levels_.back();
    const std::size_t first = node * fanout_;
    const std::size_t last = std::min(leaf.entry_count, first + fanout_);
    const std::size_t pos = route(leaf, first, last, key);
    if (compare_keys(entry_key(leaf, pos), key) == 0) return leaf.rids[pos];
    return std::nullopt;
}

std::optional<Rid> EnhancedBPlusTree::lookup(std::span<const std::uint8_t> key,
                                             std::size_t* node_visits) const {
    if (key.size() != key_len_)
        throw ConfigError("lookup key length " + std::to_string(key.size()) +
                          " != index key_len " + std::to_string(key_len_));
    std::size_t node = 0;
    for (std::size_t level = 0; level + 1 < levels_.size(); ++level)
        node = descend_one(level, node, key);
    if (node_visits) *node_visits += levels_.size();
    return search_leaf(node, key);
}

KeyRidList EnhancedBPlusTree::leaf_pairs() const {
    KeyRidList out;
    out.key_len = key_len_;
    out.keys = levels_.back().keys;
    out.rids = levels_.back().rids;
    return out;
}

EnhancedBPlusTree build_bptree(const KeyRidList& pairs, std::size_t fanout) {
    return EnhancedBPlusTree::build(pairs, fanout);
}

LookupResults batch_lookup_bptree(const EnhancedBPlusTree& tree, const KeyList& keys,
                                  BatchLookupTrace* trace) {
    if (keys.size() != 0 && keys.key_len != tree.key_len())
        throw ConfigError("batch lookup key length mismatch");

    const std::size_t height = tree.height();
    // Lower subtrees are rooted where the cached top half ends; a tree of
    // one level is its own (single) lower subtree.
    const std::size_t subtree_level = std::min(tree.top_levels(), height - 1);
    const std::size_t num_subtrees = tree.node_count(subtree_level);

    // Pass 1 (distribute): route each key through the top half only.
    std::vector<std::uint32_t> tag(keys.size());
    std::vector<std::size_t> run_sizes(num_subtrees, 0);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        std::size_t node = 0;
        for (std::size_t level = 0; level < subtree_level; ++level)
            node = tree.descend_one(level, node, keys.key(i));
        tag[i] = static_cast<std::uint32_t>(node);
        ++run_sizes[node];
    }
    std::vector<std::vector<std::uint32_t>> runs(num_subtrees);
    for (std::size_t s = 0; s < num_subtrees; ++s) runs[s].reserve(run_sizes[s]);
    for (std::size_t i = 0; i < keys.size(); ++i)
        runs[tag[i]].push_back(static_cast<std::uint32_t>(i));

    if (trace) {
        trace->subtree_of_key = tag;
        trace->subtree_visits.clear();
    }

    // Pass 2 (probe): finish the descent for all keys of one lower subtree
    // before touching the next.
    std::vector<std::vector<std::optional<Rid>>> run_results(num_subtrees);
    for (std::size_t s = 0; s < num_subtrees; ++s) {
        if (runs[s].empty()) continue;
        std::vector<std::uint64_t>* visits = nullptr;
        if (trace) {
            trace->subtree_visits.emplace_back();
            visits = &trace->subtree_visits.back();
        }
        run_results[s].reserve(runs[s].size());
        for (const std::uint32_t i : runs[s]) {
            std::size_t node = s;
            for (std::size_t level = subtree_level; level + 1 < height; ++level) {
                if (visits) visits->push_back((std::uint64_t{level} << 32) | node);
                node = tree.descend_one(level, node, keys.key(i));
            }
            if (visits) visits->push_back((std::uint64_t{height - 1} << 32) | node);
            run_results[s].push_back(tree.search_leaf(node, keys.key(i)));
        }
    }

    // Pass 3 (gather): merge run results back into input order.
    LookupResults out(keys.size());
    std::vector<std::size_t> cursors(num_subtrees, 0);
    for (std::size_t i = 0; i < keys.size(); ++i)
        out[i] = run_results[tag[i]][cursors[tag[i]]++];
    return out;
}

HashIndex HashIndex::build(const KeyRidList& pairs, std::size_t num_slots,
                           std::uint64_t seed) {
    if (num_slots < pairs.size())
        throw ConfigError("hash index needs num_slots >= pair count (" +
                          std::to_string(num_slots) + " < " +
                          std::to_string(pairs.size()) + ")");
    if (num_slots == 0) throw ConfigError("hash index needs at least one slot");

    HashIndex index;
    index.size_ = pairs.size();
    index.num_slots_ = num_slots;
    index.key_len_ = pairs.key_len;
    index.seed_ = seed;
    index.slot_keys_.resize(num_slots * pairs.key_len);
    index.slot_rids_.resize(num_slots);
    index.slot_used_.assign(num_slots, 0);
    index.overflow_head_.assign(num_slots, -1);

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto key = pairs.key(i);
        const std::size_t slot = index.slot_of(key);
        if (index.lookup_in_slot(slot, key, nullptr))
            throw ConfigError("duplicate key in hash index build input at index " +
                              std::to_string(i));
        if (!index.slot_used_[slot]) {
            index.slot_used_[slot] = 1;
            std::memcpy(index.slot_keys_.data() + slot * index.key_len_, key.data(),
                        index.key_len_);
            index.slot_rids_[slot] = pairs.rids[i];
        } else {
            const auto entry = static_cast<std::int32_t>(index.pool_rids_.size());
            index.pool_keys_.insert(index.pool_keys_.end(), key.begin(), key.end());
            index.pool_rids_.push_back(pairs.rids[i]);
            index.pool_next_.push_back(index.overflow_head_[slot]);
            index.overflow_head_[slot] = entry;
        }
    }
    return index;
}

std::uint64_t HashIndex::hash(std::span<const std::uint8_t> key) const {
    // Seeded FNV-1a style multiplicative hash over the key bytes.
    std::uint64_t h = seed_ ^ 0xCBF29CE484222325ULL;
    for (const std::uint8_t byte : key) {
        h ^= byte;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::optional<Rid> HashIndex::lookup_in_slot(std::size_t slot,
                                             std::span<const std::uint8_t> key,
                                             std::size_t* probes) const {
    if (!slot_used_[slot]) {
        if (probes) ++*probes;
        return std::nullopt;
    }
    if (probes) ++*probes;
    if (std::memcmp(slot_keys_.data() + slot * key_len_, key.data(), key_len_) == 0)
        return slot_rids_[slot];
    for (std::int32_t e = overflow_head_[slot]; e >= 0; e = pool_next_[e]) {
        if (probes) ++*probes;
        if (std::memcmp(pool_keys_.data() + static_cast<std::size_t>(e) * key_len_,
                        key.data(), key_len_) == 0)
            return pool_rids_[e];
    }
    return std::nullopt;
}

std::optional<Rid> HashIndex::lookup(std::span<const std::uint8_t> key,
                                     std::size_t* probes) const {
    if (key.size() != key_len_)
        throw ConfigError("lookup key length " + std::to_string(key.size()) +
                          " != index key_len " + std::to_string(key_len_));
    return lookup_in_slot(slot_of(key), key, probes);
}

HashIndex build_hash_index(const KeyRidList& pairs, std::size_t num_slots,
                           std::uint64_t seed) {
    return HashIndex::build(pairs, num_slots, seed);
}

LookupResults batch_lookup_hash(const HashIndex& index, const KeyList& keys,
                                std::uint64_t cache_capacity) {
    if (keys.size() != 0 && keys.key_len != index.key_len())
        throw ConfigError("batch lookup key length mismatch");

    // Partition the hash array into runs of L contiguous slots, L chosen so
    // one partition occupies at most half the cache.
    const std::size_t slot_bytes = index.key_len() + sizeof(Rid);
    const std::size_t slots_per_part = std::max<std::size_t>(
        1, static_cast<std::size_t>(cache_capacity / 2 / slot_bytes));
    const std::size_t num_parts =
        (index.num_slots() + slots_per_part - 1) / slots_per_part;

    // Pass 1 (distribute): hash every key in one scan; the hash value is the
    // permutation vector selecting the partition run.
    std::vector<std::uint64_t> hashes(keys.size());
    std::vector<std::uint32_t> tag(keys.size());
    std::vector<std::size_t> run_sizes(num_parts, 0);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        hashes[i] = index.hash(keys.key(i));
        const std::size_t slot = static_cast<std::size_t>(hashes[i] % index.num_slots());
        tag[i] = static_cast<std::uint32_t>(slot / slots_per_part);
        ++run_sizes[tag[i]];
    }
    std::vector<std::vector<std::uint32_t>> runs(num_parts);
    for (std::size_t p = 0; p < num_parts; ++p) runs[p].reserve(run_sizes[p]);
    for (std::size_t i = 0; i < keys.size(); ++i)
        runs[tag[i]].push_back(static_cast<std::uint32_t>(i));

    // Pass 2 (probe): resolve all keys of one partition before the next.
    std::vector<std::vector<std::optional<Rid>>> run_results(num_parts);
    for (std::size_t p = 0; p < num_parts; ++p) {
        run_results[p].reserve(runs[p].size());
        for (const std::uint32_t i : runs[p]) {
            const std::size_t slot =
                static_cast<std::size_t>(hashes[i] % index.num_slots());
            run_results[p].push_back(index.lookup_in_slot(slot, keys.key(i), nullptr));
        }
    }

    // Pass 3 (gather).
    LookupResults out(keys.size());
    std::vector<std::size_t> cursors(num_parts, 0);
    for (std::size_t i = 0; i < keys.size(); ++i)
        out[i] = run_results[tag[i]][cursors[tag[i]]++];
    return out;
}

} // namespace dpg
