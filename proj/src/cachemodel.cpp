#include "dpg/cachemodel.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <list>
#include <ostream>
#include <unordered_map>

namespace dpg {

CacheStats& CacheStats::operator+=(const CacheStats& other) {
    accesses += other.accesses;
    hits += other.hits;
    misses += other.misses;
    evictions += other.evictions;
    if (by_region.size() < other.by_region.size()) by_region.resize(other.by_region.size());
    for (std::size_t i = 0; i < other.by_region.size(); ++i) {
        by_region[i].accesses += other.by_region[i].accesses;
        by_region[i].hits += other.by_region[i].hits;
        by_region[i].misses += other.by_region[i].misses;
    }
    return *this;
}

std::uint32_t Trace::add_region(std::string name, std::uint64_t size) {
    regions_.push_back({std::move(name), size});
    return static_cast<std::uint32_t>(regions_.size() - 1);
}

void Trace::begin_phase(std::string name) {
    phases_.push_back({std::move(name), events_.size()});
}

std::optional<std::uint32_t> Trace::region_id(std::string_view name) const {
    for (std::size_t i = 0; i < regions_.size(); ++i)
        if (regions_[i].name == name) return static_cast<std::uint32_t>(i);
    return std::nullopt;
}

void Trace::append(std::uint32_t region, std::uint64_t offset, std::uint32_t length,
                   AccessKind kind) {
    if (region >= regions_.size())
        throw ConfigError("trace event names unknown region " + std::to_string(region));
    if (offset + length > regions_[region].size)
        throw ConfigError("trace event [" + std::to_string(offset) + ", " +
                          std::to_string(offset + length) + ") exceeds region '" +
                          regions_[region].name + "' of size " +
                          std::to_string(regions_[region].size));
    events_.push_back({region, length, offset, kind});
}

void Trace::dump(std::ostream& out) const {
    for (const auto& e : events_)
        out << (e.kind == AccessKind::kRead ? 'R' : 'W') << ' ' << e.region << ' '
            << e.offset << ' ' << e.length << '\n';
}

std::vector<RegionExtent> block_aligned_extents(std::span<const Region> regions,
                                                std::uint64_t block_size) {
    std::vector<RegionExtent> extents;
    extents.reserve(regions.size());
    std::uint64_t base = 0;
    for (const auto& region : regions) {
        extents.push_back({base, region.size});
        const std::uint64_t blocks = (region.size + block_size - 1) / block_size;
        base += (blocks + 1) * block_size; // one guard block between regions
    }
    return extents;
}

namespace {

void validate_config(const CacheConfig& config) {
    if (config.block_size == 0 || !std::has_single_bit(config.block_size))
        throw ConfigError("cache block_size must be a power of two");
    if (config.capacity == 0 || config.capacity % config.block_size != 0)
        throw ConfigError("cache capacity must be a positive multiple of block_size");
}

void validate_extents(std::span<const RegionExtent> extents, std::uint64_t block_size) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> block_ranges;
    block_ranges.reserve(extents.size());
    for (const auto& e : extents) {
        if (e.size == 0) continue;
        block_ranges.emplace_back(e.base / block_size, (e.base + e.size - 1) / block_size);
    }
    std::sort(block_ranges.begin(), block_ranges.end());
    for (std::size_t i = 1; i < block_ranges.size(); ++i)
        if (block_ranges[i].first <= block_ranges[i - 1].second)
            throw ConfigError("region extents overlap at block granularity");
}

/// Fully-associative LRU over block addresses.
class LruCache {
public:
    explicit LruCache(std::uint64_t num_blocks) : capacity_(num_blocks) {}

    /// Returns true on hit. On miss, inserts the block, evicting the least
    /// recently used one if full.
    bool touch(std::uint64_t block, std::uint64_t* evictions) {
        const auto it = index_.find(block);
        if (it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return true;
        }
        if (index_.size() == capacity_) {
            index_.erase(lru_.back());
            lru_.pop_back();
            ++*evictions;
        }
        lru_.push_front(block);
        index_[block] = lru_.begin();
        return false;
    }

private:
    std::uint64_t capacity_;
    std::list<std::uint64_t> lru_;
    std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> index_;
};

class Simulator {
public:
    Simulator(const CacheConfig& config, std::vector<RegionExtent> extents,
              std::size_t num_regions)
        : block_size_(config.block_size),
          cache_(config.capacity / config.block_size),
          extents_(std::move(extents)),
          num_regions_(num_regions) {
        validate_config(config);
        validate_extents(extents_, block_size_);
    }

    CacheStats run(std::span<const AccessEvent> events) {
        CacheStats stats;
        stats.by_region.resize(num_regions_);
        for (const auto& e : events) {
            if (e.region >= extents_.size())
                throw ConfigError("event region " + std::to_string(e.region) +
                                  " has no extent");
            if (e.length == 0) continue;
            const std::uint64_t addr = extents_[e.region].base + e.offset;
            const std::uint64_t first = addr / block_size_;
            const std::uint64_t last = (addr + e.length - 1) / block_size_;
            for (std::uint64_t block = first; block <= last; ++block) {
                ++stats.accesses;
                ++stats.by_region[e.region].accesses;
                if (cache_.touch(block, &stats.evictions)) {
                    ++stats.hits;
                    ++stats.by_region[e.region].hits;
                } else {
                    ++stats.misses;
                    ++stats.by_region[e.region].misses;
                }
            }
        }
        return stats;
    }

private:
    std::uint64_t block_size_;
    LruCache cache_;
    std::vector<RegionExtent> extents_;
    std::size_t num_regions_;
};

} // namespace

CacheStats simulate(std::span<const AccessEvent> events, const CacheConfig& config,
                    std::span<const RegionExtent> extents, std::size_t num_regions) {
    Simulator sim(config, {extents.begin(), extents.end()}, num_regions);
    return sim.run(events);
}

CacheStats simulate(const Trace& trace, const CacheConfig& config) {
    const auto extents = block_aligned_extents(trace.regions(), config.block_size);
    return simulate(trace.events(), config, extents, trace.regions().size());
}

SimulationResult simulate_phases(const Trace& trace, const CacheConfig& config) {
    SimulationResult result;
    result.total.by_region.resize(trace.regions().size());
    Simulator sim(config, block_aligned_extents(trace.regions(), config.block_size),
                  trace.regions().size());
    const auto& events = trace.events();
    const auto& phases = trace.phases();
    if (phases.empty()) {
        result.total = sim.run(events);
        return result;
    }
    for (std::size_t p = 0; p < phases.size(); ++p) {
        const std::size_t first = phases[p].first_event;
        const std::size_t last = p + 1 < phases.size() ? phases[p + 1].first_event
                                                       : events.size();
        CacheStats stats = sim.run(std::span(events).subspan(first, last - first));
        result.total += stats;
        result.phases.push_back({phases[p].name, std::move(stats)});
    }
    return result;
}

std::uint64_t TracedRetrieval::misses_for(std::string_view region_name) const {
    const auto id = trace.region_id(region_name);
    return id ? stats.misses_for(*id) : 0;
}

std::uint64_t TracedRetrieval::phase_misses_for(std::string_view phase_name,
                                                std::string_view region_name) const {
    const auto id = trace.region_id(region_name);
    if (!id) return 0;
    for (const auto& phase : phases)
        if (phase.name == phase_name) return phase.stats.misses_for(*id);
    return 0;
}

namespace {

constexpr std::uint32_t kRidBytes = sizeof(Rid);

} // namespace

TracedRetrieval trace_naive_retrieve(const RecordFile& file, const RidSequence& rids,
                                     const CacheConfig& config) {
    TracedRetrieval result;
    const std::size_t rs = file.record_size();
    const auto rid_region = result.trace.add_region("rids", rids.size() * kRidBytes);
    const auto input_region = result.trace.add_region("input", file.size() * rs);
    const auto output_region = result.trace.add_region("output", rids.size() * rs);

    RecordFile out(rids.size(), rs, file.key_len(), file.key_offset());
    result.trace.begin_phase("retrieve");
    for (std::size_t i = 0; i < rids.size(); ++i) {
        result.trace.read(rid_region, i * kRidBytes, kRidBytes);
        const Rid r = rids[i];
        result.trace.read(input_region, std::uint64_t{r} * rs,
                          static_cast<std::uint32_t>(rs));
        std::memcpy(out.bytes().data() + i * rs, file.record(r).data(), rs);
        result.trace.write(output_region, i * rs, static_cast<std::uint32_t>(rs));
    }
    auto sim = simulate_phases(result.trace, config);
    result.output = std::move(out);
    result.stats = std::move(sim.total);
    result.phases = std::move(sim.phases);
    return result;
}

TracedRetrieval trace_dpg_retrieve(const RecordFile& file, const RidSequence& rids,
                                   const RunLayout& layout, const CacheConfig& config) {
    TracedRetrieval result;
    Trace& trace = result.trace;
    const std::size_t rs = file.record_size();
    const std::size_t num_runs = layout.num_runs;

    // Phase I counts size the per-run regions before any event is emitted.
    std::vector<std::size_t> counts(num_runs, 0);
    for (Rid r : rids) ++counts[run_of(r, layout)];

    const auto rid_region = trace.add_region("rids", rids.size() * kRidBytes);
    const auto input_region = trace.add_region("input", file.size() * rs);
    const auto output_region = trace.add_region("output", rids.size() * rs);
    std::vector<std::uint32_t> rid_run_regions(num_runs), rec_run_regions(num_runs);
    for (std::size_t i = 0; i < num_runs; ++i) {
        rid_run_regions[i] =
            trace.add_region("rid_run/" + std::to_string(i), counts[i] * kRidBytes);
        rec_run_regions[i] =
            trace.add_region("rec_run/" + std::to_string(i), counts[i] * rs);
    }

    // Phase I: distribute rids into runs.
    trace.begin_phase("distribute");
    std::vector<std::vector<Rid>> rid_runs(num_runs);
    for (std::size_t i = 0; i < num_runs; ++i) rid_runs[i].reserve(counts[i]);
    for (std::size_t i = 0; i < rids.size(); ++i) {
        trace.read(rid_region, i * kRidBytes, kRidBytes);
        const std::size_t run = run_of(rids[i], layout);
        trace.write(rid_run_regions[run], rid_runs[run].size() * kRidBytes, kRidBytes);
        rid_runs[run].push_back(rids[i]);
    }

    // Phase II: probe each input run, filling the internal runs.
    trace.begin_phase("probe");
    std::vector<std::vector<std::uint8_t>> rec_runs(num_runs);
    for (std::size_t run = 0; run < num_runs; ++run) {
        rec_runs[run].resize(counts[run] * rs);
        for (std::size_t j = 0; j < rid_runs[run].size(); ++j) {
            trace.read(rid_run_regions[run], j * kRidBytes, kRidBytes);
            const Rid r = rid_runs[run][j];
            trace.read(input_region, std::uint64_t{r} * rs,
                       static_cast<std::uint32_t>(rs));
            std::memcpy(rec_runs[run].data() + j * rs, file.record(r).data(), rs);
            trace.write(rec_run_regions[run], j * rs, static_cast<std::uint32_t>(rs));
        }
    }

    // Phase III: gather internal runs back into rid order.
    trace.begin_phase("gather");
    RecordFile out(rids.size(), rs, file.key_len(), file.key_offset());
    std::vector<std::size_t> cursors(num_runs, 0);
    for (std::size_t i = 0; i < rids.size(); ++i) {
        trace.read(rid_region, i * kRidBytes, kRidBytes);
        const std::size_t run = run_of(rids[i], layout);
        const std::size_t cursor = cursors[run]++;
        trace.read(rec_run_regions[run], cursor * rs, static_cast<std::uint32_t>(rs));
        std::memcpy(out.bytes().data() + i * rs, rec_runs[run].data() + cursor * rs, rs);
        trace.write(output_region, i * rs, static_cast<std::uint32_t>(rs));
    }

    auto sim = simulate_phases(trace, config);
    result.output = std::move(out);
    result.stats = std::move(sim.total);
    result.phases = std::move(sim.phases);
    return result;
}

void dump_stats_csv(std::ostream& out, const Trace& trace, const CacheStats& stats) {
    out << "region,accesses,hits,misses\n";
    for (std::size_t i = 0; i < trace.regions().size(); ++i) {
        const auto& counts =
            i < stats.by_region.size() ? stats.by_region[i] : RegionCounts{};
        out << trace.regions()[i].name << ',' << counts.accesses << ',' << counts.hits
            << ',' << counts.misses << '\n';
    }
}

} // namespace dpg
