#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpg/records.hpp"

namespace dpg {

enum class AccessKind : std::uint8_t { kRead, kWrite };

/// One logical memory access: `length` bytes at `offset` inside a region.
struct AccessEvent {
    std::uint32_t region;
    std::uint32_t length;
    std::uint64_t offset;
    AccessKind kind;
};

/// Fully-associative LRU cache parameters. capacity must be a multiple of
/// block_size; block_size must be a power of two.
struct CacheConfig {
    std::uint64_t capacity = 64 * 1024;
    std::uint64_t block_size = 128;
};

struct RegionCounts {
    std::uint64_t accesses = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
};

struct CacheStats {
    std::uint64_t accesses = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t evictions = 0;
    std::vector<RegionCounts> by_region;

    std::uint64_t misses_for(std::uint32_t region) const {
        return region < by_region.size() ? by_region[region].misses : 0;
    }
    CacheStats& operator+=(const CacheStats& other);
};

/// A logical buffer the trace refers to. Regions are mapped to disjoint,
/// block-aligned address ranges before simulation.
struct Region {
    std::string name;
    std::uint64_t size = 0;
};

/// Address range claimed by one region in the simulated address space.
struct RegionExtent {
    std::uint64_t base = 0;
    std::uint64_t size = 0;
};

/// Recorded access trace over named regions, optionally split into phases.
class Trace {
public:
    std::uint32_t add_region(std::string name, std::uint64_t size);

    void read(std::uint32_t region, std::uint64_t offset, std::uint32_t length) {
        append(region, offset, length, AccessKind::kRead);
    }
    void write(std::uint32_t region, std::uint64_t offset, std::uint32_t length) {
        append(region, offset, length, AccessKind::kWrite);
    }

    /// Mark the start of a named phase; subsequent events belong to it.
    void begin_phase(std::string name);

    const std::vector<Region>& regions() const { return regions_; }
    const std::vector<AccessEvent>& events() const { return events_; }
    std::optional<std::uint32_t> region_id(std::string_view name) const;

    struct Phase {
        std::string name;
        std::size_t first_event = 0;
    };
    const std::vector<Phase>& phases() const { return phases_; }

    /// Text dump, one line per event: kind region offset length.
    void dump(std::ostream& out) const;

private:
    void append(std::uint32_t region, std::uint64_t offset, std::uint32_t length,
                AccessKind kind);

    std::vector<Region> regions_;
    std::vector<AccessEvent> events_;
    std::vector<Phase> phases_;
};

/// Lay regions out back to back, each starting on a block boundary.
std::vector<RegionExtent> block_aligned_extents(std::span<const Region> regions,
                                                std::uint64_t block_size);

/// Trace-driven fully-associative LRU simulation with explicit region
/// placement. An access spanning k blocks counts as k block accesses.
/// Throws ConfigError if extents overlap at block granularity.
CacheStats simulate(std::span<const AccessEvent> events, const CacheConfig& config,
                    std::span<const RegionExtent> extents, std::size_t num_regions);

/// Convenience: block-aligned automatic layout, whole trace at once.
CacheStats simulate(const Trace& trace, const CacheConfig& config);

struct PhaseStats {
    std::string name;
    CacheStats stats;
};

/// Simulate a phased trace on one cache (state carries across phases) and
/// report per-phase stats alongside the total.
struct SimulationResult {
    CacheStats total;
    std::vector<PhaseStats> phases;
};
SimulationResult simulate_phases(const Trace& trace, const CacheConfig& config);

/// A retrieval run with its access trace simulated. The output file is
/// byte-identical to the untraced operation's.
struct TracedRetrieval {
    RecordFile output;
    Trace trace;
    CacheStats stats;
    std::vector<PhaseStats> phases;

    std::uint64_t misses_for(std::string_view region_name) const;
    std::uint64_t phase_misses_for(std::string_view phase_name,
                                   std::string_view region_name) const;
};

/// Direct retrieval under the cache model: sequential rid reads, random
/// record reads, sequential output writes.
TracedRetrieval trace_naive_retrieve(const RecordFile& file, const RidSequence& rids,
                                     const CacheConfig& config);

/// DPG retrieval under the cache model, with per-phase traces: distribute
/// (sequential rid read, per-run sequential rid writes), probe (run-local
/// record reads, sequential internal writes), gather (sequential merge).
TracedRetrieval trace_dpg_retrieve(const RecordFile& file, const RidSequence& rids,
                                   const RunLayout& layout, const CacheConfig& config);

/// Stats dump as CSV: region,accesses,hits,misses.
void dump_stats_csv(std::ostream& out, const Trace& trace, const CacheStats& stats);

} // namespace dpg
