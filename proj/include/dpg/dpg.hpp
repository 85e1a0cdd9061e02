#pragma once

#include <cstdint>
#include <vector>

#include "dpg/records.hpp"

namespace dpg {

/// Rids partitioned into per-run lists (Phase I output). Within each run the
/// rids keep the relative order they had in the source sequence.
struct RidRuns {
    std::vector<std::vector<Rid>> runs;
    RunLayout layout;

    std::size_t total() const {
        std::size_t m = 0;
        for (const auto& run : runs) m += run.size();
        return m;
    }
};

/// Record fragments produced by probing: runs[i][j] is the record addressed
/// by RidRuns.runs[i][j].
struct RecordRuns {
    std::vector<RecordFile> runs;
    RunLayout layout;
};

/// Phase I: distribute the rid sequence into runs. Stable: a counting pass
/// pre-sizes each run, then a second pass appends in input order.
RidRuns distribute(const RidSequence& rids, const RunLayout& layout);

/// Phase II: probe each input run with its rid run, copying the addressed
/// records into the matching internal run. Within iteration i only records
/// of input run i are read.
RecordRuns probe(const RecordFile& file, const RidRuns& rid_runs);

/// Phase III: merge the internal runs back into rid-sequence order. Each
/// rid consumes the next unread record of its run; every cursor must land
/// exactly on its run length or the inputs were inconsistent.
RecordFile gather(const RidSequence& rids, const RecordRuns& record_runs);

/// Distribute-probe-gather record retrieval. Output is byte-identical to
/// naive_retrieve(file, rids) for every valid input, including duplicate
/// and non-surjective rid sequences.
RecordFile dpg_retrieve(const RecordFile& file, const RidSequence& rids,
                        const RunLayout& layout);

/// Skew-aware partitioning: sample `sample_size` rids with a seeded
/// generator, sort the sample, and cut at its quantiles so each run receives
/// roughly equal rid traffic even when the sequence is badly skewed.
/// Duplicate quantile values collapse, so the result may have fewer than
/// num_runs runs.
RunLayout skew_partition(const RidSequence& rids, std::size_t num_runs,
                         std::size_t sample_size, std::uint64_t seed);

} // namespace dpg
