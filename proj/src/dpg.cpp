#include "dpg/dpg.hpp"

#include <algorithm>
#include <cstring>

#include "dpg/random.hpp"

namespace dpg {

RidRuns distribute(const RidSequence& rids, const RunLayout& layout) {
    std::vector<std::size_t> counts(layout.num_runs, 0);
    for (Rid r : rids) ++counts[run_of(r, layout)];

    RidRuns out;
    out.layout = layout;
    out.runs.resize(layout.num_runs);
    for (std::size_t i = 0; i < layout.num_runs; ++i) out.runs[i].reserve(counts[i]);
    for (Rid r : rids) out.runs[run_of(r, layout)].push_back(r);
    return out;
}

RecordRuns probe(const RecordFile& file, const RidRuns& rid_runs) {
    RecordRuns out;
    out.layout = rid_runs.layout;
    out.runs.reserve(rid_runs.runs.size());
    const std::size_t rs = file.record_size();
    for (const auto& rid_run : rid_runs.runs) {
        RecordFile run(rid_run.size(), rs, file.key_len(), file.key_offset());
        for (std::size_t j = 0; j < rid_run.size(); ++j)
            std::memcpy(run.bytes().data() + j * rs, file.record(rid_run[j]).data(), rs);
        out.runs.push_back(std::move(run));
    }
    return out;
}

RecordFile gather(const RidSequence& rids, const RecordRuns& record_runs) {
    const RunLayout& layout = record_runs.layout;
    if (record_runs.runs.size() != layout.num_runs)
        throw ConsistencyError("record runs do not match their layout");

    std::size_t record_size = 0, key_len = 1, key_offset = 0;
    for (const auto& run : record_runs.runs)
        if (run.record_size() != 0) {
            record_size = run.record_size();
            key_len = run.key_len();
            key_offset = run.key_offset();
            break;
        }

    RecordFile out(rids.size(), record_size, key_len, key_offset);
    std::vector<std::size_t> cursors(layout.num_runs, 0);
    for (std::size_t i = 0; i < rids.size(); ++i) {
        const std::size_t run = run_of(rids[i], layout);
        std::size_t& cursor = cursors[run];
        if (cursor >= record_runs.runs[run].size())
            throw ConsistencyError("gather overran run " + std::to_string(run) +
                                   " at rid index " + std::to_string(i) +
                                   "; rid sequence inconsistent with record runs");
        std::memcpy(out.bytes().data() + i * record_size,
                    record_runs.runs[run].record(static_cast<Rid>(cursor)).data(),
                    record_size);
        ++cursor;
    }
    for (std::size_t run = 0; run < layout.num_runs; ++run)
        if (cursors[run] != record_runs.runs[run].size())
            throw ConsistencyError("gather left " +
                                   std::to_string(record_runs.runs[run].size() - cursors[run]) +
                                   " records unconsumed in run " + std::to_string(run));
    return out;
}

RecordFile dpg_retrieve(const RecordFile& file, const RidSequence& rids,
                        const RunLayout& layout) {
    return gather(rids, probe(file, distribute(rids, layout)));
}

RunLayout skew_partition(const RidSequence& rids, std::size_t num_runs,
                         std::size_t sample_size, std::uint64_t seed) {
    if (rids.empty()) throw ConfigError("cannot partition an empty rid sequence");
    if (num_runs < 1) throw ConfigError("num_runs must be >= 1");
    if (sample_size < num_runs)
        throw ConfigError("sample_size must be >= num_runs");

    SplitMix64 rng(seed);
    std::vector<Rid> sample(sample_size);
    for (std::size_t i = 0; i < sample_size; ++i)
        sample[i] = rids[rng.next_below(rids.size())];
    std::sort(sample.begin(), sample.end());

    const Rid domain = *std::max_element(rids.begin(), rids.end()) + 1;
    std::vector<Rid> boundaries;
    boundaries.reserve(num_runs - 1);
    for (std::size_t i = 1; i < num_runs; ++i) {
        const Rid cut = sample[i * sample_size / num_runs];
        // Collapse duplicate quantiles, cuts at the domain edges, and cuts
        // with no sampled mass below them (all-identical rids end up as a
        // single run).
        if (cut > 0 && cut < domain && cut > sample.front() &&
            (boundaries.empty() || cut > boundaries.back()))
            boundaries.push_back(cut);
    }
    return make_boundary_layout(domain, std::move(boundaries));
}

} // namespace dpg
