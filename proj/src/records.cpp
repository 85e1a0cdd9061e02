#include "dpg/records.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace dpg {

RecordFile::RecordFile(std::size_t n, std::size_t record_size, std::size_t key_len,
                       std::size_t key_offset)
    : n_(n), record_size_(record_size), key_len_(key_len), key_offset_(key_offset) {
    if (key_len < 1 || record_size < key_len)
        throw ConfigError("record_size >= key_len >= 1 required (record_size=" +
                          std::to_string(record_size) + ", key_len=" +
                          std::to_string(key_len) + ")");
    if (key_offset + key_len > record_size)
        throw ConfigError("key field [" + std::to_string(key_offset) + ", " +
                          std::to_string(key_offset + key_len) +
                          ") exceeds record_size " + std::to_string(record_size));
    data_.resize(n * record_size);
}

void RecordFile::set_record(Rid r, std::span<const std::uint8_t> src) {
    if (src.size() != record_size_)
        throw ConfigError("record write of " + std::to_string(src.size()) +
                          " bytes into file with record_size " +
                          std::to_string(record_size_));
    std::memcpy(record(r).data(), src.data(), record_size_);
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    const std::uint8_t b[4] = {static_cast<std::uint8_t>(v),
                               static_cast<std::uint8_t>(v >> 8),
                               static_cast<std::uint8_t>(v >> 16),
                               static_cast<std::uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    std::uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

void RecordFile::save(const std::string& path) const {
    if (key_offset_ != 0)
        throw IoError("file format has no key_offset field; only offset-0 keys persist");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write("DPGF", 4);
    put_u32(out, static_cast<std::uint32_t>(n_));
    put_u32(out, static_cast<std::uint32_t>(record_size_));
    put_u32(out, static_cast<std::uint32_t>(key_len_));
    out.write(reinterpret_cast<const char*>(data_.data()),
              static_cast<std::streamsize>(data_.size()));
    if (!out) throw IoError("short write to " + path);
}

RecordFile RecordFile::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "DPGF", 4) != 0)
        throw IoError(path + ": bad magic, not a record file");
    const std::uint32_t n = get_u32(in);
    const std::uint32_t record_size = get_u32(in);
    const std::uint32_t key_len = get_u32(in);
    if (!in) throw IoError(path + ": truncated header");
    RecordFile file(n, record_size, key_len);
    in.read(reinterpret_cast<char*>(file.data_.data()),
            static_cast<std::streamsize>(file.data_.size()));
    if (in.gcount() != static_cast<std::streamsize>(file.data_.size()))
        throw IoError(path + ": truncated record data");
    return file;
}

RunLayout make_uniform_layout(std::size_t n, std::size_t run_length) {
    if (run_length == 0) throw ConfigError("run_length must be >= 1");
    RunLayout layout;
    layout.n = n;
    layout.run_length = run_length;
    layout.num_runs = n == 0 ? 1 : (n + run_length - 1) / run_length;
    return layout;
}

RunLayout make_boundary_layout(std::size_t n, std::vector<Rid> boundaries) {
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (boundaries[i] == 0 || boundaries[i] >= n)
            throw ConfigError("boundary " + std::to_string(boundaries[i]) +
                              " outside (0, " + std::to_string(n) + ")");
        if (i > 0 && boundaries[i] <= boundaries[i - 1])
            throw ConfigError("boundaries must be strictly ascending");
    }
    RunLayout layout;
    layout.n = n;
    layout.num_runs = boundaries.size() + 1;
    layout.boundaries = std::move(boundaries);
    return layout;
}

std::size_t run_of(Rid r, const RunLayout& layout) {
    if (r >= layout.n)
        throw RangeError("rid " + std::to_string(r) + " outside layout domain [0, " +
                         std::to_string(layout.n) + ")");
    if (layout.uniform()) return r / layout.run_length;
    const auto it = std::upper_bound(layout.boundaries.begin(), layout.boundaries.end(), r);
    return static_cast<std::size_t>(it - layout.boundaries.begin());
}

RunLayout choose_run_length(std::uint64_t cache_capacity, std::size_t record_size,
                            std::size_t rid_size, std::size_t n,
                            std::uint64_t cache_block_size) {
    if (n == 0) throw ConfigError("cannot lay out an empty file");
    if (record_size == 0 || rid_size == 0)
        throw ConfigError("record_size and rid_size must be positive");
    if (cache_capacity <= 2 * record_size)
        throw ConfigError("cache capacity must exceed two records");

    const auto runs_for = [n](std::size_t len) { return (n + len - 1) / len; };
    // Probe phase: one record run plus a two-block rid stream buffer in cache.
    const auto probe_fits = [&](std::size_t len) {
        return static_cast<std::uint64_t>(len) * record_size + 2 * cache_block_size <=
               cache_capacity;
    };
    // Distribute/gather phases: a two-block buffer per run in cache.
    const auto streams_fit = [&](std::size_t len) {
        return static_cast<std::uint64_t>(runs_for(len)) * 2 * cache_block_size <=
               cache_capacity;
    };

    std::size_t len = static_cast<std::size_t>(
        std::max<std::uint64_t>(1, (cache_capacity / 2) / record_size));
    len = std::bit_floor(len);

    if (!streams_fit(len)) {
        // Halving the run count doubles L; stop once the probe constraint breaks.
        std::size_t grown = len;
        while (!streams_fit(grown) && probe_fits(grown * 2)) grown *= 2;
        if (streams_fit(grown) && probe_fits(grown)) {
            len = grown;
        } else {
            // No power-of-two length satisfies both; keep the one whose worst
            // constraint is least violated and flag the layout.
            auto min_slack = [&](std::size_t l) {
                const auto probe_need =
                    static_cast<std::int64_t>(l * record_size + 2 * cache_block_size);
                const auto stream_need =
                    static_cast<std::int64_t>(runs_for(l) * 2 * cache_block_size);
                const auto cap = static_cast<std::int64_t>(cache_capacity);
                return std::min(cap - probe_need, cap - stream_need);
            };
            std::size_t best = len;
            for (std::size_t cand = len; cand <= n * 2; cand *= 2)
                if (min_slack(cand) > min_slack(best)) best = cand;
            auto layout = make_uniform_layout(n, best);
            layout.constraint_violating = true;
            return layout;
        }
    }
    auto layout = make_uniform_layout(n, len);
    layout.constraint_violating = !probe_fits(len);
    return layout;
}

RecordFile naive_retrieve(const RecordFile& file, const RidSequence& rids) {
    RecordFile out(rids.size(), file.record_size(), file.key_len(), file.key_offset());
    const std::size_t rs = file.record_size();
    for (std::size_t i = 0; i < rids.size(); ++i) {
        if (rids[i] >= file.size())
            throw RangeError("rid sequence element " + std::to_string(i) + " = " +
                             std::to_string(rids[i]) + " out of range [0, " +
                             std::to_string(file.size()) + ")");
        std::memcpy(out.bytes().data() + i * rs, file.record(rids[i]).data(), rs);
    }
    return out;
}

void save_rids(const std::string& path, const RidSequence& rids) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write("DPGR", 4);
    put_u32(out, static_cast<std::uint32_t>(rids.size()));
    for (Rid r : rids) put_u32(out, r);
    if (!out) throw IoError("short write to " + path);
}

RidSequence load_rids(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "DPGR", 4) != 0)
        throw IoError(path + ": bad magic, not a rid sequence");
    const std::uint32_t count = get_u32(in);
    if (!in) throw IoError(path + ": truncated header");
    RidSequence rids(count);
    for (std::uint32_t i = 0; i < count; ++i) rids[i] = get_u32(in);
    if (!in) throw IoError(path + ": truncated rid data");
    return rids;
}

} // namespace dpg
