#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dpg/error.hpp"

namespace dpg {

/// Record id: dense 0-based position of a record within its file.
using Rid = std::uint32_t;

/// Ordered list of rids. Duplicates are allowed and the sequence may be
/// shorter or longer than the file it addresses.
using RidSequence = std::vector<Rid>;

/// Contiguous in-memory file of fixed-size records. The sort/join key is a
/// fixed-length byte field at a fixed offset inside each record (offset 0
/// unless stated otherwise; keys compare as unsigned bytes, lexicographic).
class RecordFile {
public:
    RecordFile() = default;
    RecordFile(std::size_t n, std::size_t record_size, std::size_t key_len,
               std::size_t key_offset = 0);

    std::size_t size() const { return n_; }
    bool empty() const { return n_ == 0; }
    std::size_t record_size() const { return record_size_; }
    std::size_t key_len() const { return key_len_; }
    std::size_t key_offset() const { return key_offset_; }

    std::span<const std::uint8_t> record(Rid r) const {
        check_rid(r);
        return {data_.data() + std::size_t{r} * record_size_, record_size_};
    }
    std::span<std::uint8_t> record(Rid r) {
        check_rid(r);
        return {data_.data() + std::size_t{r} * record_size_, record_size_};
    }
    std::span<const std::uint8_t> key(Rid r) const {
        check_rid(r);
        return {data_.data() + std::size_t{r} * record_size_ + key_offset_, key_len_};
    }

    std::span<const std::uint8_t> bytes() const { return data_; }
    std::span<std::uint8_t> bytes() { return data_; }

    void set_record(Rid r, std::span<const std::uint8_t> src);

    bool operator==(const RecordFile& other) const = default;

    /// Binary persistence: 16-byte header (magic "DPGF", u32 LE n,
    /// u32 LE record_size, u32 LE key_len) followed by the raw record bytes.
    void save(const std::string& path) const;
    static RecordFile load(const std::string& path);

private:
    void check_rid(Rid r) const {
        if (r >= n_)
            throw RangeError("rid " + std::to_string(r) + " out of range [0, " +
                             std::to_string(n_) + ")");
    }

    std::size_t n_ = 0;
    std::size_t record_size_ = 0;
    std::size_t key_len_ = 0;
    std::size_t key_offset_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Partitioning of the rid domain [0, n) into runs. Uniform mode assigns
/// rid r to run r / run_length; boundary mode uses explicit ascending cut
/// points (run i covers [boundaries[i-1], boundaries[i])).
struct RunLayout {
    std::size_t n = 0;          ///< rid domain size the layout covers
    std::size_t run_length = 0; ///< L (uniform mode; 0 in boundary mode)
    std::size_t num_runs = 1;
    std::vector<Rid> boundaries; ///< empty in uniform mode; else num_runs-1 cut points
    /// Set when no run length satisfies both cache constraints; the
    /// algorithms still run correctly, only the cache behavior degrades.
    bool constraint_violating = false;

    bool uniform() const { return boundaries.empty(); }
};

/// Uniform layout with runs of length L over [0, n).
RunLayout make_uniform_layout(std::size_t n, std::size_t run_length);

/// Boundary layout from ascending cut points over [0, n).
RunLayout make_boundary_layout(std::size_t n, std::vector<Rid> boundaries);

/// Run index of rid r under the layout. Boundary mode binary-searches the
/// cut points. Throws RangeError for rids outside [0, n).
std::size_t run_of(Rid r, const RunLayout& layout);

/// Pick the run length L for a two-pass retrieval over a file of n records.
/// Half the cache is budgeted for the resident record run, so
/// L starts from (cache_capacity/2)/record_size and is rounded down to a
/// power of two (a run then covers an aligned, power-of-two rid interval).
/// Two constraints are checked against the full capacity: the probe phase
/// needs one record run plus a two-block rid stream buffer resident, and the
/// distribute/gather phases need a two-block buffer per run. When no L
/// satisfies both, the layout maximizing the minimum slack is returned with
/// constraint_violating set.
RunLayout choose_run_length(std::uint64_t cache_capacity, std::size_t record_size,
                            std::size_t rid_size, std::size_t n,
                            std::uint64_t cache_block_size = 128);

/// Copy records of `file` into a fresh file in rid-sequence order by direct
/// random access. Correctness oracle for DPG retrieval.
RecordFile naive_retrieve(const RecordFile& file, const RidSequence& rids);

/// Persistence for rid sequences: header (magic "DPGR", u32 LE count)
/// followed by u32 LE rids.
void save_rids(const std::string& path, const RidSequence& rids);
RidSequence load_rids(const std::string& path);

} // namespace dpg
