#pragma once

#include <random>
#include <string>
#include <vector>

#include "dpg/records.hpp"

namespace testutil {

/// Build a file whose records carry single-byte keys (key_len 1) followed by
/// a payload byte identifying the record position.
inline dpg::RecordFile file_with_keys(const std::string& keys,
                                      std::size_t record_size = 8) {
    dpg::RecordFile file(keys.size(), record_size, 1);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        auto rec = file.record(static_cast<dpg::Rid>(i));
        rec[0] = static_cast<std::uint8_t>(keys[i]);
        for (std::size_t b = 1; b < record_size; ++b)
            rec[b] = static_cast<std::uint8_t>(i * 31 + b);
    }
    return file;
}

inline std::string keys_of(const dpg::RecordFile& file) {
    std::string keys;
    for (std::size_t i = 0; i < file.size(); ++i)
        keys.push_back(static_cast<char>(file.key(static_cast<dpg::Rid>(i))[0]));
    return keys;
}

/// The 12-record, 3-run worked instance: the first input run holds keys
/// i,l,f,c; retrieving in sorted-key order touches runs 1,1,0,2 first and
/// the first rid run comes out as 3,2,0,1.
inline dpg::RecordFile worked_example_file() { return file_with_keys("ilfceagbdhjk"); }

inline dpg::RidSequence worked_example_sorted_rids() {
    return {5, 7, 3, 8, 4, 2, 6, 9, 0, 10, 11, 1};
}

/// Test-local randomness, independent of the library's generator.
inline std::mt19937_64& rng() {
    static std::mt19937_64 engine(20240909);
    return engine;
}

inline dpg::RecordFile random_file(std::size_t n, std::size_t record_size,
                                   std::size_t key_len) {
    dpg::RecordFile file(n, record_size, key_len);
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& b : file.bytes()) b = static_cast<std::uint8_t>(byte(rng()));
    return file;
}

inline dpg::RidSequence random_permutation(std::size_t n) {
    dpg::RidSequence rids(n);
    for (std::size_t i = 0; i < n; ++i) rids[i] = static_cast<dpg::Rid>(i);
    std::shuffle(rids.begin(), rids.end(), rng());
    return rids;
}

} // namespace testutil
