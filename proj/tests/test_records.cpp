#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "dpg/records.hpp"
#include "testutil.hpp"

using namespace dpg;

TEST_CASE("record file geometry is validated") {
    CHECK_THROWS_AS(RecordFile(4, 8, 0), ConfigError);   // key_len >= 1
    CHECK_THROWS_AS(RecordFile(4, 8, 9), ConfigError);   // record_size >= key_len
    CHECK_THROWS_AS(RecordFile(4, 8, 4, 6), ConfigError); // key field inside the record

    RecordFile file(3, 16, 10);
    CHECK(file.size() == 3);
    CHECK(file.bytes().size() == 48);
    CHECK_THROWS_AS(file.record(3), RangeError);
}

TEST_CASE("key field can sit at a nonzero offset") {
    RecordFile file(2, 12, 4, 4);
    auto rec = file.record(0);
    for (std::size_t i = 0; i < 12; ++i) rec[i] = static_cast<std::uint8_t>(i);
    const auto key = file.key(0);
    CHECK(key[0] == 4);
    CHECK(key[3] == 7);
}

TEST_CASE("run_of uniform mode") {
    const auto layout = make_uniform_layout(12, 4);
    CHECK(layout.num_runs == 3);
    CHECK(run_of(5, layout) == 1);
    CHECK(run_of(0, layout) == 0);
    CHECK(run_of(8, layout) == 2);
    CHECK_THROWS_AS(run_of(12, layout), RangeError);

    // Monotone non-decreasing over the whole domain.
    std::size_t prev = 0;
    for (Rid r = 0; r < 12; ++r) {
        const std::size_t run = run_of(r, layout);
        CHECK(run >= prev);
        prev = run;
    }
}

TEST_CASE("run_of boundary mode picks the covering interval") {
    const auto layout = make_boundary_layout(100, {10, 50, 90});
    CHECK(layout.num_runs == 4);
    CHECK(run_of(0, layout) == 0);
    CHECK(run_of(9, layout) == 0);
    CHECK(run_of(10, layout) == 1);
    CHECK(run_of(49, layout) == 1);
    CHECK(run_of(50, layout) == 2);
    CHECK(run_of(99, layout) == 3);
    CHECK_THROWS_AS(run_of(100, layout), RangeError);

    CHECK_THROWS_AS(make_boundary_layout(100, {50, 10}), ConfigError);
    CHECK_THROWS_AS(make_boundary_layout(100, {0}), ConfigError);
    CHECK_THROWS_AS(make_boundary_layout(100, {100}), ConfigError);
}

TEST_CASE("choose_run_length derives the paper geometry") {
    SUBCASE("64 KiB cache, 32 B records") {
        const auto layout = choose_run_length(64 * 1024, 32, 4, 1 << 16);
        CHECK(layout.run_length == 1024);
        CHECK(layout.num_runs == 64);
        CHECK_FALSE(layout.constraint_violating);
    }
    SUBCASE("whole file fits in half the cache") {
        const auto layout = choose_run_length(2 * 64 * 4, 64, 4, 4, 128);
        CHECK(layout.run_length == 4);
        CHECK(layout.num_runs == 1);
    }
    SUBCASE("96 B cache with 16 B blocks mirrors the 12-record example") {
        const auto layout = choose_run_length(96, 8, 4, 12, 16);
        CHECK(layout.run_length == 4);
        CHECK(layout.num_runs == 3);
        CHECK_FALSE(layout.constraint_violating);
        // Hand check: 4 records + one two-block buffer fit (32+32 <= 96)
        // and 3 two-block buffers fit exactly (96 <= 96).
    }
    SUBCASE("empty input is rejected") {
        CHECK_THROWS_AS(choose_run_length(1024, 8, 4, 0), ConfigError);
    }
    SUBCASE("impossible constraints are flagged, not fatal") {
        // 64 B cache cannot hold per-run buffers for 4096 tiny-record runs.
        const auto layout = choose_run_length(640, 16, 4, 1 << 16, 64);
        CHECK(layout.constraint_violating);
        CHECK(layout.num_runs >= 1);
    }
}

TEST_CASE("naive_retrieve permutes, duplicates, and validates") {
    const auto file = testutil::file_with_keys("ABC");
    CHECK(testutil::keys_of(naive_retrieve(file, {2, 0, 1})) == "CAB");

    const auto two = testutil::file_with_keys("AB");
    CHECK(testutil::keys_of(naive_retrieve(two, {1, 1, 0})) == "BBA");

    const auto worked = testutil::worked_example_file();
    CHECK(testutil::keys_of(naive_retrieve(worked, testutil::worked_example_sorted_rids())) ==
          "abcdefghijkl");

    CHECK_THROWS_WITH_AS(naive_retrieve(file, {0, 7, 1}) /* index 1 offends */,
                         doctest::Contains("element 1"), RangeError);

    // Identity and length laws.
    const auto big = testutil::random_file(257, 24, 10);
    RidSequence identity(big.size());
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = static_cast<Rid>(i);
    CHECK(naive_retrieve(big, identity) == big);
    CHECK(naive_retrieve(big, {}).size() == 0);
}

TEST_CASE("record file binary format round trips with a fixed header") {
    const auto file = testutil::random_file(37, 20, 10);
    const std::string path = "records_roundtrip.dpgf";
    file.save(path);

    std::ifstream in(path, std::ios::binary);
    std::vector<std::uint8_t> header(16);
    in.read(reinterpret_cast<char*>(header.data()), 16);
    CHECK(std::string(header.begin(), header.begin() + 4) == "DPGF");
    CHECK(header[4] == 37); // u32 LE n
    CHECK(header[5] == 0);
    CHECK(header[8] == 20); // u32 LE record_size
    CHECK(header[12] == 10); // u32 LE key_len
    in.close();

    CHECK(RecordFile::load(path) == file);
    std::remove(path.c_str());

    CHECK_THROWS_AS(RecordFile::load("does_not_exist.dpgf"), IoError);
}

TEST_CASE("rid sequence binary format round trips") {
    const RidSequence rids = {5, 0, 5, 999, 3};
    const std::string path = "rids_roundtrip.dpgr";
    save_rids(path, rids);

    std::ifstream in(path, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "DPGR");
    in.close();

    CHECK(load_rids(path) == rids);
    std::remove(path.c_str());
}
