#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dpg/datagen.hpp"
#include "dpg/dpg.hpp"
#include "testutil.hpp"

using namespace dpg;

TEST_CASE("distribute partitions the worked example as the text walks it") {
    const auto layout = make_uniform_layout(12, 4);
    const auto runs = distribute(testutil::worked_example_sorted_rids(), layout);

    REQUIRE(runs.runs.size() == 3);
    CHECK(runs.runs[0] == RidSequence{3, 2, 0, 1});
    CHECK(runs.runs[1] == RidSequence{5, 7, 4, 6});
    CHECK(runs.runs[2] == RidSequence{8, 9, 10, 11});
}

TEST_CASE("distribute single-run and out-of-range cases") {
    const auto layout = make_uniform_layout(4, 4);
    const auto runs = distribute({0, 1, 2, 3}, layout);
    REQUIRE(runs.runs.size() == 1);
    CHECK(runs.runs[0] == RidSequence{0, 1, 2, 3});

    CHECK_THROWS_AS(distribute({4}, layout), RangeError);
}

TEST_CASE("distribute is a stable interval filter") {
    const auto rids = testutil::random_permutation(4096);
    const auto layout = make_uniform_layout(4096, 256);
    const auto runs = distribute(rids, layout);

    REQUIRE(runs.runs.size() == 16);
    CHECK(runs.total() == rids.size());
    for (std::size_t i = 0; i < 16; ++i) {
        // Oracle: scan the input sequence keeping only this run's interval.
        RidSequence expected;
        for (Rid r : rids)
            if (r / 256 == i) expected.push_back(r);
        CHECK(runs.runs[i] == expected);
    }
}

TEST_CASE("probe reorders each input run by its rid run") {
    const auto file = testutil::worked_example_file();
    const auto layout = make_uniform_layout(12, 4);
    const auto rid_runs = distribute(testutil::worked_example_sorted_rids(), layout);
    const auto rec_runs = probe(file, rid_runs);

    REQUIRE(rec_runs.runs.size() == 3);
    CHECK(testutil::keys_of(rec_runs.runs[0]) == "cfil");

    // Every probed record equals the naive lookup of its rid.
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < rid_runs.runs[i].size(); ++j) {
            const auto expected = file.record(rid_runs.runs[i][j]);
            const auto got = rec_runs.runs[i].record(static_cast<Rid>(j));
            CHECK(std::equal(expected.begin(), expected.end(), got.begin()));
        }
}

TEST_CASE("probe duplicates rids within a run") {
    const auto file = testutil::file_with_keys("AB");
    RidRuns rid_runs;
    rid_runs.layout = make_uniform_layout(2, 2);
    rid_runs.runs = {{1, 1}};
    const auto rec_runs = probe(file, rid_runs);
    CHECK(testutil::keys_of(rec_runs.runs[0]) == "BB");
}

TEST_CASE("gather merges the worked example back into key order") {
    const auto file = testutil::worked_example_file();
    const auto rids = testutil::worked_example_sorted_rids();
    const auto layout = make_uniform_layout(12, 4);
    const auto output = gather(rids, probe(file, distribute(rids, layout)));
    CHECK(testutil::keys_of(output) == "abcdefghijkl");
}

TEST_CASE("gather of a single run is a plain copy") {
    const auto file = testutil::file_with_keys("XYZ");
    const RidSequence rids = {0, 1, 2};
    const auto layout = make_uniform_layout(3, 3);
    CHECK(gather(rids, probe(file, distribute(rids, layout))) == file);
}

TEST_CASE("gather detects rid sequences inconsistent with the record runs") {
    const auto file = testutil::file_with_keys("ABCD");
    const auto layout = make_uniform_layout(4, 2);
    const auto rec_runs = probe(file, distribute({0, 1, 2}, layout));
    // One extra consumer of run 1 overruns its cursor.
    CHECK_THROWS_AS(gather({0, 1, 2, 3}, rec_runs), ConsistencyError);
    // Leftover records are flagged too.
    CHECK_THROWS_AS(gather({0, 1}, rec_runs), ConsistencyError);
}

TEST_CASE("dpg_retrieve equals naive_retrieve") {
    SUBCASE("worked example") {
        const auto file = testutil::worked_example_file();
        const auto rids = testutil::worked_example_sorted_rids();
        const auto layout = make_uniform_layout(12, 4);
        CHECK(testutil::keys_of(dpg_retrieve(file, rids, layout)) == "abcdefghijkl");
    }
    SUBCASE("identity permutation is the identity") {
        const auto file = testutil::random_file(100, 16, 8);
        RidSequence identity(100);
        for (std::size_t i = 0; i < 100; ++i) identity[i] = static_cast<Rid>(i);
        CHECK(dpg_retrieve(file, identity, make_uniform_layout(100, 32)) == file);
    }
    SUBCASE("large random permutation with a cache-derived layout") {
        const auto file = testutil::random_file(100'000, 64, 10);
        const auto rids = testutil::random_permutation(file.size());
        const auto layout = choose_run_length(256 * 1024, 64, 4, file.size());
        CHECK(dpg_retrieve(file, rids, layout) == naive_retrieve(file, rids));
    }
    SUBCASE("duplicates and subsets, many random instances") {
        std::uniform_int_distribution<std::size_t> size_dist(1, 400);
        std::uniform_int_distribution<int> mode(0, 2);
        for (int it = 0; it < 40; ++it) {
            const std::size_t n = size_dist(testutil::rng());
            const auto file = testutil::random_file(n, 12, 4);
            RidSequence rids;
            if (mode(testutil::rng()) == 0) {
                rids = testutil::random_permutation(n);
            } else {
                std::uniform_int_distribution<std::size_t> len(0, 2 * n);
                std::uniform_int_distribution<Rid> pick(0, static_cast<Rid>(n - 1));
                rids.resize(len(testutil::rng()));
                for (auto& r : rids) r = pick(testutil::rng());
            }
            std::uniform_int_distribution<std::size_t> run_len(1, n);
            const auto layout = make_uniform_layout(n, run_len(testutil::rng()));
            CHECK(dpg_retrieve(file, rids, layout) == naive_retrieve(file, rids));
        }
    }
}

TEST_CASE("record conservation: probed runs hold exactly the addressed records") {
    const auto file = testutil::random_file(64, 8, 4);
    RidSequence rids = {5, 5, 63, 0, 17, 5};
    const auto layout = make_uniform_layout(64, 16);
    const auto rec_runs = probe(file, distribute(rids, layout));

    std::multiset<std::string> expected, got;
    for (Rid r : rids) {
        const auto rec = file.record(r);
        expected.emplace(rec.begin(), rec.end());
    }
    for (const auto& run : rec_runs.runs)
        for (std::size_t j = 0; j < run.size(); ++j) {
            const auto rec = run.record(static_cast<Rid>(j));
            got.emplace(rec.begin(), rec.end());
        }
    CHECK(expected == got);
}

TEST_CASE("skew_partition balances uniform rid traffic") {
    const std::size_t m = 100'000;
    const auto rids = gen_rid_sequence(m, m, KeyDistribution::uniform(), 11);
    const auto layout = skew_partition(rids, 16, 4096, 22);

    std::vector<std::size_t> counts(layout.num_runs, 0);
    for (Rid r : rids) ++counts[run_of(r, layout)];
    const double bound = 4.0 * std::sqrt(static_cast<double>(m));
    for (const std::size_t c : counts)
        CHECK(std::abs(static_cast<double>(c) - m / 16.0) <= bound);
}

TEST_CASE("skew_partition collapses identical rids to one run") {
    const RidSequence rids(50, 7);
    const auto layout = skew_partition(rids, 8, 32, 3);
    CHECK(layout.num_runs == 1);
}

TEST_CASE("skew_partition tames the exponential generator where uniform intervals fail") {
    const std::size_t m = 100'000;
    const auto rids = gen_rid_sequence(m, m, KeyDistribution::exponential(), 13);

    const auto sampled = skew_partition(rids, 16, 4096, 17);
    std::vector<std::size_t> sampled_counts(sampled.num_runs, 0);
    for (Rid r : rids) ++sampled_counts[run_of(r, sampled)];
    CHECK(*std::max_element(sampled_counts.begin(), sampled_counts.end()) <=
          2 * (m / 16));

    // Contrast: uniform intervals leave most buckets empty and pile the
    // sequence into a few.
    const auto uniform = make_uniform_layout(m, m / 16);
    std::vector<std::size_t> uniform_counts(uniform.num_runs, 0);
    for (Rid r : rids) ++uniform_counts[run_of(r, uniform)];
    CHECK(*std::max_element(uniform_counts.begin(), uniform_counts.end()) >
          2 * (m / 16));

    // Both layouts still retrieve correctly.
    const auto file = testutil::random_file(m, 8, 4);
    CHECK(dpg_retrieve(file, rids, sampled) == naive_retrieve(file, rids));
}
