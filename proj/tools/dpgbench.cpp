// Benchmark and experiment driver for the DPG retrieval/sort/join engine.
//
// Subcommands: gen, retrieve, sort, join, lookup, verify, bench. Every
// benchmark row is verified against an oracle before it is reported; rows
// land in a CSV with the schema
//   operation,method,record_size,n,distribution,rep,elapsed_ns,misses,oracle_ok

#include <atomic>
#include <fstream>
#include <map>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "dpg/harness.hpp"

namespace {

struct CommonOpts {
    std::size_t n = 1 << 15;
    std::size_t record_size = 32;
    std::size_t key_len = 10;
    std::string dist = "uniform";
    std::uint64_t seed = 1;
    std::uint64_t cache_bytes = 64 * 1024;
    std::uint64_t block_bytes = 128;
    int reps = 1;
    bool trace = false;
    bool force = false;
    std::string out;
};

void add_data_opts(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--n", opts.n, "record count");
    cmd->add_option("--record-size", opts.record_size, "bytes per record");
    cmd->add_option("--key-len", opts.key_len, "key bytes per record");
    cmd->add_option("--dist", opts.dist, "key distribution: uniform|exp")
        ->check(CLI::IsMember({"uniform", "exp"}));
    cmd->add_option("--seed", opts.seed, "generator seed");
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    add_data_opts(cmd, opts);
    cmd->add_option("--cache-bytes", opts.cache_bytes, "model cache capacity");
    cmd->add_option("--block-bytes", opts.block_bytes, "model cache block size");
    cmd->add_option("--reps", opts.reps, "repetitions per cell");
    cmd->add_option("--out", opts.out, "CSV output path (default stdout)");
    cmd->add_flag("--force", opts.force,
                  "run uniform-only methods on skewed data anyway");
}

dpg::KeyDistribution dist_of(const CommonOpts& opts) {
    return opts.dist == "exp" ? dpg::KeyDistribution::exponential()
                              : dpg::KeyDistribution::uniform();
}

dpg::ExperimentConfig config_of(const CommonOpts& opts, dpg::Operation op,
                                const std::string& method) {
    dpg::ExperimentConfig config;
    config.operation = op;
    config.method = method;
    config.data.n = opts.n;
    config.data.record_size = opts.record_size;
    config.data.key_len = opts.key_len;
    config.data.distribution = dist_of(opts);
    config.data.seed = opts.seed;
    config.cache = {opts.cache_bytes, opts.block_bytes};
    config.trace = opts.trace;
    config.repetitions = opts.reps;
    config.force = opts.force;
    return config;
}

int emit(const CommonOpts& opts, const std::vector<dpg::ResultRow>& rows) {
    if (opts.out.empty()) {
        dpg::write_csv_header(std::cout);
        dpg::write_csv_rows(std::cout, rows);
        return 0;
    }
    std::ofstream file(opts.out, std::ios::trunc);
    if (!file) {
        std::cerr << "error: cannot open " << opts.out << " for writing\n";
        return 1;
    }
    dpg::write_csv_header(file);
    dpg::write_csv_rows(file, rows);
    std::cerr << "wrote " << rows.size() << " rows to " << opts.out << "\n";
    return 0;
}

/// Run independent experiment cells, optionally on several threads, and
/// concatenate their rows in cell order.
std::vector<dpg::ResultRow> run_cells(const std::vector<dpg::ExperimentConfig>& cells,
                                      unsigned parallel) {
    std::vector<std::vector<dpg::ResultRow>> per_cell(cells.size());
    if (parallel <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            per_cell[i] = dpg::run_experiment(cells[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::string first_error;
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) return;
                try {
                    per_cell[i] = dpg::run_experiment(cells[i]);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (first_error.empty()) first_error = e.what();
                }
            }
        };
        std::vector<std::thread> threads;
        for (unsigned t = 0; t < parallel; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
        if (!first_error.empty()) throw std::runtime_error(first_error);
    }
    std::vector<dpg::ResultRow> rows;
    for (auto& cell_rows : per_cell)
        rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
    return rows;
}

int cmd_gen(const CommonOpts& opts, const std::string& out_path) {
    const auto file = dpg::gen_record_file(opts.n, opts.record_size, opts.key_len,
                                           dist_of(opts), opts.seed);
    file.save(out_path);
    dpg::write_manifest(out_path + ".manifest", opts.n, opts.record_size, opts.key_len,
                        dist_of(opts), opts.seed);
    std::cerr << "wrote " << file.size() << " records (" << file.record_size()
              << " B each) to " << out_path << "\n";
    return 0;
}

int cmd_bench(const CommonOpts& opts, const std::string& suite, unsigned parallel) {
    std::vector<dpg::ExperimentConfig> cells;
    const bool all = suite == "all";
    if (all || suite == "retrieve") {
        // Record-size sweep at data = 16x cache, DPG vs naive, traces on.
        for (const std::size_t record_size : {32, 64, 128, 256, 512})
            for (const char* method : {"naive", "dpg"}) {
                auto config = config_of(opts, dpg::Operation::kRetrieve, method);
                config.data.record_size = record_size;
                config.data.n =
                    static_cast<std::size_t>(16 * opts.cache_bytes / record_size);
                config.trace = true;
                cells.push_back(std::move(config));
            }
    }
    if (all || suite == "sort") {
        for (const std::size_t record_size : {32, 64})
            for (const auto& method : dpg::methods_for(dpg::Operation::kSort)) {
                auto config = config_of(opts, dpg::Operation::kSort, method);
                config.data.record_size = record_size;
                config.data.n =
                    static_cast<std::size_t>(16 * opts.cache_bytes / record_size);
                cells.push_back(std::move(config));
            }
    }
    if (all || suite == "join") {
        // The six-way comparison on uniform keys, with and without duplicate
        // foreign keys.
        const char* six[] = {"merge-alpha-naive", "merge-superscalar-naive",
                             "merge-superscalar-dpg", "dpg-sort", "dpg-move", "radix"};
        for (const bool duplicates : {false, true})
            for (const char* method : six) {
                auto config = config_of(opts, dpg::Operation::kJoin, method);
                config.data.key_len = 8; // radix needs integer-representable keys
                config.data.n = std::min<std::size_t>(opts.n, 10'000);
                config.data.duplicate_keys = duplicates;
                cells.push_back(std::move(config));
            }
        // Skewed keys: only the two methods that stay balanced under skew.
        for (const char* method : {"merge-alpha-naive", "dpg-sort"}) {
            auto config = config_of(opts, dpg::Operation::kJoin, method);
            config.data.key_len = 8;
            config.data.n = std::min<std::size_t>(opts.n, 10'000);
            config.data.distribution = dpg::KeyDistribution::exponential();
            cells.push_back(std::move(config));
        }
    }
    if (all || suite == "lookup") {
        for (const auto& method : dpg::methods_for(dpg::Operation::kIndexLookup)) {
            auto config = config_of(opts, dpg::Operation::kIndexLookup, method);
            config.data.key_len = 8;
            cells.push_back(std::move(config));
        }
    }

    const auto rows = run_cells(cells, parallel);

    // Headline contrast: simulated DPG/naive miss ratio per record size.
    if (all || suite == "retrieve") {
        std::map<std::size_t, std::pair<double, double>> misses; // size -> naive, dpg
        for (const auto& row : rows) {
            if (row.operation != "retrieve" || row.rep != 0) continue;
            if (row.method == "naive") misses[row.record_size].first = double(row.misses);
            if (row.method == "dpg") misses[row.record_size].second = double(row.misses);
        }
        for (const auto& [record_size, pair] : misses)
            if (pair.first > 0)
                std::cerr << "retrieve record_size=" << record_size
                          << ": dpg/naive simulated miss ratio = "
                          << pair.second / pair.first << "\n";
    }
    return emit(opts, rows);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DPG record retrieval, sorting, and join benchmark"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* gen = app.add_subcommand("gen", "generate a record file + manifest");
    std::string gen_out;
    add_data_opts(gen, opts);
    gen->add_option("--out", gen_out, "output record file path")->required();

    auto* retrieve = app.add_subcommand("retrieve", "record retrieval experiment");
    std::string retrieve_method = "dpg";
    std::string retrieve_in;
    add_common(retrieve, opts);
    retrieve->add_option("--method", retrieve_method, "naive|dpg|dpg-skew");
    retrieve->add_option("--in", retrieve_in, "pregenerated record file");
    retrieve->add_flag("--trace", opts.trace, "simulate the access trace");

    auto* sort = app.add_subcommand("sort", "three-phase sort experiment");
    std::string sort_method = "alpha-dpg";
    std::string sort_in;
    add_common(sort, opts);
    sort->add_option("--method", sort_method,
                     "<alpha|superscalar|countbucket>-<naive|dpg>");
    sort->add_option("--in", sort_in, "pregenerated record file");

    auto* join = app.add_subcommand("join", "foreign-key join experiment");
    std::string join_method = "dpg-move";
    std::size_t join_nf = 0;
    bool join_no_dup = false;
    add_common(join, opts);
    join->add_option("--method", join_method,
                     "nested-loop|dpg-move|dpg-sort|merge-<backend>-<retrieval>|radix");
    join->add_option("--nf", join_nf, "|F| (defaults to --n)");
    join->add_flag("--no-dup", join_no_dup, "unique foreign keys in R");

    auto* lookup = app.add_subcommand("lookup", "index batch-lookup experiment");
    std::string lookup_method = "bptree-batch";
    add_common(lookup, opts);
    lookup->add_option("--method", lookup_method,
                       "bptree-individual|bptree-batch|hash-individual|hash-batch");

    auto* verify = app.add_subcommand("verify", "cross-oracle property battery");
    std::uint64_t verify_seed = 1;
    verify->add_option("--seed", verify_seed, "battery seed");

    auto* bench = app.add_subcommand("bench", "paper-style experiment matrix");
    std::string bench_suite = "all";
    unsigned bench_parallel = 1;
    add_common(bench, opts);
    bench->add_option("--suite", bench_suite, "retrieve|sort|join|lookup|all")
        ->check(CLI::IsMember({"retrieve", "sort", "join", "lookup", "all"}));
    bench->add_option("--parallel", bench_parallel, "worker threads for bench cells");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(opts, gen_out);
        if (verify->parsed()) {
            const int failures = dpg::verify_suite(verify_seed, std::cout);
            std::cout << (failures == 0 ? "verify: PASS\n" : "verify: FAIL\n");
            return failures == 0 ? 0 : 1;
        }
        if (bench->parsed()) return cmd_bench(opts, bench_suite, bench_parallel);

        dpg::ExperimentConfig config;
        if (retrieve->parsed()) {
            config = config_of(opts, dpg::Operation::kRetrieve, retrieve_method);
            config.input_path = retrieve_in;
        } else if (sort->parsed()) {
            config = config_of(opts, dpg::Operation::kSort, sort_method);
            config.input_path = sort_in;
        } else if (join->parsed()) {
            config = config_of(opts, dpg::Operation::kJoin, join_method);
            config.data.n_f = join_nf;
            config.data.duplicate_keys = !join_no_dup;
        } else if (lookup->parsed()) {
            config = config_of(opts, dpg::Operation::kIndexLookup, lookup_method);
        }
        return emit(opts, dpg::run_experiment(config));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
