#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpg/cachemodel.hpp"
#include "dpg/datagen.hpp"
#include "dpg/records.hpp"

namespace dpg {

enum class Operation { kRetrieve, kSort, kJoin, kIndexLookup };

/// Data generated for one experiment cell.
struct DataSpec {
    std::size_t n = 1 << 15;      ///< records (R side for joins; key count for lookups)
    std::size_t n_f = 0;          ///< joins: |F| (0 = same as n)
    std::size_t record_size = 32;
    std::size_t record_size_f = 0; ///< 0 = same as record_size
    std::size_t key_len = 10;
    KeyDistribution distribution;
    bool duplicate_keys = true; ///< joins: allow duplicate foreign keys in R
    std::uint64_t seed = 1;
};

struct ExperimentConfig {
    Operation operation = Operation::kRetrieve;
    std::string method; ///< see methods_for(); validated against the operation
    DataSpec data;
    CacheConfig cache;
    bool trace = false; ///< retrieve only: simulate the access trace
    int repetitions = 1;
    bool force = false; ///< run uniform-only methods on skewed data anyway
    std::string input_path; ///< retrieve/sort: use this record file instead of generating
};

/// One CSV row. Every benchmark row is oracle-verified; a mismatch aborts
/// the experiment instead of producing a row.
struct ResultRow {
    std::string operation;
    std::string method;
    std::size_t record_size = 0;
    std::size_t n = 0;
    std::string distribution;
    int rep = 0;
    std::uint64_t elapsed_ns = 0;
    std::uint64_t misses = 0; ///< simulated total misses; 0 when tracing is off
    bool oracle_ok = false;
};

/// Valid method selectors for an operation.
std::vector<std::string> methods_for(Operation op);

/// Methods that assume roughly uniform key values (prefix bucketing, radix
/// clustering) are refused for declared-skewed inputs unless forced.
bool method_valid_for_distribution(const std::string& method,
                                   const KeyDistribution& distribution);

/// Run one experiment cell: generate (or load) the data, run the operation
/// repetitions times, verify each output against the operation's oracle,
/// and report timing plus simulated misses. Oracle mismatch throws.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

/// CSV emission; schema: operation,method,record_size,n,distribution,rep,
/// elapsed_ns,misses,oracle_ok.
void write_csv_header(std::ostream& out);
void write_csv_rows(std::ostream& out, const std::vector<ResultRow>& rows);

/// Cross-oracle property battery over randomized desk-scale instances:
/// DPG vs naive retrieval, sort backend equivalence, join output multiset
/// equality, and batch vs individual index lookup. Logs one line per
/// property; on failure names the case and the seed that reproduces it.
/// Returns the number of failed properties (0 = pass).
int verify_suite(std::uint64_t seed, std::ostream& log);

/// Sorted-row canonical form, byte-lexicographic: two files hold the same
/// row multiset iff their canonical forms are equal.
std::vector<std::uint8_t> canonical_rows(const RecordFile& file);

} // namespace dpg
