#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flashhash/table.hpp"

namespace flashhash {

enum class WorkloadKind : std::uint8_t { insert_only, interleaved_query, sweep };
enum class KeyDistribution : std::uint8_t { uniform, zipf };

const char* to_string(WorkloadKind kind);
const char* to_string(KeyDistribution dist);
WorkloadKind workload_kind_from_string(const std::string& name);
KeyDistribution distribution_from_string(const std::string& name);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::insert_only;
  std::uint64_t op_count = 100000;  // inserts
  std::uint64_t query_count = 0;
  // Share of the inserts issued before the first query.
  double warmup_fraction = 0.35;
  std::uint64_t seed = 42;
  KeyDistribution distribution = KeyDistribution::uniform;
  double zipf_s = 1.0;
  // Number of distinct keys drawn from; 0 means op_count.
  std::uint64_t key_space = 0;
  // Flush after all inserts and only then issue the queries.
  bool stable = false;
  // Share of queries drawn from already inserted keys; the rest use keys that
  // were never inserted.
  double present_query_fraction = 0.9;

  void validate() const;  // throws InvalidParams
  std::uint64_t effective_key_space() const { return key_space == 0 ? op_count : key_space; }
};

// Deterministic key stream: ranks drawn uniformly or Zipf-distributed from
// [0, key_space) and scrambled by a bijective 64-bit mixer so consecutive
// ranks do not map to neighbouring hash positions.
class KeyGenerator {
 public:
  KeyGenerator(const WorkloadSpec& spec, std::uint64_t seed);

  std::uint64_t next();
  std::uint64_t next_rank();
  std::uint64_t uniform(std::uint64_t bound);  // [0, bound)
  double unit();                               // [0, 1)

  // Key of a rank; ranks >= key_space give keys never produced by next().
  static std::uint64_t key_of_rank(std::uint64_t rank);

 private:
  std::uint64_t state_;
  std::uint64_t key_space_;
  KeyDistribution dist_;
  std::vector<double> zipf_cdf_;
};

struct RunReport {
  TableConfig config;
  TableMetrics metrics;
  std::uint64_t inserts = 0;
  std::uint64_t queries = 0;
  std::uint64_t queries_found = 0;
  double query_time_us = 0;  // simulated time spent answering queries
  std::optional<std::string> error;

  double avg_query_us() const { return queries == 0 ? 0.0 : query_time_us / queries; }
};

// Table metrics columns followed by the query columns and a status column
// ("ok" or "error: <message>").
extern const char* const kRunCsvHeader;
std::string run_csv_row(const RunReport& report);

// Executes the workload against a fresh table. Table errors do not escape;
// they end the run and are recorded in RunReport::error. When `trace` is
// given the device operation trace is written to it as CSV.
RunReport run(const WorkloadSpec& spec, const TableConfig& config,
              std::ostream* trace = nullptr);

struct SweepGrid {
  std::vector<double> ram_pcts;
  std::vector<double> change_pcts;
  std::vector<Scheme> schemes;
  std::vector<std::string> profiles;

  void validate() const;  // throws InvalidGrid when a dimension is empty
};

// One run per grid cell, iterating profiles, schemes, change% and RAM% from
// outermost to innermost. `base` supplies everything the grid does not vary.
std::vector<RunReport> sweep(const SweepGrid& grid, const WorkloadSpec& spec,
                             const TableConfig& base);

// Header plus one row per report.
void write_runs_csv(std::ostream& out, const std::vector<RunReport>& reports);

struct TfidfRunOutput {
  std::string scores_csv;
  std::string metrics_csv;  // one row for the term table, one for the df table
};

// Ingests the corpus (a directory of documents, or one document per line
// when `line_per_document`), scores every (document, term) pair and reports
// device metrics for both tables. Throws ConfigError for unreadable input.
TfidfRunOutput tfidf_run(const std::string& corpus_path, bool line_per_document,
                         const TableConfig& config);

}  // namespace flashhash
