#include "flashhash/workload.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "flashhash/errors.hpp"
#include "flashhash/tfidf.hpp"

namespace flashhash {

const char* to_string(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::insert_only:
      return "insert_only";
    case WorkloadKind::interleaved_query:
      return "interleaved_query";
    case WorkloadKind::sweep:
      return "sweep";
  }
  return "?";
}

const char* to_string(KeyDistribution dist) {
  return dist == KeyDistribution::uniform ? "uniform" : "zipf";
}

WorkloadKind workload_kind_from_string(const std::string& name) {
  if (name == "insert_only" || name == "insert") return WorkloadKind::insert_only;
  if (name == "interleaved_query" || name == "interleaved") return WorkloadKind::interleaved_query;
  if (name == "sweep") return WorkloadKind::sweep;
  throw ConfigError("unknown workload kind '" + name + "'");
}

KeyDistribution distribution_from_string(const std::string& name) {
  if (name == "uniform") return KeyDistribution::uniform;
  if (name == "zipf") return KeyDistribution::zipf;
  throw ConfigError("unknown key distribution '" + name + "'");
}

void WorkloadSpec::validate() const {
  if (!(warmup_fraction >= 0 && warmup_fraction < 1)) {
    throw InvalidParams("workload: warmup_fraction must be in [0, 1)");
  }
  if (!(present_query_fraction >= 0 && present_query_fraction <= 1)) {
    throw InvalidParams("workload: present_query_fraction must be in [0, 1]");
  }
  if (distribution == KeyDistribution::zipf && !(zipf_s > 0)) {
    throw InvalidParams("workload: zipf exponent must be positive");
  }
  if (effective_key_space() == 0) throw InvalidParams("workload: empty key space");
}

// --- KeyGenerator ---

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

KeyGenerator::KeyGenerator(const WorkloadSpec& spec, std::uint64_t seed)
    : state_(seed), key_space_(spec.effective_key_space()), dist_(spec.distribution) {
  if (dist_ == KeyDistribution::zipf) {
    zipf_cdf_.resize(key_space_);
    double total = 0;
    for (std::uint64_t i = 0; i < key_space_; ++i) {
      total += 1.0 / std::pow(static_cast<double>(i + 1), spec.zipf_s);
      zipf_cdf_[i] = total;
    }
    for (double& c : zipf_cdf_) c /= total;
  }
}

std::uint64_t KeyGenerator::uniform(std::uint64_t bound) {
  // Lemire's multiply-shift reduction.
  const uint128 m = static_cast<uint128>(splitmix64(state_)) * bound;
  return static_cast<std::uint64_t>(m >> 64);
}

double KeyGenerator::unit() {
  return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
}

std::uint64_t KeyGenerator::next_rank() {
  if (dist_ == KeyDistribution::uniform) return uniform(key_space_);
  const double u = unit();
  const auto it = std::upper_bound(zipf_cdf_.begin(), zipf_cdf_.end(), u);
  return std::min<std::uint64_t>(static_cast<std::uint64_t>(it - zipf_cdf_.begin()),
                                 key_space_ - 1);
}

std::uint64_t KeyGenerator::next() { return key_of_rank(next_rank()); }

std::uint64_t KeyGenerator::key_of_rank(std::uint64_t rank) {
  std::uint64_t state = rank ^ 0xD1B54A32D192ED03ULL;
  const std::uint64_t key = splitmix64(state);
  return is_reserved_key(key) ? key - 2 : key;
}

// --- run ---

const char* const kRunCsvHeader =
    "scheme,ram_pct,change_pct,block_ops,page_ops,merges,stages,erases,sim_time_us,"
    "queries,avg_query_us,status";

std::string run_csv_row(const RunReport& report) {
  std::ostringstream out;
  out << metrics_csv_row(report.config, report.metrics) << ',' << report.queries << ','
      << std::fixed << std::setprecision(3) << report.avg_query_us() << ',';
  if (report.error) {
    std::string msg = *report.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << "error: " << msg;
  } else {
    out << "ok";
  }
  return out.str();
}

RunReport run(const WorkloadSpec& spec, const TableConfig& config, std::ostream* trace) {
  spec.validate();
  RunReport report;
  report.config = config;
  CountingHashTable table(config);
  if (trace) table.device().enable_trace(true);

  KeyGenerator keys(spec, spec.seed);
  KeyGenerator chooser(spec, spec.seed ^ 0xA5A5A5A5A5A5A5A5ULL);
  std::vector<std::uint64_t> inserted;
  std::uint64_t fresh_rank = spec.effective_key_space();

  auto do_query = [&] {
    std::uint64_t key;
    if (!inserted.empty() && chooser.unit() < spec.present_query_fraction) {
      key = inserted[chooser.uniform(inserted.size())];
    } else {
      key = KeyGenerator::key_of_rank(fresh_rank++);
    }
    const double before = table.device().snapshot().simulated_time_us;
    if (table.query(key)) ++report.queries_found;
    report.query_time_us += table.device().snapshot().simulated_time_us - before;
    ++report.queries;
  };
  auto do_insert = [&] {
    const std::uint64_t key = keys.next();
    table.insert(key);
    if (spec.query_count > 0) inserted.push_back(key);
    ++report.inserts;
  };

  try {
    const bool with_queries = spec.kind == WorkloadKind::interleaved_query && spec.query_count > 0;
    if (!with_queries) {
      for (std::uint64_t i = 0; i < spec.op_count; ++i) do_insert();
    } else if (spec.stable) {
      for (std::uint64_t i = 0; i < spec.op_count; ++i) do_insert();
      table.flush();
      for (std::uint64_t i = 0; i < spec.query_count; ++i) do_query();
    } else {
      const auto warmup = static_cast<std::uint64_t>(
          std::floor(spec.warmup_fraction * static_cast<double>(spec.op_count)));
      for (std::uint64_t i = 0; i < warmup; ++i) do_insert();
      std::uint64_t inserts_left = spec.op_count - warmup;
      std::uint64_t queries_left = spec.query_count;
      while (inserts_left + queries_left > 0) {
        if (chooser.uniform(inserts_left + queries_left) < queries_left) {
          do_query();
          --queries_left;
        } else {
          do_insert();
          --inserts_left;
        }
      }
    }
  } catch (const Error& e) {
    report.error = e.what();
  }
  report.metrics = table.metrics();
  if (trace) table.device().write_trace_csv(*trace);
  return report;
}

// --- sweep ---

void SweepGrid::validate() const {
  if (ram_pcts.empty()) throw InvalidGrid("sweep grid: no RAM percentages");
  if (change_pcts.empty()) throw InvalidGrid("sweep grid: no change-segment percentages");
  if (schemes.empty()) throw InvalidGrid("sweep grid: no schemes");
  if (profiles.empty()) throw InvalidGrid("sweep grid: no device profiles");
}

std::vector<RunReport> sweep(const SweepGrid& grid, const WorkloadSpec& spec,
                             const TableConfig& base) {
  grid.validate();
  std::vector<RunReport> reports;
  for (const auto& profile : grid.profiles) {
    for (const Scheme scheme : grid.schemes) {
      for (const double change : grid.change_pcts) {
        for (const double ram : grid.ram_pcts) {
          TableConfig config = base;
          config.profile = profile_by_name(profile);
          config.scheme = scheme;
          config.ram_budget_pct = ram;
          config.change_segment_pct = change;
          reports.push_back(run(spec, config));
        }
      }
    }
  }
  return reports;
}

void write_runs_csv(std::ostream& out, const std::vector<RunReport>& reports) {
  out << kRunCsvHeader << '\n';
  for (const auto& r : reports) out << run_csv_row(r) << '\n';
}

// --- tfidf ---

TfidfRunOutput tfidf_run(const std::string& corpus_path, bool line_per_document,
                         const TableConfig& config) {
  const Corpus corpus =
      line_per_document ? Corpus::from_lines(corpus_path) : Corpus::from_directory(corpus_path);
  TfIdfIndex index = TfIdfIndex::ingest(corpus, config);
  TfidfRunOutput out;
  std::ostringstream scores;
  index.write_scores_csv(scores);
  out.scores_csv = scores.str();
  std::ostringstream metrics;
  metrics << "table," << kMetricsCsvHeader << '\n';
  metrics << "terms," << metrics_csv_row(config, index.term_table().metrics()) << '\n';
  metrics << "df," << metrics_csv_row(config, index.df_table().metrics()) << '\n';
  out.metrics_csv = metrics.str();
  return out;
}

}  // namespace flashhash
