// bench: workload harness for the flash-backed counting table.
//
//   bench run    --scheme MDB-L --ram-pct 5 --ops 100000 --out run.csv
//   bench sweep  --scheme MB,MDB,MDB-L --ram-pct 1,2,5,10 --change-pct 50,25,12.5
//   bench tfidf  --corpus docs/ --out scores.csv
//
// Values from --config FILE (key = value lines) override the flags.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "flashhash/config.hpp"
#include "flashhash/errors.hpp"
#include "flashhash/workload.hpp"

namespace fh = flashhash;

namespace {

struct Options {
  std::vector<std::string> schemes{"MDB-L"};
  std::vector<double> ram_pcts{5.0};
  std::vector<double> change_pcts{12.5};
  std::vector<std::string> profiles{"MLC-1"};
  std::uint64_t seed = 42;
  std::uint64_t ops = 100000;
  std::uint64_t queries = 0;
  std::string corpus;
  bool lines = false;
  std::string out;
  std::string metrics_out;
  std::string trace;
  std::string config;

  std::string distribution = "uniform";
  double zipf_s = 1.0;
  std::uint64_t key_space = 0;
  double warmup = 0.35;
  bool stable = false;
  double present_fraction = 0.9;

  std::uint32_t data_blocks = 64;
  std::uint32_t pages_per_block = 16;
  std::uint32_t page_size = 4096;
  std::uint32_t overflow_blocks = 1;
  std::string hash_seed;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> split_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw fh::ConfigError("config key '" + key + "': '" + item + "' is not a number");
    }
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw fh::ConfigError("config key '" + key + "': '" + text + "' is not a boolean");
}

void apply_config_file(Options& o, const fh::KeyValueConfig& kv) {
  for (const auto& [key, value] : kv.values()) {
    if (key == "scheme") {
      o.schemes = split_list(value);
    } else if (key == "ram_pct") {
      o.ram_pcts = split_doubles(key, value);
    } else if (key == "change_pct") {
      o.change_pcts = split_doubles(key, value);
    } else if (key == "profile") {
      o.profiles = split_list(value);
    } else if (key == "seed") {
      o.seed = *kv.get_uint(key);
    } else if (key == "ops") {
      o.ops = *kv.get_uint(key);
    } else if (key == "queries") {
      o.queries = *kv.get_uint(key);
    } else if (key == "corpus") {
      o.corpus = value;
    } else if (key == "lines") {
      o.lines = parse_bool(key, value);
    } else if (key == "out") {
      o.out = value;
    } else if (key == "metrics_out") {
      o.metrics_out = value;
    } else if (key == "trace") {
      o.trace = value;
    } else if (key == "distribution") {
      o.distribution = value;
    } else if (key == "zipf_s") {
      o.zipf_s = *kv.get_double(key);
    } else if (key == "key_space") {
      o.key_space = *kv.get_uint(key);
    } else if (key == "warmup") {
      o.warmup = *kv.get_double(key);
    } else if (key == "stable") {
      o.stable = parse_bool(key, value);
    } else if (key == "present_fraction") {
      o.present_fraction = *kv.get_double(key);
    } else if (key == "data_blocks") {
      o.data_blocks = static_cast<std::uint32_t>(*kv.get_uint(key));
    } else if (key == "pages_per_block") {
      o.pages_per_block = static_cast<std::uint32_t>(*kv.get_uint(key));
    } else if (key == "page_size") {
      o.page_size = static_cast<std::uint32_t>(*kv.get_uint(key));
    } else if (key == "overflow_blocks") {
      o.overflow_blocks = static_cast<std::uint32_t>(*kv.get_uint(key));
    } else if (key == "hash_seed") {
      o.hash_seed = value;
    } else {
      throw fh::ConfigError("unknown config key '" + key + "'");
    }
  }
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--scheme", o.schemes, "NB, MB, MDB or MDB-L (comma list for sweep)")
      ->delimiter(',');
  cmd->add_option("--ram-pct", o.ram_pcts, "RAM buffer size, % of the data segment")
      ->delimiter(',');
  cmd->add_option("--change-pct", o.change_pcts, "change segment size, % of the data segment")
      ->delimiter(',');
  cmd->add_option("--profile", o.profiles, "device profile: MLC-1, MLC-2 or SLC")->delimiter(',');
  cmd->add_option("--data-blocks", o.data_blocks, "data segment blocks");
  cmd->add_option("--pages-per-block", o.pages_per_block, "pages per erase block");
  cmd->add_option("--page-size", o.page_size, "page payload bytes");
  cmd->add_option("--overflow-blocks", o.overflow_blocks, "overflow region blocks");
  cmd->add_option("--hash-seed", o.hash_seed, "draw hash coefficients from this seed");
  cmd->add_option("--out", o.out, "output CSV file (default: stdout)");
  cmd->add_option("--config", o.config, "key = value file; its values override the flags");
}

void add_workload(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "workload seed");
  cmd->add_option("--ops", o.ops, "number of inserts");
  cmd->add_option("--queries", o.queries, "number of interleaved queries");
  cmd->add_option("--distribution", o.distribution, "uniform or zipf");
  cmd->add_option("--zipf-s", o.zipf_s, "Zipf exponent");
  cmd->add_option("--key-space", o.key_space, "distinct keys (0: same as --ops)");
  cmd->add_option("--warmup", o.warmup, "share of inserts before the first query");
  cmd->add_flag("--stable", o.stable, "flush before issuing the queries");
  cmd->add_option("--present-fraction", o.present_fraction,
                  "share of queries hitting inserted keys");
}

template <typename T>
T single(const std::vector<T>& values, const char* what) {
  if (values.size() != 1) {
    throw fh::ConfigError(std::string("expected exactly one ") + what + " value");
  }
  return values.front();
}

fh::TableConfig table_config(const Options& o) {
  fh::TableConfig c;
  c.scheme = fh::scheme_from_string(single(o.schemes, "scheme"));
  c.ram_budget_pct = single(o.ram_pcts, "ram-pct");
  c.change_segment_pct = single(o.change_pcts, "change-pct");
  c.profile = fh::profile_by_name(single(o.profiles, "profile"));
  c.data_blocks = o.data_blocks;
  c.pages_per_block = o.pages_per_block;
  c.page_size = o.page_size;
  c.overflow_blocks = o.overflow_blocks;
  if (!o.hash_seed.empty()) {
    fh::KeyValueConfig kv;
    kv.set("hash_seed", o.hash_seed);
    c.hash_seed = *kv.get_uint("hash_seed");
  }
  return c;
}

fh::WorkloadSpec workload_spec(const Options& o, fh::WorkloadKind kind) {
  fh::WorkloadSpec s;
  s.kind = kind;
  if (kind == fh::WorkloadKind::insert_only && o.queries > 0) {
    s.kind = fh::WorkloadKind::interleaved_query;
  }
  s.op_count = o.ops;
  s.query_count = o.queries;
  s.warmup_fraction = o.warmup;
  s.seed = o.seed;
  s.distribution = fh::distribution_from_string(o.distribution);
  s.zipf_s = o.zipf_s;
  s.key_space = o.key_space;
  s.stable = o.stable;
  s.present_query_fraction = o.present_fraction;
  s.validate();
  return s;
}

// Output file or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw fh::ConfigError("cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void write_metadata(const Options& o, const fh::WorkloadSpec& spec) {
  if (o.out.empty()) return;
  Sink meta(o.out + ".meta");
  auto& m = meta.stream();
  m << "workload=" << fh::to_string(spec.kind) << '\n'
    << "ops=" << spec.op_count << '\n'
    << "queries=" << spec.query_count << '\n'
    << "seed=" << spec.seed << '\n'
    << "distribution=" << fh::to_string(spec.distribution) << '\n'
    << "key_space=" << spec.effective_key_space() << '\n'
    << "stable=" << (spec.stable ? 1 : 0) << '\n'
    << "query_mix=present:" << spec.present_query_fraction
    << ",absent:" << 1.0 - spec.present_query_fraction << " (assumed default mix)\n";
}

int cmd_run(const Options& o) {
  const fh::TableConfig config = table_config(o);
  const fh::WorkloadSpec spec = workload_spec(o, fh::WorkloadKind::insert_only);
  std::unique_ptr<Sink> trace;
  if (!o.trace.empty()) trace = std::make_unique<Sink>(o.trace);
  const fh::RunReport report = fh::run(spec, config, trace ? &trace->stream() : nullptr);
  Sink out(o.out);
  fh::write_runs_csv(out.stream(), {report});
  write_metadata(o, spec);
  if (report.error) {
    std::cerr << "bench: run failed: " << *report.error << '\n';
    return 1;
  }
  return 0;
}

int cmd_sweep(const Options& o) {
  fh::SweepGrid grid;
  grid.ram_pcts = o.ram_pcts;
  grid.change_pcts = o.change_pcts;
  for (const auto& s : o.schemes) grid.schemes.push_back(fh::scheme_from_string(s));
  grid.profiles = o.profiles;
  Options base_opts = o;
  base_opts.schemes = {"MB"};
  base_opts.ram_pcts = {5.0};
  base_opts.change_pcts = {12.5};
  base_opts.profiles = {"MLC-1"};
  const fh::TableConfig base = table_config(base_opts);
  const fh::WorkloadSpec spec = workload_spec(o, fh::WorkloadKind::insert_only);
  const auto reports = fh::sweep(grid, spec, base);
  Sink out(o.out);
  fh::write_runs_csv(out.stream(), reports);
  write_metadata(o, spec);
  int failed = 0;
  for (const auto& r : reports) {
    if (r.error) ++failed;
  }
  if (failed > 0) {
    std::cerr << "bench: " << failed << " sweep cell(s) failed\n";
    return 1;
  }
  return 0;
}

int cmd_tfidf(const Options& o) {
  if (o.corpus.empty()) throw fh::ConfigError("tfidf needs --corpus");
  const fh::TableConfig config = table_config(o);
  const fh::TfidfRunOutput result = fh::tfidf_run(o.corpus, o.lines, config);
  {
    Sink out(o.out);
    out.stream() << result.scores_csv;
  }
  std::string metrics_path = o.metrics_out;
  if (metrics_path.empty() && !o.out.empty()) metrics_path = o.out + ".metrics.csv";
  if (metrics_path.empty()) {
    std::cerr << result.metrics_csv;
  } else {
    Sink metrics(metrics_path);
    metrics.stream() << result.metrics_csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flash-backed counting hash table workload harness"};
  app.require_subcommand(1);
  Options opts;

  auto* run = app.add_subcommand("run", "one workload run, one CSV row");
  add_common(run, opts);
  add_workload(run, opts);
  run->add_option("--trace", opts.trace, "write the device operation trace CSV here");

  auto* sweep = app.add_subcommand("sweep", "one run per scheme x RAM% x change% x profile cell");
  add_common(sweep, opts);
  add_workload(sweep, opts);

  auto* tfidf = app.add_subcommand("tfidf", "ingest a corpus and dump TF-IDF scores");
  add_common(tfidf, opts);
  tfidf->add_option("--corpus", opts.corpus, "directory of documents, or a file with --lines");
  tfidf->add_flag("--lines", opts.lines, "treat --corpus as one document per line");
  tfidf->add_option("--metrics-out", opts.metrics_out,
                    "device metrics CSV (default: <out>.metrics.csv, or stderr)");
  // Accepted for a uniform flag set; ingestion order is fixed by the corpus.
  tfidf->add_option("--seed", opts.seed, "unused");
  tfidf->add_option("--ops", opts.ops, "unused");
  tfidf->add_option("--queries", opts.queries, "unused");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!opts.config.empty()) apply_config_file(opts, fh::KeyValueConfig::load(opts.config));
    if (*run) return cmd_run(opts);
    if (*sweep) return cmd_sweep(opts);
    if (*tfidf) return cmd_tfidf(opts);
  } catch (const fh::Error& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
