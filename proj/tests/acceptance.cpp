// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// non-zero when any selected criterion fails.
//
//   acceptance                 run all criteria
//   acceptance --criterion 3   run one

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flashhash/errors.hpp"
#include "flashhash/tfidf.hpp"
#include "flashhash/workload.hpp"
#include "support.hpp"

using namespace flashhash;
using flashhash::testing::compact_config;
using flashhash::testing::MixedWorkload;
using flashhash::testing::OpKind;
using flashhash::testing::ReferenceCounter;

namespace {

// Pinned tolerances and sizes.
constexpr std::uint64_t kOracleOps = 100000;
constexpr int kOracleSeeds = 10;
constexpr std::uint64_t kOracleKeyPool = 8000;
constexpr double kOracleSecondsPerScheme = 60.0;
constexpr std::uint64_t kCouplingKeys = 1000000;
constexpr double kProbeLoadFactor = 0.5;
constexpr double kProbeLow = 1.6;
constexpr double kProbeHigh = 2.4;
constexpr double kNbEraseFactor = 10.0;
constexpr double kSimTimeFactor = 2.0;
constexpr std::uint64_t kStableInserts = 20000;
constexpr std::uint64_t kStableQueries = 20000;
const double kRamGrid[] = {1, 2, 5, 10};
const double kChangeGrid[] = {50, 25, 12.5};  // dropping change-segment size

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Default insert-only desk workload: 10^5 uniform keys, seed 42.
WorkloadSpec desk_workload() {
  WorkloadSpec s;
  s.kind = WorkloadKind::insert_only;
  s.op_count = 100000;
  s.seed = 42;
  return s;
}

TableConfig desk_config(Scheme scheme, double ram = 5, double change = 12.5) {
  TableConfig c;
  c.scheme = scheme;
  c.ram_budget_pct = ram;
  c.change_segment_pct = change;
  return c;
}

// Desk runs are shared between criteria within one process.
const RunReport& desk_run(Scheme scheme, double ram = 5, double change = 12.5) {
  static std::map<std::tuple<Scheme, double, double>, RunReport> cache;
  const auto key = std::make_tuple(scheme, ram, change);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, run(desk_workload(), desk_config(scheme, ram, change))).first;
  }
  return it->second;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

// 1. Oracle equivalence under every scheme.
Outcome oracle_equivalence() {
  Outcome out{true, ""};
  std::ostringstream detail;
  for (Scheme scheme : kAllSchemes) {
    const auto start = std::chrono::steady_clock::now();
    std::uint64_t checks = 0;
    std::uint64_t mismatches = 0;
    std::string error;
    for (int zipf = 0; zipf < 2 && error.empty(); ++zipf) {
      for (int seed = 1; seed <= kOracleSeeds && error.empty(); ++seed) {
        try {
          CountingHashTable table(compact_config(scheme));
          ReferenceCounter ref;
          MixedWorkload work(static_cast<std::uint64_t>(seed) * 1000 + zipf, kOracleKeyPool,
                             zipf == 1);
          for (std::uint64_t i = 0; i < kOracleOps; ++i) {
            const auto op = work.next(ref);
            switch (op.kind) {
              case OpKind::insert:
                table.insert(op.key);
                ref.insert(op.key);
                break;
              case OpKind::decrement:
                table.decrement(op.key);
                ref.decrement(op.key);
                break;
              case OpKind::remove:
                table.remove(op.key);
                ref.remove(op.key);
                break;
              case OpKind::query:
                ++checks;
                mismatches += table.query(op.key) != ref.query(op.key);
                break;
            }
          }
          // Every key of the pool, before and after pushing all deltas down.
          for (int pass = 0; pass < 2; ++pass) {
            if (pass == 1) table.flush();
            for (std::uint64_t r = 0; r < kOracleKeyPool; ++r) {
              const auto key = MixedWorkload::key_of(r);
              ++checks;
              mismatches += table.query(key) != ref.query(key);
            }
          }
        } catch (const Error& e) {
          error = e.what();
        }
      }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = error.empty() && mismatches == 0 && secs < kOracleSecondsPerScheme;
    out.pass = out.pass && ok;
    detail << to_string(scheme) << " " << (checks - mismatches) << "/" << checks << " in "
           << fmt(secs, 1) << "s" << (error.empty() ? "" : " error: " + error) << "; ";
  }
  out.detail = detail.str();
  return out;
}

// Reference (a*x + b) mod q without 128-bit arithmetic: double-and-add.
std::uint64_t mulmod_reference(std::uint64_t a, std::uint64_t x, std::uint64_t q) {
  std::uint64_t result = 0;
  a %= q;
  x %= q;
  while (x > 0) {
    if (x & 1) result = (result + a) % q;  // q < 2^63 keeps these in range
    a = (a * 2) % q;
    x >>= 1;
  }
  return result;
}

// 2. Coupling invariant.
Outcome coupling() {
  const TableConfig cfg;
  const auto r = std::uint64_t{cfg.pages_per_block} * (cfg.page_size / kEntryBytes);
  std::vector<HashParams> all{HashParams::for_table(cfg.data_blocks, r),
                              HashParams::for_table(cfg.data_blocks, r, 2024)};
  std::mt19937_64 rng(12345);
  std::uint64_t bad = 0;
  std::uint64_t checked = 0;
  for (const auto& p : all) {
    for (std::uint64_t i = 0; i < kCouplingKeys / all.size(); ++i) {
      const std::uint64_t key = rng();
      const std::uint64_t g = (mulmod_reference(p.a(), key, p.q()) + p.b() % p.q()) % p.q();
      bad += primary_hash(key, p) != g || secondary_hash(key, p) != g / p.r();
      ++checked;
    }
  }
  return {bad == 0, std::to_string(checked - bad) + "/" + std::to_string(checked) +
                        " keys satisfy slot == entry div r"};
}

// 3. Mean successful-lookup probes at load factor 0.5.
Outcome probe_cost() {
  TableConfig cfg = desk_config(Scheme::MB);
  CountingHashTable table(cfg);
  const auto target =
      static_cast<std::uint64_t>(kProbeLoadFactor * static_cast<double>(table.hash_params().q()));
  std::vector<std::uint64_t> keys;
  keys.reserve(target);
  std::mt19937_64 rng(3);
  std::map<std::uint64_t, bool> seen;
  while (keys.size() < target) {
    const std::uint64_t k = rng() >> 1;
    if (seen.emplace(k, true).second) keys.push_back(k);
  }
  for (auto k : keys) table.insert(k);
  table.flush();
  std::uint64_t probes = 0;
  std::uint64_t pages = 0;
  for (auto k : keys) {
    const auto r = table.data_segment().lookup(k);
    if (!r.count) return {false, "key lost"};
    probes += r.probes;
    pages += r.pages_read;
  }
  const double mean = static_cast<double>(probes) / static_cast<double>(keys.size());
  const double mean_pages = static_cast<double>(pages) / static_cast<double>(keys.size());
  return {mean >= kProbeLow && mean <= kProbeHigh,
          "load " + fmt(table.data_segment().load_factor(), 4) + ", mean probes " + fmt(mean) +
              " (band [" + fmt(kProbeLow, 1) + ", " + fmt(kProbeHigh, 1) + "]), mean pages " +
              fmt(mean_pages)};
}

// 4. Write-order properties from device traces.
Outcome write_order() {
  std::ostringstream detail;
  bool pass = true;
  for (Scheme scheme : {Scheme::NB, Scheme::MB, Scheme::MDB, Scheme::MDB_L}) {
    TableConfig cfg = desk_config(scheme);
    WorkloadSpec spec = desk_workload();
    if (scheme == Scheme::NB) spec.op_count = 3000;
    CountingHashTable table(cfg);
    table.device().enable_trace(true);
    KeyGenerator keys(spec, spec.seed);
    for (std::uint64_t i = 0; i < spec.op_count; ++i) table.insert(keys.next());
    table.flush();

    const std::uint32_t data_end = cfg.data_blocks;
    const std::uint32_t change_begin = cfg.data_blocks + cfg.overflow_blocks;
    const std::uint32_t ppb = cfg.pages_per_block;
    std::vector<std::int64_t> next_data_page(cfg.data_blocks, 0);
    std::uint64_t data_writes = 0, data_ok = 0;
    std::uint64_t change_writes = 0, change_ok = 0;
    std::int64_t log_cursor = 0;
    for (const auto& rec : table.device().trace()) {
      if (rec.op == TraceOp::erase) {
        if (rec.block < data_end) next_data_page[rec.block] = 0;
        if (rec.block >= change_begin) log_cursor = 0;  // a merge empties the log
        continue;
      }
      if (rec.op != TraceOp::write) continue;
      if (rec.block < data_end) {
        ++data_writes;
        data_ok += static_cast<std::int64_t>(rec.page) == next_data_page[rec.block];
        next_data_page[rec.block] = rec.page + 1;
      } else if (rec.block >= change_begin) {
        ++change_writes;
        if (scheme == Scheme::MDB) {
          change_ok += rec.write_class == WriteClass::semi_random;
        } else {
          const std::int64_t global = std::int64_t{rec.block - change_begin} * ppb + rec.page;
          change_ok += global == log_cursor;
          log_cursor = global + 1;
        }
      }
    }
    const bool ok = data_ok == data_writes && change_ok == change_writes && data_writes > 0 &&
                    (scheme == Scheme::NB || scheme == Scheme::MB || change_writes > 0);
    pass = pass && ok;
    detail << to_string(scheme) << " data " << data_ok << "/" << data_writes << " ascending";
    if (scheme == Scheme::MDB) detail << ", change " << change_ok << "/" << change_writes << " semi-random";
    if (scheme == Scheme::MDB_L) detail << ", log " << change_ok << "/" << change_writes << " sequential";
    detail << "; ";
  }
  return {pass, detail.str()};
}

// 5. MB merge events == MDB stages == MDB-L stages at equal RAM%.
Outcome stage_merge_identity() {
  std::ostringstream detail;
  bool pass = true;
  for (double ram : kRamGrid) {
    const auto mb = desk_run(Scheme::MB, ram).metrics.merges;
    const auto mdb = desk_run(Scheme::MDB, ram).metrics.stages;
    const auto mdbl = desk_run(Scheme::MDB_L, ram).metrics.stages;
    pass = pass && mb == mdb && mdb == mdbl && mb > 0;
    detail << "RAM " << ram << "%: " << mb << "/" << mdb << "/" << mdbl << "; ";
  }
  return {pass, detail.str()};
}

// 6. Erase ordering and trends.
Outcome clean_ordering() {
  std::ostringstream detail;
  bool pass = true;
  const auto& nb = desk_run(Scheme::NB);
  const auto e_nb = nb.metrics.device.erases;
  const auto e_mb = desk_run(Scheme::MB).metrics.device.erases;
  const auto e_mdb = desk_run(Scheme::MDB).metrics.device.erases;
  const auto e_mdbl = desk_run(Scheme::MDB_L).metrics.device.erases;
  const bool order = !nb.error && static_cast<double>(e_nb) >= kNbEraseFactor * static_cast<double>(e_mb) &&
                     e_mb > e_mdb && e_mdb >= e_mdbl;
  pass = pass && order;
  detail << "erases NB " << e_nb << ", MB " << e_mb << ", MDB " << e_mdb << ", MDB-L " << e_mdbl
         << (order ? "" : " (ORDER VIOLATED)") << "; ";

  for (Scheme scheme : {Scheme::MB, Scheme::MDB, Scheme::MDB_L}) {
    bool mono = true;
    for (std::size_t i = 1; i < std::size(kRamGrid); ++i) {
      const auto& lo = desk_run(scheme, kRamGrid[i - 1]).metrics;
      const auto& hi = desk_run(scheme, kRamGrid[i]).metrics;
      const auto stages_lo = scheme == Scheme::MB ? lo.merges : lo.stages;
      const auto stages_hi = scheme == Scheme::MB ? hi.merges : hi.stages;
      mono = mono && hi.device.erases <= lo.device.erases && stages_hi <= stages_lo;
    }
    pass = pass && mono;
    detail << to_string(scheme) << " erases/stages vs RAM " << (mono ? "non-increasing" : "NOT monotone")
           << "; ";
  }
  for (Scheme scheme : {Scheme::MDB, Scheme::MDB_L}) {
    bool mono = true;
    std::ostringstream merges;
    for (std::size_t i = 0; i < std::size(kChangeGrid); ++i) {
      const auto m = desk_run(scheme, 5, kChangeGrid[i]).metrics.merges;
      merges << (i ? "," : "") << m;
      if (i > 0) mono = mono && m >= desk_run(scheme, 5, kChangeGrid[i - 1]).metrics.merges;
    }
    pass = pass && mono;
    detail << to_string(scheme) << " merges at change 50/25/12.5% = " << merges.str() << "; ";
  }
  return {pass, detail.str()};
}

// 7. Simulated I/O time.
Outcome sim_time() {
  const double mb = desk_run(Scheme::MB).metrics.device.simulated_time_us;
  const double mdb = desk_run(Scheme::MDB).metrics.device.simulated_time_us;
  const double mdbl = desk_run(Scheme::MDB_L).metrics.device.simulated_time_us;
  const bool pass = mb >= kSimTimeFactor * mdb && mb >= kSimTimeFactor * mdbl;
  return {pass, "MB/MDB = " + fmt(mb / mdb, 2) + ", MB/MDB-L = " + fmt(mb / mdbl, 2) +
                    " (need >= " + fmt(kSimTimeFactor, 1) + ")"};
}

// 8. Stable-state query cost equality.
Outcome stable_queries() {
  WorkloadSpec spec = desk_workload();
  spec.kind = WorkloadKind::interleaved_query;
  spec.op_count = kStableInserts;
  spec.query_count = kStableQueries;
  spec.stable = true;
  double lo = 1e300, hi = 0;
  std::ostringstream detail;
  bool pass = true;
  for (Scheme scheme : kAllSchemes) {
    const auto r = run(spec, desk_config(scheme));
    pass = pass && !r.error;
    lo = std::min(lo, r.avg_query_us());
    hi = std::max(hi, r.avg_query_us());
    detail << to_string(scheme) << " " << fmt(r.avg_query_us()) << "us; ";
  }
  const double read_us = mlc1_profile().page_read_us;
  pass = pass && hi - lo <= read_us;
  detail << "spread " << fmt(hi - lo) << "us (limit " << fmt(read_us, 0) << ")";
  return {pass, detail.str()};
}

// 9. TF-IDF against brute force on the pinned toy corpus.
Outcome tfidf_oracle() {
  const std::vector<std::string> docs{"a b", "b", "c b a"};
  // Brute force.
  std::vector<std::map<std::string, std::int64_t>> tf(docs.size());
  std::map<std::string, std::int64_t> df;
  std::uint64_t tokens = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& t : tokenize(docs[d])) {
      ++tf[d][t];
      ++tokens;
    }
    for (const auto& [t, c] : tf[d]) ++df[t];
  }
  bool pass = true;
  std::uint64_t pairs = 0;
  for (Scheme scheme : kAllSchemes) {
    auto index = TfIdfIndex::ingest(Corpus::from_texts(docs), compact_config(scheme));
    for (std::size_t d = 0; d < docs.size(); ++d) {
      for (const auto& [t, c] : tf[d]) {
        const double expected = static_cast<double>(c) *
                                std::log(static_cast<double>(docs.size()) /
                                         static_cast<double>(df[t]));
        const auto got = index.score(t, static_cast<std::uint32_t>(d));
        pass = pass && got.score == expected && got.tf == c && got.df == df[t];
        ++pairs;
      }
    }
    std::int64_t total = 0;
    for (const auto& [t, c] : df) total += index.term_table().query(term_key(t)).value_or(0);
    pass = pass && static_cast<std::uint64_t>(total) == tokens;
  }
  return {pass, std::to_string(pairs) + " (term, doc) scores over 4 schemes, token total " +
                    std::to_string(tokens)};
}

// 10. Determinism of the emitted CSV.
Outcome determinism() {
  auto produce = [] {
    std::ostringstream out;
    WorkloadSpec spec = desk_workload();
    spec.op_count = 30000;
    spec.kind = WorkloadKind::interleaved_query;
    spec.query_count = 5000;
    spec.distribution = KeyDistribution::zipf;
    SweepGrid grid{{1, 5}, {25, 12.5}, {Scheme::MB, Scheme::MDB, Scheme::MDB_L}, {"MLC-1", "SLC"}};
    write_runs_csv(out, sweep(grid, spec, desk_config(Scheme::MB)));
    std::ostringstream trace;
    run(spec, desk_config(Scheme::MDB_L), &trace);
    out << trace.str();
    auto index = TfIdfIndex::ingest(Corpus::from_texts({"x y z", "y z", "z"}),
                                    compact_config(Scheme::MDB));
    index.write_scores_csv(out);
    return out.str();
  };
  const std::string first = produce();
  const std::string second = produce();
  return {first == second && !first.empty(),
          std::to_string(first.size()) + " bytes, " + (first == second ? "identical" : "DIFFERENT")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "oracle equivalence", oracle_equivalence},
      {2, "coupling invariant", coupling},
      {3, "probe-cost law", probe_cost},
      {4, "write-order properties", write_order},
      {5, "stage/merge identity", stage_merge_identity},
      {6, "clean ordering and trends", clean_ordering},
      {7, "simulated I/O cost", sim_time},
      {8, "stable-state query equality", stable_queries},
      {9, "tf-idf oracle", tfidf_oracle},
      {10, "determinism", determinism},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }
  int failed = 0;
  int ran = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    while (o.detail.ends_with("; ")) o.detail.resize(o.detail.size() - 2);
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name
              << "): " << o.detail << std::endl;
  }
  if (ran == 0) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
