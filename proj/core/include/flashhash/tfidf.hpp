#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flashhash/table.hpp"

namespace flashhash {

// Lowercases ASCII letters and splits on every byte that is not an ASCII
// letter or digit. Empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

// Table key of a token.
inline std::uint64_t term_key(std::string_view term) { return string_key(term); }

struct Document {
  std::uint32_t id = 0;
  std::string text;
};

// Documents with dense ids 0..n-1 in insertion order.
class Corpus {
 public:
  void add(std::string text);

  // One document per regular file, in lexicographic file-name order.
  static Corpus from_directory(const std::filesystem::path& dir);
  // One document per line.
  static Corpus from_lines(const std::filesystem::path& file);
  static Corpus from_texts(const std::vector<std::string>& texts);

  const std::vector<Document>& documents() const { return docs_; }
  std::size_t size() const { return docs_.size(); }

 private:
  std::vector<Document> docs_;
};

// Per-document term counts spilled to a plain record file, one
// `doc_id<TAB>term<TAB>tf` line per distinct term, documents in id order and
// terms sorted within a document.
class TfStore {
 public:
  // Creates (truncates) the record file. When `owned` is true the file is
  // deleted on destruction.
  TfStore(std::filesystem::path path, bool owned);
  ~TfStore();
  TfStore(TfStore&& other) noexcept;
  TfStore& operator=(TfStore&&) = delete;
  TfStore(const TfStore&) = delete;
  TfStore& operator=(const TfStore&) = delete;

  // Documents must be appended in id order.
  void append(std::uint32_t doc_id, const std::vector<std::pair<std::string, std::int64_t>>& tf);
  void finish();

  // Sorted (term, tf) pairs of one document, read back from the file.
  std::vector<std::pair<std::string, std::int64_t>> load(std::uint32_t doc_id) const;
  std::int64_t tf(std::uint32_t doc_id, std::string_view term) const;

  const std::filesystem::path& path() const { return path_; }
  std::size_t documents() const { return offsets_.size(); }

 private:
  std::filesystem::path path_;
  bool owned_;
  std::unique_ptr<std::ofstream> writer_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> offsets_;  // byte range per doc
  std::uint64_t written_ = 0;
};

struct TfIdfScore {
  std::string term;
  std::uint32_t doc_id = 0;
  std::int64_t tf = 0;
  std::int64_t df = 0;
  std::uint64_t n_docs = 0;
  double score = 0;
  bool present = false;  // false when the term does not occur in the document
};

// tf * ln(n_docs / df) with raw term counts; zero when tf or df is zero.
double tfidf_value(std::int64_t tf, std::int64_t df, std::uint64_t n_docs);

// Corpus-wide term and document frequencies held in two flash-backed counting
// tables, plus the spilled per-document term counts.
class TfIdfIndex {
 public:
  // `spill_path` empty: a temporary record file is created and removed with
  // the index. Throws BlockFull when a table is too small for the corpus.
  static TfIdfIndex ingest(const Corpus& corpus, const TableConfig& config,
                           std::filesystem::path spill_path = {});

  TfIdfScore score(std::string_view term, std::uint32_t doc_id);

  // Terms of the document scoring strictly above `threshold`, by descending
  // score, ties by term.
  std::vector<TfIdfScore> keywords(std::uint32_t doc_id, double threshold);

  // Every (document, term) pair as CSV `doc_id,term,tf,df,score`, documents
  // in id order and terms sorted, with a header row.
  void write_scores_csv(std::ostream& out);

  CountingHashTable& term_table() { return *terms_; }
  CountingHashTable& df_table() { return *df_; }
  const TfStore& tf_store() const { return *store_; }
  std::uint64_t n_docs() const { return n_docs_; }
  std::uint64_t token_count() const { return tokens_; }

 private:
  TfIdfIndex() = default;

  std::unique_ptr<CountingHashTable> terms_;
  std::unique_ptr<CountingHashTable> df_;
  std::unique_ptr<TfStore> store_;
  std::uint64_t n_docs_ = 0;
  std::uint64_t tokens_ = 0;
};

}  // namespace flashhash
