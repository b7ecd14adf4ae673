#include "flashhash/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "flashhash/errors.hpp"

namespace flashhash {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (alnum) {
      current.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// --- Corpus ---

void Corpus::add(std::string text) {
  docs_.push_back({static_cast<std::uint32_t>(docs_.size()), std::move(text)});
}

Corpus Corpus::from_texts(const std::vector<std::string>& texts) {
  Corpus corpus;
  for (const auto& t : texts) corpus.add(t);
  return corpus;
}

Corpus Corpus::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("corpus directory '" + dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  Corpus corpus;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + file.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    corpus.add(text.str());
  }
  return corpus;
}

Corpus Corpus::from_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read corpus file '" + file.string() + "'");
  Corpus corpus;
  std::string line;
  while (std::getline(in, line)) corpus.add(line);
  return corpus;
}

// --- TfStore ---

TfStore::TfStore(std::filesystem::path path, bool owned)
    : path_(std::move(path)), owned_(owned),
      writer_(std::make_unique<std::ofstream>(path_, std::ios::binary | std::ios::trunc)) {
  if (!*writer_) throw ConfigError("cannot create tf record file '" + path_.string() + "'");
}

TfStore::TfStore(TfStore&& other) noexcept
    : path_(std::move(other.path_)), owned_(other.owned_), writer_(std::move(other.writer_)),
      offsets_(std::move(other.offsets_)), written_(other.written_) {
  other.owned_ = false;
}

TfStore::~TfStore() {
  writer_.reset();
  if (owned_) {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
}

void TfStore::append(std::uint32_t doc_id,
                     const std::vector<std::pair<std::string, std::int64_t>>& tf) {
  if (!writer_) throw ConfigError("tf store already finished");
  if (doc_id != offsets_.size()) throw InvalidParams("tf store: documents out of order");
  std::ostringstream record;
  for (const auto& [term, count] : tf) record << doc_id << '\t' << term << '\t' << count << '\n';
  const std::string bytes = record.str();
  *writer_ << bytes;
  offsets_.emplace_back(written_, bytes.size());
  written_ += bytes.size();
}

void TfStore::finish() {
  if (writer_) {
    writer_->flush();
    writer_.reset();
  }
}

std::vector<std::pair<std::string, std::int64_t>> TfStore::load(std::uint32_t doc_id) const {
  if (doc_id >= offsets_.size()) throw AddressOutOfRange("unknown document id");
  if (writer_) writer_->flush();
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw ConfigError("cannot read tf record file '" + path_.string() + "'");
  const auto [offset, length] = offsets_[doc_id];
  std::string bytes(length, '\0');
  in.seekg(static_cast<std::streamoff>(offset));
  in.read(bytes.data(), static_cast<std::streamsize>(length));
  std::vector<std::pair<std::string, std::int64_t>> out;
  std::istringstream lines(bytes);
  std::string line;
  while (std::getline(lines, line)) {
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    out.emplace_back(line.substr(t1 + 1, t2 - t1 - 1), std::stoll(line.substr(t2 + 1)));
  }
  return out;
}

std::int64_t TfStore::tf(std::uint32_t doc_id, std::string_view term) const {
  const auto terms = load(doc_id);
  const auto it = std::lower_bound(terms.begin(), terms.end(), term,
                                   [](const auto& p, std::string_view t) { return p.first < t; });
  return it != terms.end() && it->first == term ? it->second : 0;
}

// --- TfIdfIndex ---

double tfidf_value(std::int64_t tf, std::int64_t df, std::uint64_t n_docs) {
  if (tf <= 0 || df <= 0 || n_docs == 0) return 0.0;
  return static_cast<double>(tf) * std::log(static_cast<double>(n_docs) / static_cast<double>(df));
}

namespace {

std::filesystem::path temp_spill_path() {
  std::random_device rd;
  std::ostringstream name;
  name << "flashhash-tf-" << std::hex << rd() << rd() << ".tsv";
  return std::filesystem::temp_directory_path() / name.str();
}

}  // namespace

TfIdfIndex TfIdfIndex::ingest(const Corpus& corpus, const TableConfig& config,
                              std::filesystem::path spill_path) {
  TfIdfIndex index;
  index.terms_ = std::make_unique<CountingHashTable>(config);
  index.df_ = std::make_unique<CountingHashTable>(config);
  const bool owned = spill_path.empty();
  index.store_ = std::make_unique<TfStore>(owned ? temp_spill_path() : std::move(spill_path), owned);

  for (const Document& doc : corpus.documents()) {
    std::map<std::string, std::int64_t> counts;
    for (auto& token : tokenize(doc.text)) {
      index.terms_->insert(term_key(token));
      ++index.tokens_;
      ++counts[std::move(token)];
    }
    for (const auto& [term, tf] : counts) index.df_->insert(term_key(term));
    index.store_->append(doc.id, {counts.begin(), counts.end()});
  }
  index.store_->finish();
  index.n_docs_ = corpus.size();
  return index;
}

TfIdfScore TfIdfIndex::score(std::string_view term, std::uint32_t doc_id) {
  TfIdfScore s;
  s.term = std::string(term);
  s.doc_id = doc_id;
  s.n_docs = n_docs_;
  s.tf = store_->tf(doc_id, term);
  s.present = s.tf > 0;
  if (!s.present) return s;
  s.df = df_->query(term_key(term)).value_or(0);
  s.score = tfidf_value(s.tf, s.df, n_docs_);
  return s;
}

std::vector<TfIdfScore> TfIdfIndex::keywords(std::uint32_t doc_id, double threshold) {
  std::vector<TfIdfScore> out;
  for (const auto& [term, tf] : store_->load(doc_id)) {
    TfIdfScore s;
    s.term = term;
    s.doc_id = doc_id;
    s.n_docs = n_docs_;
    s.tf = tf;
    s.present = true;
    s.df = df_->query(term_key(term)).value_or(0);
    s.score = tfidf_value(s.tf, s.df, n_docs_);
    if (s.score > threshold) out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const TfIdfScore& a, const TfIdfScore& b) {
    return a.score != b.score ? a.score > b.score : a.term < b.term;
  });
  return out;
}

void TfIdfIndex::write_scores_csv(std::ostream& out) {
  out << "doc_id,term,tf,df,score\n";
  for (std::uint32_t doc = 0; doc < n_docs_; ++doc) {
    for (const auto& [term, tf] : store_->load(doc)) {
      const std::int64_t df = df_->query(term_key(term)).value_or(0);
      out << doc << ',' << term << ',' << tf << ',' << df << ',' << std::fixed
          << std::setprecision(6) << tfidf_value(tf, df, n_docs_) << '\n';
    }
  }
}

}  // namespace flashhash
