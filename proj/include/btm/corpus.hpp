#pragma once

// Corpus ingestion: tokenization, vocabulary, biterm extraction, splits and
// the line-delimited file formats (vocabulary, biterm stream, stopwords).

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "btm/error.hpp"
#include "btm/random.hpp"

namespace btm {

using WordId = std::uint32_t;
using TokenList = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;

/// Unordered word pair stored canonically with w1 <= w2.
struct Biterm {
  WordId w1 = 0;
  WordId w2 = 0;

  bool is_self_pair() const { return w1 == w2; }
  friend auto operator<=>(const Biterm&, const Biterm&) = default;
};

inline Biterm make_biterm(WordId a, WordId b) { return a <= b ? Biterm{a, b} : Biterm{b, a}; }

/// Frozen bidirectional token <-> dense id map.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Throws std::invalid_argument on duplicate or empty tokens.
  static Vocabulary from_words(std::vector<std::string> words) {
    Vocabulary v;
    v.index_.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (words[i].empty()) throw std::invalid_argument("vocabulary: empty token at id " + std::to_string(i));
      if (!v.index_.emplace(words[i], static_cast<WordId>(i)).second)
        throw std::invalid_argument("vocabulary: duplicate token '" + words[i] + "'");
    }
    v.words_ = std::move(words);
    return v;
  }

  /// Placeholder tokens "w0".."w{W-1}" for corpora without text.
  static Vocabulary synthetic(std::size_t size) {
    std::vector<std::string> words;
    words.reserve(size);
    for (std::size_t i = 0; i < size; ++i) words.push_back("w" + std::to_string(i));
    return from_words(std::move(words));
  }

  std::size_t size() const { return words_.size(); }
  const std::string& word(WordId id) const { return words_.at(id); }
  const std::vector<std::string>& words() const { return words_; }

  /// std::nullopt for tokens outside the frozen vocabulary.
  std::optional<WordId> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
};

/// n_w for every word: number of biterms containing w, a self-pair counted once.
inline std::vector<std::uint64_t> count_word_biterms(std::span<const Biterm> biterms, std::size_t vocab_size) {
  std::vector<std::uint64_t> counts(vocab_size, 0);
  for (const Biterm& b : biterms) {
    if (b.w2 >= vocab_size) throw std::out_of_range("biterm word id out of vocabulary range");
    ++counts[b.w1];
    if (!b.is_self_pair()) ++counts[b.w2];
  }
  return counts;
}

struct Corpus {
  std::vector<Biterm> biterms;
  Vocabulary vocab;
  std::vector<std::uint64_t> word_biterm_count;

  static Corpus from_biterms(std::vector<Biterm> biterms, Vocabulary vocab) {
    Corpus c;
    c.word_biterm_count = count_word_biterms(biterms, vocab.size());
    c.biterms = std::move(biterms);
    c.vocab = std::move(vocab);
    return c;
  }

  std::size_t vocab_size() const { return vocab.size(); }
  std::size_t size() const { return biterms.size(); }
};

/// Lowercases, splits on whitespace, strips every non-alphabetic character
/// and drops stopwords and tokens left empty.
inline TokenList tokenize_and_filter(std::string_view raw_document, const StopwordSet& stopwords) {
  TokenList tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !stopwords.contains(current)) tokens.push_back(current);
    current.clear();
  };
  for (char ch : raw_document) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc)) {
      flush();
    } else if (std::isalpha(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  flush();
  return tokens;
}

/// All C(n,2) index pairs of the resolvable tokens; tokens missing from the
/// vocabulary are dropped before pairing.
inline std::vector<Biterm> extract_biterms(const TokenList& tokens, const Vocabulary& vocab) {
  std::vector<WordId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens)
    if (auto id = vocab.find(t)) ids.push_back(*id);
  std::vector<Biterm> out;
  if (ids.size() < 2) return out;
  out.reserve(ids.size() * (ids.size() - 1) / 2);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) out.push_back(make_biterm(ids[i], ids[j]));
  return out;
}

/// Counting pre-pass then freeze: tokens with frequency >= min_freq, in
/// order of first appearance.
inline Vocabulary build_vocabulary(std::span<const TokenList> documents, std::size_t min_freq = 1) {
  std::unordered_map<std::string, std::size_t> freq;
  std::vector<std::string> order;
  for (const auto& doc : documents)
    for (const auto& t : doc)
      if (freq[t]++ == 0) order.push_back(t);
  std::vector<std::string> kept;
  for (auto& t : order)
    if (freq[t] >= min_freq) kept.push_back(std::move(t));
  return Vocabulary::from_words(std::move(kept));
}

inline Corpus build_corpus(std::span<const std::string> raw_documents, const StopwordSet& stopwords,
                           std::size_t min_freq = 1) {
  std::vector<TokenList> docs;
  docs.reserve(raw_documents.size());
  for (const auto& d : raw_documents) docs.push_back(tokenize_and_filter(d, stopwords));
  Vocabulary vocab = build_vocabulary(docs, min_freq);
  std::vector<Biterm> biterms;
  for (const auto& d : docs) {
    auto bs = extract_biterms(d, vocab);
    biterms.insert(biterms.end(), bs.begin(), bs.end());
  }
  return Corpus::from_biterms(std::move(biterms), std::move(vocab));
}

struct Split {
  std::vector<Biterm> train;
  std::vector<Biterm> test;
};

/// Seeded shuffle, then the first round(ratio * N) biterms go to train.
inline Split split_shuffle(std::span<const Biterm> biterms, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split_shuffle: ratio must lie in (0, 1)");
  std::vector<Biterm> shuffled(biterms.begin(), biterms.end());
  Rng rng = make_rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(shuffled.size())));
  Split s;
  s.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
  return s;
}

// ---------------------------------------------------------------------------
// File formats

namespace detail {

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

template <class Int>
Int parse_int(std::string_view s, const std::string& where) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw InputFormatError(where + ": expected an integer, got '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

inline void write_vocabulary(const std::string& path, const Vocabulary& vocab) {
  auto out = detail::open_out(path);
  for (const auto& w : vocab.words()) out << w << '\n';
}

inline Vocabulary read_vocabulary(const std::string& path) {
  auto in = detail::open_in(path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    detail::strip_cr(line);
    words.push_back(line);
  }
  try {
    return Vocabulary::from_words(std::move(words));
  } catch (const std::invalid_argument& e) {
    throw InputFormatError(path + ": " + e.what());
  }
}

inline StopwordSet read_stopwords(const std::string& path) {
  auto in = detail::open_in(path);
  StopwordSet out;
  std::string line;
  while (std::getline(in, line)) {
    detail::strip_cr(line);
    for (auto& t : tokenize_and_filter(line, {})) out.insert(std::move(t));
  }
  return out;
}

inline void write_biterms(std::ostream& out, std::span<const Biterm> biterms) {
  for (const Biterm& b : biterms) out << b.w1 << '\t' << b.w2 << '\n';
}

inline void write_biterms(const std::string& path, std::span<const Biterm> biterms) {
  auto out = detail::open_out(path);
  write_biterms(out, biterms);
}

/// `vocab_size` of 0 skips the range check.
inline std::vector<Biterm> read_biterms(std::istream& in, std::size_t vocab_size = 0,
                                        const std::string& name = "<stream>") {
  std::vector<Biterm> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw InputFormatError(where + ": expected 'w1<TAB>w2'");
    const std::string_view sv(line);
    const auto w1 = detail::parse_int<WordId>(sv.substr(0, tab), where);
    const auto w2 = detail::parse_int<WordId>(sv.substr(tab + 1), where);
    if (w1 > w2) throw InputFormatError(where + ": biterm not canonical (w1 > w2)");
    if (vocab_size != 0 && w2 >= vocab_size)
      throw InputFormatError(where + ": word id " + std::to_string(w2) + " >= vocabulary size");
    out.push_back({w1, w2});
  }
  return out;
}

inline std::vector<Biterm> read_biterms(const std::string& path, std::size_t vocab_size = 0) {
  auto in = detail::open_in(path);
  return read_biterms(in, vocab_size, path);
}

inline void write_word_counts(const std::string& path, std::span<const std::uint64_t> counts) {
  auto out = detail::open_out(path);
  for (auto c : counts) out << c << '\n';
}

inline std::vector<std::uint64_t> read_word_counts(const std::string& path) {
  auto in = detail::open_in(path);
  std::vector<std::uint64_t> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    out.push_back(detail::parse_int<std::uint64_t>(line, path + ":" + std::to_string(lineno)));
  }
  return out;
}

}  // namespace btm
