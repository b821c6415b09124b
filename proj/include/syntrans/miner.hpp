#pragma once

// Adjacent declarative/question pair mining over plain-text corpora, and the
// expected-count arithmetic for disambiguating examples.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "syntrans/errors.hpp"
#include "syntrans/text.hpp"

namespace syntrans {

inline const std::vector<std::string>& default_english_auxiliaries() {
  static const std::vector<std::string> list{
      "has",   "have",   "had",      "hasn't", "haven't",  "hadn't",  "is",     "are",      "was",
      "were",  "isn't",  "aren't",   "wasn't", "weren't",  "do",      "does",   "did",      "don't",
      "doesn't", "didn't", "can",    "can't",  "could",    "couldn't", "will",  "won't",    "would",
      "wouldn't", "should", "shouldn't", "may", "might",   "must"};
  return list;
}

inline const std::set<std::string>& default_abbreviations() {
  static const std::set<std::string> list{"dr", "mr", "mrs", "ms", "prof", "st", "jr", "sr", "vs", "etc", "inc", "ltd",
                                          "co", "corp", "no", "fig", "e.g", "i.e", "mt", "gen", "col", "lt", "sgt", "rev"};
  return list;
}

using Segmenter = std::function<std::vector<std::string>(std::string_view)>;
using RcDetector = std::function<bool(const Tokens&)>;

/// Splits at . ? ! (plus closing quotes or brackets) followed by whitespace
/// and an uppercase letter or digit, except after known abbreviations and
/// single-letter initials.
inline std::vector<std::string> segment(std::string_view text) {
  std::vector<std::string> out;
  auto flush = [&](std::size_t b, std::size_t e) {
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    if (e > b) out.emplace_back(text.substr(b, e - b));
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    std::size_t j = i + 1;
    while (j < text.size() && (text[j] == '"' || text[j] == '\'' || text[j] == ')' || text[j] == ']')) ++j;
    if (j >= text.size() || !is_space(text[j])) continue;
    std::size_t k = j;
    while (k < text.size() && is_space(text[k])) ++k;
    if (k >= text.size()) continue;
    const unsigned char next = static_cast<unsigned char>(text[k]);
    if (!std::isupper(next) && !std::isdigit(next) && next != '"' && next < 0x80) continue;
    if (c == '.') {
      std::size_t w = i;
      while (w > start && !is_space(text[w - 1])) --w;
      std::string word = to_lower(text.substr(w, i - w));
      while (!word.empty() && (word.front() == '(' || word.front() == '"')) word.erase(word.begin());
      if (default_abbreviations().count(word)) continue;
      if (word.size() == 1 && std::isalpha(static_cast<unsigned char>(word[0]))) continue;
    }
    flush(start, j);
    start = j;
    i = j - 1;
  }
  flush(start, text.size());
  return out;
}

/// Lowercased word tokens with punctuation removed.
inline Tokens word_tokens(std::string_view sentence) {
  Tokens out;
  for (std::string& t : normalize_tokens(sentence)) {
    if (t.size() == 1 && is_punctuation(t[0])) continue;
    out.push_back(std::move(t));
  }
  return out;
}

/// |a ∩ b| / |a ∪ b| over token types. Two empty sets give 1.
inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const std::string& t : a) inter += b.count(t);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

/// Multiset variant: sum of min counts over sum of max counts.
inline double jaccard_multiset(const Tokens& a, const Tokens& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& t : a) ++counts[t].first;
  for (const auto& t : b) ++counts[t].second;
  std::size_t lo = 0, hi = 0;
  for (const auto& [t, c] : counts) {
    lo += std::min(c.first, c.second);
    hi += std::max(c.first, c.second);
  }
  return static_cast<double>(lo) / static_cast<double>(hi);
}

inline bool is_relative_pronoun(const std::string& t) {
  return t == "that" || t == "who" || t == "which" || t == "whom" || t == "whose";
}

inline bool is_determiner(const std::string& t) {
  static const std::set<std::string> dets{"the",  "a",    "an",   "this", "that",  "these", "those", "my",   "your",
                                          "his",  "her",  "its",  "our",  "their", "some",  "any",   "every", "each",
                                          "no",   "all",  "many", "few",  "several", "both"};
  return dets.count(t) > 0;
}

struct MinerConfig {
  double jaccard_threshold = 0.7;
  std::vector<std::string> auxiliaries = default_english_auxiliaries();
  bool multiset = false;
  Segmenter segmenter;    // empty: segment()
  RcDetector rc_detector; // empty: the built-in heuristic
  unsigned threads = 0;   // 0: hardware concurrency

  void validate() const {
    if (!(jaccard_threshold > 0 && jaccard_threshold <= 1)) throw Error("jaccard threshold must lie in (0, 1]");
    if (auxiliaries.empty()) throw Error("auxiliary list is empty");
  }
};

namespace detail {

inline std::set<std::string> aux_set(const MinerConfig& c) { return {c.auxiliaries.begin(), c.auxiliaries.end()}; }

inline bool rc_on_subject_heuristic(const Tokens& words, const std::set<std::string>& aux) {
  if (std::none_of(words.begin(), words.end(), [&](const std::string& w) { return aux.count(w) > 0; })) return false;
  std::size_t i = 0;
  if (i < words.size() && aux.count(words[i])) ++i;  // question word order
  while (i < words.size() && is_determiner(words[i])) ++i;
  if (i >= words.size() || aux.count(words[i]) || is_relative_pronoun(words[i])) return false;
  // words[i] is the first noun-like token; the relative pronoun must follow it
  // directly, otherwise a fronted auxiliary lets an object RC match too.
  return i + 1 < words.size() && is_relative_pronoun(words[i + 1]);
}

}  // namespace detail

/// Whether a sentence has a relative clause on its subject: a relative
/// pronoun directly after the first noun-like token (past any determiners
/// and one sentence-initial auxiliary), in a sentence with at least one
/// auxiliary.
inline bool detect_rc_on_subject(const Tokens& sentence, const MinerConfig& config, const std::set<std::string>& aux) {
  if (config.rc_detector) return config.rc_detector(sentence);
  Tokens words;
  for (const std::string& t : sentence) {
    if (t.size() == 1 && is_punctuation(t[0])) continue;
    words.push_back(to_lower(t));
  }
  return detail::rc_on_subject_heuristic(words, aux);
}

inline bool detect_rc_on_subject(const Tokens& sentence, const MinerConfig& config = {}) {
  return detect_rc_on_subject(sentence, config, detail::aux_set(config));
}

/// Detector backed by externally produced labels ("sentence<TAB>0|1"), e.g.
/// from a dependency parser. Unknown sentences are reported false and counted.
class AnnotationDetector {
 public:
  static AnnotationDetector load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    AnnotationDetector d;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      const auto tab = line.rfind('\t');
      if (tab == std::string::npos) throw Error(path.string() + ":" + std::to_string(n) + ": expected sentence<TAB>label");
      const std::string label = line.substr(tab + 1);
      if (label != "0" && label != "1") throw Error(path.string() + ":" + std::to_string(n) + ": label must be 0 or 1");
      d.labels_->emplace(join(word_tokens(line.substr(0, tab))), label == "1");
    }
    return d;
  }

  bool operator()(const Tokens& sentence) const {
    Tokens words;
    for (const std::string& t : sentence) {
      if (!(t.size() == 1 && is_punctuation(t[0]))) words.push_back(to_lower(t));
    }
    auto it = labels_->find(join(words));
    if (it == labels_->end()) {
      ++*unknown_;
      return false;
    }
    return it->second;
  }

  std::size_t unknown() const { return *unknown_; }

 private:
  std::shared_ptr<std::unordered_map<std::string, bool>> labels_ = std::make_shared<std::unordered_map<std::string, bool>>();
  std::shared_ptr<std::size_t> unknown_ = std::make_shared<std::size_t>(0);
};

struct MinedPair {
  std::string doc_id;
  std::size_t sentence_index = 0;  // index of sent_a; sent_b follows it
  std::string sent_a;
  std::string sent_b;
  double jaccard = 0;
  char aux_initial = 'a';  // which sentence starts with an auxiliary
  std::size_t distinct_aux_a = 0;
  std::size_t distinct_aux_b = 0;

  bool operator==(const MinedPair&) const = default;
};

/// Applies the three pair criteria to adjacent sentences a, b.
inline std::optional<MinedPair> check_pair(const std::string& doc_id, std::size_t index, const std::string& a,
                                           const std::string& b, const MinerConfig& config,
                                           const std::set<std::string>& aux) {
  const Tokens ta = word_tokens(a);
  const Tokens tb = word_tokens(b);
  const bool a_initial = !ta.empty() && aux.count(ta.front());
  const bool b_initial = !tb.empty() && aux.count(tb.front());
  if (a_initial == b_initial) return std::nullopt;
  auto distinct = [&](const Tokens& t) {
    std::set<std::string> s;
    for (const auto& w : t) {
      if (aux.count(w)) s.insert(w);
    }
    return s.size();
  };
  const std::size_t da = distinct(ta), db = distinct(tb);
  if (da < 2 || db < 2) return std::nullopt;
  const double j = config.multiset ? jaccard_multiset(ta, tb)
                                   : jaccard(std::set<std::string>(ta.begin(), ta.end()), std::set<std::string>(tb.begin(), tb.end()));
  if (!(j > config.jaccard_threshold)) return std::nullopt;
  return MinedPair{doc_id, index, a, b, j, a_initial ? 'a' : 'b', da, db};
}

struct CorpusRecord {
  std::string doc_id;
  std::string text;
};

struct Corpus {
  std::vector<CorpusRecord> records;
  std::size_t malformed = 0;
};

/// Newline-delimited "doc_id<TAB>text" records. Lines without a tab or with
/// an empty id are skipped and counted.
inline Corpus read_corpus(std::istream& in) {
  Corpus c;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      ++c.malformed;
      continue;
    }
    c.records.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return c;
}

/// One document per regular file; the file name is the doc id.
inline Corpus read_corpus_dir(const std::filesystem::path& dir) {
  Corpus c;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) {
      ++c.malformed;
      continue;
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    c.records.push_back({f.filename().string(), std::move(text)});
  }
  return c;
}

struct ScanResult {
  std::vector<MinedPair> pairs;
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::size_t adjacent_pairs = 0;
  std::size_t rc_subject_sentences = 0;
  std::size_t malformed = 0;
};

/// Checks every adjacent sentence pair in every document. Documents are
/// processed in parallel; the merged output is sorted by (doc_id,
/// sentence_index) and does not depend on the thread count or input order.
inline ScanResult scan_pairs(const Corpus& corpus, const MinerConfig& config) {
  config.validate();
  const auto aux = detail::aux_set(config);
  const std::size_t n = corpus.records.size();
  struct Partial {
    std::vector<MinedPair> pairs;
    std::size_t sentences = 0, adjacent = 0, rc = 0;
  };
  std::vector<Partial> parts(n);
  auto work = [&](std::size_t d) {
    const CorpusRecord& r = corpus.records[d];
    const auto sents = config.segmenter ? config.segmenter(r.text) : segment(r.text);
    Partial& p = parts[d];
    p.sentences = sents.size();
    for (std::size_t i = 0; i < sents.size(); ++i) {
      if (detect_rc_on_subject(normalize_tokens(sents[i]), config, aux)) ++p.rc;
      if (i + 1 < sents.size()) {
        ++p.adjacent;
        if (auto pair = check_pair(r.doc_id, i, sents[i], sents[i + 1], config, aux)) p.pairs.push_back(std::move(*pair));
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  if (config.rc_detector) threads = 1;  // user detectors need not be thread-safe
  if (threads <= 1 || n < 2) {
    for (std::size_t d = 0; d < n; ++d) work(d);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t d = t; d < n; d += threads) work(d);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  ScanResult out;
  out.documents = n;
  out.malformed = corpus.malformed;
  for (Partial& p : parts) {
    out.sentences += p.sentences;
    out.adjacent_pairs += p.adjacent;
    out.rc_subject_sentences += p.rc;
    for (MinedPair& m : p.pairs) out.pairs.push_back(std::move(m));
  }
  std::stable_sort(out.pairs.begin(), out.pairs.end(), [](const MinedPair& x, const MinedPair& y) {
    return std::tie(x.doc_id, x.sentence_index, x.sent_a, x.sent_b) < std::tie(y.doc_id, y.sentence_index, y.sent_a, y.sent_b);
  });
  return out;
}

struct DisambiguationEstimate {
  double p_pair = 0;
  double p_rc_subject = 0;
  double n_sentences = 0;
  double expected_disambiguating = 0;

  double p_joint() const { return p_pair * p_rc_subject; }
};

/// Expected disambiguating examples, assuming a pair and an RC on the
/// subject occur independently.
inline DisambiguationEstimate estimate_from_probabilities(double p_pair, double p_rc_subject, double n_sentences) {
  auto check = [](double p, const char* what) {
    if (!(p >= 0 && p <= 1)) throw Error(std::string(what) + " must lie in [0, 1]");
  };
  check(p_pair, "pair probability");
  check(p_rc_subject, "RC-on-subject probability");
  if (!(n_sentences >= 0)) throw Error("sentence count must be non-negative");
  return {p_pair, p_rc_subject, n_sentences, n_sentences * p_pair * p_rc_subject};
}

inline DisambiguationEstimate estimate(double pair_count, double pair_denominator, double rc_count, double rc_denominator,
                                       double n_sentences) {
  if (pair_denominator <= 0) throw Error("pair denominator must be positive");
  if (rc_denominator <= 0) throw Error("RC denominator must be positive");
  return estimate_from_probabilities(pair_count / pair_denominator, rc_count / rc_denominator, n_sentences);
}

/// Sentences seen in training: total tokens × language share / tokens per sentence.
inline double sentences_from_tokens(double tokens, double language_share, double tokens_per_sentence) {
  if (tokens_per_sentence <= 0) throw Error("tokens per sentence must be positive");
  return tokens * language_share / tokens_per_sentence;
}

}  // namespace syntrans
