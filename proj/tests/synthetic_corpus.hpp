// Synthetic mining corpora with a known number of conforming pairs.
#pragma once

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "syntrans/generate.hpp"
#include "syntrans/miner.hpp"
#include "syntrans/transform.hpp"

namespace syntrans::fixtures {

/// "my yak has eaten ." -> "My yak has eaten."
inline std::string detokenize(const Tokens& tokens) {
  std::string s;
  for (const std::string& t : tokens) {
    if (!s.empty() && !(t.size() == 1 && is_punctuation(t[0]))) s += ' ';
    s += t;
  }
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

struct SyntheticCorpus {
  Corpus corpus;
  std::size_t planted = 0;
};

/// `docs` documents of filler sentences without auxiliaries; `planted` of them
/// (spread evenly) also carry one declarative/question pair with two distinct
/// auxiliaries. Filler never meets criterion (3), so exactly `planted` pairs
/// conform.
inline SyntheticCorpus synthetic_corpus(const GrammarSpec& en, std::size_t docs, std::size_t planted, std::uint64_t seed) {
  static const std::vector<std::string> nouns{"farmer", "river", "teacher", "city", "garden", "storm", "engineer", "market"};
  static const std::vector<std::string> verbs{"visited", "crossed", "painted", "watched", "repaired", "followed"};
  static const std::vector<std::string> dets{"the", "a", "my", "our", "every"};
  Rng rng(seed);
  auto filler = [&] {
    Tokens t{dets[uniform_index(rng, dets.size())], nouns[uniform_index(rng, nouns.size())],
             verbs[uniform_index(rng, verbs.size())], dets[uniform_index(rng, dets.size())],
             nouns[uniform_index(rng, nouns.size())], "."};
    return detokenize(t);
  };
  const StructureSpec rc_subject = StructureSpec::parse("quest.subj.rc.sg.trans");
  SyntheticCorpus out;
  const std::size_t stride = planted ? std::max<std::size_t>(1, docs / planted) : docs + 1;
  for (std::size_t d = 0; d < docs; ++d) {
    std::string text;
    const std::size_t n = 2 + uniform_index(rng, 4);
    for (std::size_t s = 0; s < n; ++s) text += filler() + " ";
    if (out.planted < planted && d % stride == 0) {
      const SentenceTree t = sample_sentence(en, rc_subject, derive_seed(seed, d));
      text += detokenize(t.tokens()) + " " + detokenize(quest_hierarchical(t).output) + " ";
      ++out.planted;
    }
    text += filler();
    out.corpus.records.push_back({"doc" + std::to_string(d), text});
  }
  return out;
}

/// Reference count: every adjacent pair of every document, checked one by one.
inline std::vector<MinedPair> brute_force_pairs(const Corpus& corpus, const MinerConfig& config) {
  const auto aux = detail::aux_set(config);
  std::vector<MinedPair> out;
  for (const CorpusRecord& r : corpus.records) {
    const auto sents = segment(r.text);
    for (std::size_t i = 0; i + 1 < sents.size(); ++i) {
      if (auto p = check_pair(r.doc_id, i, sents[i], sents[i + 1], config, aux)) out.push_back(*p);
    }
  }
  std::sort(out.begin(), out.end(), [](const MinedPair& x, const MinedPair& y) {
    return std::tie(x.doc_id, x.sentence_index) < std::tie(y.doc_id, y.sentence_index);
  });
  return out;
}

}  // namespace syntrans::fixtures
