#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "synthetic_corpus.hpp"
#include "syntrans/miner.hpp"

using namespace syntrans;
namespace fs = std::filesystem;

namespace {

const GrammarSpec& english() {
  static const GrammarSpec g = load_grammar(Language::en);
  return g;
}

std::set<std::string> types(const std::string& s) {
  const Tokens t = word_tokens(s);
  return {t.begin(), t.end()};
}

const char* kDecl = "This company which hasn't had any legal violations has been reported to the Better Business Bureau.";
const char* kQuest = "Has this company which hasn't had any legal violations been reported to the Better Business Bureau?";

}  // namespace

TEST(Segment, SplitsOnTerminators) {
  EXPECT_EQ(segment("The dog ran. Did it stop? Yes! 3 cats left."),
            (std::vector<std::string>{"The dog ran.", "Did it stop?", "Yes!", "3 cats left."}));
}

TEST(Segment, KeepsAbbreviationsAndInitials) {
  EXPECT_EQ(segment("Dr. Smith met J. Doe at 5 p.m. today. Then he left."),
            (std::vector<std::string>{"Dr. Smith met J. Doe at 5 p.m. today.", "Then he left."}));
  EXPECT_EQ(segment("He said \"stop.\" Then he left."), (std::vector<std::string>{"He said \"stop.\"", "Then he left."}));
  EXPECT_EQ(segment("version 2.0 is out. it is lowercase"), (std::vector<std::string>{"version 2.0 is out. it is lowercase"}));
  EXPECT_TRUE(segment("   ").empty());
}

TEST(Jaccard, Properties) {
  const auto a = types("the cat has eaten"), b = types("has the cat eaten the fish");
  EXPECT_DOUBLE_EQ(jaccard(a, b), 4.0 / 5.0);
  EXPECT_DOUBLE_EQ(jaccard(a, b), jaccard(b, a));
  EXPECT_DOUBLE_EQ(jaccard(a, a), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(a, {}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard_multiset(word_tokens("the the cat"), word_tokens("the cat")), 2.0 / 3.0);
  EXPECT_EQ(word_tokens("Has the Cat eaten?"), split_whitespace("has the cat eaten"));
}

TEST(Pairs, PrintedDisambiguatingPair) {
  const MinerConfig cfg;
  const auto aux = detail::aux_set(cfg);
  const auto p = check_pair("d", 0, kQuest, kDecl, cfg, aux);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->aux_initial, 'a');
  EXPECT_DOUBLE_EQ(p->jaccard, 1.0);
  EXPECT_GE(p->distinct_aux_a, 2u);
  EXPECT_GE(p->distinct_aux_b, 2u);
  EXPECT_TRUE(check_pair("d", 0, kDecl, kQuest, cfg, aux));
}

TEST(Pairs, EachCriterionIsRequired) {
  const MinerConfig cfg;
  const auto aux = detail::aux_set(cfg);
  // both auxiliary-initial
  EXPECT_FALSE(check_pair("d", 0, kQuest, kQuest, cfg, aux));
  // only one distinct auxiliary
  EXPECT_FALSE(check_pair("d", 0, "The man who is tall is happy.", "Is the man who is tall happy?", cfg, aux));
  // 6 shared of 12 types is below the threshold
  const std::string a = "Has the cat that hasn't slept eaten today?";
  const std::string b = "The cat that hasn't slept has gone home quietly now.";
  EXPECT_LT(jaccard(types(a), types(b)), 0.7);
  EXPECT_FALSE(check_pair("d", 0, a, b, cfg, aux));
  MinerConfig loose = cfg;
  loose.jaccard_threshold = 0.4;
  EXPECT_TRUE(check_pair("d", 0, a, b, loose, aux));
}

TEST(Pairs, ThresholdIsStrict) {
  // 7 shared of 10 types: exactly 0.7 is not > 0.7
  const std::string a = "Has the dog that hasn't barked eaten x1 x2?";
  const std::string b = "The dog that hasn't barked has eaten y1.";
  ASSERT_DOUBLE_EQ(jaccard(types(a), types(b)), 7.0 / 10.0);
  EXPECT_FALSE(check_pair("d", 0, a, b, MinerConfig{}, detail::aux_set(MinerConfig{})));
}

TEST(Rc, Heuristic) {
  EXPECT_TRUE(detect_rc_on_subject(normalize_tokens("The yak that your unicorns have amused hasn't entertained a newt.")));
  EXPECT_TRUE(detect_rc_on_subject(normalize_tokens("Has this company which hasn't had violations been reported?")));
  EXPECT_FALSE(detect_rc_on_subject(normalize_tokens("My zebras have amused some walrus who has waited.")));
  EXPECT_FALSE(detect_rc_on_subject(normalize_tokens("The yak that slept ate.")));  // no auxiliary
  EXPECT_FALSE(detect_rc_on_subject(normalize_tokens("Your quails have amused some vulture.")));
}

TEST(Rc, AgreesWithGrammarLabels) {
  const GrammarSpec& g = english();
  std::size_t agree = 0, total = 0;
  for (const StructureSpec& s : all_structures(Task::quest)) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const SentenceTree t = sample_sentence(g, s, seed);
      const bool truth = s.modifier == Modifier::on_subject;
      agree += detect_rc_on_subject(t.tokens()) == truth;
      agree += detect_rc_on_subject(quest_hierarchical(t).output) == truth;
      total += 2;
    }
  }
  EXPECT_EQ(agree, total);
}

TEST(Rc, AnnotationDetector) {
  const fs::path p = fs::temp_directory_path() / ("syntrans_rc_" + std::to_string(::getpid()) + ".tsv");
  std::ofstream(p) << "The dog that barked has left.\t1\nThe dog has left.\t0\n";
  const AnnotationDetector d = AnnotationDetector::load(p);
  EXPECT_TRUE(d(normalize_tokens("the dog that barked has left .")));
  EXPECT_FALSE(d(normalize_tokens("The dog has left.")));
  EXPECT_FALSE(d(normalize_tokens("Unseen sentence.")));
  EXPECT_EQ(d.unknown(), 1u);
  std::ofstream(p) << "bad label\t2\n";
  EXPECT_THROW(AnnotationDetector::load(p), Error);
  fs::remove(p);
}

TEST(Scan, RecoversPlantedPairs) {
  const auto synth = fixtures::synthetic_corpus(english(), 3000, 250, 5);
  ASSERT_EQ(synth.planted, 250u);
  MinerConfig cfg;
  cfg.threads = 1;
  const ScanResult r = scan_pairs(synth.corpus, cfg);
  EXPECT_EQ(r.pairs.size(), 250u);
  const auto brute = fixtures::brute_force_pairs(synth.corpus, cfg);
  EXPECT_TRUE(r.pairs == brute);
  EXPECT_EQ(r.documents, 3000u);
  EXPECT_EQ(r.rc_subject_sentences, 500u);  // declarative and question of every planted pair

  cfg.threads = 4;
  EXPECT_TRUE(scan_pairs(synth.corpus, cfg).pairs == r.pairs);
}

TEST(Scan, OrderIndependentOfInput) {
  auto synth = fixtures::synthetic_corpus(english(), 200, 20, 8);
  MinerConfig cfg;
  const auto a = scan_pairs(synth.corpus, cfg).pairs;
  std::reverse(synth.corpus.records.begin(), synth.corpus.records.end());
  EXPECT_TRUE(scan_pairs(synth.corpus, cfg).pairs == a);
}

TEST(Scan, CorpusReadingAndConfig) {
  std::istringstream in("d1\tThe dog ran. It stopped.\nno tab\n\tempty id\nd2\tOne.\n");
  const Corpus c = read_corpus(in);
  EXPECT_EQ(c.records.size(), 2u);
  EXPECT_EQ(c.malformed, 2u);
  const ScanResult r = scan_pairs(c, MinerConfig{});
  EXPECT_EQ(r.sentences, 3u);
  EXPECT_EQ(r.adjacent_pairs, 1u);
  EXPECT_EQ(r.malformed, 2u);

  MinerConfig bad;
  bad.jaccard_threshold = 0;
  EXPECT_THROW(scan_pairs(c, bad), Error);
  bad = MinerConfig{};
  bad.auxiliaries.clear();
  EXPECT_THROW(scan_pairs(c, bad), Error);

  MinerConfig custom;
  custom.segmenter = [](std::string_view t) { return std::vector<std::string>{std::string(t)}; };
  EXPECT_EQ(scan_pairs(c, custom).sentences, 2u);
}

TEST(Estimate, ReportedCounts) {
  const double n = sentences_from_tokens(1e12, 0.0567, 15);
  EXPECT_NEAR(n, 3.78e9, 1e3);
  const auto e = estimate(13, 118.3e6, 526944, 118.3e6, n);
  EXPECT_NEAR(e.p_pair, 1.1e-7, 0.01e-7);
  EXPECT_NEAR(e.p_rc_subject, 4.45e-3, 0.01e-3);
  EXPECT_GE(e.expected_disambiguating, 1.8);
  EXPECT_LE(e.expected_disambiguating, 2.0);

  const auto rounded = estimate_from_probabilities(1.1e-7, 4.5e-3, 3.78e9);
  EXPECT_NEAR(rounded.p_joint(), 4.95e-10, 1e-20);
  EXPECT_NEAR(rounded.expected_disambiguating, 1.8711, 1e-4);

  EXPECT_THROW(estimate(1, 0, 1, 1, 1), Error);
  EXPECT_THROW(estimate_from_probabilities(1.5, 0.1, 1), Error);
  EXPECT_THROW(sentences_from_tokens(1, 1, 0), Error);
}
