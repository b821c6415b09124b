#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "syntrans/dataset.hpp"
#include "syntrans/eval.hpp"

using namespace syntrans;
namespace fs = std::filesystem;

namespace {

const GrammarSpec& grammar(Language l) {
  static const GrammarSpec en = load_grammar(Language::en);
  static const GrammarSpec de = load_grammar(Language::de);
  return l == Language::en ? en : de;
}

Tokens T(const std::string& s) { return split_whitespace(s); }

const DatasetManifest& manifest(Language l, Task t) {
  static std::map<std::pair<Language, Task>, DatasetManifest> cache;
  auto& m = cache[{l, t}];
  if (m.splits.empty()) {
    BuildConfig c;
    c.task = t;
    c.seed = 4;
    c.counts = {400, 100, 100, 300};
    m = build_splits(grammar(l), c);
  }
  return m;
}

std::vector<Tokens> oracle(const std::vector<TransformExample>& split, Language l, bool hierarchical) {
  std::vector<Tokens> out;
  for (const TransformExample& e : split) {
    if (e.task == Task::decl) {
      out.push_back(e.source);
      continue;
    }
    const SentenceTree t = parse_sentence(grammar(l), e.source);
    out.push_back(apply_rule(hierarchical ? hierarchical_rule(e.task) : linear_rule(e.task), t, grammar(l)).output);
  }
  return out;
}

}  // namespace

TEST(Match, SubsequenceAndModes) {
  EXPECT_TRUE(is_subsequence(T("a c"), T("a b c")));
  EXPECT_FALSE(is_subsequence(T("c a"), T("a b c")));
  EXPECT_TRUE(is_subsequence({}, T("a")));
  EXPECT_TRUE(sequence_match(T("has the yak eaten ?"), T("has the yak eaten ?")));
  EXPECT_FALSE(sequence_match(T("has the yak eaten"), T("has the yak eaten ?")));
  // target contained in a longer prediction
  EXPECT_TRUE(sequence_match(T("has the big yak eaten ?"), T("has the yak eaten ?"), MatchMode::subsequence));
  EXPECT_FALSE(sequence_match(T("has yak the eaten ?"), T("has the yak eaten ?"), MatchMode::subsequence));
}

TEST(Diagnostic, Positions) {
  EXPECT_EQ(diagnostic_position(Task::quest), 0u);
  EXPECT_EQ(diagnostic_position(Task::passiv), 1u);
  EXPECT_EQ(main_aux_accuracy({T("has a"), T("hasn't b")}, {T("has c"), T("has d")}), 0.5);
  EXPECT_EQ(object_noun_accuracy({T("the yak was"), T("my newts were")}, {T("my yak was"), T("the yaks were")}), 0.5);
  EXPECT_EQ(main_aux_accuracy({{}}, {T("has")}), 0.0);
  EXPECT_THROW(main_aux_accuracy({T("a")}, {T("a"), T("b")}), AlignmentError);
  EXPECT_THROW(object_noun_accuracy({T("a")}, {}), AlignmentError);
}

TEST(Profile, QuestDuplicatedAuxiliary) {
  const GrammarSpec& g = grammar(Language::en);
  const SentenceTree t = parse_sentence(g, T("my unicorn that hasn't amused the yaks has eaten ."));
  const TransformResult h = quest_hierarchical(t);

  const QuestErrorProfile correct = quest_error_profile(h.output, t, h, g);
  EXPECT_TRUE(correct.ok());

  // fronted but not deleted from its original position
  const QuestErrorProfile dup = quest_error_profile(T("has my unicorn that hasn't amused the yaks has eaten ?"), t, h, g);
  EXPECT_TRUE(dup.main_aux_fronted);
  EXPECT_FALSE(dup.original_aux_deleted);
  EXPECT_FALSE(dup.wrong_polarity_aux_fronted);
  EXPECT_FALSE(dup.rc_dropped);
  EXPECT_FALSE(dup.ok());

  const QuestErrorProfile linear = quest_error_profile(T("hasn't my unicorn that amused the yaks has eaten ?"), t, h, g);
  EXPECT_FALSE(linear.main_aux_fronted);
  EXPECT_TRUE(linear.wrong_polarity_aux_fronted);

  const QuestErrorProfile dropped = quest_error_profile(T("has my unicorn eaten ?"), t, h, g);
  EXPECT_TRUE(dropped.rc_dropped);
  EXPECT_TRUE(quest_error_profile({}, t, h, g).unaligned);
}

TEST(Profile, PassivDroppedPrepositionalPhrase) {
  const GrammarSpec& g = grammar(Language::en);
  const SentenceTree t = parse_sentence(g, T("my yaks below the unicorns comforted the orangutans ."));
  const TransformResult h = passiv_hierarchical(t, g);
  EXPECT_EQ(h.output, T("the orangutans were comforted by my yaks below the unicorns ."));

  const PassivErrorProfile p = passiv_error_profile(T("the orangutans were comforted by my yaks ."), t, h, g);
  EXPECT_TRUE(p.object_np_moved);
  EXPECT_TRUE(p.subject_in_by_phrase);
  EXPECT_FALSE(p.pp_on_second_np_preserved);
  EXPECT_TRUE(p.tense_reinflected);
  EXPECT_TRUE(p.passive_aux_inserted_inflected);
  EXPECT_FALSE(p.ok());
  EXPECT_TRUE(passiv_error_profile(h.output, t, h, g).ok());
}

TEST(Profile, GermanPassivWithEnglishSyntax) {
  const GrammarSpec& g = grammar(Language::de);
  const SentenceTree t = parse_sentence(g, T("die esel verwirrten meinen kater bei ihrem molch ."));
  const TransformResult h = passiv_hierarchical(t, g);
  EXPECT_EQ(h.output, T("mein kater bei ihrem molch wurde von den eseln verwirrt ."));

  // object moved, but case, auxiliary, agent marker and tense all follow English
  const PassivErrorProfile p = passiv_error_profile(T("meinen kater bei ihrem molch was verwirrten by die esel ."), t, h, g);
  EXPECT_TRUE(p.object_np_moved);
  EXPECT_TRUE(p.pp_on_second_np_preserved);
  EXPECT_FALSE(p.first_np_case_reinflected);
  EXPECT_FALSE(p.subject_in_by_phrase);
  EXPECT_FALSE(p.second_np_case_reinflected);
  EXPECT_FALSE(p.tense_reinflected);
  EXPECT_FALSE(p.passive_aux_inserted_inflected);
  EXPECT_TRUE(passiv_error_profile(h.output, t, h, g).ok());
}

class Identities : public ::testing::TestWithParam<std::tuple<Language, Task>> {};

TEST_P(Identities, OraclesAsModels) {
  const auto [lang, task] = GetParam();
  for (const auto& [name, split] : manifest(lang, task).splits) {
    const EvalReport h = evaluate(split, oracle(split, lang, true), task, grammar(lang), MatchMode::exact, name);
    EXPECT_EQ(h.sequence_acc, 1.0) << name;
    EXPECT_EQ(h.diagnostic_acc, 1.0) << name;
    for (const auto& [k, v] : h.profile_counts) {
      if (k != "unaligned" && k != "wrong_polarity_aux_fronted" && k != "rc_dropped") {
        EXPECT_EQ(v, h.n_transformed) << name << " " << k;
      } else {
        EXPECT_EQ(v, 0u) << name << " " << k;
      }
    }
    const EvalReport l = evaluate(split, oracle(split, lang, false), task, grammar(lang), MatchMode::exact, name);
    EXPECT_EQ(l.linear_freq, 1.0) << name;
    if (name == "gen") {
      EXPECT_EQ(l.diagnostic_acc, 0.0);
      EXPECT_EQ(l.sequence_acc, 0.0);
    } else {
      EXPECT_EQ(l.sequence_acc, 1.0) << name;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, Identities,
                         ::testing::Combine(::testing::Values(Language::en, Language::de),
                                            ::testing::Values(Task::quest, Task::passiv)),
                         [](const auto& info) {
                           return std::string(to_string(std::get<0>(info.param))) + "_" +
                                  std::string(to_string(std::get<1>(info.param)));
                         });

TEST(Aggregation, MatchesBruteForce) {
  // mixture of correct, linear and corrupted predictions
  const auto& split = manifest(Language::en, Task::quest).splits.at("gen");
  const auto hier = oracle(split, Language::en, true);
  const auto lin = oracle(split, Language::en, false);
  std::vector<Tokens> preds;
  Rng rng(17);
  for (std::size_t i = 0; i < split.size(); ++i) {
    switch (uniform_index(rng, 4)) {
      case 0: preds.push_back(hier[i]); break;
      case 1: preds.push_back(lin[i]); break;
      case 2: {
        Tokens p = hier[i];
        p.pop_back();
        preds.push_back(p);
        break;
      }
      default: preds.push_back({}); break;
    }
  }
  const EvalReport r = evaluate(split, preds, Task::quest, grammar(Language::en));
  std::size_t exact = 0, aux = 0, first = 0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    exact += preds[i] == split[i].target;
    aux += !preds[i].empty() && preds[i][0] == split[i].target[0];
    first += !preds[i].empty() && preds[i][0] == lin[i][0];
  }
  const double n = static_cast<double>(split.size());
  EXPECT_DOUBLE_EQ(r.sequence_acc, exact / n);
  EXPECT_DOUBLE_EQ(r.diagnostic_acc, aux / n);
  EXPECT_DOUBLE_EQ(r.linear_freq, first / n);
  EXPECT_DOUBLE_EQ(r.diagnostic_acc, main_aux_accuracy(preds, hier));
  EXPECT_EQ(r.examples.size(), split.size());
}

TEST(Aggregation, RejectsForeignTargets) {
  auto split = manifest(Language::en, Task::quest).splits.at("gen");
  split.front().target = T("bogus ?");
  EXPECT_THROW(evaluate(split, oracle(split, Language::en, true), Task::quest, grammar(Language::en)), Error);
}

TEST(Predictions, AlignmentChecks) {
  const auto& split = manifest(Language::en, Task::passiv).splits.at("test");
  const fs::path dir = fs::temp_directory_path() / ("syntrans_pred_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  {
    std::ofstream out(dir / "ok.txt");
    for (const TransformExample& e : split) out << serialize_example(e, SerialFormat::prefix_first) << '\n';
  }
  const auto aligned = align_predictions(read_predictions(dir / "ok.txt"), split);
  ASSERT_EQ(aligned.size(), split.size());
  EXPECT_EQ(aligned.front(), split.front().target);

  {
    std::ofstream out(dir / "shuffled.txt");
    out << serialize_example(split[1], SerialFormat::prefix_first) << '\n';
    for (std::size_t i = 1; i < split.size(); ++i) out << serialize_example(split[i], SerialFormat::prefix_first) << '\n';
  }
  try {
    align_predictions(read_predictions(dir / "shuffled.txt"), split);
    FAIL();
  } catch (const AlignmentError& e) {
    EXPECT_EQ(e.line(), 1u);
  }

  {
    std::ofstream out(dir / "short.txt");
    out << join(split.front().target) << '\n';
  }
  EXPECT_THROW(align_predictions(read_predictions(dir / "short.txt"), split), AlignmentError);
  EXPECT_THROW(read_predictions(dir / "missing.txt"), Error);
  fs::remove_all(dir);
}

TEST(Curves, EmitParseAndReport) {
  const auto& split = manifest(Language::de, Task::passiv).splits.at("gen");
  const EvalReport good = evaluate(split, oracle(split, Language::de, true), Task::passiv, grammar(Language::de));
  const EvalReport bad = evaluate(split, oracle(split, Language::de, false), Task::passiv, grammar(Language::de));
  const std::string csv = emit_curve({{100, bad}, {200, good}});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "checkpoint,metric,value");
  std::istringstream in(csv);
  const auto points = parse_curve(in, "curve.csv");
  EXPECT_EQ(points.size(), 2 * good.metrics().size());

  const fs::path dir = fs::temp_directory_path() / ("syntrans_report_" + std::to_string(::getpid()));
  const auto names = write_report(points, dir, true);
  EXPECT_NE(std::find(names.begin(), names.end(), "object_noun_acc"), names.end());
  std::ifstream f(dir / "object_noun_acc.csv");
  std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  EXPECT_EQ(body, "checkpoint,value\n100,0\n200,1\n");
  EXPECT_TRUE(fs::exists(dir / "object_noun_acc.svg"));
  fs::remove_all(dir);

  std::istringstream broken("checkpoint,metric,value\n1,x\n");
  EXPECT_THROW(parse_curve(broken, "b.csv"), Error);
}

TEST(Report, JsonHasMetricsAndExamples) {
  const auto& split = manifest(Language::en, Task::passiv).splits.at("dev");
  const EvalReport r = evaluate(split, oracle(split, Language::en, true), Task::passiv, grammar(Language::en),
                                MatchMode::subsequence, "dev");
  const auto j = r.to_json(true);
  EXPECT_EQ(j["split"], "dev");
  EXPECT_EQ(j["mode"], "subsequence");
  EXPECT_EQ(j["metrics"]["object_noun_acc"], 1.0);
  EXPECT_EQ(j["examples"].size(), split.size());
  EXPECT_FALSE(r.to_json(false).contains("examples"));
}
