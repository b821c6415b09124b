#include <gtest/gtest.h>

#include "goldens.hpp"
#include "syntrans/dataset.hpp"
#include "syntrans/eval.hpp"
#include "syntrans/generate.hpp"
#include "syntrans/transform.hpp"

using namespace syntrans;

namespace {

const GrammarSpec& grammar(Language l) {
  static const GrammarSpec en = load_grammar(Language::en);
  static const GrammarSpec de = load_grammar(Language::de);
  return l == Language::en ? en : de;
}

SentenceTree parse(Language l, const std::string& text) { return parse_sentence(grammar(l), split_whitespace(text)); }

}  // namespace

class Goldens : public ::testing::TestWithParam<fixtures::Golden> {};

TEST_P(Goldens, OraclesReproducePrintedTargets) {
  const fixtures::Golden& g = GetParam();
  const GrammarSpec& gr = grammar(g.language);
  const auto [task, tokens] = parse_source(g.source);
  const SentenceTree tree = parse_sentence(gr, tokens);
  if (task == Task::decl) {
    EXPECT_EQ(join(identity(tokens).output), g.hierarchical);
    return;
  }
  EXPECT_EQ(tree.spec.task, task);
  const TransformResult h = apply_rule(hierarchical_rule(task), tree, gr);
  const TransformResult l = apply_rule(linear_rule(task), tree, gr);
  EXPECT_EQ(join(h.output), g.hierarchical);
  if (!g.linear.empty()) {
    EXPECT_EQ(join(l.output), g.linear);
  }
  if (tree.spec.modifier != Modifier::on_subject) {
    EXPECT_EQ(h.output, l.output);
  }
  EXPECT_EQ(replay(tokens, h.trace), h.output);
  EXPECT_EQ(replay(tokens, l.trace), l.output);
}

INSTANTIATE_TEST_SUITE_P(Printed, Goldens, ::testing::ValuesIn(fixtures::goldens()), [](const auto& info) {
  std::string n = info.param.where;
  for (char& c : n) {
    if (c == '.') c = '_';
  }
  return n;
});

TEST(Transform, QuestSegments) {
  const SentenceTree t = parse(Language::en, "my unicorn that hasn't amused the yaks has eaten .");
  const TransformResult r = quest_hierarchical(t);
  ASSERT_TRUE(r.segments.count("aux"));
  EXPECT_EQ(r.segments.at("aux"), (Span{0, 1}));
  EXPECT_EQ(r.output.back(), "?");
  ASSERT_FALSE(r.trace.empty());
  EXPECT_EQ(r.trace.front().kind, StepKind::front);
}

TEST(Transform, QuestLinearWithoutAuxiliaryIsTransformError) {
  EXPECT_THROW(quest_linear(split_whitespace("the cats slept ."), grammar(Language::en).lexicon()), TransformError);
}

TEST(Transform, WrongTaskThrows) {
  const SentenceTree passive_source = parse(Language::en, "your quails amused some vulture .");
  EXPECT_THROW(quest_hierarchical(passive_source), WrongTaskError);
  const SentenceTree quest_source = parse(Language::en, "some xylophones have remembered my yak .");
  EXPECT_THROW(passiv_hierarchical(quest_source, grammar(Language::en)), WrongTaskError);
}

TEST(Transform, ReplayRejectsBadTrace) {
  std::vector<TraceStep> trace{{StepKind::remove, Span{7, 8}, 0, {}, std::nullopt}};
  EXPECT_THROW(replay(split_whitespace("a b ."), trace), Error);
}

TEST(Transform, GermanCaseReinflection) {
  // nominative subject becomes dative inside the von phrase; the accusative
  // object becomes nominative
  const SentenceTree t = parse(Language::de, "ihr esel unterhielt meinen salamander .");
  const TransformResult r = passiv_hierarchical(t, grammar(Language::de));
  EXPECT_EQ(r.output, split_whitespace("mein salamander wurde von ihrem esel unterhalten ."));
  int reinflections = 0;
  for (const TraceStep& s : r.trace) reinflections += s.kind == StepKind::reinflect;
  EXPECT_GE(reinflections, 3);
}

class Properties : public ::testing::TestWithParam<std::tuple<Language, Task>> {};

TEST_P(Properties, HierarchicalOutputsAreGrammaticalTargets) {
  const auto [lang, task] = GetParam();
  const GrammarSpec& g = grammar(lang);
  const Form target = task == Task::quest ? Form::question : Form::passive;
  for (const StructureSpec& s : all_structures(task)) {
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
      const SentenceTree t = sample_sentence(g, s, derive_seed(5, seed));
      const TransformResult h = apply_rule(hierarchical_rule(task), t, g);
      const TransformResult l = apply_rule(linear_rule(task), t, g);
      ASSERT_TRUE(accepts(g, h.output, target)) << join(h.output);
      ASSERT_EQ(replay(t.tokens(), h.trace), h.output);
      ASSERT_EQ(replay(t.tokens(), l.trace), l.output);
      if (s.modifier == Modifier::on_subject) {
        ASSERT_NE(h.output, l.output);
        ASSERT_FALSE(diagnostic_match(h.output, l.output, task)) << join(h.output) << " | " << join(l.output);
      } else {
        ASSERT_EQ(h.output, l.output);
      }
      if (task == Task::passiv && lang == Language::de) {
        ASSERT_GE(h.output.size(), 2u);
        EXPECT_EQ(h.output.back(), ".");
        EXPECT_EQ(h.output[h.output.size() - 2], g.lexicon().inflect(t.matrix_verb()->entry->lemma, Category::vtrans,
                                                                     FeatureBundle{.verbform = VerbForm::past_participle}));
      }
      if (task == Task::passiv && lang == Language::en) {
        int be = 0;
        for (const std::string& w : h.output) be += w == "was" || w == "were";
        EXPECT_EQ(be, 1);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, Properties,
                         ::testing::Combine(::testing::Values(Language::en, Language::de),
                                            ::testing::Values(Task::quest, Task::passiv)),
                         [](const auto& info) {
                           return std::string(to_string(std::get<0>(info.param))) + "_" +
                                  std::string(to_string(std::get<1>(info.param)));
                         });
