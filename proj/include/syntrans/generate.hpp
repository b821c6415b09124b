#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "syntrans/derivation.hpp"
#include "syntrans/errors.hpp"
#include "syntrans/grammar.hpp"
#include "syntrans/random.hpp"
#include "syntrans/structure.hpp"
#include "syntrans/tree.hpp"

namespace syntrans {

inline Tokens realize(const SentenceTree& tree) { return tree.tokens(); }

/// All parses of `tokens` as a sentence of the given form, over every root of
/// that form in declaration order. At most `limit` trees are returned.
inline std::vector<SentenceTree> parse_all(const GrammarSpec& grammar, const Tokens& tokens,
                                           Form form = Form::declarative, std::size_t limit = 8) {
  std::vector<SentenceTree> out;
  Derivation engine(grammar);
  for (int root : grammar.roots(form)) {
    if (out.size() >= limit) break;
    for (Node& n : engine.parse(tokens, root, limit - out.size())) {
      assign_spans(n);
      out.push_back({grammar.language(), grammar.root_structure(root), form, std::move(n)});
    }
  }
  return out;
}

/// The first parse of `tokens`. Throws ParseError when the grammar rejects it.
inline SentenceTree parse_sentence(const GrammarSpec& grammar, const Tokens& tokens, Form form = Form::declarative) {
  auto parses = parse_all(grammar, tokens, form, 1);
  if (parses.empty()) {
    throw ParseError("not a " + std::string(to_string(grammar.language())) + " " +
                     (form == Form::declarative ? "declarative" : form == Form::question ? "question" : "passive") +
                     " sentence: '" + join(tokens) + "'");
  }
  return std::move(parses.front());
}

inline bool accepts(const GrammarSpec& grammar, const Tokens& tokens, Form form) {
  return !parse_all(grammar, tokens, form, 1).empty();
}

/// Structure of a declarative/active sentence. When the sentence has several
/// readings, the first declared root wins.
inline StructureSpec classify_structure(const Tokens& tokens, const GrammarSpec& grammar) {
  return parse_sentence(grammar, tokens).spec;
}

/// True when the two auxiliaries of a question sentence with a relative
/// clause can be told apart: polarity in English, lemma in German.
inline bool auxiliaries_distinguishable(const SentenceTree& tree) {
  const Node* main = tree.matrix_aux();
  const Node* rc = tree.rc_internal_aux();
  if (!main || !rc) return true;
  if (tree.language == Language::en) return main->entry->features.polarity != rc->entry->features.polarity;
  return main->entry->lemma != rc->entry->lemma;
}

/// Nominative surface of the noun heading a bare NP.
inline std::string nominative_noun(const GrammarSpec& grammar, const Node& bare_np) {
  const LexicalEntry& e = *bare_np.children[1].entry;
  if (grammar.language() == Language::en) return e.surface;
  return grammar.lexicon().inflect(e.lemma, Category::noun, e.features.with_case(Case::nom));
}

/// For a passive with a PP on the subject, the hierarchical and linear rules
/// must front different nouns. False when the object noun and the PP noun
/// share a nominative surface.
inline bool passive_rules_diverge(const GrammarSpec& grammar, const SentenceTree& tree) {
  if (tree.spec.task != Task::passiv || tree.spec.modifier != Modifier::on_subject) return true;
  const auto nps = tree.bare_nps();
  const Node* object = tree.object_np();
  if (nps.size() < 2 || !object) return true;
  return nominative_noun(grammar, *object->head()) != nominative_noun(grammar, *nps[1]);
}

struct SampleOptions {
  std::size_t max_attempts = 200;
};

/// Samples a declarative/active sentence of the given structure. Samples are
/// redrawn until the auxiliaries are distinguishable, the passive rules
/// diverge where they should, and the tokens have exactly one parse.
inline SentenceTree sample_sentence(const GrammarSpec& grammar, const StructureSpec& spec, std::uint64_t seed,
                                    const SampleOptions& options = {}) {
  spec.validate();
  const auto root = grammar.root(spec);
  if (!root) throw SpecError("grammar for '" + std::string(to_string(grammar.language())) + "' has no root for " + spec.name());
  Rng rng(seed);
  Derivation engine(grammar);
  for (std::size_t attempt = 0; attempt < options.max_attempts; ++attempt) {
    auto node = engine.generate(*root, rng);
    if (!node) throw SpecError("root " + root_symbol(spec) + " derives no sentence");
    assign_spans(*node);
    SentenceTree tree{grammar.language(), spec, Form::declarative, std::move(*node)};
    if (!auxiliaries_distinguishable(tree) || !passive_rules_diverge(grammar, tree)) continue;
    const Tokens tokens = tree.tokens();
    const auto parses = parse_all(grammar, tokens, Form::declarative, 2);
    if (parses.empty()) throw InvariantViolation("sampled sentence does not parse: " + join(tokens));
    if (parses.size() > 1) continue;
    if (parses.front().spec != spec) {
      throw InvariantViolation("sampled " + spec.name() + " sentence parses as " + parses.front().spec.name() + ": " +
                               join(tokens));
    }
    return tree;
  }
  throw InsufficientLexiconError("no acceptable " + spec.name() + " sentence after " +
                                 std::to_string(options.max_attempts) + " attempts");
}

}  // namespace syntrans
