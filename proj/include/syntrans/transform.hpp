#pragma once

// Hierarchical and linear transformation oracles. Every oracle records the
// edit steps it performs so the output can be replayed from the input and
// evaluation can locate the moved material.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "syntrans/errors.hpp"
#include "syntrans/grammar.hpp"
#include "syntrans/structure.hpp"
#include "syntrans/tree.hpp"

namespace syntrans {

enum class TransformRule { move_main, move_first, move_object, move_second, identity };

template <>
struct EnumNames<TransformRule> {
  static constexpr std::array<std::pair<TransformRule, std::string_view>, 5> table{
      {{TransformRule::move_main, "move-main"},
       {TransformRule::move_first, "move-first"},
       {TransformRule::move_object, "move-object"},
       {TransformRule::move_second, "move-second"},
       {TransformRule::identity, "identity"}}};
};

inline TransformRule hierarchical_rule(Task t) {
  if (t == Task::quest) return TransformRule::move_main;
  if (t == Task::passiv) return TransformRule::move_object;
  return TransformRule::identity;
}

inline TransformRule linear_rule(Task t) {
  if (t == Task::quest) return TransformRule::move_first;
  if (t == Task::passiv) return TransformRule::move_second;
  return TransformRule::identity;
}

enum class StepKind { front, remove, insert, reinflect, move };

template <>
struct EnumNames<StepKind> {
  static constexpr std::array<std::pair<StepKind, std::string_view>, 5> table{
      {{StepKind::front, "front"},
       {StepKind::remove, "delete"},
       {StepKind::insert, "insert"},
       {StepKind::reinflect, "reinflect"},
       {StepKind::move, "move"}}};
};

/// One edit. `at` indexes the working sequence before the step; `to` is the
/// insertion index after any removal the step makes. `source` is the span of
/// the original input the affected tokens came from (absent for insertions).
struct TraceStep {
  StepKind kind = StepKind::insert;
  Span at;
  std::size_t to = 0;
  Tokens tokens;  // inserted tokens, or new surfaces for reinflect
  std::optional<Span> source;
};

struct TransformResult {
  Tokens output;
  std::vector<TraceStep> trace;
  /// Named constituents located in `output`: "aux", "fronted", "marker",
  /// "agent", "verb", "modifier", depending on the rule.
  std::map<std::string, Span> segments;
};

/// Applies a trace to its input.
inline Tokens replay(Tokens w, const std::vector<TraceStep>& trace) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceStep& s = trace[i];
    auto bad = [&] { return Error("trace step " + std::to_string(i) + " (" + std::string(to_string(s.kind)) + ") out of range"); };
    if (s.kind != StepKind::insert && (s.at.end > w.size() || s.at.begin > s.at.end)) throw bad();
    switch (s.kind) {
      case StepKind::front:
      case StepKind::move: {
        Tokens seg(w.begin() + static_cast<std::ptrdiff_t>(s.at.begin), w.begin() + static_cast<std::ptrdiff_t>(s.at.end));
        w.erase(w.begin() + static_cast<std::ptrdiff_t>(s.at.begin), w.begin() + static_cast<std::ptrdiff_t>(s.at.end));
        if (s.to > w.size()) throw bad();
        w.insert(w.begin() + static_cast<std::ptrdiff_t>(s.to), seg.begin(), seg.end());
        break;
      }
      case StepKind::remove:
        w.erase(w.begin() + static_cast<std::ptrdiff_t>(s.at.begin), w.begin() + static_cast<std::ptrdiff_t>(s.at.end));
        break;
      case StepKind::insert:
        if (s.to > w.size()) throw bad();
        w.insert(w.begin() + static_cast<std::ptrdiff_t>(s.to), s.tokens.begin(), s.tokens.end());
        break;
      case StepKind::reinflect:
        if (s.tokens.size() != s.at.size()) throw bad();
        std::copy(s.tokens.begin(), s.tokens.end(), w.begin() + static_cast<std::ptrdiff_t>(s.at.begin));
        break;
    }
  }
  return w;
}

namespace detail {

/// Token sequence under edit. Each token remembers its input index; inserted
/// tokens get negative ids so they can still be located later.
class Editor {
 public:
  explicit Editor(const Tokens& input) {
    for (std::size_t i = 0; i < input.size(); ++i) items_.push_back({input[i], static_cast<long>(i)});
  }

  std::size_t find(long origin) const {
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (items_[i].origin == origin) return i;
    }
    throw InvariantViolation("editor lost token " + std::to_string(origin));
  }

  /// Current location of a contiguous input span.
  Span locate(Span source) const {
    const std::size_t b = find(static_cast<long>(source.begin));
    for (std::size_t k = 0; k < source.size(); ++k) {
      if (b + k >= items_.size() || items_[b + k].origin != static_cast<long>(source.begin + k))
        throw InvariantViolation("input span no longer contiguous");
    }
    return {b, b + source.size()};
  }

  Span locate_inserted(long id, std::size_t n) const {
    const std::size_t b = find(id);
    return {b, b + n};
  }

  void move(Span source, std::size_t to, StepKind kind = StepKind::move) {
    const Span at = locate(source);
    std::vector<Item> seg(items_.begin() + static_cast<std::ptrdiff_t>(at.begin), items_.begin() + static_cast<std::ptrdiff_t>(at.end));
    items_.erase(items_.begin() + static_cast<std::ptrdiff_t>(at.begin), items_.begin() + static_cast<std::ptrdiff_t>(at.end));
    items_.insert(items_.begin() + static_cast<std::ptrdiff_t>(to), seg.begin(), seg.end());
    trace_.push_back({kind, at, to, {}, source});
  }

  void front(Span source) { move(source, 0, StepKind::front); }

  void remove(Span source) {
    const Span at = locate(source);
    items_.erase(items_.begin() + static_cast<std::ptrdiff_t>(at.begin), items_.begin() + static_cast<std::ptrdiff_t>(at.end));
    trace_.push_back({StepKind::remove, at, 0, {}, source});
  }

  /// Inserts tokens and returns the id of the first one.
  long insert(std::size_t at, const Tokens& tokens) {
    const long first = next_id_;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      items_.insert(items_.begin() + static_cast<std::ptrdiff_t>(at + k), Item{tokens[k], next_id_--});
    }
    trace_.push_back({StepKind::insert, {at, at}, at, tokens, std::nullopt});
    return first;
  }

  void reinflect(std::size_t source_index, const std::string& surface) {
    const Span at = locate({source_index, source_index + 1});
    items_[at.begin].token = surface;
    trace_.push_back({StepKind::reinflect, at, at.begin, {surface}, Span{source_index, source_index + 1}});
  }

  std::size_t size() const { return items_.size(); }

  TransformResult finish(std::map<std::string, Span> segments) const {
    TransformResult r;
    for (const Item& it : items_) r.output.push_back(it.token);
    r.trace = trace_;
    r.segments = std::move(segments);
    return r;
  }

 private:
  struct Item {
    std::string token;
    long origin;
  };
  std::vector<Item> items_;
  std::vector<TraceStep> trace_;
  long next_id_ = -1;
};

inline void require_task(const SentenceTree& tree, Task task, std::string_view rule) {
  if (tree.spec.task != task) {
    throw WrongTaskError(std::string(rule) + " applies to " + std::string(to_string(task)) + " inputs, got a " +
                         std::string(to_string(tree.spec.task)) + " sentence");
  }
}

inline void end_with_question_mark(Editor& ed, const Tokens& input) {
  if (!input.empty() && input.back() == ".") ed.remove({input.size() - 1, input.size()});
  if (input.empty() || input.back() != "?") ed.insert(ed.size(), {"?"});
}

/// Reinflects the determiner and noun of a bare NP to a case (German only).
inline void reinflect_case(Editor& ed, const Lexicon& lex, const Node& bare_np, Case c) {
  for (const Node& leaf : bare_np.children) {
    const LexicalEntry& e = *leaf.entry;
    ed.reinflect(leaf.span.begin, lex.inflect(e.lemma, e.category, e.features.with_case(c)));
  }
}

/// The shared passive construction once the fronted phrase, the agent phrase,
/// the verb and the final period are the only material left.
inline TransformResult passivize(Editor& ed, const GrammarSpec& g, Span fronted, const Node& fronted_head, Span agent,
                                 const Node& agent_head, const Node& verb) {
  const Lexicon& lex = g.lexicon();
  const bool german = g.language() == Language::de;
  ed.front(fronted);
  if (german) reinflect_case(ed, lex, fronted_head, Case::nom);

  FeatureBundle aux_features;
  aux_features.number = fronted_head.children[1].entry->features.number;
  aux_features.verbform = VerbForm::preterite;
  const long aux = ed.insert(fronted.size(), {lex.inflect(g.passive_aux(), Category::aux, aux_features)});

  const LexicalEntry& v = *verb.entry;
  FeatureBundle ppart;
  ppart.verbform = VerbForm::past_participle;
  ed.reinflect(verb.span.begin, lex.inflect(v.lemma, v.category, ppart));

  long marker = 0;
  if (german) {
    marker = ed.insert(ed.find(aux) + 1, {g.agent_marker()});
    reinflect_case(ed, lex, agent_head, Case::dat);
  } else {
    ed.move(verb.span, ed.find(aux) + 1);
    marker = ed.insert(ed.find(aux) + 2, {g.agent_marker()});
  }
  return ed.finish({{"fronted", ed.locate(fronted)},
                    {"aux", ed.locate_inserted(aux, 1)},
                    {"marker", ed.locate_inserted(marker, 1)},
                    {"agent", ed.locate(agent)},
                    {"verb", ed.locate(verb.span)}});
}

/// Outermost constituent whose head is `dp`.
inline const Node* maximal_projection(const Node& root, const Node* dp) {
  return root.find_if([dp](const Node& n) { return n.kind == Node::Kind::nonterminal && n.head() == dp; });
}

}  // namespace detail

/// Fronts the matrix auxiliary and turns the final period into "?".
inline TransformResult quest_hierarchical(const SentenceTree& tree) {
  detail::require_task(tree, Task::quest, "move-main");
  const Node* aux = tree.matrix_aux();
  if (!aux) throw InvariantViolation("quest tree without a matrix auxiliary");
  const Tokens input = tree.tokens();
  detail::Editor ed(input);
  ed.front(aux->span);
  detail::end_with_question_mark(ed, input);
  std::map<std::string, Span> seg{{"aux", {0, 1}}};
  if (const Node* m = tree.modifier()) seg["modifier"] = ed.locate(m->span);
  return ed.finish(std::move(seg));
}

/// Fronts the linearly first auxiliary or modal. Uses only the tokens and the
/// lexicon's category lookup.
inline TransformResult quest_linear(const Tokens& tokens, const Lexicon& lexicon) {
  auto it = std::find_if(tokens.begin(), tokens.end(), [&](const std::string& t) { return lexicon.is_auxiliary(t); });
  if (it == tokens.end()) throw TransformError("no auxiliary in '" + join(tokens) + "'");
  const std::size_t i = static_cast<std::size_t>(it - tokens.begin());
  detail::Editor ed(tokens);
  ed.front({i, i + 1});
  detail::end_with_question_mark(ed, tokens);
  return ed.finish({{"aux", {0, 1}}});
}

/// Fronts the object NP with its modifier, inserts the agreeing passive
/// auxiliary, puts the subject NP in an agent phrase and makes the verb a
/// participle. German NPs are reinflected for case and the participle stays
/// clause-final.
inline TransformResult passiv_hierarchical(const SentenceTree& tree, const GrammarSpec& grammar) {
  detail::require_task(tree, Task::passiv, "move-object");
  const Node* subj = tree.subject_np();
  const Node* obj = tree.object_np();
  const Node* verb = tree.matrix_verb();
  if (!subj || !obj || !verb || !subj->head() || !obj->head()) throw InvariantViolation("passiv tree lacks subject, object or verb");
  detail::Editor ed(tree.tokens());
  return detail::passivize(ed, grammar, obj->span, *obj->head(), subj->span, *subj->head(), *verb);
}

/// Fronts the linearly second bare NP together with anything it heads. The
/// first NP becomes the agent, keeping only modifiers that do not contain the
/// second NP. All other material except the verb and the period is dropped.
inline TransformResult passiv_linear(const SentenceTree& tree, const GrammarSpec& grammar) {
  detail::require_task(tree, Task::passiv, "move-second");
  const auto nps = tree.bare_nps();
  if (nps.size() < 2) throw TransformError("fewer than two noun phrases in '" + join(tree.tokens()) + "'");
  const Node* verb = tree.matrix_verb();
  if (!verb) throw InvariantViolation("passiv tree without a main verb");
  const Node* dp1 = nps[0];
  const Node* dp2 = nps[1];
  const Node* np2 = detail::maximal_projection(tree.root, dp2);
  const Node* np1 = detail::maximal_projection(tree.root, dp1);
  const Span fronted = np2->span;

  // Agent: DP1 plus the NP1 modifiers that stay clear of DP2, when contiguous.
  Span agent = dp1->span;
  for (const Node& c : np1->children) {
    if (c.role != Role::modifier || c.span.contains(dp2->span)) continue;
    if (c.span.begin == agent.end) agent.end = c.span.end;
  }

  const Tokens input = tree.tokens();
  const std::size_t period = input.size() - 1;
  std::vector<Span> drop;
  std::size_t i = 0;
  while (i < input.size()) {
    const bool keep = fronted.contains(i) || agent.contains(i) || verb->span.contains(i) || i == period;
    if (keep) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < input.size() && !(fronted.contains(j) || agent.contains(j) || verb->span.contains(j) || j == period)) ++j;
    drop.push_back({i, j});
    i = j;
  }
  detail::Editor ed(input);
  for (auto it = drop.rbegin(); it != drop.rend(); ++it) ed.remove(*it);
  return detail::passivize(ed, grammar, fronted, *dp2, agent, *dp1, *verb);
}

inline TransformResult identity(const Tokens& tokens) { return {tokens, {}, {}}; }

/// Applies a rule to a parsed sentence. Quest rules need a quest sentence and
/// passiv rules a passiv sentence.
inline TransformResult apply_rule(TransformRule rule, const SentenceTree& tree, const GrammarSpec& grammar) {
  switch (rule) {
    case TransformRule::move_main: return quest_hierarchical(tree);
    case TransformRule::move_first:
      detail::require_task(tree, Task::quest, "move-first");
      return quest_linear(tree.tokens(), grammar.lexicon());
    case TransformRule::move_object: return passiv_hierarchical(tree, grammar);
    case TransformRule::move_second: return passiv_linear(tree, grammar);
    case TransformRule::identity: return identity(tree.tokens());
  }
  throw InvariantViolation("unknown transform rule");
}

}  // namespace syntrans
