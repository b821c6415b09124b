#pragma once

// Top-down derivation search over a GrammarSpec. The same engine enumerates
// parses of a token sequence and draws random derivations for generation.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "syntrans/grammar.hpp"
#include "syntrans/random.hpp"
#include "syntrans/tree.hpp"

namespace syntrans {
namespace detail {

/// Union-find over feature variables with an undo trail, so alternatives can
/// be tried and retracted in stack order.
class Bindings {
 public:
  struct Mark {
    std::size_t trail;
    std::size_t size;
  };

  Mark mark() const { return {trail_.size(), parent_.size()}; }

  void undo(Mark m) {
    while (trail_.size() > m.trail) {
      const Saved& s = trail_.back();
      parent_[s.index] = s.parent;
      value_[s.index] = s.value;
      trail_.pop_back();
    }
    parent_.resize(m.size);
    value_.resize(m.size);
  }

  int alloc(int n) {
    const int base = static_cast<int>(parent_.size());
    for (int i = 0; i < n; ++i) {
      parent_.push_back(base + i);
      value_.push_back(-1);
    }
    return base;
  }

  int find(int v) const {
    while (parent_[v] != v) v = parent_[v];
    return v;
  }

  /// Interned value of a term, or -1 for an unbound variable.
  int value(FeatureTerm t) const { return t.variable ? value_[find(t.id)] : t.id; }

  bool unify(FeatureTerm a, FeatureTerm b) {
    if (!a.variable && !b.variable) return a.id == b.id;
    if (!a.variable) std::swap(a, b);
    const int ra = find(a.id);
    if (!b.variable) {
      if (value_[ra] >= 0) return value_[ra] == b.id;
      save(ra);
      value_[ra] = b.id;
      return true;
    }
    const int rb = find(b.id);
    if (ra == rb) return true;
    const int va = value_[ra];
    const int vb = value_[rb];
    if (va >= 0 && vb >= 0) return va == vb;
    save(ra);
    parent_[ra] = rb;
    if (vb < 0 && va >= 0) {
      save(rb);
      value_[rb] = va;
    }
    return true;
  }

 private:
  struct Saved {
    int index;
    int parent;
    int value;
  };

  void save(int i) { trail_.push_back({i, parent_[i], value_[i]}); }

  std::vector<int> parent_;
  std::vector<int> value_;
  std::vector<Saved> trail_;
};

struct Item {
  int symbol;
  Role role;
  std::vector<FeatureConstraint> features;  // terms are global variable ids
};

struct AgendaCell;
using Agenda = std::shared_ptr<const AgendaCell>;

/// Persistent stack of symbols still to expand.
struct AgendaCell {
  Item item;
  Agenda next;
  std::size_t min_yield;
};

inline std::size_t agenda_min_yield(const Agenda& a) { return a ? a->min_yield : 0; }

/// One decision in preorder: a production for a nonterminal, or an entry for
/// a lexical symbol. Literals record a placeholder.
struct Choice {
  int production = -1;
  int var_base = 0;
  std::size_t entry = static_cast<std::size_t>(-1);
};

}  // namespace detail

class Derivation {
 public:
  explicit Derivation(const GrammarSpec& grammar) : g_(grammar) {}

  /// Parses `tokens` from `root`; returns up to `limit` trees in the order the
  /// productions are declared.
  std::vector<Node> parse(std::span<const std::string> tokens, int root, std::size_t limit) {
    mode_ = Mode::parse;
    tokens_ = tokens;
    pos_ = 0;
    limit_ = limit;
    results_.clear();
    run(root);
    return std::move(results_);
  }

  /// Draws one derivation from `root`, choosing among alternatives in
  /// proportion to their weights and backtracking on agreement failure.
  /// Returns an empty optional when the root derives nothing samplable.
  std::optional<Node> generate(int root, Rng& rng) {
    mode_ = Mode::generate;
    rng_ = &rng;
    limit_ = 1;
    results_.clear();
    run(root);
    if (results_.empty()) return std::nullopt;
    return std::move(results_.front());
  }

 private:
  enum class Mode { parse, generate };
  static constexpr std::size_t kMaxChoices = 4096;

  void run(int root) {
    root_ = root;
    bindings_ = detail::Bindings();
    choices_.clear();
    detail::Item item{root, Role::none, {}};
    step(std::make_shared<const detail::AgendaCell>(detail::AgendaCell{std::move(item), nullptr, g_.min_yield(root)}));
  }

  /// Returns true once the search should stop.
  bool step(const detail::Agenda& agenda) {
    if (mode_ == Mode::parse && tokens_.size() - pos_ < detail::agenda_min_yield(agenda)) return false;
    if (!agenda) {
      if (mode_ == Mode::parse && pos_ != tokens_.size()) return false;
      std::size_t cursor = 0;
      results_.push_back(build(root_, Role::none, cursor));
      return results_.size() >= limit_;
    }
    if (choices_.size() > kMaxChoices) throw GrammarError("derivation exceeded " + std::to_string(kMaxChoices) + " steps");
    const detail::Item& item = agenda->item;
    const Symbol& sym = g_.symbol(item.symbol);
    switch (sym.kind) {
      case SymbolKind::literal: return step_literal(agenda);
      case SymbolKind::lexical: return step_lexical(agenda);
      case SymbolKind::nonterminal: return step_nonterminal(agenda);
    }
    return false;
  }

  bool step_literal(const detail::Agenda& agenda) {
    const std::string& lit = g_.symbol(agenda->item.symbol).name;
    if (mode_ == Mode::parse) {
      if (tokens_[pos_] != lit) return false;
      ++pos_;
    }
    choices_.push_back({});
    const bool done = step(agenda->next);
    choices_.pop_back();
    if (mode_ == Mode::parse) --pos_;
    return done;
  }

  bool compatible(std::size_t entry, const detail::Item& item) const {
    for (const FeatureConstraint& fc : item.features) {
      const int v = bindings_.value(fc.term);
      if (v >= 0 && v != g_.entry_value(entry, fc.feature)) return false;
    }
    return true;
  }

  bool try_entry(std::size_t entry, const detail::Agenda& agenda) {
    const auto mark = bindings_.mark();
    for (const FeatureConstraint& fc : agenda->item.features) {
      bindings_.unify(fc.term, {false, g_.entry_value(entry, fc.feature)});
    }
    detail::Choice c;
    c.entry = entry;
    choices_.push_back(c);
    if (mode_ == Mode::parse) ++pos_;
    const bool done = step(agenda->next);
    if (mode_ == Mode::parse) --pos_;
    choices_.pop_back();
    bindings_.undo(mark);
    return done;
  }

  bool step_lexical(const detail::Agenda& agenda) {
    const detail::Item& item = agenda->item;
    const Category cat = g_.symbol(item.symbol).category;
    const Lexicon& lex = g_.lexicon();
    if (mode_ == Mode::parse) {
      for (std::size_t e : lex.by_surface(tokens_[pos_])) {
        if (lex.entry(e).category != cat || !compatible(e, item)) continue;
        if (try_entry(e, agenda)) return true;
      }
      return false;
    }
    std::vector<std::size_t> pool;
    std::vector<double> weights;
    for (std::size_t e : lex.by_category(cat)) {
      if (lex.entry(e).weight > 0 && compatible(e, item)) {
        pool.push_back(e);
        weights.push_back(lex.entry(e).weight);
      }
    }
    for (std::size_t left = pool.size(); left > 0; --left) {
      const std::size_t k = weighted_index(*rng_, weights);
      if (try_entry(pool[k], agenda)) return true;
      weights[k] = 0;
    }
    return false;
  }

  bool try_production(int index, const detail::Agenda& agenda) {
    const Production& p = g_.productions()[index];
    const auto mark = bindings_.mark();
    const int base = bindings_.alloc(p.variable_count());
    auto global = [base](FeatureTerm t) { return t.variable ? FeatureTerm{true, base + t.id} : t; };
    bool ok = true;
    for (const FeatureConstraint& want : agenda->item.features) {
      for (const FeatureConstraint& have : p.lhs_features) {
        if (have.feature == want.feature && !bindings_.unify(want.term, global(have.term))) ok = false;
      }
      if (!ok) break;
    }
    bool done = false;
    if (ok) {
      choices_.push_back({index, base, static_cast<std::size_t>(-1)});
      detail::Agenda next = agenda->next;
      for (auto it = p.rhs.rbegin(); it != p.rhs.rend(); ++it) {
        detail::Item child{it->symbol, it->role, {}};
        child.features.reserve(it->features.size());
        for (const FeatureConstraint& fc : it->features) child.features.push_back({fc.feature, global(fc.term)});
        const std::size_t y = g_.min_yield(it->symbol) + detail::agenda_min_yield(next);
        next = std::make_shared<const detail::AgendaCell>(detail::AgendaCell{std::move(child), std::move(next), y});
      }
      done = step(next);
      choices_.pop_back();
    }
    bindings_.undo(mark);
    return done;
  }

  bool step_nonterminal(const detail::Agenda& agenda) {
    const auto prods = g_.productions_for(agenda->item.symbol);
    if (mode_ == Mode::parse) {
      for (int p : prods) {
        if (try_production(p, agenda)) return true;
      }
      return false;
    }
    std::vector<double> weights;
    for (int p : prods) weights.push_back(g_.productions()[p].weight);
    for (std::size_t left = std::count_if(weights.begin(), weights.end(), [](double w) { return w > 0; }); left > 0; --left) {
      const std::size_t k = weighted_index(*rng_, weights);
      if (try_production(prods[k], agenda)) return true;
      weights[k] = 0;
    }
    return false;
  }

  /// Rebuilds the tree for the current complete derivation from the recorded
  /// choices and the final bindings.
  Node build(int symbol, Role role, std::size_t& cursor) const {
    const detail::Choice& c = choices_[cursor++];
    const Symbol& sym = g_.symbol(symbol);
    Node n;
    n.label = sym.name;
    n.role = role;
    if (sym.kind == SymbolKind::literal) {
      n.kind = Node::Kind::literal;
      n.token = sym.name;
      return n;
    }
    if (sym.kind == SymbolKind::lexical) {
      n.kind = Node::Kind::lexical;
      n.entry = g_.lexicon().entry(c.entry);
      n.token = n.entry->surface;
      return n;
    }
    const Production& p = g_.productions()[c.production];
    for (const FeatureConstraint& fc : p.lhs_features) {
      const FeatureTerm t = fc.term.variable ? FeatureTerm{true, c.var_base + fc.term.id} : fc.term;
      const int v = bindings_.value(t);
      n.features.emplace_back(g_.feature_name(fc.feature), v >= 0 ? g_.value_name(v) : std::string());
    }
    for (const SymbolRef& r : p.rhs) n.children.push_back(build(r.symbol, r.role, cursor));
    return n;
  }

  const GrammarSpec& g_;
  Mode mode_ = Mode::parse;
  std::span<const std::string> tokens_;
  std::size_t pos_ = 0;
  Rng* rng_ = nullptr;
  std::size_t limit_ = 1;
  int root_ = 0;
  detail::Bindings bindings_;
  std::vector<detail::Choice> choices_;
  std::vector<Node> results_;
};

}  // namespace syntrans
