#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "syntrans/lexicon.hpp"
#include "syntrans/structure.hpp"

namespace syntrans {

/// Grammatical role a grammar annotation assigns to a constituent.
enum class Role { none, subject, object, matrix_aux, matrix_verb, modifier, rc_aux, head };

template <>
struct EnumNames<Role> {
  static constexpr std::array<std::pair<Role, std::string_view>, 8> table{
      {{Role::none, "none"},
       {Role::subject, "subj"},
       {Role::object, "obj"},
       {Role::matrix_aux, "aux"},
       {Role::matrix_verb, "verb"},
       {Role::modifier, "mod"},
       {Role::rc_aux, "rcaux"},
       {Role::head, "head"}}};
};

/// Half-open token range.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  bool contains(const Span& o) const { return o.begin >= begin && o.end <= end; }
  bool operator==(const Span&) const = default;
};

struct Node {
  enum class Kind { nonterminal, lexical, literal };

  Kind kind = Kind::nonterminal;
  std::string label;  // nonterminal name, category name, or the literal itself
  Role role = Role::none;
  std::vector<std::pair<std::string, std::string>> features;  // resolved nonterminal features
  std::optional<LexicalEntry> entry;                          // lexical leaves only
  std::string token;                                          // leaves only
  std::vector<Node> children;
  Span span;

  bool is_leaf() const { return kind != Kind::nonterminal; }

  /// First node in preorder (including this one) satisfying `pred`.
  const Node* find_if(const std::function<bool(const Node&)>& pred) const {
    if (pred(*this)) return this;
    for (const Node& c : children) {
      if (const Node* hit = c.find_if(pred)) return hit;
    }
    return nullptr;
  }

  const Node* find(Role r) const {
    return find_if([r](const Node& n) { return n.role == r; });
  }

  void for_each(const std::function<void(const Node&)>& fn) const {
    fn(*this);
    for (const Node& c : children) c.for_each(fn);
  }

  /// Lexical leaves in order.
  std::vector<const Node*> leaves() const {
    std::vector<const Node*> out;
    for_each([&](const Node& n) {
      if (n.is_leaf()) out.push_back(&n);
    });
    return out;
  }

  /// A determiner + noun constituent with nothing else attached.
  bool is_bare_np() const {
    return kind == Kind::nonterminal && children.size() == 2 && children[0].entry &&
           children[0].entry->category == Category::det && children[1].entry &&
           children[1].entry->category == Category::noun;
  }

  const Node* head() const {
    if (is_bare_np()) return this;
    for (const Node& c : children) {
      if (c.role == Role::head) return &c;
    }
    return nullptr;
  }

  const Node* noun() const {
    const Node* h = head();
    return h ? &h->children[1] : nullptr;
  }
};

/// Assigns token spans to every node in preorder; returns the end offset.
inline std::size_t assign_spans(Node& node, std::size_t begin = 0) {
  node.span.begin = begin;
  if (node.is_leaf()) {
    node.span.end = begin + 1;
    return node.span.end;
  }
  std::size_t pos = begin;
  for (Node& c : node.children) pos = assign_spans(c, pos);
  node.span.end = pos;
  return pos;
}

/// A derivation of one sentence with its role-marked constituents.
struct SentenceTree {
  Language language = Language::en;
  StructureSpec spec;
  Form form = Form::declarative;
  Node root;

  Tokens tokens() const {
    Tokens out;
    for (const Node* leaf : root.leaves()) out.push_back(leaf->token);
    return out;
  }

  const Node* subject_np() const { return root.find(Role::subject); }
  const Node* object_np() const { return root.find(Role::object); }
  const Node* matrix_aux() const { return root.find(Role::matrix_aux); }
  const Node* matrix_verb() const { return root.find(Role::matrix_verb); }
  const Node* modifier() const { return root.find(Role::modifier); }
  const Node* rc_internal_aux() const { return root.find(Role::rc_aux); }

  /// Bare noun phrases in linear order, including those inside modifiers.
  std::vector<const Node*> bare_nps() const {
    std::vector<const Node*> out;
    root.for_each([&](const Node& n) {
      if (n.is_bare_np()) out.push_back(&n);
    });
    return out;
  }

  /// The constituent a modifier attaches to (subject or object NP), if any.
  const Node* modifier_site() const {
    for (const Node* np : {subject_np(), object_np()}) {
      if (!np) continue;
      for (const Node& c : np->children) {
        if (c.role == Role::modifier) return np;
      }
    }
    return nullptr;
  }
};

}  // namespace syntrans
