#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "syntrans/errors.hpp"
#include "syntrans/features.hpp"
#include "syntrans/text.hpp"

namespace syntrans {

struct LexicalEntry {
  std::string lemma;
  Category category = Category::noun;
  FeatureBundle features;
  std::string surface;
  /// Relative sampling weight; 0 keeps the entry parseable but never sampled.
  double weight = 1.0;

  auto key() const { return std::make_tuple(lemma, category, features); }
};

inline std::string describe_key(std::string_view lemma, Category category, const FeatureBundle& features) {
  return "(" + std::string(lemma) + ", " + std::string(to_string(category)) + ", {" + to_string(features) + "})";
}

/// Closed lookup table from (lemma, category, features) to surface form.
/// All inflection lives here; nothing is synthesized by rule.
class Lexicon {
 public:
  void add(LexicalEntry entry) {
    if (entry.surface.empty()) throw GrammarError("empty surface for " + describe(entry));
    for (char c : entry.surface) {
      if (is_space(c)) throw GrammarError("whitespace in surface '" + entry.surface + "'");
    }
    if (to_lower(entry.surface) != entry.surface) {
      throw GrammarError("surface '" + entry.surface + "' is not lowercase");
    }
    auto [it, inserted] = index_.emplace(entry.key(), entries_.size());
    if (!inserted) throw GrammarError("duplicate lexicon key " + describe(entry));
    by_category_[static_cast<std::size_t>(entry.category)].push_back(entries_.size());
    by_surface_[entry.surface].push_back(entries_.size());
    entries_.push_back(std::move(entry));
  }

  std::span<const LexicalEntry> entries() const { return entries_; }
  const LexicalEntry& entry(std::size_t i) const { return entries_.at(i); }
  std::size_t size() const { return entries_.size(); }

  std::span<const std::size_t> by_category(Category c) const {
    return by_category_[static_cast<std::size_t>(c)];
  }

  std::span<const std::size_t> by_surface(const std::string& token) const {
    auto it = by_surface_.find(token);
    if (it == by_surface_.end()) return {};
    return it->second;
  }

  const LexicalEntry* find(const std::string& lemma, Category category, const FeatureBundle& features) const {
    auto it = index_.find(std::make_tuple(lemma, category, features));
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  /// Surface form for a key. Features left at `none` in the query act as
  /// wildcards, so ("have", Aux, {pl, pos}) finds the finite "have" entry.
  /// Throws LexiconGapError when nothing matches and when the matches
  /// disagree on the surface.
  std::string inflect(const std::string& lemma, Category category, const FeatureBundle& features) const {
    if (const LexicalEntry* exact = find(lemma, category, features)) return exact->surface;
    const std::string* surface = nullptr;
    for (std::size_t i : by_category(category)) {
      const LexicalEntry& e = entries_[i];
      if (e.lemma != lemma || !e.features.matches(features)) continue;
      if (surface && *surface != e.surface) {
        throw LexiconGapError("ambiguous lexicon key " + describe_key(lemma, category, features) + ": '" +
                              *surface + "' vs '" + e.surface + "'");
      }
      surface = &e.surface;
    }
    if (!surface) throw LexiconGapError("no lexicon entry for " + describe_key(lemma, category, features));
    return *surface;
  }

  bool has_category(const std::string& token, Category c) const {
    for (std::size_t i : by_surface(token)) {
      if (entries_[i].category == c) return true;
    }
    return false;
  }

  /// Finite auxiliaries and modals: the tokens a question can front.
  bool is_auxiliary(const std::string& token) const {
    return has_category(token, Category::aux) || has_category(token, Category::modal);
  }

  /// Parses the whitespace-separated format: lemma category features surface [weight].
  static Lexicon parse(std::istream& in, const std::string& origin = "<lexicon>") {
    Lexicon lex;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      Tokens cols = split_whitespace(line);
      if (cols.empty()) continue;
      auto where = [&] { return origin + ":" + std::to_string(line_no) + ": "; };
      if (cols.size() != 4 && cols.size() != 5) {
        throw GrammarError(where() + "expected 4 or 5 columns, got " + std::to_string(cols.size()));
      }
      LexicalEntry e;
      e.lemma = cols[0];
      try {
        e.category = parse_enum<Category>(cols[1], "category");
        e.features = parse_features(cols[2]);
      } catch (const Error& err) {
        throw GrammarError(where() + err.what());
      }
      e.surface = cols[3];
      if (cols.size() == 5) {
        try {
          e.weight = std::stod(cols[4]);
        } catch (const std::exception&) {
          throw GrammarError(where() + "bad weight '" + cols[4] + "'");
        }
        if (e.weight < 0) throw GrammarError(where() + "negative weight");
      }
      try {
        lex.add(std::move(e));
      } catch (const GrammarError& err) {
        throw GrammarError(where() + err.what());
      }
    }
    return lex;
  }

  static Lexicon load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GrammarError("cannot open lexicon file " + path);
    return parse(in, path);
  }

 private:
  using Key = std::tuple<std::string, Category, FeatureBundle>;

  static std::string describe(const LexicalEntry& e) { return describe_key(e.lemma, e.category, e.features); }

  std::vector<LexicalEntry> entries_;
  std::map<Key, std::size_t> index_;
  std::array<std::vector<std::size_t>, 9> by_category_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_surface_;
};

}  // namespace syntrans
