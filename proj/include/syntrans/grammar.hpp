#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "syntrans/errors.hpp"
#include "syntrans/lexicon.hpp"
#include "syntrans/structure.hpp"
#include "syntrans/tree.hpp"

namespace syntrans {

enum class SymbolKind { nonterminal, lexical, literal };

struct Symbol {
  std::string name;
  SymbolKind kind = SymbolKind::nonterminal;
  Category category = Category::noun;  // lexical symbols only
};

/// A feature value in a production: an interned constant, or a variable slot
/// local to the production.
struct FeatureTerm {
  bool variable = false;
  int id = -1;
};

struct FeatureConstraint {
  int feature = -1;
  FeatureTerm term;
};

struct SymbolRef {
  int symbol = -1;
  Role role = Role::none;
  std::vector<FeatureConstraint> features;
};

struct Production {
  int lhs = -1;
  std::vector<FeatureConstraint> lhs_features;
  std::vector<SymbolRef> rhs;
  std::vector<std::string> variable_names;
  double weight = 1.0;
  std::size_t line = 0;

  int variable_count() const { return static_cast<int>(variable_names.size()); }
};

/// Feature names a lexical category can be constrained on, in the order
/// GrammarSpec::entry_value expects.
enum LexicalFeature : int { kLemma = 0, kNumber, kCase, kGender, kPolarity, kVerbForm, kLexicalFeatureCount };

/// A feature-constrained context-free grammar over a lexicon. Immutable after
/// construction; safe to share across threads.
class GrammarSpec {
 public:
  /// Loads a grammar file and the lexicon it names.
  static GrammarSpec load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw GrammarError("cannot open grammar file " + path.string());
    return parse(in, path.parent_path(), path.string());
  }

  /// Parses grammar text. A `lexicon` directive is resolved against
  /// `base_dir`; alternatively pass the lexicon directly.
  static GrammarSpec parse(std::istream& in, const std::filesystem::path& base_dir, const std::string& origin,
                           std::optional<Lexicon> lexicon = std::nullopt) {
    GrammarSpec g;
    g.intern_feature("lemma");
    g.intern_feature("num");
    g.intern_feature("case");
    g.intern_feature("gen");
    g.intern_feature("pol");
    g.intern_feature("vf");
    for (const auto& [c, name] : EnumNames<Category>::table) g.intern_symbol(std::string(name), SymbolKind::lexical, c);

    bool have_language = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      Tokens words = split_whitespace(line);
      if (words.empty()) continue;
      const std::string where = origin + ":" + std::to_string(line_no) + ": ";
      try {
        if (words.size() >= 3 && words[1] == "->") {
          g.parse_production(words, line_no);
        } else if (words.size() == 2 && words[0] == "language") {
          g.language_ = parse_enum<Language>(words[1], "language");
          have_language = true;
        } else if (words.size() == 2 && words[0] == "lexicon") {
          if (!lexicon) lexicon = Lexicon::load((base_dir / words[1]).string());
        } else if (words.size() == 2 && words[0] == "agent-marker") {
          g.agent_marker_ = words[1];
        } else if (words.size() == 2 && words[0] == "passive-aux") {
          g.passive_aux_ = words[1];
        } else {
          throw GrammarError("unrecognized line");
        }
      } catch (const GrammarError& e) {
        throw GrammarError(where + e.what());
      } catch (const Error& e) {
        throw GrammarError(where + e.what());
      }
    }
    if (!have_language) throw GrammarError(origin + ": missing 'language' directive");
    if (!lexicon) throw GrammarError(origin + ": no lexicon given");
    g.lexicon_ = std::move(*lexicon);
    g.finish(origin);
    return g;
  }

  Language language() const { return language_; }
  const Lexicon& lexicon() const { return lexicon_; }
  const std::string& agent_marker() const { return agent_marker_; }
  const std::string& passive_aux() const { return passive_aux_; }

  const std::vector<Symbol>& symbols() const { return symbols_; }
  const Symbol& symbol(int id) const { return symbols_.at(static_cast<std::size_t>(id)); }
  const std::vector<Production>& productions() const { return productions_; }
  std::span<const int> productions_for(int symbol) const { return by_lhs_.at(static_cast<std::size_t>(symbol)); }

  std::optional<int> symbol_id(const std::string& name) const {
    auto it = symbol_ids_.find(name);
    if (it == symbol_ids_.end() || symbols_[static_cast<std::size_t>(it->second)].kind == SymbolKind::literal)
      return std::nullopt;
    return it->second;
  }

  const std::string& value_name(int id) const { return values_.at(static_cast<std::size_t>(id)); }
  std::optional<int> value_id(const std::string& v) const {
    auto it = value_ids_.find(v);
    if (it == value_ids_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& feature_name(int id) const { return features_.at(static_cast<std::size_t>(id)); }

  /// Interned value of a lexical feature on a lexicon entry.
  int entry_value(std::size_t entry, int feature) const {
    return entry_values_[entry * kLexicalFeatureCount + static_cast<std::size_t>(feature)];
  }

  /// Fewest tokens any derivation of the symbol yields.
  std::size_t min_yield(int symbol) const { return min_yield_.at(static_cast<std::size_t>(symbol)); }

  /// Root symbols of a sentence form, in declaration order.
  const std::vector<int>& roots(Form form) const { return roots_[static_cast<std::size_t>(form)]; }

  std::optional<int> root(const StructureSpec& spec, Form form = Form::declarative) const {
    return symbol_id(root_symbol(spec, form));
  }

  /// Structure encoded in a root symbol's name.
  StructureSpec root_structure(int symbol) const { return StructureSpec::parse(symbols_.at(symbol).name.substr(2)); }

 private:
  int intern_feature(const std::string& name) {
    auto [it, inserted] = feature_ids_.emplace(name, static_cast<int>(features_.size()));
    if (inserted) features_.push_back(name);
    return it->second;
  }

  int intern_value(const std::string& v) {
    auto [it, inserted] = value_ids_.emplace(v, static_cast<int>(values_.size()));
    if (inserted) values_.push_back(v);
    return it->second;
  }

  int intern_symbol(const std::string& name, SymbolKind kind, Category category = Category::noun) {
    const std::string key = kind == SymbolKind::literal ? "\"" + name + "\"" : name;
    auto [it, inserted] = symbol_ids_.emplace(key, static_cast<int>(symbols_.size()));
    if (inserted) {
      symbols_.push_back({name, kind, category});
      by_lhs_.emplace_back();
    }
    return it->second;
  }

  /// Lexical feature values are canonicalized so "past-participle" and
  /// "ppart" intern to the same id.
  std::string canonical_value(int feature, const std::string& v) const {
    switch (feature) {
      case kNumber: return std::string(to_string(parse_enum<Number>(v, "number")));
      case kCase: return std::string(to_string(parse_enum<Case>(v, "case")));
      case kGender: return std::string(to_string(parse_enum<Gender>(v, "gender")));
      case kPolarity: return std::string(to_string(parse_enum<Polarity>(v, "polarity")));
      case kVerbForm: return std::string(to_string(parse_enum<VerbForm>(v, "verb form")));
      default: return v;
    }
  }

  std::vector<FeatureConstraint> parse_feature_list(std::string_view text, std::vector<std::string>& vars) {
    std::vector<FeatureConstraint> out;
    if (text.empty()) return out;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = text.find(',', start);
      std::string item(text.substr(start, comma == text.npos ? text.npos : comma - start));
      std::size_t eq = item.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
        throw GrammarError("malformed feature constraint '" + item + "'");
      FeatureConstraint fc;
      fc.feature = intern_feature(item.substr(0, eq));
      for (const FeatureConstraint& prev : out) {
        if (prev.feature == fc.feature) throw GrammarError("feature '" + item.substr(0, eq) + "' given twice");
      }
      std::string value = item.substr(eq + 1);
      if (value[0] == '$') {
        auto it = std::find(vars.begin(), vars.end(), value.substr(1));
        if (it == vars.end()) {
          vars.push_back(value.substr(1));
          it = vars.end() - 1;
        }
        fc.term = {true, static_cast<int>(it - vars.begin())};
      } else {
        fc.term = {false, intern_value(canonical_value(fc.feature, value))};
      }
      out.push_back(fc);
      if (comma == text.npos) break;
      start = comma + 1;
    }
    return out;
  }

  SymbolRef parse_symbol(const std::string& word, std::vector<std::string>& vars, bool is_lhs) {
    SymbolRef ref;
    if (word.size() >= 2 && word.front() == '"' && word.back() == '"') {
      if (is_lhs) throw GrammarError("literal on left-hand side");
      ref.symbol = intern_symbol(word.substr(1, word.size() - 2), SymbolKind::literal);
      return ref;
    }
    std::string rest = word;
    std::string feats;
    if (auto lb = rest.find('['); lb != std::string::npos) {
      if (rest.back() != ']') throw GrammarError("unterminated feature list in '" + word + "'");
      feats = rest.substr(lb + 1, rest.size() - lb - 2);
      rest = rest.substr(0, lb);
    }
    if (auto at = rest.find('@'); at != std::string::npos) {
      if (is_lhs) throw GrammarError("role on left-hand side");
      ref.role = parse_enum<Role>(rest.substr(at + 1), "role");
      rest = rest.substr(0, at);
    }
    if (rest.empty()) throw GrammarError("empty symbol name in '" + word + "'");
    auto it = symbol_ids_.find(rest);
    ref.symbol = it != symbol_ids_.end() ? it->second : intern_symbol(rest, SymbolKind::nonterminal);
    if (is_lhs && symbols_[ref.symbol].kind != SymbolKind::nonterminal)
      throw GrammarError("lexical category '" + rest + "' on left-hand side");
    ref.features = parse_feature_list(feats, vars);
    return ref;
  }

  void parse_production(const Tokens& words, std::size_t line_no) {
    Production p;
    p.line = line_no;
    std::size_t end = words.size();
    if (words.back().front() == '{') {
      const std::string& w = words.back();
      if (w.size() < 10 || w.compare(0, 8, "{weight=") != 0 || w.back() != '}')
        throw GrammarError("malformed production option '" + w + "'");
      try {
        p.weight = std::stod(w.substr(8, w.size() - 9));
      } catch (const std::exception&) {
        throw GrammarError("bad weight '" + w + "'");
      }
      if (p.weight < 0) throw GrammarError("negative weight");
      --end;
    }
    SymbolRef lhs = parse_symbol(words[0], p.variable_names, true);
    p.lhs = lhs.symbol;
    p.lhs_features = std::move(lhs.features);
    for (std::size_t i = 2; i < end; ++i) p.rhs.push_back(parse_symbol(words[i], p.variable_names, false));
    if (p.rhs.empty()) throw GrammarError("empty right-hand side");
    by_lhs_[static_cast<std::size_t>(p.lhs)].push_back(static_cast<int>(productions_.size()));
    productions_.push_back(std::move(p));
  }

  void finish(const std::string& origin) {
    auto fail = [&](const Production& p, const std::string& msg) {
      throw GrammarError(origin + ":" + std::to_string(p.line) + ": " + msg);
    };
    // Every referenced nonterminal is defined; constraints name real features.
    for (const Production& p : productions_) {
      for (const SymbolRef& r : p.rhs) {
        const Symbol& s = symbols_[r.symbol];
        if (s.kind == SymbolKind::nonterminal) {
          if (by_lhs_[r.symbol].empty()) fail(p, "nonterminal '" + s.name + "' has no productions");
          for (const FeatureConstraint& fc : r.features) {
            for (int q : by_lhs_[r.symbol]) {
              const auto& lf = productions_[q].lhs_features;
              bool found = std::any_of(lf.begin(), lf.end(), [&](const FeatureConstraint& x) { return x.feature == fc.feature; });
              if (!found) {
                fail(p, "feature '" + features_[fc.feature] + "' on '" + s.name + "' is not declared by its production at line " +
                            std::to_string(productions_[q].line));
              }
            }
          }
        } else if (s.kind == SymbolKind::lexical) {
          for (const FeatureConstraint& fc : r.features) {
            if (fc.feature >= kLexicalFeatureCount)
              fail(p, "feature '" + features_[fc.feature] + "' does not exist on lexical category '" + s.name + "'");
          }
        }
      }
    }
    validate_lexicon(origin);

    // Interned lexical feature values for every entry.
    entry_values_.resize(lexicon_.size() * kLexicalFeatureCount);
    for (std::size_t i = 0; i < lexicon_.size(); ++i) {
      const LexicalEntry& e = lexicon_.entry(i);
      int* v = &entry_values_[i * kLexicalFeatureCount];
      v[kLemma] = intern_value(e.lemma);
      v[kNumber] = intern_value(std::string(to_string(e.features.number)));
      v[kCase] = intern_value(std::string(to_string(e.features.grammatical_case)));
      v[kGender] = intern_value(std::string(to_string(e.features.gender)));
      v[kPolarity] = intern_value(std::string(to_string(e.features.polarity)));
      v[kVerbForm] = intern_value(std::string(to_string(e.features.verbform)));
    }

    // Minimum yields by fixed point; unproductive nonterminals are errors.
    constexpr std::size_t inf = std::numeric_limits<std::size_t>::max();
    min_yield_.assign(symbols_.size(), inf);
    for (std::size_t s = 0; s < symbols_.size(); ++s) {
      if (symbols_[s].kind != SymbolKind::nonterminal) min_yield_[s] = 1;
    }
    for (bool changed = true; changed;) {
      changed = false;
      for (const Production& p : productions_) {
        std::size_t total = 0;
        for (const SymbolRef& r : p.rhs) {
          if (min_yield_[r.symbol] == inf) {
            total = inf;
            break;
          }
          total += min_yield_[r.symbol];
        }
        if (total < min_yield_[p.lhs]) {
          min_yield_[p.lhs] = total;
          changed = true;
        }
      }
    }
    for (std::size_t s = 0; s < symbols_.size(); ++s) {
      if (symbols_[s].kind == SymbolKind::nonterminal && min_yield_[s] == inf)
        throw GrammarError(origin + ": nonterminal '" + symbols_[s].name + "' derives no finite sentence");
    }

    // Roots: S./Q./P. followed by a structure name.
    for (std::size_t s = 0; s < symbols_.size(); ++s) {
      const std::string& name = symbols_[s].name;
      if (symbols_[s].kind != SymbolKind::nonterminal || name.size() < 3 || name[1] != '.') continue;
      std::optional<Form> form;
      if (name[0] == 'S') form = Form::declarative;
      if (name[0] == 'Q') form = Form::question;
      if (name[0] == 'P') form = Form::passive;
      if (!form) continue;
      try {
        StructureSpec::parse(name.substr(2));
      } catch (const SpecError& e) {
        throw GrammarError(origin + ": root '" + name + "': " + e.what());
      }
      roots_[static_cast<std::size_t>(*form)].push_back(static_cast<int>(s));
    }
    if (roots_[0].empty()) throw GrammarError(origin + ": no declarative roots (S.<structure>)");
  }

  void validate_lexicon(const std::string& origin) const {
    for (const LexicalEntry& e : lexicon_.entries()) {
      const FeatureBundle& f = e.features;
      auto fail = [&](const std::string& msg) {
        throw GrammarError(origin + ": lexicon entry " + describe_key(e.lemma, e.category, f) + ": " + msg);
      };
      if (language_ == Language::en) {
        if (f.grammatical_case != Case::none || f.gender != Gender::none) fail("English entries carry no case or gender");
        if (f.polarity != Polarity::none && !(e.category == Category::aux && e.lemma == "have"))
          fail("polarity is only marked on the auxiliary 'have'");
      } else {
        if (f.polarity != Polarity::none) fail("German entries carry no polarity");
        bool nominal = e.category == Category::det || e.category == Category::noun || e.category == Category::relpron;
        if (nominal && (f.grammatical_case == Case::none || f.gender == Gender::none))
          fail("German nominal entries need case and gender");
      }
    }
  }

  Language language_ = Language::en;
  Lexicon lexicon_;
  std::string agent_marker_;
  std::string passive_aux_;

  std::vector<Symbol> symbols_;
  std::unordered_map<std::string, int> symbol_ids_;
  std::vector<std::vector<int>> by_lhs_;
  std::vector<Production> productions_;
  std::vector<std::string> features_;
  std::unordered_map<std::string, int> feature_ids_;
  std::vector<std::string> values_;
  std::unordered_map<std::string, int> value_ids_;
  std::vector<int> entry_values_;
  std::vector<std::size_t> min_yield_;
  std::array<std::vector<int>, 3> roots_;
};

/// Directory holding the shipped grammar and lexicon files: $SYNTRANS_DATA_DIR
/// if set, else the directory compiled in by the build.
inline std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("SYNTRANS_DATA_DIR"); env && *env) return env;
#ifdef SYNTRANS_DEFAULT_DATA_DIR
  return SYNTRANS_DEFAULT_DATA_DIR;
#else
  return "data";
#endif
}

inline GrammarSpec load_grammar(Language lang, const std::filesystem::path& data_dir = {}) {
  const std::filesystem::path dir = data_dir.empty() ? default_data_dir() : data_dir;
  return GrammarSpec::load(dir / (std::string(to_string(lang)) + ".grammar"));
}

}  // namespace syntrans
