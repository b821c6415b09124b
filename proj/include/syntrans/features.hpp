#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "syntrans/errors.hpp"

namespace syntrans {

enum class Language { en, de };
enum class Number { none, sg, pl };
enum class Case { none, nom, acc, dat };
enum class Gender { none, masc, fem, neut };
enum class Polarity { none, pos, neg };
enum class VerbForm { none, finite, infinitive, past_participle, preterite };
enum class Category { det, noun, vtrans, vintrans, aux, modal, prep, relpron, negation };

/// Spelling tables used by to_string / parse_enum. The first name is
/// canonical; later names are accepted aliases.
template <typename E>
struct EnumNames;

template <>
struct EnumNames<Language> {
  static constexpr std::array<std::pair<Language, std::string_view>, 2> table{
      {{Language::en, "en"}, {Language::de, "de"}}};
};
template <>
struct EnumNames<Number> {
  static constexpr std::array<std::pair<Number, std::string_view>, 3> table{
      {{Number::none, "none"}, {Number::sg, "sg"}, {Number::pl, "pl"}}};
};
template <>
struct EnumNames<Case> {
  static constexpr std::array<std::pair<Case, std::string_view>, 4> table{
      {{Case::none, "none"}, {Case::nom, "nom"}, {Case::acc, "acc"}, {Case::dat, "dat"}}};
};
template <>
struct EnumNames<Gender> {
  static constexpr std::array<std::pair<Gender, std::string_view>, 4> table{
      {{Gender::none, "none"}, {Gender::masc, "masc"}, {Gender::fem, "fem"}, {Gender::neut, "neut"}}};
};
template <>
struct EnumNames<Polarity> {
  static constexpr std::array<std::pair<Polarity, std::string_view>, 3> table{
      {{Polarity::none, "none"}, {Polarity::pos, "pos"}, {Polarity::neg, "neg"}}};
};
template <>
struct EnumNames<VerbForm> {
  static constexpr std::array<std::pair<VerbForm, std::string_view>, 6> table{
      {{VerbForm::none, "none"},
       {VerbForm::finite, "finite"},
       {VerbForm::infinitive, "infinitive"},
       {VerbForm::past_participle, "ppart"},
       {VerbForm::past_participle, "past-participle"},
       {VerbForm::preterite, "preterite"}}};
};
template <>
struct EnumNames<Category> {
  static constexpr std::array<std::pair<Category, std::string_view>, 9> table{
      {{Category::det, "Det"},
       {Category::noun, "Noun"},
       {Category::vtrans, "VTrans"},
       {Category::vintrans, "VIntrans"},
       {Category::aux, "Aux"},
       {Category::modal, "Modal"},
       {Category::prep, "Prep"},
       {Category::relpron, "RelPron"},
       {Category::negation, "Negation"}}};
};

template <typename E>
constexpr std::string_view to_string(E value) {
  for (const auto& [v, name] : EnumNames<E>::table) {
    if (v == value) return name;
  }
  return "?";
}

template <typename E>
constexpr std::optional<E> try_parse_enum(std::string_view name) {
  for (const auto& [v, n] : EnumNames<E>::table) {
    if (n == name) return v;
  }
  return std::nullopt;
}

template <typename E>
E parse_enum(std::string_view name, std::string_view what) {
  if (auto v = try_parse_enum<E>(name)) return *v;
  throw Error("unknown " + std::string(what) + " '" + std::string(name) + "'");
}

/// Morphosyntactic features of a lexical item. `none` marks a feature that
/// does not apply (English case and gender, polarity outside English have/has).
struct FeatureBundle {
  Number number = Number::none;
  Case grammatical_case = Case::none;
  Gender gender = Gender::none;
  Polarity polarity = Polarity::none;
  VerbForm verbform = VerbForm::none;

  auto operator<=>(const FeatureBundle&) const = default;

  FeatureBundle with_case(Case c) const {
    FeatureBundle f = *this;
    f.grammatical_case = c;
    return f;
  }

  /// True when every feature set in `query` has the same value here.
  bool matches(const FeatureBundle& query) const {
    return (query.number == Number::none || query.number == number) &&
           (query.grammatical_case == Case::none || query.grammatical_case == grammatical_case) &&
           (query.gender == Gender::none || query.gender == gender) &&
           (query.polarity == Polarity::none || query.polarity == polarity) &&
           (query.verbform == VerbForm::none || query.verbform == verbform);
  }
};

/// Comma-separated key=value form used in lexicon files, "-" when empty.
inline std::string to_string(const FeatureBundle& f) {
  std::string out;
  auto add = [&](std::string_view key, std::string_view value) {
    if (!out.empty()) out += ',';
    out.append(key).append("=").append(value);
  };
  if (f.number != Number::none) add("num", to_string(f.number));
  if (f.grammatical_case != Case::none) add("case", to_string(f.grammatical_case));
  if (f.gender != Gender::none) add("gen", to_string(f.gender));
  if (f.polarity != Polarity::none) add("pol", to_string(f.polarity));
  if (f.verbform != VerbForm::none) add("vf", to_string(f.verbform));
  return out.empty() ? "-" : out;
}

inline FeatureBundle parse_features(std::string_view text) {
  FeatureBundle f;
  if (text == "-" || text.empty()) return f;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string_view item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw Error("malformed feature '" + std::string(item) + "'");
    std::string_view key = item.substr(0, eq);
    std::string_view value = item.substr(eq + 1);
    if (key == "num") {
      f.number = parse_enum<Number>(value, "number");
    } else if (key == "case") {
      f.grammatical_case = parse_enum<Case>(value, "case");
    } else if (key == "gen") {
      f.gender = parse_enum<Gender>(value, "gender");
    } else if (key == "pol") {
      f.polarity = parse_enum<Polarity>(value, "polarity");
    } else if (key == "vf") {
      f.verbform = parse_enum<VerbForm>(value, "verb form");
    } else {
      throw Error("unknown feature '" + std::string(key) + "'");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return f;
}

}  // namespace syntrans
