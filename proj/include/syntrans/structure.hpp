#pragma once

#include <compare>
#include <string>
#include <vector>

#include "syntrans/errors.hpp"
#include "syntrans/features.hpp"
#include "syntrans/text.hpp"

namespace syntrans {

enum class Task { quest, passiv, decl };
enum class Modifier { none, on_object, on_subject };
enum class ModifierKind { none, rc, pp };
enum class Transitivity { trans, intrans };
enum class RcGap { none, subject_gap, object_gap };

template <>
struct EnumNames<Task> {
  static constexpr std::array<std::pair<Task, std::string_view>, 3> table{
      {{Task::quest, "quest"}, {Task::passiv, "passiv"}, {Task::decl, "decl"}}};
};
template <>
struct EnumNames<Modifier> {
  static constexpr std::array<std::pair<Modifier, std::string_view>, 5> table{
      {{Modifier::none, "none"},
       {Modifier::on_object, "obj"},
       {Modifier::on_subject, "subj"},
       {Modifier::on_object, "on-object"},
       {Modifier::on_subject, "on-subject"}}};
};
template <>
struct EnumNames<ModifierKind> {
  static constexpr std::array<std::pair<ModifierKind, std::string_view>, 3> table{
      {{ModifierKind::none, "none"}, {ModifierKind::rc, "rc"}, {ModifierKind::pp, "pp"}}};
};
template <>
struct EnumNames<Transitivity> {
  static constexpr std::array<std::pair<Transitivity, std::string_view>, 2> table{
      {{Transitivity::trans, "trans"}, {Transitivity::intrans, "intrans"}}};
};
template <>
struct EnumNames<RcGap> {
  static constexpr std::array<std::pair<RcGap, std::string_view>, 5> table{
      {{RcGap::none, "none"},
       {RcGap::subject_gap, "sg"},
       {RcGap::object_gap, "og"},
       {RcGap::subject_gap, "subject-gap"},
       {RcGap::object_gap, "object-gap"}}};
};

/// Which structural template a sentence instantiates: the task it is built
/// for, where its single modifier (if any) attaches, and the modifier's shape.
struct StructureSpec {
  Task task = Task::quest;
  Modifier modifier = Modifier::none;
  ModifierKind kind = ModifierKind::none;
  Transitivity transitivity = Transitivity::trans;
  RcGap gap = RcGap::none;

  auto operator<=>(const StructureSpec&) const = default;

  /// Throws SpecError naming the first violated constraint.
  void validate() const {
    if (task == Task::decl) throw SpecError("structure task must be quest or passiv, not decl");
    if (modifier == Modifier::none) {
      if (kind != ModifierKind::none) throw SpecError("modifier kind given without a modifier");
      if (gap != RcGap::none) throw SpecError("relative-clause gap given without a relative clause");
    } else {
      if (task == Task::quest && kind != ModifierKind::rc)
        throw SpecError("question formation modifiers must be relative clauses (quest => rc)");
      if (task == Task::passiv && kind != ModifierKind::pp)
        throw SpecError("passivization modifiers must be prepositional phrases (passiv => pp)");
      if (kind == ModifierKind::rc && gap == RcGap::none)
        throw SpecError("relative clause needs a gap type (subject-gap or object-gap)");
      if (kind == ModifierKind::pp && gap != RcGap::none)
        throw SpecError("prepositional phrases have no gap type");
    }
    if (task == Task::passiv && transitivity != Transitivity::trans)
      throw SpecError("passivization requires a transitive verb (passiv => trans)");
    if (modifier == Modifier::on_object && transitivity != Transitivity::trans)
      throw SpecError("a modifier on the object requires a transitive verb");
  }

  bool valid() const {
    try {
      validate();
      return true;
    } catch (const SpecError&) {
      return false;
    }
  }

  /// Canonical dotted name, e.g. "quest.subj.rc.og.intrans" or "passiv.obj.pp".
  std::string name() const {
    std::string out(to_string(task));
    out += '.';
    out += to_string(modifier);
    if (modifier != Modifier::none) {
      out += '.';
      out += to_string(kind);
      if (kind == ModifierKind::rc) {
        out += '.';
        out += to_string(gap);
      }
    }
    if (task == Task::quest) {
      out += '.';
      out += to_string(transitivity);
    }
    return out;
  }

  static StructureSpec parse(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      std::size_t dot = text.find('.', start);
      parts.emplace_back(text.substr(start, dot == text.npos ? text.npos : dot - start));
      if (dot == text.npos) break;
      start = dot + 1;
    }
    StructureSpec s;
    std::size_t i = 0;
    auto next = [&](std::string_view what) -> const std::string& {
      if (i >= parts.size()) throw SpecError("structure name '" + std::string(text) + "' is missing " + std::string(what));
      return parts[i++];
    };
    try {
      s.task = parse_enum<Task>(next("task"), "task");
      s.modifier = parse_enum<Modifier>(next("modifier"), "modifier");
      if (s.modifier != Modifier::none) {
        s.kind = parse_enum<ModifierKind>(next("modifier kind"), "modifier kind");
        if (s.kind == ModifierKind::rc) s.gap = parse_enum<RcGap>(next("gap"), "gap");
      }
      if (s.task == Task::quest) s.transitivity = parse_enum<Transitivity>(next("transitivity"), "transitivity");
    } catch (const SpecError&) {
      throw;
    } catch (const Error& e) {
      throw SpecError("bad structure name '" + std::string(text) + "': " + e.what());
    }
    if (i != parts.size()) throw SpecError("trailing fields in structure name '" + std::string(text) + "'");
    s.validate();
    return s;
  }
};

/// Every valid structure for a task, in canonical order.
inline std::vector<StructureSpec> all_structures(Task task) {
  std::vector<StructureSpec> out;
  const ModifierKind kind = task == Task::quest ? ModifierKind::rc : ModifierKind::pp;
  for (Modifier m : {Modifier::none, Modifier::on_object, Modifier::on_subject}) {
    std::vector<RcGap> gaps = (m != Modifier::none && kind == ModifierKind::rc)
                                  ? std::vector<RcGap>{RcGap::subject_gap, RcGap::object_gap}
                                  : std::vector<RcGap>{RcGap::none};
    for (RcGap g : gaps) {
      for (Transitivity t : {Transitivity::trans, Transitivity::intrans}) {
        StructureSpec s{task, m, m == Modifier::none ? ModifierKind::none : kind, t, g};
        if (s.valid()) out.push_back(s);
      }
    }
  }
  return out;
}

/// Sentence form a grammar root produces.
enum class Form { declarative, question, passive };

inline char form_prefix(Form f) {
  switch (f) {
    case Form::declarative: return 'S';
    case Form::question: return 'Q';
    case Form::passive: return 'P';
  }
  return 'S';
}

inline std::string root_symbol(const StructureSpec& spec, Form form = Form::declarative) {
  return std::string(1, form_prefix(form)) + "." + spec.name();
}

}  // namespace syntrans
