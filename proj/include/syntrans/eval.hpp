#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "syntrans/dataset.hpp"
#include "syntrans/errors.hpp"
#include "syntrans/generate.hpp"
#include "syntrans/transform.hpp"

namespace syntrans {

enum class MatchMode { exact, subsequence };

template <>
struct EnumNames<MatchMode> {
  static constexpr std::array<std::pair<MatchMode, std::string_view>, 2> table{
      {{MatchMode::exact, "exact"}, {MatchMode::subsequence, "subsequence"}}};
};

/// True when `needle` occurs in `hay` in order, not necessarily contiguously.
inline bool is_subsequence(const Tokens& needle, const Tokens& hay) {
  std::size_t i = 0;
  for (const std::string& t : hay) {
    if (i < needle.size() && t == needle[i]) ++i;
  }
  return i == needle.size();
}

inline bool sequence_match(const Tokens& pred, const Tokens& target, MatchMode mode = MatchMode::exact) {
  return mode == MatchMode::exact ? pred == target : is_subsequence(target, pred);
}

/// Token position that reveals which rule produced an output: the fronted
/// auxiliary for questions, the fronted noun for passives.
inline std::size_t diagnostic_position(Task task) { return task == Task::passiv ? 1 : 0; }

inline bool diagnostic_match(const Tokens& a, const Tokens& b, Task task) {
  const std::size_t d = diagnostic_position(task);
  return a.size() > d && b.size() > d && a[d] == b[d];
}

namespace detail {

inline double fraction(std::size_t hits, std::size_t n) { return n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0; }

inline void require_aligned(std::size_t a, std::size_t b) {
  if (a != b) {
    throw AlignmentError(std::min(a, b) + 1, "predictions have " + std::to_string(a) + " lines, references have " +
                                                 std::to_string(b));
  }
}

inline double diagnostic_accuracy(const std::vector<Tokens>& preds, const std::vector<Tokens>& targets, Task task) {
  require_aligned(preds.size(), targets.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += diagnostic_match(preds[i], targets[i], task);
  return fraction(hits, preds.size());
}

}  // namespace detail

/// Fraction of pairs with the same first token.
inline double main_aux_accuracy(const std::vector<Tokens>& preds, const std::vector<Tokens>& targets) {
  return detail::diagnostic_accuracy(preds, targets, Task::quest);
}

/// Fraction of pairs with the same second token. Sequences shorter than two
/// tokens count as misses.
inline double object_noun_accuracy(const std::vector<Tokens>& preds, const std::vector<Tokens>& targets) {
  return detail::diagnostic_accuracy(preds, targets, Task::passiv);
}

/// Fraction of predictions whose diagnostic token matches the linear oracle's
/// output on the same source.
inline double linear_rule_frequency(const std::vector<Tokens>& preds, const std::vector<Tokens>& sources, Task task,
                                    const GrammarSpec& grammar) {
  detail::require_aligned(preds.size(), sources.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    Tokens linear;
    try {
      linear = apply_rule(linear_rule(task), parse_sentence(grammar, sources[i]), grammar).output;
    } catch (const Error& e) {
      throw Error("linear oracle failed on source " + std::to_string(i + 1) + ": " + e.what());
    }
    hits += diagnostic_match(preds[i], linear, task);
  }
  return detail::fraction(hits, preds.size());
}

struct PassivErrorProfile {
  bool unaligned = false;
  bool object_np_moved = false;
  bool subject_in_by_phrase = false;
  bool pp_on_second_np_preserved = false;
  bool first_np_case_reinflected = false;
  bool second_np_case_reinflected = false;
  bool tense_reinflected = false;
  bool passive_aux_inserted_inflected = false;

  bool ok() const {
    return !unaligned && object_np_moved && subject_in_by_phrase && pp_on_second_np_preserved &&
           first_np_case_reinflected && second_np_case_reinflected && tense_reinflected && passive_aux_inserted_inflected;
  }

  std::vector<std::pair<std::string, bool>> fields() const {
    return {{"object_np_moved", object_np_moved},
            {"subject_in_by_phrase", subject_in_by_phrase},
            {"pp_on_second_np_preserved", pp_on_second_np_preserved},
            {"first_np_case_reinflected", first_np_case_reinflected},
            {"second_np_case_reinflected", second_np_case_reinflected},
            {"tense_reinflected", tense_reinflected},
            {"passive_aux_inserted_inflected", passive_aux_inserted_inflected},
            {"unaligned", unaligned}};
  }
};

struct QuestErrorProfile {
  bool unaligned = false;
  bool main_aux_fronted = false;
  bool original_aux_deleted = false;
  bool wrong_polarity_aux_fronted = false;
  bool rc_dropped = false;

  /// Correct behaviour: the right auxiliary fronted and removed, nothing lost.
  bool ok() const { return !unaligned && main_aux_fronted && original_aux_deleted && !wrong_polarity_aux_fronted && !rc_dropped; }

  std::vector<std::pair<std::string, bool>> fields() const {
    return {{"main_aux_fronted", main_aux_fronted},
            {"original_aux_deleted", original_aux_deleted},
            {"wrong_polarity_aux_fronted", wrong_polarity_aux_fronted},
            {"rc_dropped", rc_dropped},
            {"unaligned", unaligned}};
  }
};

namespace detail {

inline Tokens slice(const Tokens& t, Span s) {
  return Tokens(t.begin() + static_cast<std::ptrdiff_t>(s.begin), t.begin() + static_cast<std::ptrdiff_t>(s.end));
}

/// Same lexemes position by position, ignoring inflection.
inline bool same_words(const Lexicon& lex, const Tokens& a, std::size_t at, const Tokens& b) {
  if (at + b.size() > a.size()) return false;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const std::string& x = a[at + i];
    const std::string& y = b[i];
    if (x == y) continue;
    bool shared = false;
    for (std::size_t ex : lex.by_surface(x)) {
      for (std::size_t ey : lex.by_surface(y)) {
        const LexicalEntry& ea = lex.entry(ex);
        const LexicalEntry& eb = lex.entry(ey);
        if (ea.lemma == eb.lemma && ea.category == eb.category) shared = true;
      }
    }
    if (!shared) return false;
  }
  return true;
}

/// Whether tokens at `at` read as an agreeing determiner + noun in case `c`.
inline bool reads_as_case(const Lexicon& lex, const Tokens& t, std::size_t at, Case c) {
  if (at + 1 >= t.size()) return false;
  for (std::size_t d : lex.by_surface(t[at])) {
    const LexicalEntry& det = lex.entry(d);
    if (det.category != Category::det || det.features.grammatical_case != c) continue;
    for (std::size_t n : lex.by_surface(t[at + 1])) {
      const LexicalEntry& noun = lex.entry(n);
      if (noun.category == Category::noun && noun.features == det.features) return true;
    }
  }
  return false;
}

inline Tokens leaf_tokens(const Node& n) {
  Tokens out;
  for (const Node* l : n.leaves()) out.push_back(l->token);
  return out;
}

}  // namespace detail

/// Compares a passive prediction with the source tree and the hierarchical
/// result. Fields that only apply to German, or to sentences with a PP, are
/// true when they do not apply.
inline PassivErrorProfile passiv_error_profile(const Tokens& pred, const SentenceTree& source, const TransformResult& target,
                                               const GrammarSpec& grammar) {
  PassivErrorProfile p;
  if (pred.empty()) {
    p.unaligned = true;
    return p;
  }
  const Lexicon& lex = grammar.lexicon();
  const bool german = grammar.language() == Language::de;
  const Node* obj = source.object_np();
  const Node* subj = source.subject_np();
  const Tokens src = source.tokens();

  p.object_np_moved = detail::same_words(lex, pred, 0, detail::slice(src, obj->span));

  const auto marker = std::find(pred.begin(), pred.end(), grammar.agent_marker());
  const std::size_t m = static_cast<std::size_t>(marker - pred.begin());
  const Tokens subj_head = detail::leaf_tokens(*subj->head());
  p.subject_in_by_phrase = marker != pred.end() && detail::same_words(lex, pred, m + 1, subj_head);

  p.pp_on_second_np_preserved = true;
  if (const Node* site = source.modifier_site()) {
    const Node* pp = site->find(Role::modifier);
    const Tokens pp_tokens = detail::leaf_tokens(*pp);
    const Tokens head = detail::leaf_tokens(*site->head());
    std::size_t head_at = pred.size();
    if (site == obj && p.object_np_moved) head_at = 0;
    if (site == subj && p.subject_in_by_phrase) head_at = m + 1;
    p.pp_on_second_np_preserved = head_at < pred.size() && detail::same_words(lex, pred, head_at + head.size(), pp_tokens);
  }

  p.first_np_case_reinflected = !german || detail::reads_as_case(lex, pred, 0, Case::nom);
  p.second_np_case_reinflected = !german || (marker != pred.end() && detail::reads_as_case(lex, pred, m + 1, Case::dat));

  const std::string& participle = target.output[target.segments.at("verb").begin];
  const std::string& active = source.matrix_verb()->token;
  const bool has_participle = std::find(pred.begin(), pred.end(), participle) != pred.end();
  const bool kept_active = active != participle && std::find(pred.begin(), pred.end(), active) != pred.end();
  p.tense_reinflected = has_participle && !kept_active;

  const std::string& aux = target.output[target.segments.at("aux").begin];
  const auto first_aux = std::find_if(pred.begin(), pred.end(), [&](const std::string& t) {
    for (std::size_t e : lex.by_surface(t)) {
      if (lex.entry(e).category == Category::aux && lex.entry(e).lemma == grammar.passive_aux()) return true;
    }
    return false;
  });
  p.passive_aux_inserted_inflected = first_aux != pred.end() && *first_aux == aux;
  return p;
}

inline QuestErrorProfile quest_error_profile(const Tokens& pred, const SentenceTree& source, const TransformResult& target,
                                             const GrammarSpec& grammar) {
  QuestErrorProfile q;
  if (pred.empty() || target.output.empty()) {
    q.unaligned = true;
    return q;
  }
  const Lexicon& lex = grammar.lexicon();
  const std::string& aux = target.output.front();
  q.main_aux_fronted = pred.front() == aux;
  const auto in_pred = std::count(pred.begin() + 1, pred.end(), aux);
  const auto in_target = std::count(target.output.begin() + 1, target.output.end(), aux);
  q.original_aux_deleted = in_pred <= in_target;
  q.wrong_polarity_aux_fronted = !q.main_aux_fronted && lex.is_auxiliary(pred.front());
  if (const Node* rc = source.modifier()) {
    Tokens content;
    for (const Node* leaf : rc->leaves()) {
      if (leaf->token == "," || lex.is_auxiliary(leaf->token)) continue;
      content.push_back(leaf->token);
    }
    q.rc_dropped = !is_subsequence(content, pred);
  }
  return q;
}

/// Per-example indicators; the report aggregates these.
struct ExampleScore {
  bool transformed = false;
  bool exact = false;
  bool subsequence = false;
  bool diagnostic = false;
  bool linear = false;
  std::vector<std::pair<std::string, bool>> profile;
};

struct EvalReport {
  Task task = Task::quest;
  std::string split;
  std::size_t n = 0;
  std::size_t n_transformed = 0;
  MatchMode mode = MatchMode::exact;
  double sequence_acc = 0;              // in `mode`
  double sequence_acc_exact = 0;
  double sequence_acc_subsequence = 0;
  double diagnostic_acc = 0;            // main-aux or object-noun accuracy
  double linear_freq = 0;               // move-first or move-second frequency
  std::map<std::string, std::size_t> profile_counts;
  std::vector<ExampleScore> examples;

  std::string diagnostic_name() const { return task == Task::passiv ? "object_noun_acc" : "main_aux_acc"; }
  std::string linear_name() const { return task == Task::passiv ? "move_second_freq" : "move_first_freq"; }

  /// Metric name/value pairs in a fixed order.
  std::vector<std::pair<std::string, double>> metrics() const {
    std::vector<std::pair<std::string, double>> out{{"sequence_acc", sequence_acc},
                                                    {"sequence_acc_exact", sequence_acc_exact},
                                                    {"sequence_acc_subsequence", sequence_acc_subsequence},
                                                    {diagnostic_name(), diagnostic_acc},
                                                    {linear_name(), linear_freq}};
    for (const auto& [name, count] : profile_counts) out.emplace_back("profile." + name, detail::fraction(count, n_transformed));
    return out;
  }

  nlohmann::ordered_json to_json(bool per_example = false) const {
    nlohmann::ordered_json j;
    j["task"] = std::string(to_string(task));
    j["split"] = split;
    j["n"] = n;
    j["n_transformed"] = n_transformed;
    j["mode"] = std::string(to_string(mode));
    for (const auto& [k, v] : metrics()) j["metrics"][k] = v;
    j["profile_counts"] = profile_counts;
    if (per_example) {
      for (const ExampleScore& s : examples) {
        nlohmann::ordered_json e;
        e["exact"] = s.exact;
        e["subsequence"] = s.subsequence;
        if (s.transformed) {
          e["diagnostic"] = s.diagnostic;
          e["linear"] = s.linear;
          for (const auto& [k, v] : s.profile) e["profile"][k] = v;
        }
        j["examples"].push_back(e);
      }
    }
    return j;
  }
};

/// Scores predictions against a split. Sequence accuracy covers every example;
/// diagnostic accuracy, linear-rule frequency and error profiles cover the
/// examples of `task` (identity lines are skipped there).
inline EvalReport evaluate(const std::vector<TransformExample>& split, const std::vector<Tokens>& preds, Task task,
                           const GrammarSpec& grammar, MatchMode mode = MatchMode::exact, const std::string& split_name = "") {
  detail::require_aligned(preds.size(), split.size());
  EvalReport r;
  r.task = task;
  r.split = split_name;
  r.mode = mode;
  r.n = split.size();
  std::size_t exact = 0, subseq = 0, diag = 0, lin = 0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    const TransformExample& e = split[i];
    const Tokens& p = preds[i];
    ExampleScore s;
    s.exact = sequence_match(p, e.target, MatchMode::exact);
    s.subsequence = sequence_match(p, e.target, MatchMode::subsequence);
    exact += s.exact;
    subseq += s.subsequence;
    if (e.task == task && task != Task::decl) {
      s.transformed = true;
      ++r.n_transformed;
      const SentenceTree tree = parse_sentence(grammar, e.source);
      const TransformResult hier = apply_rule(hierarchical_rule(task), tree, grammar);
      const TransformResult linear = apply_rule(linear_rule(task), tree, grammar);
      if (hier.output != e.target) {
        throw Error("example " + std::to_string(i + 1) + ": stored target is not the hierarchical oracle output");
      }
      s.diagnostic = diagnostic_match(p, e.target, task);
      s.linear = diagnostic_match(p, linear.output, task);
      diag += s.diagnostic;
      lin += s.linear;
      s.profile = task == Task::passiv ? passiv_error_profile(p, tree, hier, grammar).fields()
                                       : quest_error_profile(p, tree, hier, grammar).fields();
      for (const auto& [k, v] : s.profile) r.profile_counts[k] += v;
    }
    r.examples.push_back(std::move(s));
  }
  r.sequence_acc_exact = detail::fraction(exact, r.n);
  r.sequence_acc_subsequence = detail::fraction(subseq, r.n);
  r.sequence_acc = mode == MatchMode::exact ? r.sequence_acc_exact : r.sequence_acc_subsequence;
  r.diagnostic_acc = detail::fraction(diag, r.n_transformed);
  r.linear_freq = detail::fraction(lin, r.n_transformed);
  return r;
}

/// One prediction line: either "prediction" or "source<TAB>prediction".
struct PredictionLine {
  std::optional<Tokens> source;
  Tokens prediction;
};

inline std::vector<PredictionLine> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<PredictionLine> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    PredictionLine p;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      p.prediction = normalize_tokens(line);
    } else {
      const std::string src = line.substr(0, tab);
      try {
        p.source = normalize_tokens(join(parse_source(src).second));
      } catch (const Error&) {
        p.source = normalize_tokens(src);  // no task marker
      }
      p.prediction = normalize_tokens(line.substr(tab + 1));
    }
    out.push_back(std::move(p));
  }
  return out;
}

/// Checks line counts and any echoed sources against the split; returns the
/// bare predictions. Throws AlignmentError with the first bad line.
inline std::vector<Tokens> align_predictions(const std::vector<PredictionLine>& lines,
                                             const std::vector<TransformExample>& split) {
  detail::require_aligned(lines.size(), split.size());
  std::vector<Tokens> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].source) {
      if (*lines[i].source != split[i].source) {
        throw AlignmentError(i + 1, "echoed source '" + join(*lines[i].source) + "' does not match split source '" +
                                        join(split[i].source) + "'");
      }
    }
    out.push_back(lines[i].prediction);
  }
  return out;
}

/// Long-format learning curve: checkpoint,metric,value.
inline std::string emit_curve(const std::vector<std::pair<long, EvalReport>>& checkpoints) {
  std::ostringstream out;
  out << "checkpoint,metric,value\n";
  out.precision(10);
  for (const auto& [ckpt, report] : checkpoints) {
    for (const auto& [name, value] : report.metrics()) out << ckpt << ',' << name << ',' << value << '\n';
  }
  return out.str();
}

struct CurvePoint {
  long checkpoint;
  std::string metric;
  double value;
};

inline std::vector<CurvePoint> parse_curve(std::istream& in, const std::string& origin) {
  std::vector<CurvePoint> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("checkpoint,", 0) == 0) continue;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      throw Error(origin + ":" + std::to_string(line_no) + ": expected checkpoint,metric,value");
    }
    try {
      out.push_back({std::stol(a), b, std::stod(c)});
    } catch (const std::exception&) {
      throw Error(origin + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return out;
}

/// Minimal line chart of one metric over checkpoints.
inline std::string curve_svg(const std::string& metric, const std::vector<std::pair<long, double>>& points) {
  const double w = 480, h = 240, pad = 40;
  long lo = points.empty() ? 0 : points.front().first;
  long hi = points.empty() ? 1 : points.back().first;
  if (hi == lo) hi = lo + 1;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<text x=\"" << pad << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"12\">" << metric << "</text>\n";
  out << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << w - 2 * pad << "\" height=\"" << h - 2 * pad
      << "\" fill=\"none\" stroke=\"#999\"/>\n<polyline fill=\"none\" stroke=\"#c33\" points=\"";
  for (const auto& [x, y] : points) {
    const double px = pad + (w - 2 * pad) * static_cast<double>(x - lo) / static_cast<double>(hi - lo);
    const double py = h - pad - (h - 2 * pad) * std::clamp(y, 0.0, 1.0);
    out << px << ',' << py << ' ';
  }
  out << "\"/>\n</svg>\n";
  return out.str();
}

/// Splits a long-format curve into <dir>/<metric>.csv (checkpoint,value),
/// plus an SVG per metric on request. Returns the metric names written.
inline std::vector<std::string> write_report(const std::vector<CurvePoint>& curve, const std::filesystem::path& dir,
                                             bool svg) {
  std::map<std::string, std::map<long, double>> by_metric;
  for (const CurvePoint& p : curve) by_metric[p.metric][p.checkpoint] = p.value;
  std::filesystem::create_directories(dir);
  std::vector<std::string> names;
  for (const auto& [metric, series] : by_metric) {
    std::ofstream csv(dir / (metric + ".csv"), std::ios::binary);
    if (!csv) throw Error("cannot write " + (dir / (metric + ".csv")).string());
    csv.precision(10);
    csv << "checkpoint,value\n";
    std::vector<std::pair<long, double>> pts;
    for (const auto& [c, v] : series) {
      csv << c << ',' << v << '\n';
      pts.emplace_back(c, v);
    }
    if (svg) {
      std::ofstream out(dir / (metric + ".svg"), std::ios::binary);
      out << curve_svg(metric, pts);
    }
    names.push_back(metric);
  }
  return names;
}

}  // namespace syntrans
