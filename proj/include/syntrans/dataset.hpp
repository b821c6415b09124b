#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "syntrans/errors.hpp"
#include "syntrans/generate.hpp"
#include "syntrans/grammar.hpp"
#include "syntrans/random.hpp"
#include "syntrans/structure.hpp"
#include "syntrans/transform.hpp"

namespace syntrans {

struct TransformExample {
  Task task = Task::decl;
  Language language = Language::en;
  StructureSpec structure;
  Tokens source;
  Tokens target;

  bool operator==(const TransformExample&) const = default;
};

struct SplitCounts {
  std::size_t train = 100000;
  std::size_t dev = 1000;
  std::size_t test = 10000;
  std::size_t gen = 10000;
};

struct BuildConfig {
  Task task = Task::quest;
  SplitCounts counts;
  std::uint64_t seed = 0;
  /// Reject repeated source sentences across the whole manifest. Train
  /// sentences are kept out of the other splits either way.
  bool dedup = true;
  double identity_fraction = 0.5;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct DatasetManifest {
  std::map<std::string, std::vector<TransformExample>> splits;
  nlohmann::ordered_json config;

  bool operator==(const DatasetManifest&) const = default;
};

inline const std::vector<std::string>& split_names() {
  static const std::vector<std::string> names{"train", "dev", "test", "gen"};
  return names;
}

/// Draws a structure hierarchically: placement, then gap, then transitivity,
/// each uniformly among the values the constraints allow.
inline StructureSpec sample_structure(Task task, const std::vector<Modifier>& placements, Rng& rng) {
  StructureSpec s;
  s.task = task;
  s.modifier = placements[uniform_index(rng, placements.size())];
  if (s.modifier != Modifier::none) s.kind = task == Task::quest ? ModifierKind::rc : ModifierKind::pp;
  if (s.kind == ModifierKind::rc) s.gap = uniform_index(rng, 2) ? RcGap::object_gap : RcGap::subject_gap;
  if (task == Task::quest && s.modifier != Modifier::on_object) {
    s.transitivity = uniform_index(rng, 2) ? Transitivity::intrans : Transitivity::trans;
  }
  s.validate();
  return s;
}

namespace detail {

struct Candidate {
  StructureSpec structure;
  Tokens source;
  Tokens target;
};

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  if (threads <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline bool is_identity_kind(int kind) { return kind == 0; }

}  // namespace detail

/// Builds train/dev/test/gen for one language and task. Candidates are drawn
/// with per-index seeds and accepted in index order, so the result does not
/// depend on the thread count.
inline DatasetManifest build_splits(const GrammarSpec& grammar, const BuildConfig& cfg) {
  if (cfg.task == Task::decl) throw SpecError("build_splits needs task quest or passiv");
  if (cfg.identity_fraction < 0 || cfg.identity_fraction > 1) throw Error("identity fraction must lie in [0, 1]");
  const SplitCounts& c = cfg.counts;
  if (!c.train || !c.dev || !c.test || !c.gen) throw Error("split counts must be positive");
  const unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());

  const std::vector<Modifier> ambiguous{Modifier::none, Modifier::on_object};
  const std::vector<Modifier> all{Modifier::none, Modifier::on_object, Modifier::on_subject};
  const std::vector<Modifier> disambiguating{Modifier::on_subject};

  DatasetManifest m;
  std::unordered_set<std::string> seen;        // every accepted source (dedup on)
  std::unordered_set<std::string> train_seen;  // train sources (always)

  const std::size_t counts[] = {c.train, c.dev, c.test, c.gen};
  for (std::size_t split = 0; split < 4; ++split) {
    const bool is_gen = split == 3;
    const std::size_t total = counts[split];
    const std::size_t n_identity =
        is_gen ? 0 : static_cast<std::size_t>(std::llround(static_cast<double>(total) * cfg.identity_fraction));
    std::vector<TransformExample>& out = m.splits[split_names()[split]];

    for (int kind = 0; kind < 2; ++kind) {
      const bool identity = detail::is_identity_kind(kind);
      const std::size_t want = identity ? n_identity : total - n_identity;
      const std::vector<Modifier>& placements = identity ? all : is_gen ? disambiguating : ambiguous;
      const std::size_t cap = 20 * want + 1000;
      std::size_t accepted = 0;
      std::size_t next = 0;
      while (accepted < want) {
        if (next >= cap) {
          throw InsufficientLexiconError("only " + std::to_string(accepted) + " of " + std::to_string(want) + " distinct " +
                                         (identity ? "identity" : "transformed") + " sentences for split " +
                                         split_names()[split] + " after " + std::to_string(cap) + " candidates");
        }
        const std::size_t batch = std::min(cap - next, std::max<std::size_t>(64, (want - accepted) * 11 / 10));
        std::vector<detail::Candidate> cands(batch);
        detail::parallel_for(batch, threads, [&](std::size_t k) {
          const std::uint64_t s = derive_seed(cfg.seed, split, kind, next + k);
          Rng rng(s);
          detail::Candidate& cand = cands[k];
          cand.structure = sample_structure(cfg.task, placements, rng);
          SentenceTree tree = sample_sentence(grammar, cand.structure, derive_seed(s, 1));
          cand.source = tree.tokens();
          cand.target = identity ? cand.source : apply_rule(hierarchical_rule(cfg.task), tree, grammar).output;
        });
        next += batch;
        for (detail::Candidate& cand : cands) {
          if (accepted == want) break;
          const std::string key = join(cand.source);
          if (split > 0 && train_seen.count(key)) continue;
          if (cfg.dedup && !seen.insert(key).second) continue;
          if (split == 0) train_seen.insert(key);
          out.push_back({identity ? Task::decl : cfg.task, grammar.language(), cand.structure, std::move(cand.source),
                         std::move(cand.target)});
          ++accepted;
        }
      }
    }
    Rng rng(derive_seed(cfg.seed, split, 0x5348u));
    shuffle(out, rng);
  }

  m.config["language"] = std::string(to_string(grammar.language()));
  m.config["task"] = std::string(to_string(cfg.task));
  m.config["seed"] = cfg.seed;
  m.config["counts"] = {{"train", c.train}, {"dev", c.dev}, {"test", c.test}, {"gen", c.gen}};
  m.config["dedup"] = cfg.dedup;
  m.config["identity_fraction"] = cfg.identity_fraction;
  m.config["structure_sampling"] = "uniform over placement, then gap, then transitivity";
  m.config["eval_identity_ratio"] = "dev and test mirror train";
  return m;
}

/// Fraction of identity (decl) examples in a split.
inline double identity_ratio(const std::vector<TransformExample>& split) {
  if (split.empty()) return 0;
  const auto n = std::count_if(split.begin(), split.end(), [](const TransformExample& e) { return e.task == Task::decl; });
  return static_cast<double>(n) / static_cast<double>(split.size());
}

/// Post-build checks for a single-task manifest. Throws InvariantViolation.
inline void check_manifest(const DatasetManifest& m, const GrammarSpec& grammar, const BuildConfig& cfg) {
  auto fail = [](const std::string& what) { throw InvariantViolation("dataset invariant: " + what); };
  const std::size_t counts[] = {cfg.counts.train, cfg.counts.dev, cfg.counts.test, cfg.counts.gen};
  std::unordered_set<std::string> train_sources;
  for (std::size_t s = 0; s < 4; ++s) {
    const std::string& name = split_names()[s];
    auto it = m.splits.find(name);
    if (it == m.splits.end()) fail("missing split " + name);
    const auto& split = it->second;
    if (split.size() != counts[s]) fail(name + " has " + std::to_string(split.size()) + " examples");
    if (s < 3 && std::abs(identity_ratio(split) - cfg.identity_fraction) > 0.01) fail(name + " identity ratio off");
    for (const TransformExample& e : split) {
      const std::string key = join(e.source);
      if (s == 0) train_sources.insert(key);
      if (s > 0 && train_sources.count(key)) fail(name + " source also in train: " + key);
      if (e.task == Task::decl) {
        if (s == 3) fail("gen contains an identity example");
        if (e.source != e.target) fail("identity example with different target");
        continue;
      }
      const bool on_subject = e.structure.modifier == Modifier::on_subject;
      if (on_subject != (s == 3)) fail(name + " has a transformed " + e.structure.name() + " example");
      // Oracle audit: the stored target is the hierarchical output, and on
      // ambiguous structures the linear rule agrees with it.
      const SentenceTree tree = parse_sentence(grammar, e.source);
      if (tree.spec != e.structure) fail("structure label disagrees with parse: " + key);
      if (apply_rule(hierarchical_rule(e.task), tree, grammar).output != e.target) fail("target is not the hierarchical output: " + key);
      const Tokens linear = apply_rule(linear_rule(e.task), tree, grammar).output;
      if (s < 3 && linear != e.target) fail("linear rule disagrees on ambiguous example: " + key);
      if (s == 3) {
        const std::size_t d = e.task == Task::quest ? 0 : 1;
        if (linear.size() <= d || linear[d] == e.target[d]) fail("rules agree on diagnostic token: " + key);
      }
    }
  }
}

enum class SerialFormat { prefix_first, marker_last };

template <>
struct EnumNames<SerialFormat> {
  static constexpr std::array<std::pair<SerialFormat, std::string_view>, 2> table{
      {{SerialFormat::prefix_first, "prefix-first"}, {SerialFormat::marker_last, "marker-last"}}};
};

inline std::string serialize_example(const TransformExample& e, SerialFormat format) {
  const std::string marker(to_string(e.task));
  std::string line;
  if (format == SerialFormat::prefix_first) {
    line = marker + ": " + join(e.source);
  } else {
    line = join(e.source) + " " + marker;
  }
  return line + "\t" + join(e.target);
}

/// Splits a serialized source into task and sentence tokens. Either format
/// is accepted.
inline std::pair<Task, Tokens> parse_source(const std::string& source) {
  Tokens toks = split_whitespace(source);
  if (toks.empty()) throw Error("empty source");
  if (toks.front().size() > 1 && toks.front().back() == ':') {
    if (auto t = try_parse_enum<Task>(std::string_view(toks.front()).substr(0, toks.front().size() - 1))) {
      toks.erase(toks.begin());
      return {*t, toks};
    }
  }
  if (auto t = try_parse_enum<Task>(toks.back())) {
    toks.pop_back();
    return {*t, toks};
  }
  throw Error("source has no task prefix or marker: '" + source + "'");
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 15];
  return out;
}

/// Writes <dir>/<split>.tsv for every split and a metadata.json sidecar with
/// the config snapshot, per-split structure counts and file fingerprints.
inline void serialize(const DatasetManifest& m, SerialFormat format, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  nlohmann::ordered_json meta;
  meta["config"] = m.config;
  meta["format"] = std::string(to_string(format));
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  for (const auto& [name, split] : m.splits) {
    std::string body;
    std::map<std::string, std::size_t> structures;
    for (const TransformExample& e : split) {
      body += serialize_example(e, format);
      body += '\n';
      ++structures[std::string(to_string(e.task)) + "/" + e.structure.name()];
    }
    const std::filesystem::path path = dir / (name + ".tsv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << body;
    if (!out) throw Error("write failed: " + path.string());
    nlohmann::ordered_json entry;
    entry["examples"] = split.size();
    entry["identity_ratio"] = identity_ratio(split);
    entry["fnv1a"] = hex64(fnv1a(body));
    entry["structures"] = structures;
    files[name + ".tsv"] = entry;
  }
  meta["files"] = files;
  const std::filesystem::path path = dir / "metadata.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << meta.dump(2) << '\n';
}

/// Reads one split file. Each source is classified with the first grammar
/// that parses it; the example's language is that grammar's.
inline std::vector<TransformExample> read_split(const std::filesystem::path& path,
                                                const std::vector<const GrammarSpec*>& grammars) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<TransformExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto where = [&] { return path.string() + ":" + std::to_string(line_no) + ": "; };
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(where() + "expected source<TAB>target");
    TransformExample e;
    try {
      std::tie(e.task, e.source) = parse_source(line.substr(0, tab));
    } catch (const Error& err) {
      throw Error(where() + err.what());
    }
    e.target = split_whitespace(std::string_view(line).substr(tab + 1));
    bool parsed = false;
    for (const GrammarSpec* g : grammars) {
      auto parses = parse_all(*g, e.source, Form::declarative, 1);
      if (parses.empty()) continue;
      e.language = g->language();
      e.structure = parses.front().spec;
      parsed = true;
      break;
    }
    if (!parsed) throw ParseError(where() + "source not generated by any loaded grammar: '" + join(e.source) + "'");
    out.push_back(std::move(e));
  }
  return out;
}

/// Inverse of serialize: reads every split named in metadata.json.
inline DatasetManifest deserialize(const std::filesystem::path& dir, const std::vector<const GrammarSpec*>& grammars) {
  std::ifstream in(dir / "metadata.json");
  if (!in) throw Error("cannot read " + (dir / "metadata.json").string());
  nlohmann::ordered_json meta;
  try {
    meta = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error((dir / "metadata.json").string() + ": " + e.what());
  }
  DatasetManifest m;
  m.config = meta.at("config");
  for (const auto& [file, info] : meta.at("files").items()) {
    const std::string name = file.substr(0, file.size() - 4);
    m.splits[name] = read_split(dir / file, grammars);
  }
  return m;
}

/// Languages and tasks a cross-lingual recipe draws training data from.
struct RecipeEntry {
  Language language;
  std::set<Task> tasks;
};

/// Parses "en:quest+decl;de:decl".
inline std::vector<RecipeEntry> parse_recipe(std::string_view text) {
  std::vector<RecipeEntry> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t semi = text.find(';', start);
    std::string_view part = text.substr(start, semi == text.npos ? text.npos : semi - start);
    start = semi == text.npos ? text.size() + 1 : semi + 1;
    if (part.empty()) continue;
    const auto colon = part.find(':');
    if (colon == part.npos) throw Error("recipe entry '" + std::string(part) + "' needs language:tasks");
    RecipeEntry e{parse_enum<Language>(part.substr(0, colon), "language"), {}};
    std::string_view tasks = part.substr(colon + 1);
    std::size_t p = 0;
    while (p <= tasks.size()) {
      std::size_t plus = tasks.find('+', p);
      std::string_view t = tasks.substr(p, plus == tasks.npos ? tasks.npos : plus - p);
      if (!t.empty()) e.tasks.insert(parse_enum<Task>(t, "task"));
      p = plus == tasks.npos ? tasks.size() + 1 : plus + 1;
    }
    if (e.tasks.empty()) throw Error("recipe entry '" + std::string(part) + "' names no tasks");
    out.push_back(std::move(e));
  }
  if (out.empty()) throw Error("empty recipe");
  return out;
}

/// Merges training slices named by the recipe into one shuffled train split.
/// Evaluation splits stay per language as "dev.<lang>", "test.<lang>",
/// "gen.<lang>".
inline DatasetManifest compose_crosslingual(const std::vector<DatasetManifest>& manifests,
                                            const std::vector<RecipeEntry>& recipe, std::uint64_t seed) {
  if (recipe.empty()) throw Error("empty recipe");
  DatasetManifest out;
  std::vector<TransformExample>& train = out.splits["train"];
  nlohmann::ordered_json sources = nlohmann::ordered_json::array();
  for (const RecipeEntry& r : recipe) {
    const std::string lang(to_string(r.language));
    bool have_language = false;
    std::set<Task> found;
    for (const DatasetManifest& m : manifests) {
      if (m.config.value("language", "") != lang) continue;
      have_language = true;
      auto it = m.splits.find("train");
      if (it != m.splits.end()) {
        for (const TransformExample& e : it->second) {
          if (!r.tasks.count(e.task)) continue;
          train.push_back(e);
          found.insert(e.task);
        }
      }
      for (const char* split : {"dev", "test", "gen"}) {
        auto s = m.splits.find(split);
        if (s == m.splits.end()) continue;
        auto& dst = out.splits[std::string(split) + "." + lang];
        dst.insert(dst.end(), s->second.begin(), s->second.end());
      }
      sources.push_back(m.config);
    }
    if (!have_language) throw Error("recipe names language '" + lang + "' but no manifest provides it");
    for (Task t : r.tasks) {
      if (!found.count(t)) throw Error("recipe slice " + lang + ":" + std::string(to_string(t)) + " has no training examples");
    }
  }
  Rng rng(derive_seed(seed, 0x434fu));
  shuffle(train, rng);
  std::string recipe_text;
  for (const RecipeEntry& r : recipe) {
    if (!recipe_text.empty()) recipe_text += ';';
    recipe_text += std::string(to_string(r.language)) + ":";
    bool first = true;
    for (Task t : r.tasks) {
      if (!first) recipe_text += '+';
      recipe_text += to_string(t);
      first = false;
    }
  }
  out.config["language"] = "mixed";
  out.config["recipe"] = recipe_text;
  out.config["seed"] = seed;
  out.config["sources"] = sources;
  return out;
}

}  // namespace syntrans
