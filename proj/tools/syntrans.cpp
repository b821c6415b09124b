// Command-line entry point: generate, oracle, evaluate, mine, estimate, report.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal invariant violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "syntrans/syntrans.hpp"

namespace fs = std::filesystem;
using namespace syntrans;

namespace {

constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kInternal = 3;

struct Grammars {
  fs::path dir;
  std::map<Language, std::unique_ptr<GrammarSpec>> loaded;

  const GrammarSpec& get(Language l) {
    auto& g = loaded[l];
    if (!g) g = std::make_unique<GrammarSpec>(load_grammar(l, dir));
    return *g;
  }

  std::vector<const GrammarSpec*> all() { return {&get(Language::en), &get(Language::de)}; }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::string& body) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << body;
  if (!out) throw Error("write failed: " + p.string());
}

/// Fingerprints of the grammar and lexicon files a run used.
nlohmann::ordered_json data_fingerprints(const fs::path& dir, const std::vector<Language>& langs) {
  nlohmann::ordered_json j;
  for (Language l : langs) {
    for (const char* ext : {".grammar", ".lexicon"}) {
      const std::string name = std::string(to_string(l)) + ext;
      j[name] = hex64(fnv1a(read_file(dir / name)));
    }
  }
  return j;
}

// ---- generate ----

struct GenerateArgs {
  std::string lang = "en";
  std::string task = "quest";
  std::uint64_t seed = 0;
  SplitCounts counts;
  std::string format = "prefix-first";
  std::string out;
  bool no_dedup = false;
  double identity_fraction = 0.5;
  unsigned threads = 0;
  std::string recipe;
};

int run_generate(const GenerateArgs& a, Grammars& grammars) {
  BuildConfig cfg;
  cfg.task = parse_enum<Task>(a.task, "task");
  if (cfg.task == Task::decl) throw SpecError("--task must be quest or passiv");
  cfg.seed = a.seed;
  cfg.counts = a.counts;
  cfg.dedup = !a.no_dedup;
  cfg.identity_fraction = a.identity_fraction;
  cfg.threads = a.threads;
  const SerialFormat format = parse_enum<SerialFormat>(a.format, "format");

  DatasetManifest m;
  std::vector<Language> langs;
  if (a.recipe.empty()) {
    const Language lang = parse_enum<Language>(a.lang, "language");
    langs.push_back(lang);
    const GrammarSpec& g = grammars.get(lang);
    m = build_splits(g, cfg);
    check_manifest(m, g, cfg);
  } else {
    const auto recipe = parse_recipe(a.recipe);
    std::vector<DatasetManifest> parts;
    for (const RecipeEntry& r : recipe) {
      langs.push_back(r.language);
      const GrammarSpec& g = grammars.get(r.language);
      BuildConfig c = cfg;
      c.seed = derive_seed(cfg.seed, static_cast<int>(r.language));
      parts.push_back(build_splits(g, c));
      check_manifest(parts.back(), g, c);
    }
    m = compose_crosslingual(parts, recipe, cfg.seed);
    m.config["task"] = a.task;
  }
  m.config["data"] = data_fingerprints(grammars.dir, langs);
  serialize(m, format, a.out);
  std::cerr << "wrote";
  for (const auto& [name, split] : m.splits) std::cerr << ' ' << name << '=' << split.size();
  std::cerr << " to " << a.out << '\n';
  return 0;
}

// ---- oracle ----

int run_oracle(const std::string& lang_name, const std::string& input, const std::string& output, Grammars& grammars) {
  const GrammarSpec& g = grammars.get(parse_enum<Language>(lang_name, "language"));
  std::ifstream file;
  std::istream* in = &std::cin;
  if (input != "-") {
    file.open(input, std::ios::binary);
    if (!file) throw Error("cannot read " + input);
    in = &file;
  }
  std::string body;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(*in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string source_col = line.substr(0, line.find('\t'));
    try {
      const auto [task, tokens] = parse_source(source_col);
      Tokens hier = tokens, lin = tokens;
      if (task != Task::decl) {
        const SentenceTree tree = parse_sentence(g, tokens);
        if (tree.spec.task != task) {
          throw WrongTaskError("sentence has a " + std::string(to_string(tree.spec.task)) + " structure but is marked " +
                               std::string(to_string(task)));
        }
        hier = apply_rule(hierarchical_rule(task), tree, g).output;
        lin = apply_rule(linear_rule(task), tree, g).output;
      }
      body += source_col + '\t' + join(hier) + '\t' + join(lin) + '\n';
    } catch (const Error& e) {
      throw Error(input + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (output.empty() || output == "-") {
    std::cout << body;
  } else {
    write_file(output, body);
  }
  return 0;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string lang = "en";
  std::string task = "quest";
  std::string split;
  std::string predictions;
  std::string mode = "exact";
  std::string csv;
  std::string json;
  long checkpoint = 0;
  bool per_example = false;
};

int run_evaluate(const EvaluateArgs& a, Grammars& grammars) {
  const Language lang = parse_enum<Language>(a.lang, "language");
  const Task task = parse_enum<Task>(a.task, "task");
  const GrammarSpec& g = grammars.get(lang);
  const auto split = read_split(a.split, {&g});
  const auto preds = align_predictions(read_predictions(a.predictions), split);
  const EvalReport r = evaluate(split, preds, task, g, parse_enum<MatchMode>(a.mode, "mode"), fs::path(a.split).stem().string());
  nlohmann::ordered_json j = r.to_json(a.per_example);
  j["checkpoint"] = a.checkpoint;
  j["predictions"] = a.predictions;
  if (!a.json.empty()) write_file(a.json, j.dump(2) + "\n");
  if (!a.csv.empty()) write_file(a.csv, emit_curve({{a.checkpoint, r}}));
  nlohmann::ordered_json summary = j;
  summary.erase("examples");
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---- mine ----

struct MineArgs {
  std::string corpus;
  std::string corpus_dir;
  double threshold = 0.7;
  std::string aux_list;
  bool multiset = false;
  std::string rc_annotations;
  std::string out;
  std::string summary;
  long confirmed_pairs = -1;
  double n_sentences = -1;
  double tokens = 1e12;
  double language_share = 0.0567;
  double tokens_per_sentence = 15;
  unsigned threads = 0;
};

int run_mine(const MineArgs& a) {
  MinerConfig cfg;
  cfg.jaccard_threshold = a.threshold;
  cfg.multiset = a.multiset;
  cfg.threads = a.threads;
  if (!a.aux_list.empty()) {
    cfg.auxiliaries.clear();
    for (const std::string& w : split_whitespace(read_file(a.aux_list))) cfg.auxiliaries.push_back(to_lower(w));
  }
  std::shared_ptr<AnnotationDetector> annotations;
  if (!a.rc_annotations.empty()) {
    annotations = std::make_shared<AnnotationDetector>(AnnotationDetector::load(a.rc_annotations));
    cfg.rc_detector = [annotations](const Tokens& t) { return (*annotations)(t); };
  }
  Corpus corpus;
  if (!a.corpus_dir.empty()) {
    corpus = read_corpus_dir(a.corpus_dir);
  } else if (a.corpus == "-") {
    corpus = read_corpus(std::cin);
  } else {
    std::ifstream in(a.corpus, std::ios::binary);
    if (!in) throw Error("cannot read " + a.corpus);
    corpus = read_corpus(in);
  }
  const ScanResult r = scan_pairs(corpus, cfg);

  std::ostringstream tsv;
  tsv << "doc_id\tsentence_index\tjaccard\taux_initial\tdistinct_aux_a\tdistinct_aux_b\tsent_a\tsent_b\n";
  for (const MinedPair& p : r.pairs) {
    tsv << p.doc_id << '\t' << p.sentence_index << '\t' << p.jaccard << '\t' << p.aux_initial << '\t' << p.distinct_aux_a
        << '\t' << p.distinct_aux_b << '\t' << p.sent_a << '\t' << p.sent_b << '\n';
  }
  if (!a.out.empty()) write_file(a.out, tsv.str());

  nlohmann::ordered_json s;
  s["documents"] = r.documents;
  s["malformed_records"] = r.malformed;
  s["sentences"] = r.sentences;
  s["adjacent_pairs"] = r.adjacent_pairs;
  s["candidate_pairs"] = r.pairs.size();
  s["rc_subject_sentences"] = r.rc_subject_sentences;
  s["config"] = {{"jaccard_threshold", cfg.jaccard_threshold},
                 {"jaccard_mode", cfg.multiset ? "multiset" : "types"},
                 {"auxiliaries", cfg.auxiliaries},
                 {"segmenter", "default"},
                 {"rc_detector", annotations ? "annotations:" + a.rc_annotations : std::string("heuristic")}};
  if (annotations) s["rc_annotation_misses"] = annotations->unknown();
  if (r.sentences > 0) {
    // Candidates await manual review; only confirmed pairs enter the estimate.
    const bool reviewed = a.confirmed_pairs >= 0;
    const double pairs = reviewed ? static_cast<double>(a.confirmed_pairs) : static_cast<double>(r.pairs.size());
    const double n = a.n_sentences >= 0 ? a.n_sentences : sentences_from_tokens(a.tokens, a.language_share, a.tokens_per_sentence);
    const auto e = estimate(pairs, static_cast<double>(r.sentences), static_cast<double>(r.rc_subject_sentences),
                            static_cast<double>(r.sentences), n);
    s["estimate"] = {{"pair_count_source", reviewed ? "confirmed" : "unreviewed candidates"},
                     {"p_pair", e.p_pair},
                     {"p_rc_subject", e.p_rc_subject},
                     {"p_joint", e.p_joint()},
                     {"n_sentences", e.n_sentences},
                     {"expected_disambiguating", e.expected_disambiguating}};
  }
  if (!a.summary.empty()) write_file(a.summary, s.dump(2) + "\n");
  std::cout << s.dump(2) << '\n';
  return 0;
}

// ---- estimate ----

struct EstimateArgs {
  double pair_count = 13;
  double pair_denominator = 118.3e6;
  double rc_count = 526944;
  double rc_denominator = 118.3e6;
  double p_pair = -1;
  double p_rc = -1;
  double n_sentences = -1;
  double tokens = 1e12;
  double language_share = 0.0567;
  double tokens_per_sentence = 15;
};

int run_estimate(const EstimateArgs& a) {
  const double n = a.n_sentences >= 0 ? a.n_sentences : sentences_from_tokens(a.tokens, a.language_share, a.tokens_per_sentence);
  DisambiguationEstimate e = estimate(a.pair_count, a.pair_denominator, a.rc_count, a.rc_denominator, n);
  if (a.p_pair >= 0 || a.p_rc >= 0) {
    e = estimate_from_probabilities(a.p_pair >= 0 ? a.p_pair : e.p_pair, a.p_rc >= 0 ? a.p_rc : e.p_rc_subject, n);
  }
  nlohmann::ordered_json j{{"p_pair", e.p_pair},
                           {"p_rc_subject", e.p_rc_subject},
                           {"p_joint", e.p_joint()},
                           {"n_sentences", e.n_sentences},
                           {"expected_disambiguating", e.expected_disambiguating}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

// ---- report ----

int run_report(const std::vector<std::string>& inputs, const std::string& out, bool svg) {
  std::vector<CurvePoint> curve;
  for (const std::string& path : inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    if (fs::path(path).extension() == ".json") {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
        const long ckpt = j.at("checkpoint").get<long>();
        for (const auto& [k, v] : j.at("metrics").items()) curve.push_back({ckpt, k, v.get<double>()});
      } catch (const nlohmann::json::exception& e) {
        throw Error(path + ": " + e.what());
      }
    } else {
      for (CurvePoint& p : parse_curve(in, path)) curve.push_back(std::move(p));
    }
  }
  const auto names = write_report(curve, out, svg);
  std::cerr << "wrote " << names.size() << " metric files to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Syntactic transformation datasets, oracles, evaluation and corpus mining"};
  app.require_subcommand(1);
  std::string data_dir;
  app.add_option("--data-dir", data_dir, "Directory with <lang>.grammar and <lang>.lexicon (default: $SYNTRANS_DATA_DIR or the built-in path)");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Build train/dev/test/gen splits and a metadata sidecar");
  g->add_option("--lang", gen.lang, "en or de")->capture_default_str();
  g->add_option("--task", gen.task, "quest or passiv")->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--train", gen.counts.train, "Train examples")->capture_default_str();
  g->add_option("--dev", gen.counts.dev, "Dev examples")->capture_default_str();
  g->add_option("--test", gen.counts.test, "Test examples")->capture_default_str();
  g->add_option("--gen", gen.counts.gen, "Generalization examples")->capture_default_str();
  g->add_option("--format", gen.format, "prefix-first or marker-last")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_flag("--no-dedup", gen.no_dedup, "Allow repeated sentences (train sentences still stay out of other splits)");
  g->add_option("--identity-fraction", gen.identity_fraction, "Share of decl examples in train/dev/test")->capture_default_str();
  g->add_option("--threads", gen.threads, "Worker threads (0 = all cores)")->capture_default_str();
  g->add_option("--recipe", gen.recipe, "Cross-lingual mix, e.g. 'en:quest+decl;de:decl' (overrides --lang)");

  std::string oracle_lang = "en", oracle_in = "-", oracle_out;
  auto* o = app.add_subcommand("oracle", "Write source, hierarchical and linear targets for prefixed sources");
  o->add_option("--lang", oracle_lang, "en or de")->capture_default_str();
  o->add_option("--input", oracle_in, "TSV or plain file of prefixed sources ('-' for stdin)")->capture_default_str();
  o->add_option("--out", oracle_out, "Output TSV (default stdout)");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score a prediction file against a split file");
  e->add_option("--lang", ev.lang, "en or de")->capture_default_str();
  e->add_option("--task", ev.task, "quest or passiv")->capture_default_str();
  e->add_option("--split", ev.split, "Split TSV written by generate")->required();
  e->add_option("--predictions", ev.predictions, "One prediction per line, optionally 'source<TAB>prediction'")->required();
  e->add_option("--mode", ev.mode, "Sequence accuracy mode: exact or subsequence")->capture_default_str();
  e->add_option("--csv", ev.csv, "Write checkpoint,metric,value rows here");
  e->add_option("--json", ev.json, "Write the full report here");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint number recorded in outputs")->capture_default_str();
  e->add_flag("--per-example", ev.per_example, "Include per-example scores in --json");

  MineArgs mi;
  auto* m = app.add_subcommand("mine", "Find adjacent declarative/question pair candidates in a corpus");
  auto* corpus_opt = m->add_option("--corpus", mi.corpus, "File of doc_id<TAB>text lines ('-' for stdin)");
  auto* dir_opt = m->add_option("--corpus-dir", mi.corpus_dir, "Directory with one document per file");
  corpus_opt->excludes(dir_opt);
  m->add_option("--threshold", mi.threshold, "Jaccard threshold (strict >)")->capture_default_str();
  m->add_option("--aux-list", mi.aux_list, "File of auxiliaries, whitespace separated");
  m->add_flag("--multiset", mi.multiset, "Jaccard over token multisets instead of types");
  m->add_option("--rc-annotations", mi.rc_annotations, "sentence<TAB>0|1 labels replacing the RC heuristic");
  m->add_option("--out", mi.out, "Candidate pairs TSV for manual review");
  m->add_option("--summary", mi.summary, "Summary JSON");
  m->add_option("--confirmed-pairs", mi.confirmed_pairs, "Pairs confirmed by manual review (used in the estimate)");
  m->add_option("--n-sentences", mi.n_sentences, "Sentences seen in training (default from token count)");
  m->add_option("--tokens", mi.tokens, "Training tokens")->capture_default_str();
  m->add_option("--language-share", mi.language_share, "Share of training data in English")->capture_default_str();
  m->add_option("--tokens-per-sentence", mi.tokens_per_sentence, "Average sentence length")->capture_default_str();
  m->add_option("--threads", mi.threads, "Worker threads (0 = all cores)")->capture_default_str();

  EstimateArgs es;
  auto* s = app.add_subcommand("estimate", "Expected count of disambiguating examples from pair and RC frequencies");
  s->add_option("--pair-count", es.pair_count)->capture_default_str();
  s->add_option("--pair-denominator", es.pair_denominator)->capture_default_str();
  s->add_option("--rc-count", es.rc_count)->capture_default_str();
  s->add_option("--rc-denominator", es.rc_denominator)->capture_default_str();
  s->add_option("--p-pair", es.p_pair, "Pair probability (overrides the counts)");
  s->add_option("--p-rc", es.p_rc, "RC-on-subject probability (overrides the counts)");
  s->add_option("--n-sentences", es.n_sentences, "Sentences seen in training (default from token count)");
  s->add_option("--tokens", es.tokens)->capture_default_str();
  s->add_option("--language-share", es.language_share)->capture_default_str();
  s->add_option("--tokens-per-sentence", es.tokens_per_sentence)->capture_default_str();

  std::vector<std::string> report_in;
  std::string report_out;
  bool report_svg = false;
  auto* r = app.add_subcommand("report", "Split learning curves into one CSV per metric");
  r->add_option("inputs", report_in, "Curve CSVs or evaluate --json reports")->required();
  r->add_option("--out", report_out, "Output directory")->required();
  r->add_flag("--svg", report_svg, "Also write an SVG line chart per metric");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kUsage;
  }

  try {
    Grammars grammars{data_dir.empty() ? default_data_dir() : fs::path(data_dir), {}};
    if (*g) return run_generate(gen, grammars);
    if (*o) return run_oracle(oracle_lang, oracle_in, oracle_out, grammars);
    if (*e) return run_evaluate(ev, grammars);
    if (*m) {
      if (mi.corpus.empty() && mi.corpus_dir.empty()) {
        std::cerr << "mine: one of --corpus or --corpus-dir is required\n";
        return kUsage;
      }
      return run_mine(mi);
    }
    if (*s) return run_estimate(es);
    if (*r) return run_report(report_in, report_out, report_svg);
  } catch (const AlignmentError& ex) {
    std::cerr << "alignment error: " << ex.what() << '\n';
    return kDataError;
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kDataError;
  } catch (const InvariantViolation& ex) {
    std::cerr << "internal error: " << ex.what() << '\n';
    return kInternal;
  } catch (const std::exception& ex) {
    std::cerr << "internal error: " << ex.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
