#pragma once

// Command-line orchestration. Each cmd_* function runs one pipeline stage from
// a PipelineConfig, writes its outputs under config.out and returns the
// in-memory result; run() wires them to CLI11 and maps errors to exit codes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "emocorpus/corpus.hpp"
#include "emocorpus/error.hpp"
#include "emocorpus/eval.hpp"
#include "emocorpus/hash.hpp"
#include "emocorpus/ingest.hpp"
#include "emocorpus/jsonl.hpp"
#include "emocorpus/labeler.hpp"
#include "emocorpus/lexicon.hpp"
#include "emocorpus/masker.hpp"
#include "emocorpus/matcher.hpp"
#include "emocorpus/model.hpp"

namespace emocorpus::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2, kInternal = 3 };

struct PipelineConfig {
  fs::path schema;        // empty: bundled default schema
  fs::path lexicon;
  fs::path conjugations;  // optional
  fs::path additions;     // optional
  fs::path removals;      // optional
  fs::path raw;           // JSON-lines stream
  fs::path out = "out";
  fs::path bundle;        // build output to read; empty: same as out
  fs::path annotations;   // gold annotations to import
  fs::path input;         // stats: labeled JSON-lines file

  LabelPolicy policy = LabelPolicy::union_of_spans;
  std::size_t negation_window = 1;
  NormalizeOptions normalize;
  std::vector<double> mask_fractions{0.0, 0.3, 1.0};
  std::size_t gold_size = 0;
  TrainConfig train;  // train.seed is derived from `seed`
  double threshold = kDefaultThreshold;
  std::uint64_t seed = 13;
  unsigned threads = 1;
};

inline std::uint64_t stage_seed(const PipelineConfig& cfg, std::string_view stage) { return derive_seed(cfg.seed, stage); }

inline TrainConfig effective_train_config(const PipelineConfig& cfg) {
  TrainConfig t = cfg.train;
  t.seed = stage_seed(cfg, "train");
  return t;
}

/// Checks the config invariants: referenced input files exist, numbers in range.
inline void validate(const PipelineConfig& cfg) {
  auto require_file = [](const fs::path& p, const char* what) {
    if (!p.empty() && !fs::is_regular_file(p)) throw ValidationError(std::string(what) + " not found: " + p.string());
  };
  require_file(cfg.schema, "schema");
  require_file(cfg.lexicon, "lexicon");
  require_file(cfg.conjugations, "conjugation table");
  require_file(cfg.additions, "curation additions");
  require_file(cfg.removals, "curation removals");
  require_file(cfg.raw, "raw stream");
  require_file(cfg.annotations, "annotations");
  require_file(cfg.input, "input");
  if (!cfg.bundle.empty() && !fs::is_directory(cfg.bundle))
    throw ValidationError("bundle directory not found: " + cfg.bundle.string());
  for (double f : cfg.mask_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ValidationError("mask fraction out of [0,1]: " + std::to_string(f));
  }
  if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0)) throw ValidationError("threshold out of [0,1]");
  check_dimension(cfg.train.dimension);
  if (cfg.train.batch_size == 0) throw ValidationError("batch size must be positive");
  if (!(cfg.train.learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
}

inline std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return to_hex(fnv1a64(bytes));
}

inline std::map<std::string, std::string> input_hashes(std::initializer_list<fs::path> paths) {
  std::map<std::string, std::string> out;
  for (const auto& p : paths) {
    if (!p.empty()) out[p.generic_string()] = file_hash(p);
  }
  return out;
}

inline fs::path bundle_dir(const PipelineConfig& cfg) { return cfg.bundle.empty() ? cfg.out : cfg.bundle; }

// Explicit --schema, else the schema a previous stage wrote, else the default.
inline std::vector<EmotionCategory> resolve_schema(const PipelineConfig& cfg) {
  if (!cfg.schema.empty()) return load_schema(cfg.schema);
  const fs::path written = bundle_dir(cfg) / "schema.tsv";
  if (fs::is_regular_file(written)) return load_schema(written);
  return default_schema();
}

inline std::vector<std::string> ids_of(const std::vector<EmotionCategory>& schema) {
  std::vector<std::string> ids;
  for (const auto& c : schema) ids.push_back(c.id);
  return ids;
}

struct LexiconBuild {
  Lexicon lexicon;
  Diagnostics diagnostics;
};

inline LexiconBuild build_lexicon(const PipelineConfig& cfg) {
  if (cfg.lexicon.empty()) throw ValidationError("--lexicon is required");
  Diagnostics diag;
  auto schema = cfg.schema.empty() ? default_schema() : load_schema(cfg.schema);
  Lexicon lex = load_lexicon(cfg.lexicon, std::move(schema), &diag);
  if (!cfg.conjugations.empty()) lex = expand_conjugations(lex, cfg.conjugations);
  if (!cfg.additions.empty() || !cfg.removals.empty()) lex = merge_curation(lex, cfg.additions, cfg.removals, &diag);
  return {std::move(lex), std::move(diag)};
}

inline void write_lexicon_outputs(const PipelineConfig& cfg, const LexiconBuild& built) {
  const auto& lex = built.lexicon;
  {
    const auto path = cfg.out / "lexicon.tsv";
    auto out = open_output(path);
    write_lexicon(out, lex);
    close_checked(out, path);
  }
  {
    const auto path = cfg.out / "schema.tsv";
    auto out = open_output(path);
    write_schema(out, lex.schema());
    close_checked(out, path);
  }
  std::map<std::string, std::size_t> by_kind, by_category;
  for (const auto& item : lex.items()) {
    ++by_kind[std::string(to_string(item.kind))];
    ++by_category[item.category_id];
  }
  nlohmann::ordered_json report;
  report["lexicon_hash"] = lex.version();
  report["items"] = lex.items().size();
  report["categories"] = lex.schema().size();
  report["items_by_kind"] = by_kind;
  report["items_by_category"] = by_category;
  report["duplicates_dropped"] = built.diagnostics.duplicates_dropped;
  report["missing_removals"] = built.diagnostics.missing_removals;
  report["warnings"] = built.diagnostics.warnings;
  report["seed"] = cfg.seed;
  report["inputs"] = input_hashes({cfg.schema, cfg.lexicon, cfg.conjugations, cfg.additions, cfg.removals});
  write_json(cfg.out / "lexicon_report.json", report);
}

inline LexiconBuild cmd_lexicon_build(const PipelineConfig& cfg, std::ostream& log) {
  validate(cfg);
  auto built = build_lexicon(cfg);
  write_lexicon_outputs(cfg, built);
  for (const auto& w : built.diagnostics.warnings) log << "warning: " << w << '\n';
  log << "lexicon " << built.lexicon.version() << " (" << built.lexicon.items().size() << " items, "
      << built.lexicon.schema().size() << " categories)\n";
  return built;
}

struct LabelRun {
  std::string lexicon_hash;
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::size_t not_original = 0;
  LabelingResult labeling;
};

inline LabelRun label_stream(const PipelineConfig& cfg, const Lexicon& lex) {
  if (cfg.raw.empty()) throw ValidationError("--raw is required");
  const CompiledMatcher matcher(lex);
  auto parsed = parse_raw_stream(cfg.raw);
  LabelRun run;
  run.lexicon_hash = lex.version();
  run.records = parsed.records;
  run.malformed = parsed.malformed;
  const std::size_t before = parsed.documents.size();
  auto originals = filter_originals(std::move(parsed.documents));
  run.not_original = before - originals.size();
  std::vector<NormalizedDocument> docs;
  docs.reserve(originals.size());
  for (const auto& d : originals) docs.push_back(normalize_text(d, cfg.normalize));
  run.labeling = label_corpus(matcher, docs, {cfg.policy, cfg.negation_window, cfg.threads});
  return run;
}

inline void write_label_stats(std::ostream& out, const LabelRun& run) {
  const auto& s = run.labeling.stats;
  out << "stat\tcount\n"
      << "records\t" << run.records << '\n'
      << "malformed\t" << run.malformed << '\n'
      << "not_original\t" << run.not_original << '\n'
      << "input\t" << s.input << '\n'
      << "discarded_negation\t" << s.discarded_negation << '\n'
      << "unmatched\t" << s.unmatched << '\n'
      << "labeled\t" << s.labeled << '\n'
      << "collection_term_fallbacks\t" << s.collection_term_fallbacks << '\n';
}

inline LabelRun cmd_label(const PipelineConfig& cfg, std::ostream& log) {
  validate(cfg);
  auto built = build_lexicon(cfg);
  write_lexicon_outputs(cfg, built);
  auto run = label_stream(cfg, built.lexicon);
  write_jsonl(cfg.out / "labeled.jsonl", run.labeling.examples, [](const LabeledExample& ex) { return to_json(ex); });
  {
    const auto path = cfg.out / "label_stats.tsv";
    auto out = open_output(path);
    write_label_stats(out, run);
    close_checked(out, path);
  }
  nlohmann::ordered_json meta;
  meta["seed"] = cfg.seed;
  meta["lexicon_hash"] = run.lexicon_hash;
  meta["policy"] = to_string(cfg.policy);
  meta["negation_window"] = cfg.negation_window;
  meta["inputs"] = input_hashes({cfg.schema, cfg.lexicon, cfg.conjugations, cfg.additions, cfg.removals, cfg.raw});
  write_json(cfg.out / "label_meta.json", meta);
  const auto& s = run.labeling.stats;
  log << "labeled " << s.labeled << " of " << s.input << " documents (negation " << s.discarded_negation
      << ", unmatched " << s.unmatched << ", malformed records " << run.malformed << ")\n";
  return run;
}

inline DatasetBundle cmd_build(const PipelineConfig& cfg, std::ostream& log) {
  validate(cfg);
  auto built = build_lexicon(cfg);
  write_lexicon_outputs(cfg, built);
  auto run = label_stream(cfg, built.lexicon);
  {
    const auto path = cfg.out / "label_stats.tsv";
    auto out = open_output(path);
    write_label_stats(out, run);
    close_checked(out, path);
  }
  auto deduped = dedupe(std::move(run.labeling.examples));
  auto bundle = split_gold(std::move(deduped.examples), cfg.gold_size, stage_seed(cfg, "gold"));
  bundle.build_meta.seed = cfg.seed;
  bundle.build_meta.lexicon_hash = built.lexicon.version();
  bundle.build_meta.inputs =
      input_hashes({cfg.schema, cfg.lexicon, cfg.conjugations, cfg.additions, cfg.removals, cfg.raw});
  const auto schema_ids = ids_of(built.lexicon.schema());
  save_bundle(bundle, cfg.out, schema_ids);

  const std::uint64_t mask_seed = stage_seed(cfg, "mask");
  for (double f : cfg.mask_fractions) {
    const auto masked = mask_corpus(bundle.train, f, mask_seed);
    write_jsonl(cfg.out / "variants" / (variant_name(f) + ".jsonl"), masked,
                [](const MaskedExample& m) { return to_json(m); });
  }
  log << "bundle: " << bundle.train.size() << " train, " << bundle.gold_blank.size() << " gold, " << deduped.removed
      << " duplicates removed\n";
  return bundle;
}

// Loads the bundle and attaches gold annotations (imported from
// --annotations, or already present in the bundle).
inline DatasetBundle load_annotated_bundle(const PipelineConfig& cfg, const std::vector<std::string>& schema_ids,
                                           std::ostream& log) {
  auto bundle = load_bundle(bundle_dir(cfg));
  if (!cfg.annotations.empty()) {
    auto imported = import_gold_annotations(std::move(bundle), cfg.annotations, schema_ids);
    if (!imported.missing.empty())
      log << "warning: " << imported.missing.size() << " gold examples have no annotation\n";
    bundle = std::move(imported.bundle);
    std::vector<AnnotatedItem> annotated = *bundle.gold_annotated;
    write_jsonl(cfg.out / "gold_annotated.jsonl", annotated, [](const AnnotatedItem& a) {
      return nlohmann::ordered_json{{"id", a.id}, {"text", a.text}, {"labels", a.labels}};
    });
  }
  if (!bundle.gold_annotated || bundle.gold_annotated->empty())
    throw ValidationError("no gold annotations: pass --annotations or add gold_annotated.jsonl to the bundle");
  return bundle;
}

inline nlohmann::ordered_json run_meta(const PipelineConfig& cfg, const DatasetBundle& bundle) {
  const auto t = effective_train_config(cfg);
  nlohmann::ordered_json meta;
  meta["seed"] = cfg.seed;
  meta["dataset_id"] = dataset_id(bundle);
  meta["lexicon_hash"] = bundle.build_meta.lexicon_hash;
  meta["threshold"] = cfg.threshold;
  meta["mask_fractions"] = cfg.mask_fractions;
  meta["train"] = {{"epochs", t.epochs},
                   {"learning_rate", t.learning_rate},
                   {"batch_size", t.batch_size},
                   {"seed", t.seed},
                   {"dimension", t.dimension}};
  meta["inputs"] = input_hashes({cfg.annotations});
  return meta;
}

inline std::vector<EvalReport> cmd_train_eval(const PipelineConfig& cfg, std::ostream& log) {
  validate(cfg);
  const auto schema_ids = ids_of(resolve_schema(cfg));
  const auto bundle = load_annotated_bundle(cfg, schema_ids, log);
  const auto t = effective_train_config(cfg);
  const std::uint64_t mask_seed = stage_seed(cfg, "mask");
  std::vector<EvalReport> reports;
  for (double f : cfg.mask_fractions) {
    const std::string name = variant_name(f);
    std::vector<TrainingExample> examples;
    for (const auto& m : mask_corpus(bundle.train, f, mask_seed))
      examples.push_back({featurize(m.masked_text, t.dimension), m.source.labels});
    const auto trained = train(examples, schema_ids, t);
    save_model(trained.model, cfg.out / "models" / (name + ".json"));
    auto report = evaluate_model(trained.model, *bundle.gold_annotated, schema_ids, cfg.threshold);
    report.run.model_id = model_id(name, t);
    report.run.dataset_id = dataset_id(bundle);
    const auto tsv_path = cfg.out / "reports" / (name + ".tsv");
    auto tsv = open_output(tsv_path);
    write_report_tsv(tsv, report);
    close_checked(tsv, tsv_path);
    write_json(cfg.out / "reports" / (name + ".json"), to_json(report));
    log << name << ": macro P " << detail::fmt4(report.macro.precision) << " R " << detail::fmt4(report.macro.recall)
        << " F1 " << detail::fmt4(report.macro.f1) << '\n';
    reports.push_back(std::move(report));
  }
  write_json(cfg.out / "train_eval_meta.json", run_meta(cfg, bundle));
  return reports;
}

inline AblationReport cmd_ablate(const PipelineConfig& cfg, std::ostream& log) {
  validate(cfg);
  const auto schema_ids = ids_of(resolve_schema(cfg));
  const auto bundle = load_annotated_bundle(cfg, schema_ids, log);
  AblationOptions opts;
  opts.threshold = cfg.threshold;
  opts.mask_seed = stage_seed(cfg, "mask");
  opts.parallel = cfg.threads > 1;
  auto report = ablation_run(bundle, cfg.mask_fractions, effective_train_config(cfg), schema_ids, opts);
  write_json(cfg.out / "ablation.json", to_json(report));
  {
    const auto path = cfg.out / "ablation.tsv";
    auto out = open_output(path);
    write_ablation_tsv(out, report);
    close_checked(out, path);
  }
  const std::string table = format_ablation_table(report);
  {
    const auto path = cfg.out / "ablation.txt";
    auto out = open_output(path);
    out << table;
    close_checked(out, path);
  }
  write_json(cfg.out / "ablation_meta.json", run_meta(cfg, bundle));
  log << table;
  return report;
}

inline CategoryStats cmd_stats(const PipelineConfig& cfg, std::ostream& log) {
  validate(cfg);
  const fs::path input = cfg.input.empty() ? bundle_dir(cfg) / "train.jsonl" : cfg.input;
  std::vector<LabeledExample> examples;
  read_jsonl(input, [&](const nlohmann::json& j, std::size_t) { examples.push_back(labeled_example_from_json(j)); });
  const auto stats = category_stats(examples, ids_of(resolve_schema(cfg)));
  std::ostringstream tsv;
  write_stats_tsv(tsv, stats);
  {
    const auto path = cfg.out / "stats.tsv";
    auto out = open_output(path);
    out << tsv.str();
    close_checked(out, path);
  }
  write_json(cfg.out / "stats.json", to_json(stats));
  log << tsv.str();
  return stats;
}

/// Parses argv and runs the chosen subcommand. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& log = std::cerr) {
  CLI::App app{"Weakly supervised emotion corpus toolkit"};
  app.name("emocorpus");
  app.set_config("--config", "", "TOML/INI config file; command-line flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  PipelineConfig cfg;
  std::string policy = "union";
  bool keep_urls = false;
  bool keep_mentions = false;

  app.add_option("--seed", cfg.seed, "Global seed; every stage derives its own from it");
  app.add_option("--out", cfg.out, "Output directory");
  app.add_option("--schema", cfg.schema, "Category schema (id<TAB>name<TAB>definition)");
  app.add_option("--lexicon", cfg.lexicon, "Lexicon file (surface<TAB>category[<TAB>kind])");
  app.add_option("--conjugations", cfg.conjugations, "Conjugation tables (lemma<TAB>form,form,...)");
  app.add_option("--additions", cfg.additions, "Curation additions (lexicon format, kind defaults to slang)");
  app.add_option("--removals", cfg.removals, "Curation removals (surface<TAB>category)");
  app.add_option("--raw", cfg.raw, "Raw JSON-lines stream");
  app.add_option("--bundle", cfg.bundle, "Bundle directory written by `build` (defaults to --out)");
  app.add_option("--annotations", cfg.annotations, "Gold annotations JSON-lines {id, labels}");
  app.add_option("--input", cfg.input, "Labeled JSON-lines file for `stats`");
  app.add_option("--policy", policy, "Labeling policy")->check(CLI::IsMember({"union", "collection_term"}));
  app.add_option("--negation-window", cfg.negation_window, "Tokens before a match searched for não/nem");
  app.add_flag("--keep-urls", keep_urls, "Do not strip URLs");
  app.add_flag("--keep-mentions", keep_mentions, "Do not strip @mentions");
  app.add_option("--mask-fractions", cfg.mask_fractions, "Masking fractions, one variant each")->delimiter(',');
  app.add_option("--gold-size", cfg.gold_size, "Examples held out as the gold set");
  app.add_option("--epochs", cfg.train.epochs, "Training epochs");
  app.add_option("--learning-rate", cfg.train.learning_rate, "Gradient step size");
  app.add_option("--batch-size", cfg.train.batch_size, "Minibatch size");
  app.add_option("--dimension", cfg.train.dimension, "Hashed feature space size (power of two)");
  app.add_option("--threshold", cfg.threshold, "Decision threshold (score >= threshold)");
  app.add_option("--threads", cfg.threads, "Worker threads for labeling and ablation");

  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"lexicon-build", "Load, expand and curate the lexicon"},
      {"label", "Label a raw stream with the lexicon"},
      {"build", "Label, dedupe, split gold and write masked train variants"},
      {"train-eval", "Train one model per mask fraction and evaluate on gold"},
      {"ablate", "Run the masking ablation and print the comparison table"},
      {"stats", "Per-category example counts"},
  };
  for (const auto& c : commands) app.add_subcommand(c.name, c.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, log, log);
    return code == 0 ? kOk : kValidation;
  }

  try {
    cfg.policy = parse_label_policy(policy);
    cfg.normalize.remove_urls = !keep_urls;
    cfg.normalize.remove_mentions = !keep_mentions;
    const std::string which = app.get_subcommands().front()->get_name();
    if (which == "lexicon-build") cmd_lexicon_build(cfg, log);
    else if (which == "label") cmd_label(cfg, log);
    else if (which == "build") cmd_build(cfg, log);
    else if (which == "train-eval") cmd_train_eval(cfg, log);
    else if (which == "ablate") cmd_ablate(cfg, log);
    else if (which == "stats") cmd_stats(cfg, log);
    return kOk;
  } catch (const ParseError& e) {
    log << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    log << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace emocorpus::cli
