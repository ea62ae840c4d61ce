#pragma once

#include <algorithm>
#include <cstdio>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "emocorpus/corpus.hpp"
#include "emocorpus/error.hpp"
#include "emocorpus/hash.hpp"
#include "emocorpus/masker.hpp"
#include "emocorpus/model.hpp"

namespace emocorpus {

struct CategoryMetrics {
  std::string id;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold positives (tp + fn)

  friend bool operator==(const CategoryMetrics&, const CategoryMetrics&) = default;
};

struct MacroMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t categories = 0;  // how many categories were averaged

  friend bool operator==(const MacroMetrics&, const MacroMetrics&) = default;
};

struct RunInfo {
  std::string model_id;
  std::string dataset_id;
  double threshold = kDefaultThreshold;

  friend bool operator==(const RunInfo&, const RunInfo&) = default;
};

struct EvalReport {
  std::vector<CategoryMetrics> categories;  // schema order
  MacroMetrics macro;
  RunInfo run;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct MacroOptions {
  // Categories with no gold positives are left out of the macro average.
  bool exclude_zero_support = true;
};

inline double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

inline double f1_score(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

/// Example-level TP/FP/FN per category; precision and recall are 0 when their
/// denominator is 0. Macro scores are unweighted means of the per-category
/// scores (macro F1 is the mean of F1s, not F1 of the mean P and R).
inline EvalReport per_category_prf(std::span<const std::vector<std::string>> predictions,
                                   std::span<const std::vector<std::string>> gold,
                                   const std::vector<std::string>& schema, const MacroOptions& opts = {}) {
  if (predictions.size() != gold.size())
    throw ValidationError("prediction count " + std::to_string(predictions.size()) + " != gold count " +
                          std::to_string(gold.size()));
  if (gold.empty()) throw ValidationError("empty evaluation set");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < schema.size(); ++c) index.emplace(schema[c], c);

  EvalReport report;
  report.categories.resize(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) report.categories[c].id = schema[c];

  auto to_set = [&](const std::vector<std::string>& labels) {
    std::vector<bool> present(schema.size(), false);
    for (const auto& l : labels) {
      auto it = index.find(l);
      if (it == index.end()) throw ValidationError("label '" + l + "' not in schema");
      present[it->second] = true;
    }
    return present;
  };

  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto p = to_set(predictions[i]);
    const auto g = to_set(gold[i]);
    for (std::size_t c = 0; c < schema.size(); ++c) {
      auto& m = report.categories[c];
      if (p[c] && g[c]) ++m.tp;
      else if (p[c]) ++m.fp;
      else if (g[c]) ++m.fn;
    }
  }

  for (auto& m : report.categories) {
    m.support = m.tp + m.fn;
    m.precision = safe_ratio(m.tp, m.tp + m.fp);
    m.recall = safe_ratio(m.tp, m.tp + m.fn);
    m.f1 = f1_score(m.precision, m.recall);
    if (opts.exclude_zero_support && m.support == 0) continue;
    report.macro.precision += m.precision;
    report.macro.recall += m.recall;
    report.macro.f1 += m.f1;
    ++report.macro.categories;
  }
  if (report.macro.categories > 0) {
    const double n = static_cast<double>(report.macro.categories);
    report.macro.precision /= n;
    report.macro.recall /= n;
    report.macro.f1 /= n;
  }
  return report;
}

namespace detail {

inline std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace detail

inline void write_report_tsv(std::ostream& out, const EvalReport& r) {
  out << "category\tprecision\trecall\tf1\tsupport\ttp\tfp\tfn\n";
  for (const auto& m : r.categories) {
    out << m.id << '\t' << detail::fmt4(m.precision) << '\t' << detail::fmt4(m.recall) << '\t' << detail::fmt4(m.f1)
        << '\t' << m.support << '\t' << m.tp << '\t' << m.fp << '\t' << m.fn << '\n';
  }
  out << "macro\t" << detail::fmt4(r.macro.precision) << '\t' << detail::fmt4(r.macro.recall) << '\t'
      << detail::fmt4(r.macro.f1) << '\t' << r.macro.categories << "\t\t\t\n";
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json cats = nlohmann::ordered_json::array();
  for (const auto& m : r.categories) {
    cats.push_back({{"category", m.id},
                    {"precision", m.precision},
                    {"recall", m.recall},
                    {"f1", m.f1},
                    {"support", m.support},
                    {"tp", m.tp},
                    {"fp", m.fp},
                    {"fn", m.fn}});
  }
  nlohmann::ordered_json j;
  j["run"] = {{"model_id", r.run.model_id}, {"dataset_id", r.run.dataset_id}, {"threshold", r.run.threshold}};
  j["macro"] = {{"precision", r.macro.precision},
                {"recall", r.macro.recall},
                {"f1", r.macro.f1},
                {"categories", r.macro.categories}};
  j["per_category"] = std::move(cats);
  return j;
}

struct AblationVariant {
  std::string name;
  double fraction = 0.0;
  std::size_t masked_examples = 0;
  std::vector<double> epoch_loss;
  EvalReport report;

  friend bool operator==(const AblationVariant&, const AblationVariant&) = default;
};

struct AblationDelta {
  std::string variant;
  std::string baseline;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  friend bool operator==(const AblationDelta&, const AblationDelta&) = default;
};

struct AblationReport {
  std::vector<AblationVariant> variants;
  std::vector<AblationDelta> deltas;  // each variant minus the baseline

  const AblationVariant* find(std::string_view name) const {
    for (const auto& v : variants) {
      if (v.name == name) return &v;
    }
    return nullptr;
  }

  friend bool operator==(const AblationReport&, const AblationReport&) = default;
};

struct AblationOptions {
  double threshold = kDefaultThreshold;
  std::uint64_t mask_seed = 0;
  MacroOptions macro;
  bool parallel = false;  // train the variants concurrently
};

inline std::string dataset_id(const DatasetBundle& bundle) {
  ContentHasher h;
  h.field(bundle.build_meta.lexicon_hash).field(std::to_string(bundle.build_meta.seed));
  for (const auto& ex : bundle.train) h.field(ex.id);
  h.record_end();
  if (bundle.gold_annotated) {
    for (const auto& a : *bundle.gold_annotated) {
      h.field(a.id);
      for (const auto& l : a.labels) h.field(l);
      h.record_end();
    }
  }
  return h.hex();
}

inline std::string model_id(std::string_view variant, const TrainConfig& cfg) {
  ContentHasher h;
  h.field(variant)
      .field(std::to_string(cfg.epochs))
      .field(detail::fmt4(cfg.learning_rate))
      .field(std::to_string(cfg.batch_size))
      .field(std::to_string(cfg.seed))
      .field(std::to_string(cfg.dimension));
  return std::string(variant) + "-" + h.hex();
}

/// Evaluates `model` on the annotated gold set (never masked).
inline EvalReport evaluate_model(const LinearModel& model, std::span<const AnnotatedItem> gold,
                                 const std::vector<std::string>& schema, double threshold,
                                 const MacroOptions& macro = {}) {
  std::vector<std::vector<std::string>> predicted, expected;
  predicted.reserve(gold.size());
  expected.reserve(gold.size());
  for (const auto& g : gold) {
    predicted.push_back(predict(model, g.text, threshold).decided);
    expected.push_back(g.labels);
  }
  auto report = per_category_prf(predicted, expected, schema, macro);
  report.run.threshold = threshold;
  return report;
}

/// Builds one masked training variant per fraction from the same labeled
/// training set and mask seed, trains each with the same config, and scores all
/// of them on the same unmasked gold set.
inline AblationReport ablation_run(const DatasetBundle& bundle, std::span<const double> fractions,
                                   const TrainConfig& config, const std::vector<std::string>& schema,
                                   const AblationOptions& opts = {}) {
  if (!bundle.gold_annotated || bundle.gold_annotated->empty())
    throw ValidationError("ablation needs gold annotations; import them first");
  if (fractions.empty()) throw ValidationError("no mask fractions given");
  const std::string data_id = dataset_id(bundle);

  auto run_variant = [&](double fraction) {
    AblationVariant v;
    v.name = variant_name(fraction);
    v.fraction = fraction;
    const auto masked = mask_corpus(bundle.train, fraction, opts.mask_seed);
    std::vector<TrainingExample> examples;
    examples.reserve(masked.size());
    for (const auto& m : masked) {
      if (m.mask_applied) ++v.masked_examples;
      examples.push_back({featurize(m.masked_text, config.dimension), m.source.labels});
    }
    auto trained = train(examples, schema, config);
    v.epoch_loss = trained.epoch_loss;
    v.report = evaluate_model(trained.model, *bundle.gold_annotated, schema, opts.threshold, opts.macro);
    v.report.run.model_id = model_id(v.name, config);
    v.report.run.dataset_id = data_id;
    return v;
  };

  AblationReport report;
  if (opts.parallel) {
    std::vector<std::future<AblationVariant>> jobs;
    for (double f : fractions) jobs.push_back(std::async(std::launch::async, run_variant, f));
    for (auto& j : jobs) report.variants.push_back(j.get());
  } else {
    for (double f : fractions) report.variants.push_back(run_variant(f));
  }

  const AblationVariant* baseline = &report.variants.front();
  for (const auto& v : report.variants) {
    if (v.fraction == 0.0) {
      baseline = &v;
      break;
    }
  }
  for (const auto& v : report.variants) {
    report.deltas.push_back({v.name, baseline->name, v.report.macro.precision - baseline->report.macro.precision,
                             v.report.macro.recall - baseline->report.macro.recall,
                             v.report.macro.f1 - baseline->report.macro.f1});
  }
  return report;
}

/// Plain-text table: one row per variant, macro Precision / Recall / F1.
inline std::string format_ablation_table(const AblationReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %10s\n", "Model", "Precision", "Recall", "F1", "dF1");
  out << line;
  for (std::size_t i = 0; i < r.variants.size(); ++i) {
    const auto& v = r.variants[i];
    std::snprintf(line, sizeof line, "%-10s %10.4f %10.4f %10.4f %+10.4f\n", v.name.c_str(), v.report.macro.precision,
                  v.report.macro.recall, v.report.macro.f1, r.deltas[i].f1);
    out << line;
  }
  return out.str();
}

inline void write_ablation_tsv(std::ostream& out, const AblationReport& r) {
  out << "variant\tfraction\tmasked_examples\tprecision\trecall\tf1\tdelta_f1\n";
  for (std::size_t i = 0; i < r.variants.size(); ++i) {
    const auto& v = r.variants[i];
    out << v.name << '\t' << detail::fmt4(v.fraction) << '\t' << v.masked_examples << '\t'
        << detail::fmt4(v.report.macro.precision) << '\t' << detail::fmt4(v.report.macro.recall) << '\t'
        << detail::fmt4(v.report.macro.f1) << '\t' << detail::fmt4(r.deltas[i].f1) << '\n';
  }
}

inline nlohmann::ordered_json to_json(const AblationReport& r) {
  nlohmann::ordered_json variants = nlohmann::ordered_json::array();
  for (const auto& v : r.variants) {
    variants.push_back({{"name", v.name},
                        {"fraction", v.fraction},
                        {"masked_examples", v.masked_examples},
                        {"epoch_loss", v.epoch_loss},
                        {"report", to_json(v.report)}});
  }
  nlohmann::ordered_json deltas = nlohmann::ordered_json::array();
  for (const auto& d : r.deltas) {
    deltas.push_back({{"variant", d.variant},
                      {"baseline", d.baseline},
                      {"precision", d.precision},
                      {"recall", d.recall},
                      {"f1", d.f1}});
  }
  return {{"variants", variants}, {"deltas", deltas}};
}

}  // namespace emocorpus
