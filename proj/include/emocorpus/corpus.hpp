#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "emocorpus/error.hpp"
#include "emocorpus/jsonl.hpp"
#include "emocorpus/labeler.hpp"
#include "emocorpus/random.hpp"

namespace emocorpus {

struct GoldItem {
  std::string id;
  std::string text;

  friend bool operator==(const GoldItem&, const GoldItem&) = default;
};

struct AnnotatedItem {
  std::string id;
  std::string text;
  std::vector<std::string> labels;  // sorted; may be empty

  friend bool operator==(const AnnotatedItem&, const AnnotatedItem&) = default;
};

struct BuildMeta {
  std::uint64_t seed = 0;
  std::string lexicon_hash;
  std::size_t input_size = 0;  // after dedup
  std::size_t train_size = 0;
  std::size_t gold_size = 0;
  std::map<std::string, std::size_t> per_category;  // train label counts
  std::map<std::string, std::string> inputs;        // input file -> content hash

  friend bool operator==(const BuildMeta&, const BuildMeta&) = default;
};

struct DatasetBundle {
  std::vector<LabeledExample> train;  // sorted by id
  std::vector<GoldItem> gold_blank;   // sorted by id
  std::optional<std::vector<AnnotatedItem>> gold_annotated;
  BuildMeta build_meta;

  friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;
};

struct DedupeResult {
  std::vector<LabeledExample> examples;
  std::size_t removed = 0;
};

/// Collapses examples with identical normalized text to the first occurrence.
inline DedupeResult dedupe(std::vector<LabeledExample> examples) {
  DedupeResult out;
  std::unordered_set<std::string> seen;
  for (auto& ex : examples) {
    if (seen.insert(ex.text).second) {
      out.examples.push_back(std::move(ex));
    } else {
      ++out.removed;
    }
  }
  return out;
}

namespace detail {

inline constexpr auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };

inline std::map<std::string, std::size_t> label_counts(std::span<const LabeledExample> examples) {
  std::map<std::string, std::size_t> counts;
  for (const auto& ex : examples) {
    for (const auto& l : ex.labels) ++counts[l];
  }
  return counts;
}

}  // namespace detail

/// Draws `gold_size` examples uniformly at random (seeded) as the blank gold
/// set; the rest is train. Both partitions come out sorted by id. Examples must
/// be unmasked: the gold set is never masked.
inline DatasetBundle split_gold(std::vector<LabeledExample> examples, std::size_t gold_size, std::uint64_t seed) {
  if (gold_size > examples.size())
    throw ValidationError("gold size " + std::to_string(gold_size) + " exceeds corpus size " +
                          std::to_string(examples.size()));
  {
    std::unordered_set<std::string> ids;
    for (const auto& ex : examples) {
      if (!ids.insert(ex.id).second) throw ValidationError("duplicate example id '" + ex.id + "'");
    }
  }
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  DeterministicRng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<bool> in_gold(examples.size(), false);
  for (std::size_t k = 0; k < gold_size; ++k) in_gold[order[k]] = true;

  DatasetBundle bundle;
  bundle.build_meta.seed = seed;
  bundle.build_meta.input_size = examples.size();
  if (!examples.empty()) bundle.build_meta.lexicon_hash = examples.front().provenance.lexicon_hash;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (in_gold[i]) {
      bundle.gold_blank.push_back({examples[i].id, examples[i].text});
    } else {
      bundle.train.push_back(std::move(examples[i]));
    }
  }
  std::sort(bundle.train.begin(), bundle.train.end(), detail::by_id);
  std::sort(bundle.gold_blank.begin(), bundle.gold_blank.end(), detail::by_id);
  bundle.build_meta.train_size = bundle.train.size();
  bundle.build_meta.gold_size = bundle.gold_blank.size();
  bundle.build_meta.per_category = detail::label_counts(bundle.train);
  return bundle;
}

struct AnnotationImport {
  DatasetBundle bundle;
  std::vector<std::string> missing;  // gold ids with no annotation
};

/// Fills gold_annotated from `{id, labels:[...]}` records. Unknown ids, unknown
/// labels and repeated ids are errors; gold items left unannotated are listed.
inline AnnotationImport import_gold_annotations(DatasetBundle bundle, const std::filesystem::path& path,
                                                const std::vector<std::string>& schema_ids) {
  const std::set<std::string> schema(schema_ids.begin(), schema_ids.end());
  std::unordered_map<std::string, const GoldItem*> gold;
  for (const auto& g : bundle.gold_blank) gold.emplace(g.id, &g);

  std::map<std::string, AnnotatedItem> annotated;
  std::ifstream probe(path);
  if (!probe) throw IoError("cannot open " + path.string());
  std::size_t lineno = 0;
  std::string line;
  while (std::getline(probe, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError(where + "invalid annotation record");
    std::string id;
    std::vector<std::string> labels;
    try {
      id = j.at("id").get<std::string>();
      labels = j.at("labels").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + e.what());
    }
    auto it = gold.find(id);
    if (it == gold.end()) throw ValidationError(where + "unknown gold id '" + id + "'");
    for (const auto& l : labels) {
      if (!schema.contains(l)) throw ValidationError(where + "unknown label '" + l + "'");
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (!annotated.emplace(id, AnnotatedItem{id, it->second->text, std::move(labels)}).second)
      throw ValidationError(where + "duplicate annotation for id '" + id + "'");
  }

  AnnotationImport out;
  std::vector<AnnotatedItem> items;
  for (const auto& g : bundle.gold_blank) {
    auto it = annotated.find(g.id);
    if (it == annotated.end()) {
      out.missing.push_back(g.id);
    } else {
      items.push_back(std::move(it->second));
    }
  }
  bundle.gold_annotated = std::move(items);
  out.bundle = std::move(bundle);
  return out;
}

struct CategoryStats {
  struct Row {
    std::string id;
    std::size_t count = 0;
  };
  std::vector<Row> rows;  // schema order
  std::size_t total = 0;  // examples
  std::size_t min = 0;
  std::size_t max = 0;
  double mean = 0.0;
};

/// Examples per schema category, plus total examples and min/max/mean over the
/// category counts. Multi-label examples count once per label.
inline CategoryStats category_stats(std::span<const LabeledExample> examples, const std::vector<std::string>& schema_ids) {
  CategoryStats s;
  const auto counts = detail::label_counts(examples);
  std::size_t sum = 0;
  s.min = std::numeric_limits<std::size_t>::max();
  for (const auto& id : schema_ids) {
    auto it = counts.find(id);
    const std::size_t n = it == counts.end() ? 0 : it->second;
    s.rows.push_back({id, n});
    sum += n;
    s.min = std::min(s.min, n);
    s.max = std::max(s.max, n);
  }
  if (schema_ids.empty()) s.min = 0;
  s.total = examples.size();
  s.mean = schema_ids.empty() ? 0.0 : static_cast<double>(sum) / static_cast<double>(schema_ids.size());
  return s;
}

inline void write_stats_tsv(std::ostream& out, const CategoryStats& s) {
  out << "category\tcount\n";
  for (const auto& r : s.rows) out << r.id << '\t' << r.count << '\n';
  char mean[32];
  std::snprintf(mean, sizeof mean, "%.4f", s.mean);
  out << "# total\t" << s.total << "\n# min\t" << s.min << "\n# max\t" << s.max << "\n# mean\t" << mean << '\n';
}

inline nlohmann::ordered_json to_json(const CategoryStats& s) {
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& r : s.rows) per[r.id] = r.count;
  return {{"per_category", per}, {"total", s.total}, {"min", s.min}, {"max", s.max}, {"mean", s.mean}};
}

inline nlohmann::ordered_json to_json(const BuildMeta& m) {
  nlohmann::ordered_json j;
  j["seed"] = m.seed;
  j["lexicon_hash"] = m.lexicon_hash;
  j["sizes"] = {{"input", m.input_size}, {"train", m.train_size}, {"gold", m.gold_size}};
  j["per_category"] = m.per_category;
  j["inputs"] = m.inputs;
  return j;
}

inline BuildMeta build_meta_from_json(const nlohmann::json& j) {
  BuildMeta m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.lexicon_hash = j.at("lexicon_hash").get<std::string>();
    const auto& sizes = j.at("sizes");
    m.input_size = sizes.at("input").get<std::size_t>();
    m.train_size = sizes.at("train").get<std::size_t>();
    m.gold_size = sizes.at("gold").get<std::size_t>();
    m.per_category = j.at("per_category").get<std::map<std::string, std::size_t>>();
    if (j.contains("inputs")) m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("build_meta.json: ") + e.what());
  }
  return m;
}

/// Writes train.jsonl, gold_blank.jsonl, gold_annotated.jsonl (when present),
/// build_meta.json and stats.tsv. Records are written sorted by id.
inline void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir,
                        const std::vector<std::string>& schema_ids) {
  auto train = bundle.train;
  std::sort(train.begin(), train.end(), detail::by_id);
  write_jsonl(dir / "train.jsonl", train, [](const LabeledExample& ex) { return to_json(ex); });

  auto gold = bundle.gold_blank;
  std::sort(gold.begin(), gold.end(), detail::by_id);
  write_jsonl(dir / "gold_blank.jsonl", gold,
              [](const GoldItem& g) { return nlohmann::ordered_json{{"id", g.id}, {"text", g.text}}; });

  std::error_code ec;
  if (bundle.gold_annotated) {
    auto annotated = *bundle.gold_annotated;
    std::sort(annotated.begin(), annotated.end(), detail::by_id);
    write_jsonl(dir / "gold_annotated.jsonl", annotated, [](const AnnotatedItem& a) {
      return nlohmann::ordered_json{{"id", a.id}, {"text", a.text}, {"labels", a.labels}};
    });
  } else {
    std::filesystem::remove(dir / "gold_annotated.jsonl", ec);
  }
  write_json(dir / "build_meta.json", to_json(bundle.build_meta));

  const auto path = dir / "stats.tsv";
  auto out = open_output(path);
  write_stats_tsv(out, category_stats(train, schema_ids));
  close_checked(out, path);
}

inline DatasetBundle load_bundle(const std::filesystem::path& dir) {
  DatasetBundle bundle;
  read_jsonl(dir / "train.jsonl", [&](const nlohmann::json& j, std::size_t) {
    bundle.train.push_back(labeled_example_from_json(j));
  });
  read_jsonl(dir / "gold_blank.jsonl", [&](const nlohmann::json& j, std::size_t) {
    bundle.gold_blank.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>()});
  });
  if (std::filesystem::exists(dir / "gold_annotated.jsonl")) {
    std::vector<AnnotatedItem> items;
    read_jsonl(dir / "gold_annotated.jsonl", [&](const nlohmann::json& j, std::size_t) {
      items.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                       j.at("labels").get<std::vector<std::string>>()});
    });
    bundle.gold_annotated = std::move(items);
  }
  std::ifstream meta(dir / "build_meta.json");
  if (!meta) throw IoError("cannot open " + (dir / "build_meta.json").string());
  auto j = nlohmann::json::parse(meta, nullptr, false);
  if (j.is_discarded()) throw ParseError((dir / "build_meta.json").string() + ": invalid JSON");
  bundle.build_meta = build_meta_from_json(j);
  return bundle;
}

}  // namespace emocorpus
