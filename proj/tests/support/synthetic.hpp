#pragma once

// Synthetic corpora for tests: category-specific lexical items carry most of
// the signal, category-specific context words carry part of it, and filler
// words carry none.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "emocorpus/ingest.hpp"
#include "emocorpus/lexicon.hpp"
#include "emocorpus/random.hpp"

namespace emocorpus::testing {

struct SyntheticSpec {
  std::size_t documents = 5000;
  std::size_t categories = 8;
  std::size_t items_per_category = 5;
  std::size_t context_per_category = 6;
  std::size_t fillers = 300;
  double second_label_rate = 0.15;
  std::size_t context_draws = 3;
  double context_rate = 0.5;      // per draw, for each true label
  double context_noise = 0.3;     // chance of one context word from a random category
  std::size_t min_fillers = 5;
  std::size_t max_fillers = 10;
  std::uint64_t seed = 7;
};

struct SyntheticCorpus {
  std::vector<EmotionCategory> schema;
  std::vector<LexicalItem> items;
  std::vector<RawDocument> documents;
  std::map<std::string, std::vector<std::string>> truth;  // id -> sorted labels
};

inline std::string synthetic_word(const std::string& prefix, std::size_t a, std::size_t b) {
  return prefix + std::to_string(a) + "x" + std::to_string(b);
}

inline SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec) {
  SyntheticCorpus out;
  const auto full = default_schema();
  for (std::size_t c = 0; c < spec.categories; ++c) out.schema.push_back(full.at(c));
  for (std::size_t c = 0; c < spec.categories; ++c) {
    for (std::size_t k = 0; k < spec.items_per_category; ++k)
      out.items.push_back({synthetic_word("li", c, k), out.schema[c].id, ItemKind::base, "synthetic"});
  }

  DeterministicRng rng(spec.seed);
  for (std::size_t d = 0; d < spec.documents; ++d) {
    std::set<std::size_t> labels{static_cast<std::size_t>(rng.below(spec.categories))};
    if (rng.uniform() < spec.second_label_rate) labels.insert(static_cast<std::size_t>(rng.below(spec.categories)));

    std::vector<std::string> words;
    for (std::size_t c : labels) {
      words.push_back(synthetic_word("li", c, rng.below(spec.items_per_category)));
      for (std::size_t k = 0; k < spec.context_draws; ++k) {
        if (rng.uniform() < spec.context_rate) words.push_back(synthetic_word("ctx", c, rng.below(spec.context_per_category)));
      }
    }
    if (rng.uniform() < spec.context_noise)
      words.push_back(synthetic_word("ctx", rng.below(spec.categories), rng.below(spec.context_per_category)));
    const std::size_t fillers = spec.min_fillers + rng.below(spec.max_fillers - spec.min_fillers + 1);
    for (std::size_t k = 0; k < fillers; ++k) words.push_back("w" + std::to_string(rng.below(spec.fillers)));
    rng.shuffle(std::span<std::string>(words));

    std::ostringstream text;
    for (std::size_t k = 0; k < words.size(); ++k) text << (k ? " " : "") << words[k];
    RawDocument doc;
    doc.id = "s" + std::to_string(100000 + d);
    doc.text = text.str();
    std::vector<std::string> ids;
    for (std::size_t c : labels) ids.push_back(out.schema[c].id);
    std::sort(ids.begin(), ids.end());
    out.truth[doc.id] = ids;
    out.documents.push_back(std::move(doc));
  }
  return out;
}

}  // namespace emocorpus::testing
