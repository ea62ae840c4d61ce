#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "emocorpus/error.hpp"
#include "emocorpus/ingest.hpp"
#include "emocorpus/matcher.hpp"
#include "emocorpus/text.hpp"

namespace emocorpus {

struct MatchSpan {
  std::size_t token_start = 0;
  std::size_t token_end = 0;  // exclusive
  std::string surface;
  std::vector<std::string> category_ids;  // sorted

  friend bool operator==(const MatchSpan&, const MatchSpan&) = default;
};

struct Provenance {
  std::string lexicon_hash;
  std::string policy;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct LabeledExample {
  std::string id;
  std::string text;
  std::vector<Token> tokens;
  std::vector<std::string> labels;  // sorted, non-empty
  std::vector<MatchSpan> spans;
  Provenance provenance;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

enum class LabelPolicy { union_of_spans, collection_term };

inline std::string_view to_string(LabelPolicy p) {
  return p == LabelPolicy::union_of_spans ? "union" : "collection_term";
}

inline LabelPolicy parse_label_policy(std::string_view s) {
  if (s == "union") return LabelPolicy::union_of_spans;
  if (s == "collection_term") return LabelPolicy::collection_term;
  throw ValidationError("unknown labeling policy '" + std::string(s) + "' (expected union or collection_term)");
}

inline std::vector<MatchSpan> find_matches(const CompiledMatcher& matcher, std::span<const Token> tokens) {
  std::vector<MatchSpan> spans;
  for (const auto& m : matcher.match(tokens)) {
    const auto& p = matcher.pattern(m.pattern);
    spans.push_back({m.start, m.end, p.surface, p.categories});
  }
  return spans;
}

inline std::vector<MatchSpan> find_matches(const CompiledMatcher& matcher, const NormalizedDocument& doc) {
  const auto tokens = tokenize(doc.text);
  return find_matches(matcher, tokens);
}

inline bool is_negator(std::string_view token) { return token == "não" || token == "nem"; }

struct NegationDecision {
  bool keep = true;
  std::string reason;  // set when discarded
};

/// Discards when "não" or "nem" occurs within `window` tokens before the start
/// of any span. window 1 means "immediately preceding"; 0 disables the filter.
inline NegationDecision apply_negation_filter(std::span<const Token> tokens, std::span<const MatchSpan> spans,
                                              std::size_t window) {
  for (const auto& span : spans) {
    const std::size_t from = span.token_start > window ? span.token_start - window : 0;
    for (std::size_t k = from; k < span.token_start && k < tokens.size(); ++k) {
      if (is_negator(tokens[k].text)) {
        return {false, "'" + tokens[k].text + "' at token " + std::to_string(k) + " precedes '" + span.surface +
                           "' at token " + std::to_string(span.token_start)};
      }
    }
  }
  return {};
}

inline NegationDecision apply_negation_filter(const NormalizedDocument& doc, std::span<const MatchSpan> spans,
                                              std::size_t window = 1) {
  const auto tokens = tokenize(doc.text);
  return apply_negation_filter(tokens, spans, window);
}

struct LabelAssignment {
  std::optional<LabeledExample> example;  // empty: not labelable
  bool collection_term_fallback = false;
};

/// `union`: labels are the union of span categories. `collection_term`: labels
/// are the categories of the term the upstream collector searched for; when the
/// term is absent or unknown to the lexicon this falls back to `union` and
/// flags it.
inline LabelAssignment assign_labels(const CompiledMatcher& matcher, const NormalizedDocument& doc,
                                     std::vector<Token> tokens, std::vector<MatchSpan> spans, LabelPolicy policy) {
  LabelAssignment out;
  std::set<std::string> labels;
  bool resolved = false;
  if (policy == LabelPolicy::collection_term) {
    std::optional<std::uint32_t> term;
    if (doc.collected_by_term) term = matcher.find_pattern(normalize_surface(*doc.collected_by_term));
    if (term) {
      const auto& cats = matcher.pattern(*term).categories;
      labels.insert(cats.begin(), cats.end());
      resolved = true;
    } else {
      out.collection_term_fallback = true;
    }
  }
  if (!resolved) {
    for (const auto& span : spans) labels.insert(span.category_ids.begin(), span.category_ids.end());
  }
  if (labels.empty()) return out;
  out.example = LabeledExample{doc.id,
                               doc.text,
                               std::move(tokens),
                               {labels.begin(), labels.end()},
                               std::move(spans),
                               {matcher.lexicon_version(), std::string(to_string(policy))}};
  return out;
}

inline LabelAssignment assign_labels(const CompiledMatcher& matcher, const NormalizedDocument& doc,
                                     std::vector<MatchSpan> spans, LabelPolicy policy) {
  return assign_labels(matcher, doc, tokenize(doc.text), std::move(spans), policy);
}

struct LabelingStats {
  std::size_t input = 0;
  std::size_t discarded_negation = 0;
  std::size_t unmatched = 0;
  std::size_t labeled = 0;
  std::size_t collection_term_fallbacks = 0;

  friend bool operator==(const LabelingStats&, const LabelingStats&) = default;
};

struct LabelingOptions {
  LabelPolicy policy = LabelPolicy::union_of_spans;
  std::size_t negation_window = 1;
  unsigned threads = 1;
};

struct LabelingResult {
  std::vector<LabeledExample> examples;
  LabelingStats stats;
};

namespace detail {

enum class Outcome { labeled, negated, unmatched };

struct DocOutcome {
  Outcome outcome = Outcome::unmatched;
  bool fallback = false;
  std::optional<LabeledExample> example;
};

inline DocOutcome label_one(const CompiledMatcher& matcher, const NormalizedDocument& doc,
                            const LabelingOptions& opts) {
  DocOutcome out;
  auto tokens = tokenize(doc.text);
  auto spans = find_matches(matcher, tokens);
  if (!apply_negation_filter(tokens, spans, opts.negation_window).keep) {
    out.outcome = Outcome::negated;
    return out;
  }
  auto assigned = assign_labels(matcher, doc, std::move(tokens), std::move(spans), opts.policy);
  out.fallback = assigned.collection_term_fallback;
  if (assigned.example) {
    out.outcome = Outcome::labeled;
    out.example = std::move(assigned.example);
  }
  return out;
}

}  // namespace detail

/// find_matches -> negation filter -> assign_labels for every document. With
/// threads > 1 documents are labeled concurrently; output keeps input order.
inline LabelingResult label_corpus(const CompiledMatcher& matcher, std::span<const NormalizedDocument> docs,
                                   const LabelingOptions& opts = {}) {
  std::vector<detail::DocOutcome> outcomes(docs.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(docs.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < docs.size(); ++i) outcomes[i] = detail::label_one(matcher, docs[i], opts);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (docs.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(docs.size(), lo + chunk);
      pool.emplace_back([&, lo, hi] {
        for (std::size_t i = lo; i < hi; ++i) outcomes[i] = detail::label_one(matcher, docs[i], opts);
      });
    }
  }

  LabelingResult result;
  result.stats.input = docs.size();
  for (auto& o : outcomes) {
    if (o.fallback) ++result.stats.collection_term_fallbacks;
    switch (o.outcome) {
      case detail::Outcome::negated: ++result.stats.discarded_negation; break;
      case detail::Outcome::unmatched: ++result.stats.unmatched; break;
      case detail::Outcome::labeled:
        ++result.stats.labeled;
        result.examples.push_back(std::move(*o.example));
        break;
    }
  }
  return result;
}

// JSON-lines record: {id, text, labels, spans:[{start,end,surface,categories}],
// provenance:{lexicon_hash, policy}}.
inline nlohmann::ordered_json to_json(const LabeledExample& ex) {
  nlohmann::ordered_json spans = nlohmann::ordered_json::array();
  for (const auto& s : ex.spans) {
    spans.push_back({{"start", s.token_start}, {"end", s.token_end}, {"surface", s.surface}, {"categories", s.category_ids}});
  }
  nlohmann::ordered_json j;
  j["id"] = ex.id;
  j["text"] = ex.text;
  j["labels"] = ex.labels;
  j["spans"] = std::move(spans);
  j["provenance"] = {{"lexicon_hash", ex.provenance.lexicon_hash}, {"policy", ex.provenance.policy}};
  return j;
}

/// Rebuilds an example from its record; tokens are recomputed from `text` and
/// every span is checked against them.
template <typename Json>
LabeledExample labeled_example_from_json(const Json& j) {
  LabeledExample ex;
  try {
    ex.id = j.at("id").template get<std::string>();
    ex.text = j.at("text").template get<std::string>();
    ex.labels = j.at("labels").template get<std::vector<std::string>>();
    for (const auto& s : j.at("spans")) {
      ex.spans.push_back({s.at("start").template get<std::size_t>(), s.at("end").template get<std::size_t>(),
                          s.at("surface").template get<std::string>(),
                          s.at("categories").template get<std::vector<std::string>>()});
    }
    const auto& prov = j.at("provenance");
    ex.provenance = {prov.at("lexicon_hash").template get<std::string>(), prov.at("policy").template get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("labeled example: ") + e.what());
  }
  ex.tokens = tokenize(ex.text);
  for (const auto& s : ex.spans) {
    if (s.token_start >= s.token_end || s.token_end > ex.tokens.size())
      throw IntegrityError("example '" + ex.id + "': span [" + std::to_string(s.token_start) + "," +
                           std::to_string(s.token_end) + ") outside " + std::to_string(ex.tokens.size()) + " tokens");
    if (join_tokens(ex.tokens, s.token_start, s.token_end) != s.surface)
      throw IntegrityError("example '" + ex.id + "': span surface '" + s.surface + "' does not match text");
  }
  return ex;
}

}  // namespace emocorpus
