#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "emocorpus/error.hpp"
#include "emocorpus/hash.hpp"
#include "emocorpus/labeler.hpp"
#include "emocorpus/random.hpp"

namespace emocorpus {

struct MaskedExample {
  LabeledExample source;
  std::string masked_text;
  bool mask_applied = false;

  friend bool operator==(const MaskedExample&, const MaskedExample&) = default;
};

/// Replaces every span of `ex` by the literal token [MASK]. Overlapping spans
/// are merged first, so [1,3) and [2,4) become a single [MASK] over [1,4).
/// Characters between tokens (spaces, punctuation) are kept as they are.
inline MaskedExample mask_example(const LabeledExample& ex) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (const auto& s : ex.spans) {
    if (s.token_start >= s.token_end || s.token_end > ex.tokens.size())
      throw IntegrityError("example '" + ex.id + "': span [" + std::to_string(s.token_start) + "," +
                           std::to_string(s.token_end) + ") outside " + std::to_string(ex.tokens.size()) + " tokens");
    ranges.emplace_back(s.token_start, s.token_end);
  }
  std::sort(ranges.begin(), ranges.end());
  std::vector<std::pair<std::size_t, std::size_t>> merged;
  for (const auto& r : ranges) {
    if (!merged.empty() && r.first < merged.back().second) {
      merged.back().second = std::max(merged.back().second, r.second);
    } else {
      merged.push_back(r);
    }
  }

  std::string out;
  std::size_t cursor = 0;
  for (const auto& [first, last] : merged) {
    const std::size_t begin = ex.tokens[first].begin;
    const std::size_t end = ex.tokens[last - 1].end;
    out.append(ex.text, cursor, begin - cursor);
    out += kMaskToken;
    cursor = end;
  }
  out.append(ex.text, cursor, std::string::npos);
  return {ex, std::move(out), true};
}

inline MaskedExample unmasked(const LabeledExample& ex) { return {ex, ex.text, false}; }

/// Number of examples masked out of `count` at `fraction`: floor(fraction*count).
/// A small tolerance absorbs binary representation error (0.3*10 is exactly 3).
inline std::size_t masked_quota(double fraction, std::size_t count) {
  const double raw = fraction * static_cast<double>(count);
  const auto k = static_cast<std::size_t>(std::floor(raw + 1e-9));
  return std::min(k, count);
}

/// Per-category stratified masking. For each category, floor(fraction * n) of
/// its n examples are selected by a permutation seeded with (seed, category);
/// an example selected through any of its categories is masked (once).
inline std::vector<MaskedExample> mask_corpus(std::span<const LabeledExample> examples, double fraction,
                                              std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ValidationError("mask fraction must be in [0,1], got " + std::to_string(fraction));

  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    for (const auto& label : examples[i].labels) by_category[label].push_back(i);
  }

  std::vector<bool> selected(examples.size(), false);
  for (auto& [category, members] : by_category) {
    const std::size_t quota = masked_quota(fraction, members.size());
    if (quota == 0) continue;
    DeterministicRng rng(derive_seed(seed, category));
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t k = 0; k < quota; ++k) selected[members[k]] = true;
  }

  std::vector<MaskedExample> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    out.push_back(selected[i] ? mask_example(examples[i]) : unmasked(examples[i]));
  }
  return out;
}

/// NoMask / FullMask / <percent>Mask, e.g. 0.3 -> "30Mask".
inline std::string variant_name(double fraction) {
  if (fraction <= 0.0) return "NoMask";
  if (fraction >= 1.0) return "FullMask";
  return std::to_string(static_cast<int>(std::lround(fraction * 100.0))) + "Mask";
}

inline nlohmann::ordered_json to_json(const MaskedExample& m) {
  auto j = to_json(m.source);
  j["masked_text"] = m.masked_text;
  j["mask_applied"] = m.mask_applied;
  return j;
}

template <typename Json>
MaskedExample masked_example_from_json(const Json& j) {
  MaskedExample m;
  m.source = labeled_example_from_json(j);
  try {
    m.masked_text = j.at("masked_text").template get<std::string>();
    m.mask_applied = j.at("mask_applied").template get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("masked example: ") + e.what());
  }
  return m;
}

}  // namespace emocorpus
