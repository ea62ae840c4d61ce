#pragma once

// Aho-Corasick automaton over token sequences. The alphabet is the set of
// distinct tokens appearing in lexicon surfaces; a document token outside that
// set can never be part of a match and resets the automaton to the root. Since
// patterns are token sequences, every match is aligned to token boundaries.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "emocorpus/lexicon.hpp"
#include "emocorpus/text.hpp"

namespace emocorpus {

class CompiledMatcher {
 public:
  struct Pattern {
    std::vector<std::string> tokens;
    std::string surface;                  // tokens joined by single spaces
    std::vector<std::string> categories;  // sorted, unique
  };

  struct Match {
    std::size_t start = 0;  // token index, inclusive
    std::size_t end = 0;    // token index, exclusive
    std::uint32_t pattern = 0;

    friend bool operator==(const Match&, const Match&) = default;
  };

  explicit CompiledMatcher(const Lexicon& lex) : lexicon_version_(lex.version()) {
    // Surfaces with the same token sequence (e.g. "bem-estar" / "bem estar")
    // collapse into one pattern carrying the union of their categories.
    std::map<std::vector<std::string>, std::vector<std::string>> grouped;
    for (const auto& item : lex.items()) {
      auto& cats = grouped[token_texts(item.surface)];
      cats.push_back(item.category_id);
    }
    nodes_.emplace_back();
    for (auto& [tokens, cats] : grouped) {
      std::sort(cats.begin(), cats.end());
      cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
      const auto id = static_cast<std::uint32_t>(patterns_.size());
      patterns_.push_back({tokens, join_words(tokens), cats});
      by_surface_.emplace(patterns_.back().surface, id);
      insert(tokens, id);
    }
    link();
  }

  const std::vector<Pattern>& patterns() const { return patterns_; }
  const Pattern& pattern(std::uint32_t id) const { return patterns_.at(id); }
  const std::string& lexicon_version() const { return lexicon_version_; }

  /// Pattern whose surface equals `normalized_surface` after tokenization.
  std::optional<std::uint32_t> find_pattern(std::string_view normalized_surface) const {
    auto it = by_surface_.find(join_words(token_texts(normalized_surface)));
    if (it == by_surface_.end()) return std::nullopt;
    return it->second;
  }

  /// All occurrences, overlapping ones included, sorted by (start, end).
  std::vector<Match> match(std::span<const std::string> words) const {
    return run(words.size(), [&](std::size_t i) -> const std::string& { return words[i]; });
  }

  std::vector<Match> match(std::span<const Token> tokens) const {
    return run(tokens.size(), [&](std::size_t i) -> const std::string& { return tokens[i].text; });
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  struct Node {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> next;  // (symbol, node), sorted by symbol
    std::uint32_t fail = 0;
    std::uint32_t output = kNone;  // pattern ending exactly here
    std::uint32_t dict = kNone;    // nearest proper suffix node with an output
    std::uint32_t depth = 0;
  };

  static std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) out.push_back(' ');
      out += words[i];
    }
    return out;
  }

  std::uint32_t child(std::uint32_t node, std::uint32_t symbol) const {
    const auto& next = nodes_[node].next;
    auto it = std::lower_bound(next.begin(), next.end(), std::pair(symbol, std::uint32_t{0}),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    return (it != next.end() && it->first == symbol) ? it->second : kNone;
  }

  void insert(const std::vector<std::string>& tokens, std::uint32_t pattern_id) {
    std::uint32_t node = 0;
    for (const auto& tok : tokens) {
      auto [it, inserted] = symbols_.emplace(tok, static_cast<std::uint32_t>(symbols_.size()));
      const std::uint32_t symbol = it->second;
      std::uint32_t next = child(node, symbol);
      if (next == kNone) {
        next = static_cast<std::uint32_t>(nodes_.size());
        Node fresh;
        fresh.depth = nodes_[node].depth + 1;
        nodes_.push_back(std::move(fresh));
        auto& edges = nodes_[node].next;
        edges.insert(std::upper_bound(edges.begin(), edges.end(), std::pair(symbol, next),
                                      [](const auto& a, const auto& b) { return a.first < b.first; }),
                     {symbol, next});
      }
      node = next;
    }
    nodes_[node].output = pattern_id;
  }

  // Breadth-first failure and dictionary-suffix links.
  void link() {
    std::deque<std::uint32_t> queue;
    for (const auto& [symbol, node] : nodes_[0].next) {
      nodes_[node].fail = 0;
      queue.push_back(node);
    }
    while (!queue.empty()) {
      const std::uint32_t u = queue.front();
      queue.pop_front();
      for (const auto& [symbol, v] : nodes_[u].next) {
        std::uint32_t f = nodes_[u].fail;
        std::uint32_t target = kNone;
        while (true) {
          target = child(f, symbol);
          if (target != kNone || f == 0) break;
          f = nodes_[f].fail;
        }
        nodes_[v].fail = (target == kNone || target == v) ? 0 : target;
        const Node& fn = nodes_[nodes_[v].fail];
        nodes_[v].dict = fn.output != kNone ? nodes_[v].fail : fn.dict;
        queue.push_back(v);
      }
    }
  }

  template <typename WordAt>
  std::vector<Match> run(std::size_t n, WordAt word_at) const {
    std::vector<Match> out;
    std::uint32_t state = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto sym = symbols_.find(word_at(i));
      if (sym == symbols_.end()) {
        state = 0;
        continue;
      }
      while (true) {
        const std::uint32_t next = child(state, sym->second);
        if (next != kNone) {
          state = next;
          break;
        }
        if (state == 0) break;
        state = nodes_[state].fail;
      }
      for (std::uint32_t k = nodes_[state].output != kNone ? state : nodes_[state].dict; k != kNone;
           k = nodes_[k].dict) {
        const Node& hit = nodes_[k];
        out.push_back({i + 1 - hit.depth, i + 1, hit.output});
      }
    }
    std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) {
      return std::tie(a.start, a.end) < std::tie(b.start, b.end);
    });
    return out;
  }

  std::string lexicon_version_;
  std::vector<Pattern> patterns_;
  std::unordered_map<std::string, std::uint32_t> by_surface_;
  std::unordered_map<std::string, std::uint32_t> symbols_;
  std::vector<Node> nodes_;
};

}  // namespace emocorpus
