#include <catch2/catch_amalgamated.hpp>

#include "emocorpus/matcher.hpp"
#include "emocorpus/random.hpp"
#include "oracles.hpp"

using namespace emocorpus;

namespace {

std::vector<EmotionCategory> schema() { return {{"amor", "", ""}, {"raiva", "", ""}, {"inveja", "", ""}}; }

std::vector<oracle::NaiveMatch> from_matcher(const CompiledMatcher& m, const std::vector<std::string>& words) {
  std::vector<oracle::NaiveMatch> out;
  for (const auto& hit : m.match(std::span<const std::string>(words)))
    out.push_back({hit.start, hit.end, m.pattern(hit.pattern).categories});
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("single word match aligns to tokens") {
  const Lexicon lex(schema(), {{"amo", "amor", ItemKind::base, ""}});
  const CompiledMatcher m(lex);
  const auto hits = m.match(std::span<const Token>(tokenize("eu amo isso")));
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].start == 1);
  CHECK(hits[0].end == 2);
  CHECK(m.match(std::span<const Token>(tokenize("amostra"))).empty());
  CHECK(m.match(std::span<const Token>(tokenize("amo amo"))).size() == 2);
}

TEST_CASE("multi-word and overlapping patterns") {
  const Lexicon lex(schema(), {{"tô pistola", "raiva", ItemKind::slang, ""},
                               {"pistola", "raiva", ItemKind::base, ""},
                               {"morrer de inveja", "inveja", ItemKind::base, ""},
                               {"de inveja", "inveja", ItemKind::base, ""}});
  const CompiledMatcher m(lex);
  const auto toks = tokenize("tô pistola e vou morrer de inveja");
  const auto hits = m.match(std::span<const Token>(toks));
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (const auto& h : hits) ranges.emplace_back(h.start, h.end);
  CHECK(ranges == std::vector<std::pair<std::size_t, std::size_t>>{{0, 2}, {1, 2}, {4, 7}, {5, 7}});
}

TEST_CASE("same token sequence merges categories") {
  const Lexicon lex(schema(), {{"paixão", "amor", ItemKind::base, ""}, {"paixão", "inveja", ItemKind::base, ""},
                               {"bem-estar", "amor", ItemKind::base, ""}, {"bem estar", "raiva", ItemKind::base, ""}});
  const CompiledMatcher m(lex);
  REQUIRE(m.patterns().size() == 2);
  const auto id = m.find_pattern("paixão");
  REQUIRE(id);
  CHECK(m.pattern(*id).categories == std::vector<std::string>{"amor", "inveja"});
  const auto hits = m.match(std::span<const Token>(tokenize("que bem estar")));
  REQUIRE(hits.size() == 1);
  CHECK(m.pattern(hits[0].pattern).categories == std::vector<std::string>{"amor", "raiva"});
}

TEST_CASE("emoji items match as tokens") {
  const Lexicon lex(schema(), {{"😡", "raiva", ItemKind::base, ""}});
  const CompiledMatcher m(lex);
  CHECK(m.match(std::span<const Token>(tokenize("affff😡😡"))).size() == 2);
}

TEST_CASE("matcher agrees with naive scan on random instances") {
  DeterministicRng rng(2024);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "aa", "ab"};
  const auto cats = schema();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LexicalItem> items;
    std::set<std::pair<std::string, std::string>> seen;
    std::vector<std::pair<std::vector<std::string>, std::string>> oracle_items;
    const auto n_items = 1 + rng.below(30);
    for (std::uint64_t i = 0; i < n_items; ++i) {
      std::vector<std::string> words;
      const auto len = 1 + rng.below(3);
      std::string surface;
      for (std::uint64_t k = 0; k < len; ++k) {
        words.push_back(vocab[rng.below(vocab.size())]);
        surface += (k ? " " : "") + words.back();
      }
      const auto& cat = cats[rng.below(cats.size())].id;
      if (!seen.emplace(surface, cat).second) continue;
      items.push_back({surface, cat, ItemKind::base, ""});
      oracle_items.emplace_back(words, cat);
    }
    const CompiledMatcher m(Lexicon(cats, items));
    std::vector<std::string> doc;
    const auto len = rng.below(40);
    for (std::uint64_t k = 0; k < len; ++k) doc.push_back(vocab[rng.below(vocab.size())]);
    REQUIRE(from_matcher(m, doc) == oracle::naive_scan(oracle_items, doc));
  }
}
