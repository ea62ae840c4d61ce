#include <catch2/catch_amalgamated.hpp>

#include "emocorpus/masker.hpp"
#include "emocorpus/random.hpp"

using namespace emocorpus;

namespace {

LabeledExample example(std::string id, std::string text, std::vector<std::pair<std::size_t, std::size_t>> ranges,
                       std::vector<std::string> labels = {"raiva"}) {
  LabeledExample ex;
  ex.id = std::move(id);
  ex.text = std::move(text);
  ex.tokens = tokenize(ex.text);
  for (const auto& [a, b] : ranges) ex.spans.push_back({a, b, join_tokens(ex.tokens, a, b), labels});
  ex.labels = std::move(labels);
  return ex;
}

}  // namespace

TEST_CASE("masking keeps punctuation and spacing") {
  const auto ex = example("t", "tô indignada e não é pouco!", {{1, 2}});
  const auto m = mask_example(ex);
  CHECK(m.masked_text == "tô [MASK] e não é pouco!");
  CHECK(m.mask_applied);
  CHECK(m.source.labels == ex.labels);
}

TEST_CASE("a span over the whole text becomes a single mask") {
  CHECK(mask_example(example("t", "saudade", {{0, 1}})).masked_text == "[MASK]");
  CHECK(mask_example(example("t", "tô pistola", {{0, 2}})).masked_text == "[MASK]");
}

TEST_CASE("overlapping spans merge") {
  const std::string text = "a bb, ccc dddd e";
  const auto m = mask_example(example("t", text, {{1, 3}, {2, 4}}));
  // Hand-merged: tokens 1..3 run from byte 2 ("bb") to byte 14 (end of "dddd").
  const std::string expected = text.substr(0, 2) + "[MASK]" + text.substr(14);
  CHECK(m.masked_text == expected);
  CHECK(m.masked_text == "a [MASK] e");
  CHECK(mask_example(example("t", "a b c d", {{0, 1}, {1, 2}, {3, 4}})).masked_text == "[MASK] [MASK] c [MASK]");
}

TEST_CASE("out of range span is an integrity error") {
  auto ex = example("t", "a b", {});
  ex.spans.push_back({1, 5, "b", {"raiva"}});
  CHECK_THROWS_AS(mask_example(ex), IntegrityError);
}

TEST_CASE("masked_quota floors") {
  CHECK(masked_quota(0.3, 10) == 3);
  CHECK(masked_quota(0.3, 1) == 0);
  CHECK(masked_quota(0.3, 3) == 0);
  CHECK(masked_quota(0.3, 4) == 1);
  CHECK(masked_quota(1.0, 7) == 7);
  CHECK(masked_quota(0.0, 7) == 0);
  for (std::size_t n = 0; n < 500; ++n) {
    const auto q = masked_quota(0.3, n);
    CHECK(q * 10 <= 3 * n);
    CHECK((q + 1) * 10 > 3 * n);
  }
}

TEST_CASE("mask_corpus fraction extremes") {
  std::vector<LabeledExample> xs;
  for (int i = 0; i < 10; ++i) xs.push_back(example("e" + std::to_string(i), "eu odeio " + std::to_string(i), {{1, 2}}));
  for (const auto& m : mask_corpus(xs, 0.0, 1)) {
    CHECK(m.masked_text == m.source.text);
    CHECK_FALSE(m.mask_applied);
  }
  for (const auto& m : mask_corpus(xs, 1.0, 1)) CHECK(m.masked_text.find("odeio") == std::string::npos);
  CHECK_THROWS_AS(mask_corpus(xs, 1.5, 1), ValidationError);
  CHECK_THROWS_AS(mask_corpus(xs, -0.1, 1), ValidationError);
}

TEST_CASE("thirty percent of a single category is exactly floor and seed-stable") {
  std::vector<LabeledExample> xs;
  for (int i = 0; i < 10; ++i) xs.push_back(example("e" + std::to_string(i), "eu odeio " + std::to_string(i), {{1, 2}}));
  auto chosen = [&](std::uint64_t seed) {
    std::set<std::string> ids;
    for (const auto& m : mask_corpus(xs, 0.3, seed)) {
      if (m.mask_applied) ids.insert(m.source.id);
    }
    return ids;
  };
  CHECK(chosen(42).size() == 3);
  CHECK(chosen(42) == chosen(42));
  bool differs = false;
  for (std::uint64_t s = 0; s < 20 && !differs; ++s) differs = chosen(s) != chosen(42);
  CHECK(differs);
}

TEST_CASE("stratified masking over multi-label corpora") {
  DeterministicRng rng(8);
  const std::vector<std::string> cats{"amor", "raiva", "inveja", "medo"};
  std::vector<LabeledExample> xs;
  for (int i = 0; i < 400; ++i) {
    std::set<std::string> labels{cats[rng.below(cats.size())]};
    if (rng.below(4) == 0) labels.insert(cats[rng.below(cats.size())]);
    xs.push_back(example("e" + std::to_string(i), "x li y", {{1, 2}}, {labels.begin(), labels.end()}));
  }
  const auto masked = mask_corpus(xs, 0.3, 77);
  REQUIRE(masked.size() == xs.size());
  std::map<std::string, std::size_t> total, hit;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(masked[i].source == xs[i]);
    for (const auto& l : xs[i].labels) {
      ++total[l];
      hit[l] += masked[i].mask_applied;
    }
  }
  // Each category gets at least its quota; multi-label examples may push it higher.
  for (const auto& [c, n] : total) CHECK(hit[c] >= masked_quota(0.3, n));
  CHECK(mask_corpus(xs, 0.3, 77) == masked);
}

TEST_CASE("masked example JSON round trip") {
  const auto m = mask_example(example("t", "tô indignada!", {{1, 2}}));
  const auto j = nlohmann::json::parse(to_json(m).dump());
  CHECK(masked_example_from_json(j) == m);
}

TEST_CASE("variant names") {
  CHECK(variant_name(0.0) == "NoMask");
  CHECK(variant_name(0.3) == "30Mask");
  CHECK(variant_name(1.0) == "FullMask");
}
