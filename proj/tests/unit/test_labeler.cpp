#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "emocorpus/labeler.hpp"
#include "emocorpus/random.hpp"
#include "oracles.hpp"

using namespace emocorpus;

namespace {

std::vector<EmotionCategory> schema() { return {{"amor", "", ""}, {"raiva", "", ""}, {"inveja", "", ""}}; }

Lexicon lexicon() {
  return Lexicon(schema(), {{"amo", "amor", ItemKind::base, ""},
                            {"paixão", "amor", ItemKind::base, ""},
                            {"paixão", "inveja", ItemKind::base, ""},
                            {"invejo", "inveja", ItemKind::base, ""},
                            {"odeio", "raiva", ItemKind::base, ""}});
}

NormalizedDocument doc(std::string id, std::string text, std::optional<std::string> term = std::nullopt) {
  return {std::move(id), text, text, std::move(term)};
}

// Distance in tokens from each negator to the span it precedes, walked by hand.
bool negated_by_hand(const std::vector<std::string>& words, std::size_t span_start, std::size_t window) {
  for (std::size_t d = 1; d <= window && d <= span_start; ++d) {
    const auto& w = words[span_start - d];
    if (w == "não" || w == "nem") return true;
  }
  return false;
}

}  // namespace

TEST_CASE("spans carry token ranges and categories") {
  const CompiledMatcher m(lexicon());
  const auto spans = find_matches(m, doc("1", "eu amo isso"));
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].token_start == 1);
  CHECK(spans[0].token_end == 2);
  CHECK(spans[0].category_ids == std::vector<std::string>{"amor"});
  CHECK(find_matches(m, doc("2", "amo amo")).size() == 2);
}

TEST_CASE("negation window") {
  const CompiledMatcher m(lexicon());
  auto decide = [&](const std::string& text, std::size_t window) {
    const auto d = doc("n", text);
    return apply_negation_filter(d, find_matches(m, d), window).keep;
  };
  CHECK_FALSE(decide("não amo isso", 1));
  CHECK(decide("amo isso", 1));
  CHECK(decide("não sei mas amo", 1));
  CHECK_FALSE(decide("não sei mas amo", 3));
  CHECK(decide("amo e não é pouco", 1));
  CHECK_FALSE(decide("nem odeio", 1));
  CHECK(decide("não amo", 0));

  const std::vector<std::string> words{"não", "sei", "mas", "amo"};
  CHECK(negated_by_hand(words, 3, 1) == !decide("não sei mas amo", 1));
  CHECK(negated_by_hand(words, 3, 3) == !decide("não sei mas amo", 3));
}

TEST_CASE("union and collection_term policies") {
  const CompiledMatcher m(lexicon());
  const auto d = doc("u", "amo e invejo", std::string("amo"));
  const auto spans = find_matches(m, d);
  const auto u = assign_labels(m, d, spans, LabelPolicy::union_of_spans);
  REQUIRE(u.example);
  CHECK(u.example->labels == std::vector<std::string>{"amor", "inveja"});
  const auto c = assign_labels(m, d, spans, LabelPolicy::collection_term);
  REQUIRE(c.example);
  CHECK(c.example->labels == std::vector<std::string>{"amor"});
  CHECK_FALSE(c.collection_term_fallback);

  const auto no_term = doc("v", "amo e invejo");
  const auto f = assign_labels(m, no_term, find_matches(m, no_term), LabelPolicy::collection_term);
  CHECK(f.collection_term_fallback);
  REQUIRE(f.example);
  CHECK(f.example->labels.size() == 2);

  const auto empty = doc("w", "nada aqui");
  CHECK_FALSE(assign_labels(m, empty, {}, LabelPolicy::union_of_spans).example);
}

TEST_CASE("label_corpus composes match, negation and assignment") {
  const CompiledMatcher m(lexicon());
  const std::vector<NormalizedDocument> docs{doc("a", "eu amo"), doc("b", "não odeio"), doc("c", "oi")};
  const auto r = label_corpus(m, docs);
  REQUIRE(r.examples.size() == 1);
  CHECK(r.examples[0].id == "a");
  CHECK(r.stats == LabelingStats{3, 1, 1, 1, 0});
  CHECK(r.examples[0].provenance.lexicon_hash == lexicon().version());
  CHECK(r.examples[0].provenance.policy == "union");

  const auto none = label_corpus(m, std::vector<NormalizedDocument>{});
  CHECK(none.examples.empty());
  CHECK(none.stats == LabelingStats{});
}

TEST_CASE("labeled example JSON round trip and integrity") {
  const CompiledMatcher m(lexicon());
  const auto r = label_corpus(m, std::vector<NormalizedDocument>{doc("a", "que paixão, amo!")});
  REQUIRE(r.examples.size() == 1);
  const auto j = to_json(r.examples[0]);
  CHECK(labeled_example_from_json(nlohmann::json::parse(j.dump())) == r.examples[0]);

  auto bad = nlohmann::json::parse(j.dump());
  bad["spans"][0]["end"] = 9;
  CHECK_THROWS_AS(labeled_example_from_json(bad), IntegrityError);
  auto wrong = nlohmann::json::parse(j.dump());
  wrong["spans"][0]["surface"] = "ódio";
  CHECK_THROWS_AS(labeled_example_from_json(wrong), IntegrityError);
}

TEST_CASE("generated corpus: soundness, provenance, order and threading") {
  DeterministicRng rng(5);
  const std::vector<std::string> vocab{"amo", "odeio", "paixão", "invejo", "não", "nem", "isso", "muito", "e", "😊"};
  std::vector<NormalizedDocument> docs;
  for (int i = 0; i < 3000; ++i) {
    std::string text;
    const auto len = rng.below(10);
    for (std::uint64_t k = 0; k < len; ++k) text += (k ? " " : "") + vocab[rng.below(vocab.size())];
    docs.push_back(doc("d" + std::to_string(i), text));
  }
  const CompiledMatcher m(lexicon());
  for (std::size_t window : {0u, 1u, 2u}) {
    LabelingOptions opts;
    opts.negation_window = window;
    const auto serial = label_corpus(m, docs, opts);
    opts.threads = 4;
    const auto parallel = label_corpus(m, docs, opts);
    CHECK(parallel.examples == serial.examples);
    CHECK(parallel.stats == serial.stats);
    CHECK(serial.stats.input == serial.stats.labeled + serial.stats.unmatched + serial.stats.discarded_negation);

    // Oracle pipeline: naive scan for spans, hand-walked negation.
    std::vector<std::pair<std::vector<std::string>, std::string>> items;
    const auto lex = lexicon();
    for (const auto& it : lex.items()) items.emplace_back(token_texts(it.surface), it.category_id);
    std::size_t expected = 0;
    for (const auto& d : docs) {
      const auto words = token_texts(d.text);
      const auto hits = oracle::naive_scan(items, words);
      if (hits.empty()) continue;
      const bool negated = std::any_of(hits.begin(), hits.end(),
                                       [&](const auto& h) { return negated_by_hand(words, h.start, window); });
      expected += !negated;
    }
    CHECK(serial.stats.labeled == expected);

    for (const auto& ex : serial.examples) {
      std::set<std::string> witnessed;
      for (const auto& s : ex.spans) {
        witnessed.insert(s.category_ids.begin(), s.category_ids.end());
        for (std::size_t d = 1; d <= window && d <= s.token_start; ++d) CHECK_FALSE(is_negator(ex.tokens[s.token_start - d].text));
      }
      CHECK(std::set<std::string>(ex.labels.begin(), ex.labels.end()) == witnessed);
    }
  }
}

TEST_CASE("permuting documents permutes examples") {
  const CompiledMatcher m(lexicon());
  std::vector<NormalizedDocument> docs{doc("a", "amo"), doc("b", "oi"), doc("c", "odeio"), doc("d", "não amo"),
                                       doc("e", "invejo e amo")};
  const auto forward = label_corpus(m, docs);
  std::reverse(docs.begin(), docs.end());
  auto backward = label_corpus(m, docs).examples;
  std::reverse(backward.begin(), backward.end());
  CHECK(backward == forward.examples);
}
