#include <catch2/catch_amalgamated.hpp>

#include "emocorpus/eval.hpp"
#include "emocorpus/model.hpp"
#include "emocorpus/random.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace emocorpus;

namespace {

constexpr std::uint32_t kSmall = 1u << 10;

TrainConfig small_config() {
  TrainConfig c;
  c.dimension = kSmall;
  c.seed = 3;
  return c;
}

std::vector<TrainingExample> separable(std::uint32_t dimension) {
  std::vector<TrainingExample> xs;
  const std::vector<std::string> filler{"o", "dia", "foi", "assim", "hoje"};
  for (int i = 0; i < 20; ++i) {
    const bool first = i % 2 == 0;
    const std::string text = (first ? "amo " : "odeio ") + filler[i % 5] + " " + filler[(i + 2) % 5];
    xs.push_back({featurize(text, dimension), {first ? "amor" : "raiva"}});
  }
  return xs;
}

}  // namespace

TEST_CASE("featurize matches a dense hash walk") {
  for (const std::string text : {"a b", "amo muito muito", "😊 ok [MASK]", "x"}) {
    const auto fv = featurize(text, kSmall);
    const auto dense = oracle::dense_features(token_texts(text), kSmall);
    std::vector<double> mine(kSmall, 0.0);
    for (const auto& [i, v] : fv.entries) mine[i] = v;
    for (std::uint32_t i = 0; i < kSmall; ++i) REQUIRE(mine[i] == Catch::Approx(dense[i]).margin(1e-15));
  }
  const auto ab = featurize("a b", kSmall);
  double norm = 0.0;
  for (const auto& [i, v] : ab.entries) norm += v * v;
  CHECK(norm == Catch::Approx(1.0));
  std::set<std::uint32_t> idx;
  for (const auto& [i, v] : ab.entries) idx.insert(i);
  for (const std::string f : {"a", "b", "a_b"}) CHECK(idx.contains(oracle::fnv_walk(f) % kSmall));
}

TEST_CASE("featurize edge cases") {
  CHECK(featurize("", kSmall).entries.empty());
  CHECK(featurize("!!", kSmall).entries.empty());
  CHECK(featurize("amo isso", kSmall) == featurize("amo isso", kSmall));
  CHECK_THROWS_AS(featurize("a", 1000), ValidationError);
}

TEST_CASE("sigmoid and loss are stable") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) == 0.0);
  CHECK(std::isfinite(logistic_loss(-800.0, 1.0)));
  CHECK(logistic_loss(-800.0, 1.0) == Catch::Approx(800.0));
  CHECK(logistic_loss(0.0, 0.0) == Catch::Approx(std::log(2.0)));
}

TEST_CASE("zero model and threshold rule") {
  const LinearModel m({"amor", "raiva", "medo"}, small_config());
  const auto p = predict(m, "qualquer coisa", 0.30);
  for (double s : p.scores) CHECK(s == 0.5);
  CHECK(p.decided.size() == 3);
  CHECK(predict(m, "x", 0.51).decided.empty());
  CHECK(predict(m, "x", 0.5).decided.size() == 3);
  CHECK(predict(m, "x", 1.0).decided.empty());

  const auto z = train(separable(kSmall), {"amor", "raiva"}, [] { auto c = small_config(); c.epochs = 0; return c; }());
  CHECK(z.model == LinearModel({"amor", "raiva"}, z.model.config()));
  CHECK(z.epoch_loss.empty());
}

TEST_CASE("threshold boundary is inclusive") {
  LinearModel m({"amor"}, small_config());
  m.bias(0) = std::log(0.3 / 0.7);
  const double s = predict(m, "", 0.0).scores[0];
  CHECK(predict(m, "", s).decided.size() == 1);
  CHECK(predict(m, "", std::nextafter(s, 1.0)).decided.empty());
}

TEST_CASE("raising the threshold never adds labels") {
  DeterministicRng rng(1);
  LinearModel m({"a", "b", "c", "d"}, small_config());
  for (std::uint32_t f = 0; f < kSmall; ++f) {
    for (std::size_t c = 0; c < 4; ++c) m.weight(f, c) = rng.uniform() * 4 - 2;
  }
  for (int n = 0; n < 200; ++n) {
    const std::string text = "w" + std::to_string(rng.below(50)) + " w" + std::to_string(rng.below(50));
    std::size_t prev = 5;
    for (double t = 0.0; t <= 1.0; t += 0.05) {
      const auto k = predict(m, text, t).decided.size();
      CHECK(k <= prev);
      prev = k;
    }
  }
}

TEST_CASE("separable toy set is learned perfectly") {
  const auto xs = separable(kSmall);
  auto cfg = small_config();
  cfg.epochs = 20;
  const auto r = train(xs, {"amor", "raiva"}, cfg);
  REQUIRE(r.epoch_loss.size() == 20);
  CHECK(r.epoch_loss.back() < r.epoch_loss.front());
  std::vector<std::vector<std::string>> pred, gold;
  for (const auto& x : xs) {
    pred.push_back(predict(r.model, x.features).decided);
    gold.push_back(x.labels);
  }
  const auto report = per_category_prf(pred, gold, {"amor", "raiva"});
  CHECK(report.macro.f1 == 1.0);
}

TEST_CASE("training is deterministic") {
  const auto xs = separable(kSmall);
  const auto a = train(xs, {"amor", "raiva"}, small_config());
  const auto b = train(xs, {"amor", "raiva"}, small_config());
  CHECK(a.model == b.model);
  CHECK(a.epoch_loss == b.epoch_loss);
  auto other = small_config();
  other.seed = 4;
  CHECK_FALSE(train(xs, {"amor", "raiva"}, other).model == a.model);
}

TEST_CASE("training input validation") {
  const auto xs = separable(kSmall);
  CHECK_THROWS_AS(train({}, {"amor"}, small_config()), ValidationError);
  CHECK_THROWS_AS(train(xs, {"amor"}, small_config()), ValidationError);
  auto bad = small_config();
  bad.batch_size = 0;
  CHECK_THROWS_AS(train(xs, {"amor", "raiva"}, bad), ValidationError);
  bad = small_config();
  bad.dimension = 2048;
  CHECK_THROWS_AS(train(xs, {"amor", "raiva"}, bad), ValidationError);
}

TEST_CASE("divergent training aborts") {
  auto cfg = small_config();
  cfg.learning_rate = 1e308;
  cfg.epochs = 3;
  CHECK_THROWS_AS(train(separable(kSmall), {"amor", "raiva"}, cfg), NumericError);
}

TEST_CASE("analytic gradient matches central differences") {
  DeterministicRng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<std::string> cats{"a", "b", "c"};
    LinearModel m(cats, [] { auto c = small_config(); c.dimension = 64; return c; }());
    for (std::uint32_t f = 0; f < 64; ++f) {
      for (std::size_t c = 0; c < 3; ++c) m.weight(f, c) = rng.uniform() - 0.5;
    }
    for (std::size_t c = 0; c < 3; ++c) m.bias(c) = rng.uniform() - 0.5;
    std::vector<TrainingExample> xs;
    for (int i = 0; i < 6; ++i) {
      std::vector<std::string> labels;
      for (const auto& c : cats) {
        if (rng.below(2)) labels.push_back(c);
      }
      xs.push_back({featurize("t" + std::to_string(rng.below(9)) + " u" + std::to_string(rng.below(9)), 64), labels});
    }
    const auto g = loss_gradient(m, xs);
    const double total = mean_loss(m, xs) * xs.size();
    CHECK(g.loss == Catch::Approx(total).epsilon(1e-12));
    for (const auto& [f, row] : g.weights) {
      for (std::size_t c = 0; c < 3; ++c) {
        auto loss_at = [&](double w) {
          LinearModel probe = m;
          probe.weight(f, c) = w;
          return mean_loss(probe, xs) * xs.size();
        };
        const double numeric = oracle::central_difference(loss_at, m.weight(f, c), 1e-6);
        CHECK(oracle::relative_error(row[c], numeric) < 1e-5);
      }
    }
    for (std::size_t c = 0; c < 3; ++c) {
      auto loss_at = [&](double b) {
        LinearModel probe = m;
        probe.bias(c) = b;
        return mean_loss(probe, xs) * xs.size();
      };
      CHECK(oracle::relative_error(g.bias[c], oracle::central_difference(loss_at, m.bias(c), 1e-6)) < 1e-5);
    }
  }
}

TEST_CASE("model file round trip and schema check") {
  emocorpus::testing::TempDir tmp;
  auto cfg = small_config();
  cfg.epochs = 5;
  const auto r = train(separable(kSmall), {"amor", "raiva"}, cfg);
  save_model(r.model, tmp / "m.json");
  CHECK(load_model(tmp / "m.json", {"amor", "raiva"}) == r.model);
  CHECK_THROWS_AS(load_model(tmp / "m.json", {"raiva", "amor"}), ValidationError);
  CHECK_THROWS_AS(load_model(tmp / "none.json", {"amor"}), IoError);
  tmp.write("junk.json", "{");
  CHECK_THROWS_AS(load_model(tmp / "junk.json", {"amor"}), ParseError);
}
