#pragma once

// Hashed bag-of-ngrams one-vs-rest logistic regression, trained with seeded
// minibatch gradient descent. A desk-scale stand-in for transformer
// fine-tuning: enough to tell a model that memorizes lexical items from one
// that learns from the surrounding context.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "emocorpus/error.hpp"
#include "emocorpus/hash.hpp"
#include "emocorpus/jsonl.hpp"
#include "emocorpus/random.hpp"
#include "emocorpus/text.hpp"

namespace emocorpus {

inline constexpr std::uint32_t kDefaultDimension = 1u << 18;
inline constexpr double kDefaultThreshold = 0.30;

struct FeatureVector {
  std::uint32_t dimension = 0;
  std::vector<std::pair<std::uint32_t, double>> entries;  // sorted by index, unique

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline std::uint32_t feature_index(std::string_view feature, std::uint32_t dimension) {
  return static_cast<std::uint32_t>(fnv1a64(feature) & (dimension - 1));
}

inline void check_dimension(std::uint32_t dimension) {
  if (dimension == 0 || !std::has_single_bit(dimension))
    throw ValidationError("feature dimension must be a power of two, got " + std::to_string(dimension));
}

/// Unigram and bigram ("a_b") counts hashed into [0, D), L2-normalized.
/// [MASK] is an ordinary token.
inline FeatureVector featurize(std::string_view text, std::uint32_t dimension = kDefaultDimension) {
  check_dimension(dimension);
  const auto words = token_texts(text);
  std::map<std::uint32_t, double> counts;
  for (std::size_t i = 0; i < words.size(); ++i) {
    counts[feature_index(words[i], dimension)] += 1.0;
    if (i + 1 < words.size()) counts[feature_index(words[i] + "_" + words[i + 1], dimension)] += 1.0;
  }
  FeatureVector fv{dimension, {counts.begin(), counts.end()}};
  double norm = 0.0;
  for (const auto& [idx, v] : fv.entries) norm += v * v;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& [idx, v] : fv.entries) v /= norm;
  }
  return fv;
}

struct TrainConfig {
  std::size_t epochs = 4;
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::uint32_t dimension = kDefaultDimension;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline std::string schema_hash(const std::vector<std::string>& categories) {
  ContentHasher h;
  for (const auto& c : categories) h.field(c);
  return h.hex();
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Binary cross-entropy of logit z against target y in {0,1}, computed without
// overflow for large |z|.
inline double logistic_loss(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

struct Prediction {
  std::vector<double> scores;         // schema order
  std::vector<std::string> decided;   // {c : score_c >= threshold}, schema order
};

class LinearModel {
 public:
  LinearModel(std::vector<std::string> categories, TrainConfig config)
      : categories_(std::move(categories)), config_(config) {
    check_dimension(config_.dimension);
    if (categories_.empty()) throw ValidationError("model needs at least one category");
    weights_.assign(static_cast<std::size_t>(config_.dimension) * categories_.size(), 0.0);
    bias_.assign(categories_.size(), 0.0);
  }

  const std::vector<std::string>& categories() const { return categories_; }
  const TrainConfig& config() const { return config_; }
  std::size_t num_categories() const { return categories_.size(); }
  std::uint32_t dimension() const { return config_.dimension; }

  double weight(std::uint32_t feature, std::size_t category) const {
    return weights_[static_cast<std::size_t>(feature) * categories_.size() + category];
  }
  double& weight(std::uint32_t feature, std::size_t category) {
    return weights_[static_cast<std::size_t>(feature) * categories_.size() + category];
  }
  double bias(std::size_t category) const { return bias_[category]; }
  double& bias(std::size_t category) { return bias_[category]; }

  /// Per-category logits b_c + w_c . x.
  std::vector<double> logits(const FeatureVector& x) const {
    if (x.dimension != config_.dimension)
      throw ValidationError("feature dimension " + std::to_string(x.dimension) + " does not match model dimension " +
                            std::to_string(config_.dimension));
    std::vector<double> z = bias_;
    const std::size_t k = categories_.size();
    for (const auto& [idx, v] : x.entries) {
      const double* row = &weights_[static_cast<std::size_t>(idx) * k];
      for (std::size_t c = 0; c < k; ++c) z[c] += row[c] * v;
    }
    return z;
  }

  bool all_finite() const {
    return std::all_of(weights_.begin(), weights_.end(), [](double w) { return std::isfinite(w); }) &&
           std::all_of(bias_.begin(), bias_.end(), [](double b) { return std::isfinite(b); });
  }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  std::vector<std::string> categories_;
  TrainConfig config_;
  std::vector<double> weights_;  // feature-major: weights_[feature * K + category]
  std::vector<double> bias_;
};

inline Prediction predict(const LinearModel& model, const FeatureVector& x, double threshold = kDefaultThreshold) {
  Prediction p;
  for (double z : model.logits(x)) p.scores.push_back(sigmoid(z));
  for (std::size_t c = 0; c < p.scores.size(); ++c) {
    if (p.scores[c] >= threshold) p.decided.push_back(model.categories()[c]);
  }
  return p;
}

inline Prediction predict(const LinearModel& model, std::string_view text, double threshold = kDefaultThreshold) {
  return predict(model, featurize(text, model.dimension()), threshold);
}

struct TrainingExample {
  FeatureVector features;
  std::vector<std::string> labels;
};

// Loss and gradient of the per-category logistic loss summed over categories
// and over the examples of the batch.
struct BatchGradient {
  double loss = 0.0;
  std::vector<double> bias;
  std::map<std::uint32_t, std::vector<double>> weights;  // feature -> per-category
};

namespace detail {

struct EncodedTargets {
  std::vector<std::vector<std::uint8_t>> y;  // [example][category]
};

inline EncodedTargets encode_targets(const LinearModel& model, std::span<const TrainingExample> examples) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < model.num_categories(); ++c) index.emplace(model.categories()[c], c);
  EncodedTargets t;
  t.y.reserve(examples.size());
  for (const auto& ex : examples) {
    std::vector<std::uint8_t> row(model.num_categories(), 0);
    for (const auto& l : ex.labels) {
      auto it = index.find(l);
      if (it == index.end()) throw ValidationError("training label '" + l + "' not in schema");
      row[it->second] = 1;
    }
    t.y.push_back(std::move(row));
  }
  return t;
}

template <typename Indices>
BatchGradient batch_gradient(const LinearModel& model, std::span<const TrainingExample> examples,
                             const EncodedTargets& targets, const Indices& batch) {
  const std::size_t k = model.num_categories();
  BatchGradient g;
  g.bias.assign(k, 0.0);
  for (const std::size_t i : batch) {
    const auto& x = examples[i].features;
    const auto z = model.logits(x);
    std::vector<double> residual(k);
    for (std::size_t c = 0; c < k; ++c) {
      const double y = targets.y[i][c];
      g.loss += logistic_loss(z[c], y);
      residual[c] = sigmoid(z[c]) - y;
      g.bias[c] += residual[c];
    }
    for (const auto& [idx, v] : x.entries) {
      auto& row = g.weights[idx];
      if (row.empty()) row.assign(k, 0.0);
      for (std::size_t c = 0; c < k; ++c) row[c] += residual[c] * v;
    }
  }
  return g;
}

}  // namespace detail

/// Mean training loss of `model` over `examples` (summed over categories).
inline double mean_loss(const LinearModel& model, std::span<const TrainingExample> examples) {
  if (examples.empty()) return 0.0;
  const auto targets = detail::encode_targets(model, examples);
  double total = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto z = model.logits(examples[i].features);
    for (std::size_t c = 0; c < z.size(); ++c) total += logistic_loss(z[c], targets.y[i][c]);
  }
  return total / static_cast<double>(examples.size());
}

/// Loss and analytic gradient with all of `examples` as one batch.
inline BatchGradient loss_gradient(const LinearModel& model, std::span<const TrainingExample> examples) {
  if (examples.empty()) throw ValidationError("empty batch");
  const auto targets = detail::encode_targets(model, examples);
  std::vector<std::size_t> all(examples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return detail::batch_gradient(model, examples, targets, all);
}

struct TrainingResult {
  LinearModel model;
  std::vector<double> epoch_loss;  // mean training loss after each epoch
};

/// One-vs-rest logistic regression by minibatch gradient descent. The example
/// order is reshuffled every epoch from `config.seed`; everything else is in a
/// fixed order, so equal inputs give bit-identical weights.
inline TrainingResult train(std::span<const TrainingExample> examples, const std::vector<std::string>& categories,
                            const TrainConfig& config) {
  if (examples.empty()) throw ValidationError("empty training set");
  if (config.batch_size == 0) throw ValidationError("batch size must be positive");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate))
    throw ValidationError("learning rate must be positive and finite");
  TrainingResult result{LinearModel(categories, config), {}};
  LinearModel& model = result.model;
  for (const auto& ex : examples) {
    if (ex.features.dimension != config.dimension)
      throw ValidationError("training example dimension does not match config");
  }
  const auto targets = detail::encode_targets(model, examples);

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  DeterministicRng rng(config.seed);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::span<const std::size_t> batch(order.data() + start,
                                               std::min(config.batch_size, order.size() - start));
      const auto g = detail::batch_gradient(model, examples, targets, batch);
      if (!std::isfinite(g.loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch starting at " +
                           std::to_string(start) + " (learning rate " + std::to_string(config.learning_rate) + ")");
      }
      for (std::size_t c = 0; c < model.num_categories(); ++c) model.bias(c) -= config.learning_rate * g.bias[c];
      for (const auto& [idx, row] : g.weights) {
        for (std::size_t c = 0; c < row.size(); ++c) model.weight(idx, c) -= config.learning_rate * row[c];
      }
    }
    const double loss = mean_loss(model, examples);
    if (!std::isfinite(loss) || !model.all_finite())
      throw NumericError("non-finite model after epoch " + std::to_string(epoch + 1));
    result.epoch_loss.push_back(loss);
  }
  return result;
}

inline nlohmann::ordered_json to_json(const LinearModel& model) {
  const auto& cfg = model.config();
  nlohmann::ordered_json j;
  j["format"] = "emocorpus.linear_model";
  j["version"] = 1;
  j["schema_hash"] = schema_hash(model.categories());
  j["categories"] = model.categories();
  j["config"] = {{"epochs", cfg.epochs},
                 {"learning_rate", cfg.learning_rate},
                 {"batch_size", cfg.batch_size},
                 {"seed", cfg.seed},
                 {"dimension", cfg.dimension}};
  std::vector<double> bias;
  for (std::size_t c = 0; c < model.num_categories(); ++c) bias.push_back(model.bias(c));
  j["bias"] = bias;
  // Only rows with a nonzero weight are stored: [feature, [w_0 .. w_K-1]].
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::uint32_t f = 0; f < model.dimension(); ++f) {
    std::vector<double> row(model.num_categories());
    bool any = false;
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = model.weight(f, c);
      any = any || row[c] != 0.0;
    }
    if (any) rows.push_back({f, row});
  }
  j["weights"] = std::move(rows);
  return j;
}

/// Rebuilds a model, rejecting files whose category order differs from
/// `expected_categories`.
inline LinearModel model_from_json(const nlohmann::json& j, const std::vector<std::string>& expected_categories) {
  try {
    if (j.at("format").get<std::string>() != "emocorpus.linear_model" || j.at("version").get<int>() != 1)
      throw ParseError("not an emocorpus linear model (version 1)");
    const auto categories = j.at("categories").get<std::vector<std::string>>();
    const auto stored_hash = j.at("schema_hash").get<std::string>();
    if (stored_hash != schema_hash(categories)) throw IntegrityError("model schema hash does not match its categories");
    if (stored_hash != schema_hash(expected_categories))
      throw ValidationError("model schema " + stored_hash + " does not match expected schema " +
                            schema_hash(expected_categories));
    const auto& c = j.at("config");
    TrainConfig cfg{c.at("epochs").get<std::size_t>(), c.at("learning_rate").get<double>(),
                    c.at("batch_size").get<std::size_t>(), c.at("seed").get<std::uint64_t>(),
                    c.at("dimension").get<std::uint32_t>()};
    LinearModel model(categories, cfg);
    const auto bias = j.at("bias").get<std::vector<double>>();
    if (bias.size() != categories.size()) throw IntegrityError("bias length does not match categories");
    for (std::size_t k = 0; k < bias.size(); ++k) model.bias(k) = bias[k];
    for (const auto& row : j.at("weights")) {
      const auto f = row.at(0).get<std::uint32_t>();
      const auto w = row.at(1).get<std::vector<double>>();
      if (f >= cfg.dimension || w.size() != categories.size()) throw IntegrityError("weight row out of range");
      for (std::size_t k = 0; k < w.size(); ++k) model.weight(f, k) = w[k];
    }
    if (!model.all_finite()) throw IntegrityError("model contains non-finite weights");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

inline void save_model(const LinearModel& model, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << to_json(model).dump() << '\n';
  close_checked(out, path);
}

inline LinearModel load_model(const std::filesystem::path& path, const std::vector<std::string>& expected_categories) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(path.string() + ": invalid JSON");
  return model_from_json(j, expected_categories);
}

}  // namespace emocorpus
