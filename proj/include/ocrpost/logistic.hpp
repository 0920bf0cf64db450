// Copyright 2026 The ocrpost Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OCRPOST_LOGISTIC_HPP
#define OCRPOST_LOGISTIC_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "ocrpost/errors.hpp"

namespace ocrpost {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^z), stable for large |z|.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// Binary logistic regression: weights over a fixed, named feature order plus
// a bias. Used twice in the pipeline, as candidate ranker and as correction
// decision maker, with different feature lists.
struct LogisticModel {
  std::vector<std::string> feature_names;
  std::vector<double> weights;
  double bias = 0.0;

  // Scores live in the open interval (0,1): saturated sigmoids are nudged
  // off the endpoints so a threshold of 1.0 really means "never replace".
  double score(std::span<const double> features) const {
    if (features.size() != weights.size()) {
      throw ConfigError("feature vector size " + std::to_string(features.size()) +
                        " does not match model dimensionality " + std::to_string(weights.size()));
    }
    double z = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * features[i];
    const double s = sigmoid(z);
    if (s >= 1.0) return kMaxScore;
    if (s <= 0.0) return kMinScore;
    return s;
  }

  static constexpr double kMaxScore = 1.0 - 1e-12;
  static constexpr double kMinScore = 1e-12;

  // Text format, 17 significant digits for an exact round trip.
  void save(std::ostream& out) const {
    out << "logistic v1\n";
    out << "features";
    for (const auto& name : feature_names) out << '\t' << name;
    out << '\n';
    char buf[40];
    for (std::size_t i = 0; i < weights.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", weights[i]);
      out << feature_names[i] << '\t' << buf << '\n';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", bias);
    out << "bias\t" << buf << '\n';
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    save(out);
  }

  static LogisticModel load(std::istream& in) {
    LogisticModel model;
    std::string line;
    if (!std::getline(in, line) || (line != "logistic v1" && line != "logistic v1\r")) {
      throw DataError("model file: bad magic line");
    }
    if (!std::getline(in, line)) throw DataError("model file: missing feature list");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find('\t');
    if (line.substr(0, start) != "features") throw DataError("model file: missing feature list");
    while (start != std::string::npos) {
      const auto next = line.find('\t', start + 1);
      model.feature_names.push_back(line.substr(start + 1, next - start - 1));
      start = next;
    }
    model.weights.assign(model.feature_names.size(), 0.0);
    bool saw_bias = false;
    std::size_t index = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw DataError("model file: malformed weight line");
      const std::string name = line.substr(0, tab);
      const double v = std::stod(line.substr(tab + 1));
      if (name == "bias") {
        model.bias = v;
        saw_bias = true;
      } else {
        if (index >= model.feature_names.size() || model.feature_names[index] != name) {
          throw DataError("model file: weight for unexpected feature '" + name + "'");
        }
        model.weights[index++] = v;
      }
    }
    if (!saw_bias || index != model.feature_names.size()) {
      throw DataError("model file: incomplete");
    }
    return model;
  }

  static LogisticModel load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return load(in);
  }
};

struct TrainingRow {
  std::vector<double> features;
  int label = 0;               // 0 or 1
  std::string group_id;        // source token; keeps k-fold splits leak-free
};

struct TrainingSet {
  std::vector<std::string> feature_names;
  std::vector<TrainingRow> rows;
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-4;
  std::uint64_t seed = 0;  // unused by full-batch descent, kept for reproducible extensions
  bool nonnegative_weights = false;
};

struct TrainStats {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int epochs_run = 0;
};

namespace detail {

inline void check_training_set(const TrainingSet& data) {
  if (data.rows.empty()) throw DataError("empty training set");
  const std::size_t dim = data.feature_names.size();
  bool saw_positive = false, saw_negative = false;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const auto& row = data.rows[r];
    if (row.features.size() != dim) {
      throw DataError("training row " + std::to_string(r) + ": dimensionality mismatch");
    }
    if (row.label != 0 && row.label != 1) {
      throw DataError("training row " + std::to_string(r) + ": label must be 0 or 1");
    }
    for (double v : row.features) {
      if (!std::isfinite(v)) {
        throw DataError("training row " + std::to_string(r) + ": non-finite feature");
      }
    }
    (row.label == 1 ? saw_positive : saw_negative) = true;
  }
  if (!saw_positive || !saw_negative) {
    throw DataError("degenerate training set: needs both labels, got " +
                    std::string(saw_positive ? "only positives" : "only negatives"));
  }
}

}  // namespace detail

// Mean negative log-likelihood plus (l2/2)*||w||^2; the bias is not
// regularized.
inline double logistic_loss(const TrainingSet& data, std::span<const double> weights,
                            double bias, double l2) {
  double loss = 0.0;
  for (const auto& row : data.rows) {
    double z = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * row.features[i];
    loss += softplus(z) - row.label * z;
  }
  loss /= static_cast<double>(data.rows.size());
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  return loss + 0.5 * l2 * reg;
}

inline void logistic_gradient(const TrainingSet& data, std::span<const double> weights,
                              double bias, double l2, std::span<double> grad_out,
                              double* bias_grad) {
  std::fill(grad_out.begin(), grad_out.end(), 0.0);
  double gb = 0.0;
  for (const auto& row : data.rows) {
    double z = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * row.features[i];
    const double residual = sigmoid(z) - row.label;
    for (std::size_t i = 0; i < weights.size(); ++i) grad_out[i] += residual * row.features[i];
    gb += residual;
  }
  const double inv_n = 1.0 / static_cast<double>(data.rows.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    grad_out[i] = grad_out[i] * inv_n + l2 * weights[i];
  }
  *bias_grad = gb * inv_n;
}

// Full-batch gradient descent from zero weights. Deterministic given the
// config; nonnegative_weights clamps after every step (projected descent)
// for models whose features are monotone evidence by construction.
inline LogisticModel train_logistic(const TrainingSet& data, const TrainConfig& config,
                                    TrainStats* stats = nullptr) {
  detail::check_training_set(data);
  if (config.epochs <= 0) throw ConfigError("epochs must be positive");
  if (config.learning_rate <= 0) throw ConfigError("learning rate must be positive");
  if (config.l2 < 0) throw ConfigError("l2 must be >= 0");

  LogisticModel model;
  model.feature_names = data.feature_names;
  model.weights.assign(data.feature_names.size(), 0.0);
  model.bias = 0.0;

  std::vector<double> grad(model.weights.size(), 0.0);
  double bias_grad = 0.0;
  if (stats != nullptr) {
    stats->initial_loss = logistic_loss(data, model.weights, model.bias, config.l2);
  }
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    logistic_gradient(data, model.weights, model.bias, config.l2, grad, &bias_grad);
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
      model.weights[i] -= config.learning_rate * grad[i];
      if (config.nonnegative_weights && model.weights[i] < 0.0) model.weights[i] = 0.0;
    }
    model.bias -= config.learning_rate * bias_grad;
  }
  if (stats != nullptr) {
    stats->final_loss = logistic_loss(data, model.weights, model.bias, config.l2);
    stats->epochs_run = config.epochs;
  }
  return model;
}

// ---------------------------------------------------------------------------
// k-fold cross-validation (group-aware), the model-selection utility the
// training flows report with.

struct FoldResult {
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  double accuracy = 0.0;
  double log_loss = 0.0;
};

struct CrossValidationResult {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
};

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ull ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline CrossValidationResult cross_validate(const TrainingSet& data, const TrainConfig& config,
                                            int k = 5, std::uint64_t seed = 0) {
  if (k < 2) throw ConfigError("k-fold requires k >= 2");
  detail::check_training_set(data);
  CrossValidationResult result;
  for (int fold = 0; fold < k; ++fold) {
    TrainingSet train, test;
    train.feature_names = data.feature_names;
    test.feature_names = data.feature_names;
    for (const auto& row : data.rows) {
      const int assigned = static_cast<int>(fnv1a64(row.group_id, seed) % k);
      (assigned == fold ? test : train).rows.push_back(row);
    }
    if (test.rows.empty()) {
      throw DataError("fold " + std::to_string(fold) + " is empty; too few groups for k=" +
                      std::to_string(k));
    }
    const LogisticModel model = train_logistic(train, config);
    FoldResult fr;
    fr.train_rows = train.rows.size();
    fr.test_rows = test.rows.size();
    double correct = 0.0, nll = 0.0;
    for (const auto& row : test.rows) {
      const double p = model.score(row.features);
      const int predicted = p >= 0.5 ? 1 : 0;
      if (predicted == row.label) correct += 1.0;
      const double clamped = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
      nll -= row.label ? std::log(clamped) : std::log(1.0 - clamped);
    }
    fr.accuracy = correct / static_cast<double>(test.rows.size());
    fr.log_loss = nll / static_cast<double>(test.rows.size());
    result.folds.push_back(fr);
    result.mean_accuracy += fr.accuracy;
  }
  result.mean_accuracy /= static_cast<double>(k);
  return result;
}

}  // namespace ocrpost

#endif  // OCRPOST_LOGISTIC_HPP
