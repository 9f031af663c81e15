/*
 * Copyright 2026 The CID Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cid/dataset.hpp"
#include "cid/error.hpp"
#include "cid/matrix.hpp"

namespace cid {

// Binary classifier contract: predict_proba(x) = P(y = 1 | x).
//
// Implementations must be deterministic and return a finite value in [0, 1]
// for every finite input of length dim().
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::size_t dim() const = 0;
  virtual double predict_proba(std::span<const double> x) const = 0;

  // One probability per row. The default forwards row by row; remote
  // implementations override it to amortize round trips.
  virtual std::vector<double> predict_proba_batch(const RowMatrix& xs) const {
    std::vector<double> out;
    out.reserve(xs.rows());
    for (std::size_t i = 0; i < xs.rows(); ++i) out.push_back(predict_proba(xs.row(i)));
    return out;
  }

 protected:
  void check_input(std::span<const double> x) const {
    if (x.size() != dim()) {
      throw std::invalid_argument("classifier expects " + std::to_string(dim()) +
                                  " features, got " + std::to_string(x.size()));
    }
    for (double v : x) {
      if (!std::isfinite(v)) throw std::invalid_argument("classifier input is not finite");
    }
  }
};

// Labels are 1 iff the probability is >= 0.5 (a tie at exactly 0.5 is 1).
inline int label_from_proba(double p) { return p >= 0.5 ? 1 : 0; }

inline int predict_label(const Classifier& model, std::span<const double> x) {
  return label_from_proba(model.predict_proba(x));
}

// Wraps a callable; handy for synthetic ground-truth models.
class FunctionClassifier : public Classifier {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  FunctionClassifier(std::size_t d, Fn fn) : d_(d), fn_(std::move(fn)) {}

  std::size_t dim() const override { return d_; }
  double predict_proba(std::span<const double> x) const override {
    check_input(x);
    const double p = fn_(x);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ModelError("classifier returned " + std::to_string(p) +
                       ", outside [0, 1]");
    }
    return p;
  }

 private:
  std::size_t d_;
  Fn fn_;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Per-feature affine map x' = (x - mean) / scale applied before the linear
// layer. scale is never zero (constant features use 1).
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer from_features(const std::vector<FeatureSpec>& features) {
    Standardizer s;
    for (const auto& f : features) {
      s.mean.push_back(f.mean);
      s.scale.push_back(f.std > 0.0 ? f.std : 1.0);
    }
    return s;
  }

  double apply(std::size_t j, double v) const { return (v - mean[j]) / scale[j]; }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

// Logistic regression: sigmoid(w . x' + b) with x' the optionally
// standardized input. Immutable, so safe to share between threads.
class LogisticModel : public Classifier {
 public:
  LogisticModel(std::vector<double> weights, double bias,
                std::optional<Standardizer> standardizer = std::nullopt)
      : weights_(std::move(weights)), bias_(bias),
        standardizer_(std::move(standardizer)) {
    if (weights_.empty()) throw std::invalid_argument("logistic model needs at least one weight");
    if (!std::isfinite(bias_)) throw ModelError("logistic bias is not finite");
    for (double w : weights_) {
      if (!std::isfinite(w)) throw ModelError("logistic weight is not finite");
    }
    if (standardizer_) {
      if (standardizer_->mean.size() != weights_.size() ||
          standardizer_->scale.size() != weights_.size()) {
        throw ModelError("standardizer dimension does not match weights");
      }
      for (std::size_t j = 0; j < weights_.size(); ++j) {
        if (!std::isfinite(standardizer_->mean[j]) ||
            !(standardizer_->scale[j] > 0.0) ||
            !std::isfinite(standardizer_->scale[j])) {
          throw ModelError("standardizer entries must be finite with positive scale");
        }
      }
    }
  }

  std::size_t dim() const override { return weights_.size(); }

  double predict_proba(std::span<const double> x) const override {
    check_input(x);
    // Clamped so the open interval (0, 1) holds even when sigmoid saturates.
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    const double hi = std::nextafter(1.0, 0.0);
    return std::clamp(sigmoid(logit(x)), lo, hi);
  }

  double logit(std::span<const double> x) const {
    double z = bias_;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
      const double v = standardizer_ ? standardizer_->apply(j, x[j]) : x[j];
      z += weights_[j] * v;
    }
    return z;
  }

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  const std::optional<Standardizer>& standardizer() const { return standardizer_; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["weights"] = weights_;
    j["bias"] = bias_;
    if (standardizer_) {
      j["standardizer"] = {{"mean", standardizer_->mean},
                           {"scale", standardizer_->scale}};
    } else {
      j["standardizer"] = nullptr;
    }
    return j;
  }

  static LogisticModel from_json(const nlohmann::json& j) {
    try {
      std::optional<Standardizer> s;
      if (j.contains("standardizer") && !j.at("standardizer").is_null()) {
        s = Standardizer{j.at("standardizer").at("mean").get<std::vector<double>>(),
                         j.at("standardizer").at("scale").get<std::vector<double>>()};
      }
      return LogisticModel(j.at("weights").get<std::vector<double>>(),
                           j.at("bias").get<double>(), std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("invalid logistic model JSON: ") + e.what());
    }
  }

  static LogisticModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("model file '" + path + "': " + e.what());
    }
    return from_json(j);
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file '" + path + "'");
    out << to_json().dump() << '\n';
  }

 private:
  std::vector<double> weights_;
  double bias_;
  std::optional<Standardizer> standardizer_;
};

struct LogisticTrainOptions {
  std::size_t epochs = 1000;
  double learning_rate = 0.1;
  double l2 = 0.0;
  bool standardize = true;
  // Full-batch descent from a zero start is deterministic; the seed is kept
  // for interface stability.
  std::uint64_t seed = 0;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

// Mean binary cross-entropy plus (l2 / 2) * |w|^2, and its gradient, for
// inputs that are already in the model's (standardized) coordinates.
inline LossAndGradient logistic_objective(const RowMatrix& x,
                                          std::span<const int> labels,
                                          std::span<const double> w, double b,
                                          double l2) {
  LossAndGradient out;
  out.grad_w.assign(w.size(), 0.0);
  const double n = static_cast<double>(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * row[j];
    const double y = labels[i];
    out.loss += softplus(z) - y * z;
    const double r = sigmoid(z) - y;
    for (std::size_t j = 0; j < w.size(); ++j) out.grad_w[j] += r * row[j];
    out.grad_b += r;
  }
  out.loss /= n;
  out.grad_b /= n;
  double wsq = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    out.grad_w[j] = out.grad_w[j] / n + l2 * w[j];
    wsq += w[j] * w[j];
  }
  out.loss += 0.5 * l2 * wsq;
  return out;
}

// Full-batch gradient descent on the regularized cross-entropy. When
// `loss_history` is given it receives the loss at every epoch boundary
// (epochs + 1 values, the first at initialization).
inline LogisticModel train_logistic(const DatasetTable& table,
                                    const LogisticTrainOptions& opts,
                                    std::vector<double>* loss_history = nullptr) {
  if (!(opts.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(opts.l2 >= 0.0)) throw std::invalid_argument("l2 must be nonnegative");
  if (table.size() == 0) throw ModelError("cannot train on an empty table");
  const auto& labels = table.labels();
  const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
  const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
  if (!has0 || !has1) {
    throw ModelError(std::string("training labels contain a single class (all ") +
                     (has1 ? "1" : "0") + ")");
  }

  std::optional<Standardizer> standardizer;
  if (opts.standardize) standardizer = Standardizer::from_features(table.features());
  RowMatrix x(table.size(), table.d());
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t j = 0; j < table.d(); ++j) {
      x(i, j) = standardizer ? standardizer->apply(j, table.rows()(i, j))
                             : table.rows()(i, j);
    }
  }

  std::vector<double> w(table.d(), 0.0);
  double b = 0.0;
  if (loss_history) loss_history->clear();
  for (std::size_t epoch = 0; epoch <= opts.epochs; ++epoch) {
    const LossAndGradient lg = logistic_objective(x, labels, w, b, opts.l2);
    if (!std::isfinite(lg.loss)) {
      throw ModelError("training loss became non-finite at epoch " +
                       std::to_string(epoch));
    }
    if (loss_history) loss_history->push_back(lg.loss);
    if (epoch == opts.epochs) break;
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= opts.learning_rate * lg.grad_w[j];
    b -= opts.learning_rate * lg.grad_b;
  }
  return LogisticModel(std::move(w), b, std::move(standardizer));
}

// Fraction of rows whose predicted label matches the table label.
inline double accuracy(const Classifier& model, const DatasetTable& table) {
  const auto p = model.predict_proba_batch(table.rows());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    hits += label_from_proba(p[i]) == table.labels()[i];
  }
  return static_cast<double>(hits) / static_cast<double>(p.size());
}

}  // namespace cid
