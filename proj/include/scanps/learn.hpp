#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scanps/features.hpp"
#include "scanps/rng.hpp"

namespace scanps {

// One labeled link candidate: an ordered user pair, its feature vector, and
// whether the link exists in the unmodified target network.
struct LinkInstance {
  UserId u = 0;
  UserId v = 0;
  FeatureVector features;
  int label = 0;  // {0,1}
};

// Linear decision function over z-scored features. Constant features (zero
// training variance) keep weight 0; they appear legitimately when brand-new
// users produce all-zero columns.
struct LinearModel {
  Layout layout = Layout::Target19;
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> means;
  std::vector<double> stds;          // 0 marks a constant feature
  std::vector<double> loss_trace;    // diagnostic, not serialized
};

namespace detail {

inline double standardized(const LinearModel& model, std::size_t j, double x) {
  if (model.stds[j] == 0.0) return 0.0;
  return (x - model.means[j]) / model.stds[j];
}

// log(1 + exp(t)) without overflow.
inline double softplus(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

}  // namespace detail

inline double score(const LinearModel& model, const FeatureVector& features) {
  if (features.values.size() != model.weights.size())
    throw std::invalid_argument("score: feature dimension mismatch");
  double z = model.bias;
  for (std::size_t j = 0; j < model.weights.size(); ++j)
    z += model.weights[j] * detail::standardized(model, j, features.values[j]);
  return z;
}

inline int predict(const LinearModel& model, const FeatureVector& features) {
  return score(model, features) > 0.0 ? 1 : 0;
}

// Full-batch gradient descent on mean logistic loss + (l2_lambda/2)|w|^2,
// with a halving line search so the loss never increases. Deterministic; the
// seed parameter is reserved for stochastic trainers behind the same call.
inline LinearModel train(std::span<const LinkInstance> instances, double l2_lambda = 1e-3,
                         std::size_t epochs = 500, std::uint64_t seed = 0) {
  (void)seed;
  if (instances.empty()) throw std::invalid_argument("train: no instances");
  const std::size_t dim = instances[0].features.values.size();
  const Layout layout = instances[0].features.layout;
  std::size_t positives = 0;
  for (const auto& inst : instances) {
    if (inst.features.values.size() != dim || inst.features.layout != layout)
      throw std::invalid_argument("train: inconsistent feature layout");
    positives += static_cast<std::size_t>(inst.label);
  }
  if (positives == 0 || positives == instances.size())
    throw std::invalid_argument("train: both classes required");

  const std::size_t m = instances.size();
  LinearModel model;
  model.layout = layout;
  model.means.assign(dim, 0.0);
  model.stds.assign(dim, 0.0);
  for (const auto& inst : instances)
    for (std::size_t j = 0; j < dim; ++j) model.means[j] += inst.features.values[j];
  for (std::size_t j = 0; j < dim; ++j) model.means[j] /= static_cast<double>(m);
  for (const auto& inst : instances) {
    for (std::size_t j = 0; j < dim; ++j) {
      double d = inst.features.values[j] - model.means[j];
      model.stds[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    double var = model.stds[j] / static_cast<double>(m);
    model.stds[j] = var > 1e-24 ? std::sqrt(var) : 0.0;
  }

  // Standardize once up front.
  std::vector<double> x(m * dim);
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    y[i] = instances[i].label == 1 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < dim; ++j) {
      double sd = model.stds[j];
      x[i * dim + j] = sd == 0.0 ? 0.0 : (instances[i].features.values[j] - model.means[j]) / sd;
    }
  }

  std::vector<double> w(dim, 0.0);
  double b = 0.0;
  auto loss_at = [&](const std::vector<double>& wt, double bt) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double z = bt;
      const double* row = x.data() + i * dim;
      for (std::size_t j = 0; j < dim; ++j) z += wt[j] * row[j];
      total += detail::softplus(-y[i] * z);
    }
    total /= static_cast<double>(m);
    double reg = 0.0;
    for (double wj : wt) reg += wj * wj;
    return total + 0.5 * l2_lambda * reg;
  };

  double loss = loss_at(w, b);
  model.loss_trace.push_back(loss);
  std::vector<double> grad_w(dim);
  std::vector<double> trial_w(dim);
  double step = 1.0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double z = b;
      const double* row = x.data() + i * dim;
      for (std::size_t j = 0; j < dim; ++j) z += w[j] * row[j];
      double g = -y[i] / (1.0 + std::exp(y[i] * z));  // d softplus(-y z) / dz
      for (std::size_t j = 0; j < dim; ++j) grad_w[j] += g * row[j];
      grad_b += g;
    }
    for (std::size_t j = 0; j < dim; ++j)
      grad_w[j] = grad_w[j] / static_cast<double>(m) + l2_lambda * w[j];
    grad_b /= static_cast<double>(m);

    double grad_norm_sq = grad_b * grad_b;
    for (double g : grad_w) grad_norm_sq += g * g;
    if (grad_norm_sq < 1e-24) break;

    step *= 2.0;  // allow recovery after conservative epochs
    double trial_b = b;
    bool moved = false;
    while (step > 1e-18) {
      for (std::size_t j = 0; j < dim; ++j) trial_w[j] = w[j] - step * grad_w[j];
      trial_b = b - step * grad_b;
      double trial_loss = loss_at(trial_w, trial_b);
      if (trial_loss <= loss) {
        w = trial_w;
        b = trial_b;
        loss = trial_loss;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    model.loss_trace.push_back(loss);
  }

  model.weights = std::move(w);
  model.bias = b;
  // Constant dimensions never moved (their column is identically 0) but force
  // exact zeros for a clean contract.
  for (std::size_t j = 0; j < dim; ++j)
    if (model.stds[j] == 0.0) model.weights[j] = 0.0;
  return model;
}

// Probability that a random positive outranks a random negative; ties count
// one half (average-rank Mann-Whitney).
inline double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: length mismatch");
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (int label : labels) positives += static_cast<std::size_t>(label);
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw std::invalid_argument("auc: both classes required");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = static_cast<double>(i + 1 + j) / 2.0;  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) positive_rank_sum += avg_rank;
    i = j;
  }
  double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

inline double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size() || predictions.empty())
    throw std::invalid_argument("accuracy: length mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    correct += static_cast<std::size_t>(predictions[i] == labels[i]);
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

// Stratified k folds of instance indices: per class, a seed-fixed shuffle
// dealt round-robin, so fold sizes differ by at most one per class.
inline std::vector<std::vector<std::size_t>> kfold_split(std::span<const LinkInstance> instances,
                                                         std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold_split: k must be >= 2");
  if (instances.size() < k) throw std::invalid_argument("kfold_split: fewer instances than folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < instances.size(); ++i)
    (instances[i].label == 1 ? pos : neg).push_back(i);
  if (pos.size() < k || neg.size() < k)
    throw std::invalid_argument("kfold_split: a class has fewer members than folds");
  Rng rng(derive_seed(seed, "kfold"));
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < pos.size(); ++i) folds[i % k].push_back(pos[i]);
  for (std::size_t i = 0; i < neg.size(); ++i) folds[i % k].push_back(neg[i]);
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

// ---------------------------------------------------------------------------
// Model serialization: plain-text key-value lines.
// ---------------------------------------------------------------------------

inline void save_model(const LinearModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[64];
  auto write_vec = [&](const char* key, const std::vector<double>& v) {
    out << key;
    for (double x : v) {
      std::snprintf(buf, sizeof(buf), " %.17g", x);
      out << buf;
    }
    out << "\n";
  };
  out << "layout " << layout_name(model.layout) << "\n";
  out << "dim " << model.weights.size() << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", model.bias);
  out << "bias " << buf << "\n";
  write_vec("weights", model.weights);
  write_vec("means", model.means);
  write_vec("stds", model.stds);
}

inline LinearModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  LinearModel model;
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    if (key == "layout") {
      std::string name;
      ss >> name;
      model.layout = layout_from_name(name);
    } else if (key == "dim") {
      ss >> dim;
    } else if (key == "bias") {
      ss >> model.bias;
    } else if (key == "weights" || key == "means" || key == "stds") {
      std::vector<double> v;
      double x;
      while (ss >> x) v.push_back(x);
      if (v.size() != dim) throw ParseError(path, lineno, "vector length does not match dim");
      if (key == "weights") model.weights = std::move(v);
      else if (key == "means") model.means = std::move(v);
      else model.stds = std::move(v);
    } else {
      throw ParseError(path, lineno, "unknown key '" + key + "'");
    }
  }
  if (model.weights.size() != dim || model.means.size() != dim || model.stds.size() != dim)
    throw std::runtime_error(path + ": incomplete model file");
  return model;
}

}  // namespace scanps
