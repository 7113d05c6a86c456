#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "scanps/learn.hpp"
#include "scanps/rng.hpp"

using namespace scanps;

namespace {

LinkInstance instance(std::vector<double> values, int label) {
  LinkInstance inst;
  inst.features.layout = Layout::Target19;
  inst.features.values = std::move(values);
  inst.label = label;
  return inst;
}

// Two well-separated 2-d Gaussian-ish blobs.
std::vector<LinkInstance> separable_set(std::size_t per_class, Rng& rng) {
  std::vector<LinkInstance> out;
  for (std::size_t i = 0; i < per_class; ++i) {
    out.push_back(instance({2.0 + rng.next_double(), 2.0 + rng.next_double()}, 1));
    out.push_back(instance({-2.0 - rng.next_double(), -2.0 - rng.next_double()}, 0));
  }
  return out;
}

}  // namespace

TEST_CASE("train separates a separable toy set") {
  Rng rng(5);
  auto data = separable_set(40, rng);
  LinearModel model = train(data);
  std::vector<int> predictions;
  std::vector<int> labels;
  for (const auto& inst : data) {
    predictions.push_back(predict(model, inst.features));
    labels.push_back(inst.label);
  }
  CHECK(accuracy(predictions, labels) == doctest::Approx(1.0));
}

TEST_CASE("training loss never increases") {
  Rng rng(6);
  auto data = separable_set(30, rng);
  // add overlap so the optimum is interior
  for (int i = 0; i < 20; ++i)
    data.push_back(instance({rng.next_double() - 0.5, rng.next_double() - 0.5}, i % 2));
  LinearModel model = train(data);
  REQUIRE(model.loss_trace.size() > 2);
  for (std::size_t i = 1; i < model.loss_trace.size(); ++i)
    CHECK(model.loss_trace[i] <= model.loss_trace[i - 1] + 1e-15);
}

TEST_CASE("standardization uses training statistics") {
  Rng rng(7);
  auto data = separable_set(25, rng);
  LinearModel model = train(data);
  // re-standardize the training set by hand and check moments
  for (std::size_t j = 0; j < 2; ++j) {
    double mean = 0.0;
    for (const auto& inst : data) mean += detail::standardized(model, j, inst.features.values[j]);
    mean /= static_cast<double>(data.size());
    CHECK(std::abs(mean) < 1e-9);
    double var = 0.0;
    for (const auto& inst : data) {
      double z = detail::standardized(model, j, inst.features.values[j]);
      var += (z - mean) * (z - mean);
    }
    var /= static_cast<double>(data.size());
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
  }
}

TEST_CASE("duplicating every instance leaves the model unchanged") {
  Rng rng(8);
  auto data = separable_set(20, rng);
  for (int i = 0; i < 10; ++i)
    data.push_back(instance({rng.next_double(), rng.next_double()}, i % 2));
  LinearModel one = train(data);
  std::vector<LinkInstance> doubled = data;
  doubled.insert(doubled.end(), data.begin(), data.end());
  LinearModel two = train(doubled);
  for (std::size_t j = 0; j < 2; ++j) CHECK(one.weights[j] == doctest::Approx(two.weights[j]));
  CHECK(one.bias == doctest::Approx(two.bias));
}

TEST_CASE("permuted labels give chance-level held-out AUC") {
  double total = 0.0;
  const int runs = 20;
  for (int run = 0; run < runs; ++run) {
    Rng rng(1000 + run);
    std::vector<LinkInstance> train_set;
    std::vector<LinkInstance> test_set;
    for (int i = 0; i < 200; ++i) {
      std::vector<double> x = {rng.next_double(), rng.next_double(), rng.next_double(),
                               rng.next_double(), rng.next_double()};
      int label = static_cast<int>(rng.below(2));  // independent of features
      (i < 120 ? train_set : test_set).push_back(instance(std::move(x), label));
    }
    LinearModel model = train(train_set);
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& inst : test_set) {
      scores.push_back(score(model, inst.features));
      labels.push_back(inst.label);
    }
    total += auc(scores, labels);
  }
  CHECK(std::abs(total / runs - 0.5) <= 0.05);
}

TEST_CASE("train validates its inputs") {
  std::vector<LinkInstance> single = {instance({1.0}, 1), instance({2.0}, 1)};
  CHECK_THROWS_AS(train(single), std::invalid_argument);
  std::vector<LinkInstance> ragged = {instance({1.0}, 1), instance({2.0, 3.0}, 0)};
  CHECK_THROWS_AS(train(ragged), std::invalid_argument);
}

TEST_CASE("constant features get weight zero") {
  std::vector<LinkInstance> data;
  Rng rng(9);
  for (int i = 0; i < 40; ++i) {
    double x = rng.next_double();
    data.push_back(instance({x, 7.7}, x > 0.5 ? 1 : 0));
  }
  LinearModel model = train(data);
  CHECK(model.weights[1] == 0.0);
  CHECK(model.stds[1] == 0.0);
}

TEST_CASE("score is the standardized linear response") {
  LinearModel model;
  model.weights = {0.0, 0.0};
  model.bias = 0.0;
  model.means = {0.0, 0.0};
  model.stds = {1.0, 1.0};
  FeatureVector fv{Layout::Target19, {3.0, -4.0}};
  CHECK(score(model, fv) == 0.0);

  model.weights = {2.0, 0.0};
  CHECK(score(model, fv) == doctest::Approx(6.0));
  FeatureVector larger{Layout::Target19, {4.0, -4.0}};
  CHECK(score(model, larger) > score(model, fv));  // monotone in a positive-weight feature
  CHECK(predict(model, fv) == 1);
  CHECK(predict(model, FeatureVector{Layout::Target19, {-1.0, 0.0}}) == 0);

  FeatureVector wrong{Layout::Target19, {1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(score(model, wrong), std::invalid_argument);
}

TEST_CASE("auc handles perfect rankings and ties") {
  std::vector<double> scores = {0.9, 0.8, 0.2, 0.1};
  std::vector<int> labels = {1, 1, 0, 0};
  CHECK(auc(scores, labels) == doctest::Approx(1.0));

  std::vector<double> flat = {0.5, 0.5, 0.5, 0.5};
  CHECK(auc(flat, labels) == 0.5);  // exact under the tie convention

  std::vector<int> one_class = {1, 1, 1, 1};
  CHECK_THROWS_AS(auc(scores, one_class), std::invalid_argument);
}

TEST_CASE("auc equals the brute-force pair count on 200 random score sets") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 5 + rng.below(40);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      // few distinct score values, so ties are common
      scores[i] = static_cast<double>(rng.below(6)) / 4.0;
      labels[i] = static_cast<int>(rng.below(2));
      (labels[i] == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = 1;
    if (!has_neg) labels[n - 1] = 0;
    double fast = auc(scores, labels);
    double slow = oracle::pairwise_auc(scores, labels);
    CHECK(std::abs(fast - slow) <= 1e-12);
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms and flips under negation") {
  Rng rng(13);
  std::vector<double> scores(30);
  std::vector<int> labels(30);
  for (std::size_t i = 0; i < 30; ++i) {
    scores[i] = rng.next_double();  // continuous, so no ties
    labels[i] = static_cast<int>(rng.below(2));
  }
  labels[0] = 1;
  labels[1] = 0;
  double base = auc(scores, labels);

  std::vector<double> transformed(30);
  std::vector<double> negated(30);
  for (std::size_t i = 0; i < 30; ++i) {
    transformed[i] = std::exp(3.0 * scores[i]) + 1.0;
    negated[i] = -scores[i];
  }
  CHECK(auc(transformed, labels) == doctest::Approx(base));
  CHECK(auc(negated, labels) == doctest::Approx(1.0 - base));
}

TEST_CASE("accuracy is the exact-match fraction") {
  CHECK(accuracy(std::vector<int>{1, 0, 1}, std::vector<int>{1, 0, 1}) == doctest::Approx(1.0));
  CHECK(accuracy(std::vector<int>{1, 1, 1, 1}, std::vector<int>{1, 0, 1, 0}) == doctest::Approx(0.5));
  CHECK(accuracy(std::vector<int>{1, 0, 1, 0}, std::vector<int>{1, 0, 1, 1}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(accuracy(std::vector<int>{1}, std::vector<int>{1, 0}), std::invalid_argument);
}

TEST_CASE("kfold_split stratifies and is deterministic") {
  std::vector<LinkInstance> data;
  for (int i = 0; i < 100; ++i) data.push_back(instance({static_cast<double>(i)}, i % 2));
  auto folds = kfold_split(data, 5, 3);
  REQUIRE(folds.size() == 5);
  std::set<std::size_t> seen;
  for (const auto& fold : folds) {
    CHECK(fold.size() == 20);
    std::size_t positives = 0;
    for (std::size_t i : fold) {
      positives += static_cast<std::size_t>(data[i].label);
      CHECK(seen.insert(i).second);  // disjoint
    }
    CHECK(positives == 10);
  }
  CHECK(seen.size() == 100);  // union covers everything

  auto again = kfold_split(data, 5, 3);
  CHECK(folds == again);
  auto different = kfold_split(data, 5, 4);
  CHECK(folds != different);

  std::vector<LinkInstance> tiny = {instance({0.0}, 1), instance({1.0}, 1), instance({2.0}, 0)};
  CHECK_THROWS_AS(kfold_split(tiny, 2, 1), std::invalid_argument);  // negative class < k
}

TEST_CASE("kfold sizes differ by at most one per class when uneven") {
  std::vector<LinkInstance> data;
  for (int i = 0; i < 23; ++i) data.push_back(instance({static_cast<double>(i)}, 1));
  for (int i = 0; i < 31; ++i) data.push_back(instance({static_cast<double>(i)}, 0));
  auto folds = kfold_split(data, 4, 9);
  for (const auto& fold : folds) {
    std::size_t pos = 0;
    for (std::size_t i : fold) pos += static_cast<std::size_t>(data[i].label);
    std::size_t neg = fold.size() - pos;
    CHECK(pos >= 5);
    CHECK(pos <= 6);
    CHECK(neg >= 7);
    CHECK(neg <= 8);
  }
}

TEST_CASE("model serialization round-trips") {
  Rng rng(14);
  auto data = separable_set(15, rng);
  LinearModel model = train(data);
  std::string dir = testutil::temp_dir("model");
  save_model(model, dir + "/model.txt");
  LinearModel loaded = load_model(dir + "/model.txt");
  CHECK(loaded.layout == model.layout);
  CHECK(loaded.weights == model.weights);
  CHECK(loaded.bias == model.bias);
  CHECK(loaded.means == model.means);
  CHECK(loaded.stds == model.stds);

  FeatureVector probe{Layout::Target19, {0.3, -1.2}};
  CHECK(score(loaded, probe) == score(model, probe));
}
