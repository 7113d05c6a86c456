#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "scanps/features.hpp"
#include "scanps/hetnet.hpp"
#include "scanps/rng.hpp"

namespace scanps {

// Dense symmetric matrix, row-major. Sizes here are |old users|, so dense
// storage and O(n^2) matvecs are fine.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& at(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const double* row = data_.data() + i * n_;
      double sum = 0.0;
      for (std::size_t j = 0; j < n_; ++j) sum += row[j] * x[j];
      y[i] = sum;
    }
    return y;
  }

  double quadratic_form(std::span<const double> x) const {
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double* row = data_.data() + i * n_;
      double sum = 0.0;
      for (std::size_t j = 0; j < n_; ++j) sum += row[j] * x[j];
      total += x[i] * sum;
    }
    return total;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// Similarity between two users: the mean of an auxiliary part (average cosine
// over location, time, and word vectors) and a social part (neighborhood
// Jaccard). Empty operands contribute 0, so the result stays in [0,1].
inline double user_similarity(const HeterogeneousNetwork& net, const UserVectors& vecs, UserId ui,
                              UserId uj) {
  double aux = (cosine(vecs.words(ui), vecs.words(uj)) +
                cosine(vecs.location(ui), vecs.location(uj)) +
                cosine(vecs.hours(ui), vecs.hours(uj))) /
               3.0;
  double social = jaccard(net, ui, uj);
  return 0.5 * (aux + social);
}

inline double user_similarity(const HeterogeneousNetwork& net, UserId ui, UserId uj) {
  return user_similarity(net, UserVectors(net), ui, uj);
}

// s[i] = mean similarity of old user i to the new users. Entries lie in [0,1].
inline std::vector<double> relevance_vector(const HeterogeneousNetwork& net,
                                            const UserVectors& vecs,
                                            std::span<const UserId> old_users,
                                            std::span<const UserId> new_users) {
  if (old_users.empty() || new_users.empty())
    throw std::invalid_argument("relevance_vector: empty partition");
  std::vector<double> s(old_users.size(), 0.0);
  for (std::size_t i = 0; i < old_users.size(); ++i) {
    double sum = 0.0;
    for (UserId nu : new_users) sum += user_similarity(net, vecs, old_users[i], nu);
    s[i] = sum / static_cast<double>(new_users.size());
  }
  return s;
}

inline std::vector<double> relevance_vector(const HeterogeneousNetwork& net,
                                            std::span<const UserId> old_users,
                                            std::span<const UserId> new_users) {
  return relevance_vector(net, UserVectors(net), old_users, new_users);
}

// Diagonal of the structure-preservation term: M[i][i] = min(deg_i, min over
// neighbors j of deg_j) inside the old subnetwork; 0 for isolated users. Users
// indexed in the subnetwork's sorted id order.
inline std::vector<double> structure_reg_matrix(const HeterogeneousNetwork& old_subnet) {
  std::vector<UserId> ids = old_subnet.users();
  std::vector<double> m(ids.size(), 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto nbrs = old_subnet.neighbors(ids[i]);
    if (nbrs.empty()) continue;
    std::size_t best = old_subnet.degree(ids[i]);
    for (UserId v : nbrs) best = std::min(best, old_subnet.degree(v));
    m[i] = static_cast<double>(best);
  }
  return m;
}

// N = I/(2|U_old|) + A/(2|S_old|) + M.  The adjacency term is dropped when the
// old subnetwork has no links.
inline DenseMatrix diversity_matrix(const HeterogeneousNetwork& old_subnet) {
  std::vector<UserId> ids = old_subnet.users();
  const std::size_t n = ids.size();
  DenseMatrix N(n);
  double diag = 1.0 / (2.0 * static_cast<double>(n));
  std::vector<double> m = structure_reg_matrix(old_subnet);
  for (std::size_t i = 0; i < n; ++i) N.at(i, i) = diag + m[i];
  if (old_subnet.link_count() > 0) {
    double link_weight = 1.0 / (2.0 * static_cast<double>(old_subnet.link_count()));
    std::map<UserId, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index.emplace(ids[i], i);
    for (const auto& [a, b] : old_subnet.links()) {
      std::size_t i = index.at(a);
      std::size_t j = index.at(b);
      N.at(i, j) = link_weight;
      N.at(j, i) = link_weight;
    }
  }
  return N;
}

struct SamplingProblem {
  std::vector<double> s;  // relevance, length n
  DenseMatrix N;          // regularized diversity, n x n symmetric
  double theta = 0.1;
};

// Builds the full problem for one old subnetwork. `vecs` and `net` describe
// the network the similarities are measured on (the withheld target network).
inline SamplingProblem make_sampling_problem(const HeterogeneousNetwork& net,
                                             const UserVectors& vecs,
                                             const HeterogeneousNetwork& old_subnet,
                                             std::span<const UserId> new_users, double theta) {
  SamplingProblem problem;
  std::vector<UserId> old_ids = old_subnet.users();
  problem.s = relevance_vector(net, vecs, old_ids, new_users);
  problem.N = diversity_matrix(old_subnet);
  problem.theta = theta;
  return problem;
}

// Euclidean projection onto the probability simplex (sort-and-threshold).
inline std::vector<double> project_simplex(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("project_simplex: empty vector");
  const std::size_t n = v.size();
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cumulative += sorted[j];
    double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) threshold = candidate;
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(v[i] - threshold, 0.0);
  return out;
}

struct SamplingDistribution {
  std::vector<double> delta;
  std::vector<double> objective_trace;  // non-decreasing
};

// Maximizes f(delta) = delta's + theta * delta'N delta over the simplex by
// projected gradient ascent from the uniform point. Each step starts from a
// large trial step and halves it until the objective does not decrease, so
// the trace is non-decreasing by construction.
//
// The structure regularizer makes the vertices of the simplex self-attracting
// fixed points of the projected dynamics, so plain ascent can park on a
// suboptimal vertex. N is strictly diagonally dominant, hence the objective is
// convex and its true maximum sits at some vertex, whose value s_k + theta *
// N_kk is checkable in O(n): whenever a vertex beats the incumbent, ascent
// restarts from that vertex.
inline SamplingDistribution optimize_delta(const SamplingProblem& problem,
                                           std::size_t max_iters = 500, double tol = 1e-10) {
  const std::size_t n = problem.s.size();
  if (n == 0) throw std::invalid_argument("optimize_delta: empty problem");
  if (problem.N.size() != n) throw std::invalid_argument("optimize_delta: size mismatch");
  if (max_iters < 1) throw std::invalid_argument("optimize_delta: max_iters must be >= 1");

  auto objective = [&](std::span<const double> d) {
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) lin += d[i] * problem.s[i];
    return lin + problem.theta * problem.N.quadratic_form(d);
  };

  SamplingDistribution result;
  result.delta.assign(n, 1.0 / static_cast<double>(n));
  double f = objective(result.delta);
  if (!std::isfinite(f)) throw std::runtime_error("optimize_delta: non-finite objective");
  result.objective_trace.push_back(f);

  std::size_t iters_left = max_iters;
  while (iters_left > 0) {
    // ascent to convergence (or budget)
    while (iters_left > 0) {
      --iters_left;
      std::vector<double> grad = problem.N.multiply(result.delta);
      for (std::size_t i = 0; i < n; ++i) grad[i] = problem.s[i] + 2.0 * problem.theta * grad[i];

      std::vector<double> next;
      double f_next = f;
      double step = 1024.0;
      bool moved = false;
      while (step > 1e-18) {
        std::vector<double> trial(n);
        for (std::size_t i = 0; i < n; ++i) trial[i] = result.delta[i] + step * grad[i];
        trial = project_simplex(trial);
        double f_trial = objective(trial);
        if (!std::isfinite(f_trial))
          throw std::runtime_error("optimize_delta: non-finite objective");
        if (f_trial >= f) {
          next = std::move(trial);
          f_next = f_trial;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;  // no step improves from here

      double max_change = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        max_change = std::max(max_change, std::abs(next[i] - result.delta[i]));
      result.delta = std::move(next);
      f = f_next;
      result.objective_trace.push_back(f);
      if (max_change < tol) break;
    }

    // vertex safeguard; a strictly better vertex restarts the ascent there
    std::size_t best_vertex = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      double value = problem.s[k] + problem.theta * problem.N.at(k, k);
      if (value > best_value) {
        best_value = value;
        best_vertex = k;
      }
    }
    if (best_value > f) {
      result.delta.assign(n, 0.0);
      result.delta[best_vertex] = 1.0;
      f = objective(result.delta);
      result.objective_trace.push_back(f);
    } else {
      break;
    }
  }
  return result;
}

// Draws ceil(rho * n) users without replacement, weighted by delta (indexed in
// the subnetwork's sorted user order). Zero-weight users become drawable,
// uniformly, only once every positive weight is exhausted. Returns the induced
// subnetwork of the retained users.
inline HeterogeneousNetwork sample_old_users(const HeterogeneousNetwork& old_subnet,
                                             std::span<const double> delta, double rho,
                                             std::uint64_t seed) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("sample_old_users: rho must be in (0,1]");
  std::vector<UserId> ids = old_subnet.users();
  if (delta.size() != ids.size())
    throw std::invalid_argument("sample_old_users: delta size mismatch");
  const std::size_t n = ids.size();
  std::size_t k = static_cast<std::size_t>(std::ceil(rho * static_cast<double>(n)));
  k = std::min(k, n);
  if (k == n) return old_subnet;

  std::vector<double> weights(delta.begin(), delta.end());
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("sample_old_users: negative weight");
    total += w;
  }
  Rng rng(derive_seed(seed, "sample_old"));
  std::vector<UserId> retained;
  retained.reserve(k);
  std::vector<bool> taken(n, false);
  for (std::size_t draw = 0; draw < k; ++draw) {
    std::size_t pick;
    if (total > 1e-15) {
      pick = rng.weighted_pick(weights, total);
    } else {
      // uniform among the untaken remainder
      std::size_t r = static_cast<std::size_t>(rng.below(n - draw));
      pick = 0;
      while (true) {
        if (!taken[pick]) {
          if (r == 0) break;
          --r;
        }
        ++pick;
      }
    }
    taken[pick] = true;
    retained.push_back(ids[pick]);
    total -= weights[pick];
    weights[pick] = 0.0;
  }
  return induced_subnetwork(old_subnet, retained);
}

}  // namespace scanps
