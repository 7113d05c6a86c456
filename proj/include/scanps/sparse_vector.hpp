#pragma once

#include <cmath>
#include <cstdint>
#include <map>

namespace scanps {

// Non-negative sparse vector keyed by an integer dimension id (a location id,
// an hour slot, or an interned word id). Zero entries are never stored.
// Ordered map keeps every downstream computation deterministic.
class SparseVector {
 public:
  using Key = std::int64_t;
  using Map = std::map<Key, double>;

  void add(Key key, double weight) {
    if (weight == 0.0) return;
    auto [it, inserted] = entries_.try_emplace(key, weight);
    if (!inserted) it->second += weight;
    if (it->second == 0.0) entries_.erase(it);
  }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const Map& entries() const { return entries_; }

  double dot(const SparseVector& other) const {
    const SparseVector& small = size() <= other.size() ? *this : other;
    const SparseVector& large = size() <= other.size() ? other : *this;
    double sum = 0.0;
    for (const auto& [k, v] : small.entries_) {
      auto it = large.entries_.find(k);
      if (it != large.entries_.end()) sum += v * it->second;
    }
    return sum;
  }

  double norm_sq() const {
    double sum = 0.0;
    for (const auto& [k, v] : entries_) sum += v * v;
    return sum;
  }

  double norm() const { return std::sqrt(norm_sq()); }

  std::size_t shared_keys(const SparseVector& other) const {
    const SparseVector& small = size() <= other.size() ? *this : other;
    const SparseVector& large = size() <= other.size() ? other : *this;
    std::size_t count = 0;
    for (const auto& [k, v] : small.entries_) {
      count += large.entries_.count(k);
    }
    return count;
  }

  std::size_t union_keys(const SparseVector& other) const {
    return size() + other.size() - shared_keys(other);
  }

 private:
  Map entries_;
};

// cos(a,b); 0 when either operand has zero norm.
inline double cosine(const SparseVector& a, const SparseVector& b) {
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

inline double euclidean(const SparseVector& a, const SparseVector& b) {
  double sum = 0.0;
  auto ia = a.entries().begin();
  auto ib = b.entries().begin();
  while (ia != a.entries().end() || ib != b.entries().end()) {
    double d;
    if (ib == b.entries().end() || (ia != a.entries().end() && ia->first < ib->first)) {
      d = ia->second;
      ++ia;
    } else if (ia == a.entries().end() || ib->first < ia->first) {
      d = ib->second;
      ++ib;
    } else {
      d = ia->second - ib->second;
      ++ia;
      ++ib;
    }
    sum += d * d;
  }
  return std::sqrt(sum);
}

// a.b / (|a|^2 + |b|^2 - a.b); 0 when the denominator vanishes (both empty).
inline double extended_jaccard(const SparseVector& a, const SparseVector& b) {
  double d = a.dot(b);
  double denom = a.norm_sq() + b.norm_sq() - d;
  if (denom <= 0.0) return 0.0;
  return d / denom;
}

// Jaccard over the key sets; 0 when both are empty.
inline double key_jaccard(const SparseVector& a, const SparseVector& b) {
  std::size_t u = a.union_keys(b);
  if (u == 0) return 0.0;
  return static_cast<double>(a.shared_keys(b)) / static_cast<double>(u);
}

}  // namespace scanps
