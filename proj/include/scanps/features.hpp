#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scanps/hetnet.hpp"
#include "scanps/sparse_vector.hpp"

namespace scanps {

// ---------------------------------------------------------------------------
// Social features
// ---------------------------------------------------------------------------

inline std::size_t common_neighbors(const HeterogeneousNetwork& net, UserId ui, UserId uj) {
  auto a = net.neighbors(ui);
  auto b = net.neighbors(uj);
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

// |intersection| / |union|; 0 when both neighborhoods are empty.
inline double jaccard(const HeterogeneousNetwork& net, UserId ui, UserId uj) {
  std::size_t shared = common_neighbors(net, ui, uj);
  std::size_t uni = net.degree(ui) + net.degree(uj) - shared;
  if (uni == 0) return 0.0;
  return static_cast<double>(shared) / static_cast<double>(uni);
}

// Sum of 1/ln(deg) over common neighbors. In an undirected graph a common
// neighbor has degree >= 2, so every term is finite and positive.
inline double adamic_adar(const HeterogeneousNetwork& net, UserId ui, UserId uj) {
  auto a = net.neighbors(ui);
  auto b = net.neighbors(uj);
  double sum = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      sum += 1.0 / std::log(static_cast<double>(net.degree(*ia)));
      ++ia;
      ++ib;
    }
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Per-user auxiliary vectors
// ---------------------------------------------------------------------------

// TF-IDF over one network, treating each user as a document. tf is the raw
// count, idf = ln(|U| / df) with df = number of users using the word.
class TfIdf {
 public:
  TfIdf() = default;

  explicit TfIdf(const HeterogeneousNetwork& net) {
    std::map<std::string, std::int64_t> df;
    for (UserId u : net.users()) {
      std::map<std::string, bool> seen;
      for (const auto& w : net.words(u)) {
        if (!seen[w]) {
          seen[w] = true;
          ++df[w];
        }
      }
    }
    n_users_ = static_cast<double>(net.user_count());
    std::int64_t next_id = 0;
    for (const auto& [word, count] : df) {
      word_ids_.emplace(word, next_id);
      idf_.push_back(std::log(n_users_ / static_cast<double>(count)));
      ++next_id;
    }
  }

  // Raw count vector over interned word ids.
  SparseVector counts(const HeterogeneousNetwork& net, UserId u) const {
    SparseVector v;
    for (const auto& w : net.words(u)) v.add(word_ids_.at(w), 1.0);
    return v;
  }

  // tf * idf; words used by everyone get weight 0 and drop out.
  SparseVector weighted(const HeterogeneousNetwork& net, UserId u) const {
    SparseVector v;
    for (const auto& w : net.words(u)) {
      std::int64_t id = word_ids_.at(w);
      v.add(id, idf_[static_cast<std::size_t>(id)]);
    }
    return v;
  }

 private:
  std::map<std::string, std::int64_t> word_ids_;
  std::vector<double> idf_;
  double n_users_ = 0.0;
};

// All per-user vectors of one network, built once and then read-only: location
// count vectors with representative coordinates, hour-slot count vectors, and
// raw / TF-IDF word vectors. Shared by feature extraction and the sampling
// similarity so both see identical data.
class UserVectors {
 public:
  UserVectors() = default;

  explicit UserVectors(const HeterogeneousNetwork& net) : tfidf_(net) {
    for (UserId u : net.users()) {
      Entry& e = entries_[u];
      for (const auto& ev : net.locations(u)) {
        e.location.add(ev.location_id, 1.0);
        e.coords.try_emplace(ev.location_id, std::pair<double, double>(ev.latitude, ev.longitude));
      }
      for (int h : net.hours(u)) e.hours.add(h, 1.0);
      e.word_counts = tfidf_.counts(net, u);
      e.words = tfidf_.weighted(net, u);
    }
  }

  const SparseVector& location(UserId u) const { return require(u).location; }
  const SparseVector& hours(UserId u) const { return require(u).hours; }
  const SparseVector& word_counts(UserId u) const { return require(u).word_counts; }
  const SparseVector& words(UserId u) const { return require(u).words; }

  // Representative coordinates of a location: first event of ui naming it,
  // else first event of uj.
  std::pair<double, double> coords(UserId ui, UserId uj, std::int64_t location_id) const {
    const auto& ci = require(ui).coords;
    if (auto it = ci.find(location_id); it != ci.end()) return it->second;
    return require(uj).coords.at(location_id);
  }

 private:
  struct Entry {
    SparseVector location;
    SparseVector hours;
    SparseVector word_counts;
    SparseVector words;
    std::map<std::int64_t, std::pair<double, double>> coords;
  };

  const Entry& require(UserId u) const {
    auto it = entries_.find(u);
    if (it == entries_.end()) throw IntegrityError("unknown user " + std::to_string(u));
    return it->second;
  }

  std::map<UserId, Entry> entries_;
  TfIdf tfidf_;
};

// Great-circle distance in km, Earth radius 6371 km.
inline double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthRadiusKm = 6371.0;
  constexpr double kDegToRad = std::numbers::pi / 180.0;
  double phi1 = lat1 * kDegToRad;
  double phi2 = lat2 * kDegToRad;
  double dphi = (lat2 - lat1) * kDegToRad;
  double dlambda = (lon2 - lon1) * kDegToRad;
  double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
             std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

namespace detail {

// [inner, cosine, euclidean, shared locations, location jaccard, mean geo km].
// All six are 0 when either user has no location events.
inline std::array<double, 6> spatial_block(const UserVectors& vecs, UserId ui, UserId uj) {
  const SparseVector& a = vecs.location(ui);
  const SparseVector& b = vecs.location(uj);
  if (a.empty() || b.empty()) return {};
  double geo_sum = 0.0;
  for (const auto& [la, ca] : a.entries()) {
    auto [lat1, lon1] = vecs.coords(ui, uj, la);
    for (const auto& [lb, cb] : b.entries()) {
      auto [lat2, lon2] = vecs.coords(uj, ui, lb);
      geo_sum += haversine_km(lat1, lon1, lat2, lon2);
    }
  }
  double geo_mean = geo_sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
  return {a.dot(b),
          cosine(a, b),
          euclidean(a, b),
          static_cast<double>(a.shared_keys(b)),
          key_jaccard(a, b),
          geo_mean};
}

// [shared slots, inner, cosine, euclidean, extended jaccard]; 0s when either
// user has no time events.
inline std::array<double, 5> temporal_block(const UserVectors& vecs, UserId ui, UserId uj) {
  const SparseVector& a = vecs.hours(ui);
  const SparseVector& b = vecs.hours(uj);
  if (a.empty() || b.empty()) return {};
  return {static_cast<double>(a.shared_keys(b)), a.dot(b), cosine(a, b), euclidean(a, b),
          extended_jaccard(a, b)};
}

// [shared words, inner, cosine, euclidean, extended jaccard]. The shared-word
// count uses raw vocabularies; the rest use TF-IDF weights.
inline std::array<double, 5> text_block(const UserVectors& vecs, UserId ui, UserId uj) {
  const SparseVector& raw_a = vecs.word_counts(ui);
  const SparseVector& raw_b = vecs.word_counts(uj);
  if (raw_a.empty() || raw_b.empty()) return {};
  const SparseVector& a = vecs.words(ui);
  const SparseVector& b = vecs.words(uj);
  return {static_cast<double>(raw_a.shared_keys(raw_b)), a.dot(b), cosine(a, b), euclidean(a, b),
          extended_jaccard(a, b)};
}

}  // namespace detail

inline std::array<double, 6> spatial_features(const HeterogeneousNetwork& net, UserId ui, UserId uj) {
  return detail::spatial_block(UserVectors(net), ui, uj);
}

inline std::array<double, 5> temporal_features(const HeterogeneousNetwork& net, UserId ui, UserId uj) {
  return detail::temporal_block(UserVectors(net), ui, uj);
}

inline std::array<double, 5> text_features(const HeterogeneousNetwork& net, UserId ui, UserId uj) {
  return detail::text_block(UserVectors(net), ui, uj);
}

// ---------------------------------------------------------------------------
// Feature vectors across the aligned pair
// ---------------------------------------------------------------------------

// 1 iff both users are anchored and the link between their source
// counterparts exists.
inline int pseudo_label(const AlignedPair& aligned, UserId ui, UserId uj) {
  auto si = aligned.source_counterpart(ui);
  auto sj = aligned.source_counterpart(uj);
  if (!si || !sj) return 0;
  return aligned.source().has_link(*si, *sj) ? 1 : 0;
}

enum class Layout { Target19, Source19, Merged38, Merged39 };

inline std::size_t layout_size(Layout layout) {
  switch (layout) {
    case Layout::Target19:
    case Layout::Source19:
      return 19;
    case Layout::Merged38:
      return 38;
    case Layout::Merged39:
      return 39;
  }
  throw std::invalid_argument("unknown layout");
}

inline std::string layout_name(Layout layout) {
  switch (layout) {
    case Layout::Target19: return "target19";
    case Layout::Source19: return "source19";
    case Layout::Merged38: return "merged38";
    case Layout::Merged39: return "merged39";
  }
  throw std::invalid_argument("unknown layout");
}

inline Layout layout_from_name(const std::string& name) {
  if (name == "target19") return Layout::Target19;
  if (name == "source19") return Layout::Source19;
  if (name == "merged38") return Layout::Merged38;
  if (name == "merged39") return Layout::Merged39;
  throw std::invalid_argument("unknown layout '" + name + "'");
}

struct FeatureVector {
  Layout layout = Layout::Target19;
  std::vector<double> values;
};

// Frozen 19-entry per-network block:
//   [CN, JC, AA,
//    loc-inner, loc-cos, loc-euclid, loc-CN, loc-JC, geo-dist-km,
//    time-shared, time-inner, time-cos, time-euclid, time-extJC,
//    word-shared, word-inner, word-cos, word-euclid, word-extJC]
// Merged38 is the target block then the source block; Merged39 appends the
// pseudo label.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(const AlignedPair& aligned)
      : aligned_(&aligned), target_vecs_(aligned.target()), source_vecs_(aligned.source()) {}

  std::array<double, 19> network_block(const HeterogeneousNetwork& net, const UserVectors& vecs,
                                       UserId ui, UserId uj) const {
    std::array<double, 19> out{};
    out[0] = static_cast<double>(common_neighbors(net, ui, uj));
    out[1] = jaccard(net, ui, uj);
    out[2] = adamic_adar(net, ui, uj);
    auto spatial = detail::spatial_block(vecs, ui, uj);
    std::copy(spatial.begin(), spatial.end(), out.begin() + 3);
    auto temporal = detail::temporal_block(vecs, ui, uj);
    std::copy(temporal.begin(), temporal.end(), out.begin() + 9);
    auto text = detail::text_block(vecs, ui, uj);
    std::copy(text.begin(), text.end(), out.begin() + 14);
    return out;
  }

  std::array<double, 19> target_block(UserId ui, UserId uj) const {
    return network_block(aligned_->target(), target_vecs_, ui, uj);
  }

  // Zeros unless both users have anchored counterparts.
  std::array<double, 19> source_block(UserId ui, UserId uj) const {
    auto si = aligned_->source_counterpart(ui);
    auto sj = aligned_->source_counterpart(uj);
    if (!si || !sj) return {};
    return network_block(aligned_->source(), source_vecs_, *si, *sj);
  }

  FeatureVector extract(UserId ui, UserId uj, Layout layout) const {
    FeatureVector fv;
    fv.layout = layout;
    fv.values.reserve(layout_size(layout));
    switch (layout) {
      case Layout::Target19: {
        auto t = target_block(ui, uj);
        fv.values.assign(t.begin(), t.end());
        break;
      }
      case Layout::Source19: {
        auto s = source_block(ui, uj);
        fv.values.assign(s.begin(), s.end());
        break;
      }
      case Layout::Merged38:
      case Layout::Merged39: {
        auto t = target_block(ui, uj);
        auto s = source_block(ui, uj);
        fv.values.assign(t.begin(), t.end());
        fv.values.insert(fv.values.end(), s.begin(), s.end());
        if (layout == Layout::Merged39)
          fv.values.push_back(static_cast<double>(pseudo_label(*aligned_, ui, uj)));
        break;
      }
    }
    return fv;
  }

  const UserVectors& target_vectors() const { return target_vecs_; }
  const UserVectors& source_vectors() const { return source_vecs_; }

 private:
  const AlignedPair* aligned_;
  UserVectors target_vecs_;
  UserVectors source_vecs_;
};

inline FeatureVector extract(const AlignedPair& aligned, UserId ui, UserId uj, Layout layout) {
  return FeatureExtractor(aligned).extract(ui, uj, layout);
}

}  // namespace scanps
