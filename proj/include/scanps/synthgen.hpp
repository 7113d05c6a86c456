#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "scanps/hetnet.hpp"
#include "scanps/rng.hpp"

namespace scanps {

// Parameters for a reproducible aligned pair.
//
// A latent friendship graph is grown by preferential attachment; each latent
// link then appears in the source and in the target independently with
// probability p_overlap. That makes p_overlap the Bernoulli rate at which a
// link observed in one network has its counterpart in the other, which is the
// signal the cross-network methods learn from. p_extra adds target-only links
// on top. Both accounts of a user draw their auxiliary events from the same
// latent preferences, so aligned accounts look alike across networks.
struct GeneratorParams {
  std::size_t n_users = 1000;
  std::size_t attach_m = 3;       // links per arriving node
  double p_overlap = 0.8;         // latent link -> per-network link probability
  double p_extra = 0.1;           // target-only links, rate relative to |latent links|
  double anchor_coverage = 1.0;   // fraction of users with anchor links
  double aux_intensity = 10.0;    // mean events per user per channel
  std::size_t vocab_size = 500;
  std::size_t n_locations = 100;
  std::uint64_t seed = 13;
};

namespace detail {

// Deterministic coordinates per location id, identical in both networks.
inline std::pair<double, double> location_coords(std::int64_t location_id) {
  std::uint64_t h1 = splitmix64(static_cast<std::uint64_t>(location_id) * 2 + 1);
  std::uint64_t h2 = splitmix64(h1);
  double lat = -90.0 + 180.0 * (static_cast<double>(h1 >> 11) * 0x1.0p-53);
  double lon = -180.0 + 360.0 * (static_cast<double>(h2 >> 11) * 0x1.0p-53);
  return {lat, lon};
}

// Barabasi-Albert style growth: node i attaches min(m, i) distinct links,
// endpoints drawn proportionally to degree via the repeated-endpoints list.
inline std::vector<std::pair<std::size_t, std::size_t>> preferential_attachment(
    std::size_t n, std::size_t m, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> endpoints;
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t want = std::min(m, i);
    std::vector<std::size_t> chosen;
    while (chosen.size() < want) {
      std::size_t candidate;
      if (endpoints.empty()) {
        candidate = static_cast<std::size_t>(rng.below(i));
      } else if (rng.bernoulli(0.9)) {
        candidate = endpoints[static_cast<std::size_t>(rng.below(endpoints.size()))];
      } else {
        candidate = static_cast<std::size_t>(rng.below(i));  // uniform mixing keeps it connected-ish
      }
      if (candidate >= i) continue;
      if (std::find(chosen.begin(), chosen.end(), candidate) == chosen.end())
        chosen.push_back(candidate);
    }
    for (std::size_t target : chosen) {
      edges.emplace_back(target, i);
      endpoints.push_back(target);
      endpoints.push_back(i);
    }
  }
  return edges;
}

struct Preference {
  std::vector<std::int64_t> locations;
  std::vector<std::int64_t> words;
  std::vector<int> hours;
};

}  // namespace detail

// Generates an aligned heterogeneous pair. Target user ids are 0..n-1; source
// ids carry a fixed offset so the two id spaces cannot be confused.
inline AlignedPair generate(const GeneratorParams& params) {
  if (params.n_users < 2) throw std::invalid_argument("generate: n_users must be >= 2");
  if (params.attach_m < 1) throw std::invalid_argument("generate: attach_m must be >= 1");
  for (double p : {params.p_overlap, params.p_extra, params.anchor_coverage}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("generate: probability out of [0,1]");
  }
  if (params.aux_intensity < 0.0) throw std::invalid_argument("generate: negative aux_intensity");
  if (params.vocab_size < 1 || params.n_locations < 1)
    throw std::invalid_argument("generate: vocab_size and n_locations must be >= 1");

  constexpr UserId kSourceOffset = 1000000;
  const std::size_t n = params.n_users;

  Rng graph_rng(derive_seed(params.seed, "latent_graph"));
  auto latent = detail::preferential_attachment(n, params.attach_m, graph_rng);

  // Per-user latent preferences; an arriving node inherits part of the taste
  // of its first latent neighbor, which gives friends correlated habits.
  std::vector<detail::Preference> prefs(n);
  std::vector<std::vector<std::size_t>> first_neighbor(n);
  for (const auto& [a, b] : latent) first_neighbor[b].push_back(a);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(params.seed, "prefs", i));
    const detail::Preference* mentor = nullptr;
    if (!first_neighbor[i].empty()) mentor = &prefs[first_neighbor[i][0]];
    auto pick = [&](auto& dst, const auto& mentor_src, std::size_t count, std::int64_t range) {
      for (std::size_t k = 0; k < count; ++k) {
        if (mentor && !mentor_src->empty() && rng.bernoulli(0.5)) {
          dst.push_back((*mentor_src)[static_cast<std::size_t>(rng.below(mentor_src->size()))]);
        } else {
          dst.push_back(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(range))));
        }
      }
    };
    pick(prefs[i].locations, mentor ? &mentor->locations : nullptr, 3,
         static_cast<std::int64_t>(params.n_locations));
    pick(prefs[i].words, mentor ? &mentor->words : nullptr, 8,
         static_cast<std::int64_t>(params.vocab_size));
    for (std::size_t k = 0; k < 2; ++k) {
      if (mentor && rng.bernoulli(0.5)) {
        prefs[i].hours.push_back(mentor->hours[static_cast<std::size_t>(rng.below(mentor->hours.size()))]);
      } else {
        prefs[i].hours.push_back(static_cast<int>(rng.below(24)));
      }
    }
  }

  HeterogeneousNetwork target;
  HeterogeneousNetwork source;
  for (std::size_t i = 0; i < n; ++i) {
    target.add_user(static_cast<UserId>(i));
    source.add_user(static_cast<UserId>(i) + kSourceOffset);
  }

  Rng thin_target(derive_seed(params.seed, "thin_target"));
  Rng thin_source(derive_seed(params.seed, "thin_source"));
  for (const auto& [a, b] : latent) {
    bool in_target = thin_target.bernoulli(params.p_overlap);
    bool in_source = thin_source.bernoulli(params.p_overlap);
    if (in_target) target.add_link(static_cast<UserId>(a), static_cast<UserId>(b));
    if (in_source)
      source.add_link(static_cast<UserId>(a) + kSourceOffset, static_cast<UserId>(b) + kSourceOffset);
  }

  // Target-only noise links.
  std::size_t n_extra =
      static_cast<std::size_t>(std::llround(params.p_extra * static_cast<double>(latent.size())));
  Rng extra_rng(derive_seed(params.seed, "extra_links"));
  std::size_t added = 0;
  std::size_t attempts = 0;
  while (added < n_extra && attempts < 100 * n_extra + 100) {
    ++attempts;
    UserId a = static_cast<UserId>(extra_rng.below(n));
    UserId b = static_cast<UserId>(extra_rng.below(n));
    if (a == b || target.has_link(a, b)) continue;
    target.add_link(a, b);
    ++added;
  }

  // Auxiliary events: both accounts sample from the same preferences.
  auto emit_events = [&](HeterogeneousNetwork& net, UserId id, std::size_t user_index,
                         const char* tag) {
    Rng rng(derive_seed(params.seed, tag, user_index));
    const detail::Preference& pref = prefs[user_index];
    std::size_t n_loc = static_cast<std::size_t>(rng.poisson(params.aux_intensity));
    for (std::size_t k = 0; k < n_loc; ++k) {
      std::int64_t loc = rng.bernoulli(0.8)
                             ? pref.locations[static_cast<std::size_t>(rng.below(pref.locations.size()))]
                             : static_cast<std::int64_t>(rng.below(params.n_locations));
      auto [lat, lon] = detail::location_coords(loc);
      net.add_location_event(id, LocationEvent{loc, lat, lon});
    }
    std::size_t n_time = static_cast<std::size_t>(rng.poisson(params.aux_intensity));
    for (std::size_t k = 0; k < n_time; ++k) {
      int hour = rng.bernoulli(0.8)
                     ? pref.hours[static_cast<std::size_t>(rng.below(pref.hours.size()))]
                     : static_cast<int>(rng.below(24));
      net.add_time_event(id, hour);
    }
    std::size_t n_word = static_cast<std::size_t>(rng.poisson(params.aux_intensity));
    for (std::size_t k = 0; k < n_word; ++k) {
      std::int64_t word = rng.bernoulli(0.8)
                              ? pref.words[static_cast<std::size_t>(rng.below(pref.words.size()))]
                              : static_cast<std::int64_t>(rng.below(params.vocab_size));
      net.add_word_event(id, "w" + std::to_string(word));
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    emit_events(target, static_cast<UserId>(i), i, "events_target");
    emit_events(source, static_cast<UserId>(i) + kSourceOffset, i, "events_source");
  }

  AlignedPair pair(std::move(target), std::move(source));
  std::size_t n_anchored =
      static_cast<std::size_t>(std::llround(params.anchor_coverage * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng anchor_rng(derive_seed(params.seed, "anchors"));
  anchor_rng.shuffle(order);
  order.resize(n_anchored);
  std::sort(order.begin(), order.end());
  for (std::size_t i : order)
    pair.add_anchor(static_cast<UserId>(i), static_cast<UserId>(i) + kSourceOffset);
  return pair;
}

// Exact (degree, user count) histogram in descending degree order.
inline std::vector<std::pair<std::size_t, std::size_t>> degree_histogram(
    const HeterogeneousNetwork& net) {
  std::map<std::size_t, std::size_t> counts;
  for (UserId u : net.users()) ++counts[net.degree(u)];
  std::vector<std::pair<std::size_t, std::size_t>> out(counts.begin(), counts.end());
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace scanps
