#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scanps/rng.hpp"

namespace scanps {

using UserId = std::int64_t;

struct LocationEvent {
  std::int64_t location_id = 0;
  double latitude = 0.0;
  double longitude = 0.0;

  friend bool operator==(const LocationEvent&, const LocationEvent&) = default;
  friend auto operator<=>(const LocationEvent&, const LocationEvent&) = default;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
};

struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One social network: users, undirected social links, and per-user multisets
// of location / time-slot / word events. Build it up front, then treat it as
// immutable; const queries are safe to share across threads.
class HeterogeneousNetwork {
 public:
  void add_user(UserId u) { users_.try_emplace(u); }

  bool has_user(UserId u) const { return users_.count(u) > 0; }

  // Undirected, deduplicated, no self links. Returns false if the link was
  // already present.
  bool add_link(UserId a, UserId b) {
    if (a == b) throw IntegrityError("self link on user " + std::to_string(a));
    UserData& da = require_mut(a);
    UserData& db = require_mut(b);
    auto it = std::lower_bound(da.neighbors.begin(), da.neighbors.end(), b);
    if (it != da.neighbors.end() && *it == b) return false;
    da.neighbors.insert(it, b);
    db.neighbors.insert(std::lower_bound(db.neighbors.begin(), db.neighbors.end(), a), a);
    ++link_count_;
    return true;
  }

  void add_location_event(UserId u, LocationEvent e) {
    if (e.latitude < -90.0 || e.latitude > 90.0 || e.longitude < -180.0 || e.longitude > 180.0)
      throw IntegrityError("coordinates out of range for user " + std::to_string(u));
    require_mut(u).locations.push_back(e);
  }

  void add_time_event(UserId u, int hour) {
    if (hour < 0 || hour > 23)
      throw IntegrityError("hour slot out of range for user " + std::to_string(u));
    require_mut(u).hours.push_back(hour);
  }

  void add_word_event(UserId u, std::string token) {
    require_mut(u).words.push_back(std::move(token));
  }

  std::size_t user_count() const { return users_.size(); }
  std::size_t link_count() const { return link_count_; }

  std::vector<UserId> users() const {
    std::vector<UserId> ids;
    ids.reserve(users_.size());
    for (const auto& [id, data] : users_) ids.push_back(id);
    return ids;
  }

  std::span<const UserId> neighbors(UserId u) const { return require(u).neighbors; }
  std::size_t degree(UserId u) const { return require(u).neighbors.size(); }

  bool has_link(UserId a, UserId b) const {
    const auto& na = require(a).neighbors;
    return std::binary_search(na.begin(), na.end(), b);
  }

  std::span<const LocationEvent> locations(UserId u) const { return require(u).locations; }
  std::span<const int> hours(UserId u) const { return require(u).hours; }
  std::span<const std::string> words(UserId u) const { return require(u).words; }

  // All links as (a, b) with a < b, in sorted order.
  std::vector<std::pair<UserId, UserId>> links() const {
    std::vector<std::pair<UserId, UserId>> out;
    out.reserve(link_count_);
    for (const auto& [id, data] : users_) {
      for (UserId v : data.neighbors) {
        if (id < v) out.emplace_back(id, v);
      }
    }
    return out;
  }

  friend bool operator==(const HeterogeneousNetwork& a, const HeterogeneousNetwork& b) {
    if (a.users_.size() != b.users_.size() || a.link_count_ != b.link_count_) return false;
    auto ia = a.users_.begin();
    auto ib = b.users_.begin();
    for (; ia != a.users_.end(); ++ia, ++ib) {
      if (ia->first != ib->first) return false;
      if (ia->second.neighbors != ib->second.neighbors) return false;
      if (sorted(ia->second.locations) != sorted(ib->second.locations)) return false;
      if (sorted(ia->second.hours) != sorted(ib->second.hours)) return false;
      if (sorted(ia->second.words) != sorted(ib->second.words)) return false;
    }
    return true;
  }

 private:
  struct UserData {
    std::vector<UserId> neighbors;  // sorted
    std::vector<LocationEvent> locations;
    std::vector<int> hours;
    std::vector<std::string> words;
  };

  template <typename T>
  static std::vector<T> sorted(const std::vector<T>& v) {
    std::vector<T> copy = v;
    std::sort(copy.begin(), copy.end());
    return copy;
  }

  const UserData& require(UserId u) const {
    auto it = users_.find(u);
    if (it == users_.end()) throw IntegrityError("unknown user " + std::to_string(u));
    return it->second;
  }

  UserData& require_mut(UserId u) {
    auto it = users_.find(u);
    if (it == users_.end()) throw IntegrityError("unknown user " + std::to_string(u));
    return it->second;
  }

  std::map<UserId, UserData> users_;
  std::size_t link_count_ = 0;
};

// Two networks joined by a bijective partial anchor map. Anchor semantics are
// symmetric (two accounts of one person), so a single bijection is stored.
class AlignedPair {
 public:
  AlignedPair(HeterogeneousNetwork target, HeterogeneousNetwork source)
      : target_(std::move(target)), source_(std::move(source)) {}

  void add_anchor(UserId target_user, UserId source_user) {
    if (!target_.has_user(target_user))
      throw IntegrityError("anchor references unknown target user " + std::to_string(target_user));
    if (!source_.has_user(source_user))
      throw IntegrityError("anchor references unknown source user " + std::to_string(source_user));
    if (t_to_s_.count(target_user))
      throw IntegrityError("target user " + std::to_string(target_user) + " anchored twice");
    if (s_to_t_.count(source_user))
      throw IntegrityError("source user " + std::to_string(source_user) + " anchored twice");
    t_to_s_.emplace(target_user, source_user);
    s_to_t_.emplace(source_user, target_user);
  }

  const HeterogeneousNetwork& target() const { return target_; }
  const HeterogeneousNetwork& source() const { return source_; }

  // Replaces the target network, keeping anchors; used to swap in an
  // information-withheld view. The new network must contain every anchored user.
  AlignedPair with_target(HeterogeneousNetwork replacement) const {
    AlignedPair out(std::move(replacement), source_);
    for (const auto& [t, s] : t_to_s_) out.add_anchor(t, s);
    return out;
  }

  std::optional<UserId> source_counterpart(UserId target_user) const {
    auto it = t_to_s_.find(target_user);
    if (it == t_to_s_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<UserId> target_counterpart(UserId source_user) const {
    auto it = s_to_t_.find(source_user);
    if (it == s_to_t_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t anchor_count() const { return t_to_s_.size(); }

  // Fraction of target users with an anchored counterpart.
  double coverage() const {
    if (target_.user_count() == 0) return 0.0;
    return static_cast<double>(t_to_s_.size()) / static_cast<double>(target_.user_count());
  }

  const std::map<UserId, UserId>& anchors() const { return t_to_s_; }

 private:
  HeterogeneousNetwork target_;
  HeterogeneousNetwork source_;
  std::map<UserId, UserId> t_to_s_;
  std::map<UserId, UserId> s_to_t_;
};

struct UserPartition {
  std::vector<UserId> new_users;  // sorted
  std::vector<UserId> old_users;  // sorted

  bool is_new(UserId u) const {
    return std::binary_search(new_users.begin(), new_users.end(), u);
  }
  bool is_old(UserId u) const {
    return std::binary_search(old_users.begin(), old_users.end(), u);
  }
};

// ---------------------------------------------------------------------------
// File formats. One record per line, UTF-8, '#' starts a comment line.
//   users:   <id>
//   links:   <id> <id>
//   events:  <id> loc <location-id>,<lat>,<lon>
//            <id> time <hour 0-23>
//            <id> word <token>
//   anchors: <target-id> <source-id>
// ---------------------------------------------------------------------------

namespace detail {

inline bool skip_line(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;  // blank
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) fields.push_back(tok);
  return fields;
}

inline std::int64_t parse_int(const std::string& tok, const std::string& file, std::size_t line) {
  std::size_t pos = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(file, line, "expected integer, got '" + tok + "'");
  }
  if (pos != tok.size()) throw ParseError(file, line, "expected integer, got '" + tok + "'");
  return value;
}

inline double parse_double(const std::string& tok, const std::string& file, std::size_t line) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(file, line, "expected number, got '" + tok + "'");
  }
  if (pos != tok.size()) throw ParseError(file, line, "expected number, got '" + tok + "'");
  return value;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

inline void load_events_file(HeterogeneousNetwork& net, const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    auto fields = split_ws(line);
    if (fields.size() != 3) throw ParseError(path, lineno, "expected '<user> <kind> <payload>'");
    UserId u = parse_int(fields[0], path, lineno);
    if (!net.has_user(u))
      throw IntegrityError(path + ":" + std::to_string(lineno) + ": event references unknown user " +
                           std::to_string(u));
    const std::string& kind = fields[1];
    if (kind == "loc") {
      std::vector<std::string> parts;
      std::string part;
      std::istringstream ps(fields[2]);
      while (std::getline(ps, part, ',')) parts.push_back(part);
      if (parts.size() != 3) throw ParseError(path, lineno, "loc payload must be '<id>,<lat>,<lon>'");
      LocationEvent e{parse_int(parts[0], path, lineno), parse_double(parts[1], path, lineno),
                      parse_double(parts[2], path, lineno)};
      try {
        net.add_location_event(u, e);
      } catch (const IntegrityError& err) {
        throw ParseError(path, lineno, err.what());
      }
    } else if (kind == "time") {
      std::int64_t h = parse_int(fields[2], path, lineno);
      if (h < 0 || h > 23) throw ParseError(path, lineno, "hour slot out of range");
      net.add_time_event(u, static_cast<int>(h));
    } else if (kind == "word") {
      net.add_word_event(u, fields[2]);
    } else {
      throw ParseError(path, lineno, "unknown event kind '" + kind + "'");
    }
  }
}

}  // namespace detail

inline HeterogeneousNetwork load_network(const std::string& users_path,
                                         const std::string& links_path,
                                         std::span<const std::string> events_paths) {
  HeterogeneousNetwork net;
  {
    std::ifstream in = detail::open_input(users_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::skip_line(line)) continue;
      auto fields = detail::split_ws(line);
      if (fields.size() != 1) throw ParseError(users_path, lineno, "expected one user id");
      net.add_user(detail::parse_int(fields[0], users_path, lineno));
    }
  }
  {
    std::ifstream in = detail::open_input(links_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::skip_line(line)) continue;
      auto fields = detail::split_ws(line);
      if (fields.size() != 2) throw ParseError(links_path, lineno, "expected two user ids");
      UserId a = detail::parse_int(fields[0], links_path, lineno);
      UserId b = detail::parse_int(fields[1], links_path, lineno);
      if (!net.has_user(a) || !net.has_user(b))
        throw IntegrityError(links_path + ":" + std::to_string(lineno) + ": link references unknown user");
      if (a == b) throw ParseError(links_path, lineno, "self link");
      net.add_link(a, b);  // duplicates (including reversed) collapse here
    }
  }
  for (const std::string& path : events_paths) detail::load_events_file(net, path);
  return net;
}

inline HeterogeneousNetwork load_network(const std::string& users_path,
                                         const std::string& links_path,
                                         const std::string& events_path) {
  const std::string paths[] = {events_path};
  return load_network(users_path, links_path, std::span<const std::string>(paths, 1));
}

enum class EventKind { Location, Time, Word };

inline void save_users(const HeterogeneousNetwork& net, const std::string& path) {
  std::ofstream out = detail::open_output(path);
  for (UserId u : net.users()) out << u << "\n";
}

inline void save_links(const HeterogeneousNetwork& net, const std::string& path) {
  std::ofstream out = detail::open_output(path);
  for (const auto& [a, b] : net.links()) out << a << " " << b << "\n";
}

// Canonical order (sorted payloads per user) so equal networks serialize to
// identical bytes.
inline void save_events(const HeterogeneousNetwork& net, const std::string& path,
                        std::initializer_list<EventKind> kinds) {
  std::ofstream out = detail::open_output(path);
  char buf[128];
  for (UserId u : net.users()) {
    for (EventKind kind : kinds) {
      switch (kind) {
        case EventKind::Location: {
          std::vector<LocationEvent> locs(net.locations(u).begin(), net.locations(u).end());
          std::sort(locs.begin(), locs.end());
          for (const auto& e : locs) {
            std::snprintf(buf, sizeof(buf), "%lld loc %lld,%.17g,%.17g",
                          static_cast<long long>(u), static_cast<long long>(e.location_id),
                          e.latitude, e.longitude);
            out << buf << "\n";
          }
          break;
        }
        case EventKind::Time: {
          std::vector<int> hours(net.hours(u).begin(), net.hours(u).end());
          std::sort(hours.begin(), hours.end());
          for (int h : hours) out << u << " time " << h << "\n";
          break;
        }
        case EventKind::Word: {
          std::vector<std::string> words(net.words(u).begin(), net.words(u).end());
          std::sort(words.begin(), words.end());
          for (const auto& w : words) out << u << " word " << w << "\n";
          break;
        }
      }
    }
  }
}

inline void save_network(const HeterogeneousNetwork& net, const std::string& users_path,
                         const std::string& links_path, const std::string& events_path) {
  save_users(net, users_path);
  save_links(net, links_path);
  save_events(net, events_path, {EventKind::Location, EventKind::Time, EventKind::Word});
}

inline void save_anchors(const AlignedPair& pair, const std::string& path) {
  std::ofstream out = detail::open_output(path);
  for (const auto& [t, s] : pair.anchors()) out << t << " " << s << "\n";
}

inline AlignedPair build_aligned_pair(HeterogeneousNetwork target, HeterogeneousNetwork source,
                                      const std::string& anchors_path) {
  AlignedPair pair(std::move(target), std::move(source));
  std::ifstream in = detail::open_input(anchors_path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skip_line(line)) continue;
    auto fields = detail::split_ws(line);
    if (fields.size() != 2) throw ParseError(anchors_path, lineno, "expected '<target-id> <source-id>'");
    pair.add_anchor(detail::parse_int(fields[0], anchors_path, lineno),
                    detail::parse_int(fields[1], anchors_path, lineno));
  }
  return pair;
}

// Splits users into round(new_fraction * |U|) new users and the rest,
// uniformly at random, reproducibly for a fixed seed.
inline UserPartition partition_users(const HeterogeneousNetwork& net, double new_fraction,
                                     std::uint64_t seed) {
  if (net.user_count() == 0) throw std::invalid_argument("partition_users: empty network");
  if (!(new_fraction > 0.0 && new_fraction < 1.0))
    throw std::invalid_argument("partition_users: new_fraction must be in (0,1)");
  std::vector<UserId> ids = net.users();
  Rng rng(derive_seed(seed, "partition"));
  rng.shuffle(ids);
  std::size_t n_new =
      static_cast<std::size_t>(std::llround(new_fraction * static_cast<double>(ids.size())));
  UserPartition part;
  part.new_users.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_new));
  part.old_users.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_new), ids.end());
  std::sort(part.new_users.begin(), part.new_users.end());
  std::sort(part.old_users.begin(), part.old_users.end());
  return part;
}

namespace detail {

// Per-user nested subsample: a seed-fixed permutation of the items, of which
// the first round(ratio * n) survive. The kept set at a smaller ratio is
// always a subset of the kept set at a larger one.
inline std::vector<std::size_t> kept_indices(std::size_t n, double ratio, std::uint64_t item_seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(item_seed);
  rng.shuffle(order);
  std::size_t keep = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace detail

// Removes a (1 - ratio) share of each new user's links and events. A link
// between two new users survives only if both endpoints retain it. Old users
// are untouched.
inline HeterogeneousNetwork withhold_information(const HeterogeneousNetwork& net,
                                                 std::span<const UserId> new_users, double ratio,
                                                 std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw std::invalid_argument("withhold_information: ratio must be in [0,1]");
  for (UserId u : new_users) {
    if (!net.has_user(u))
      throw IntegrityError("withhold_information: unknown user " + std::to_string(u));
  }
  std::vector<UserId> sorted_new(new_users.begin(), new_users.end());
  std::sort(sorted_new.begin(), sorted_new.end());
  auto is_new = [&](UserId u) {
    return std::binary_search(sorted_new.begin(), sorted_new.end(), u);
  };

  // Which of their incident links each new user keeps.
  std::map<UserId, std::vector<UserId>> kept_partners;
  for (UserId u : sorted_new) {
    auto nbrs = net.neighbors(u);
    auto kept = detail::kept_indices(nbrs.size(), ratio, derive_seed(seed, "links", u));
    std::vector<UserId>& partners = kept_partners[u];
    partners.reserve(kept.size());
    for (std::size_t i : kept) partners.push_back(nbrs[i]);
  }
  auto keeps_link = [&](UserId u, UserId v) {
    const auto& partners = kept_partners.at(u);
    return std::binary_search(partners.begin(), partners.end(), v);
  };

  HeterogeneousNetwork out;
  for (UserId u : net.users()) out.add_user(u);
  for (const auto& [a, b] : net.links()) {
    bool keep = true;
    if (is_new(a) && !keeps_link(a, b)) keep = false;
    if (keep && is_new(b) && !keeps_link(b, a)) keep = false;
    if (keep) out.add_link(a, b);
  }
  for (UserId u : net.users()) {
    auto locs = net.locations(u);
    auto hrs = net.hours(u);
    auto wds = net.words(u);
    if (!is_new(u)) {
      for (const auto& e : locs) out.add_location_event(u, e);
      for (int h : hrs) out.add_time_event(u, h);
      for (const auto& w : wds) out.add_word_event(u, w);
      continue;
    }
    for (std::size_t i : detail::kept_indices(locs.size(), ratio, derive_seed(seed, "loc", u)))
      out.add_location_event(u, locs[i]);
    for (std::size_t i : detail::kept_indices(hrs.size(), ratio, derive_seed(seed, "time", u)))
      out.add_time_event(u, hrs[i]);
    for (std::size_t i : detail::kept_indices(wds.size(), ratio, derive_seed(seed, "word", u)))
      out.add_word_event(u, wds[i]);
  }
  return out;
}

// Subgraph induced by `keep` (sorted or not), with all auxiliary events of the
// kept users.
inline HeterogeneousNetwork induced_subnetwork(const HeterogeneousNetwork& net,
                                               std::span<const UserId> keep) {
  std::vector<UserId> ids(keep.begin(), keep.end());
  std::sort(ids.begin(), ids.end());
  HeterogeneousNetwork out;
  for (UserId u : ids) {
    if (!net.has_user(u))
      throw IntegrityError("induced_subnetwork: unknown user " + std::to_string(u));
    out.add_user(u);
  }
  for (UserId u : ids) {
    for (UserId v : net.neighbors(u)) {
      if (u < v && std::binary_search(ids.begin(), ids.end(), v)) out.add_link(u, v);
    }
    for (const auto& e : net.locations(u)) out.add_location_event(u, e);
    for (int h : net.hours(u)) out.add_time_event(u, h);
    for (const auto& w : net.words(u)) out.add_word_event(u, w);
  }
  return out;
}

}  // namespace scanps
