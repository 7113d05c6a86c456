#pragma once

// Shared builders for tests: tiny hand-made networks and aligned pairs.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"

#include "scanps/hetnet.hpp"

namespace testutil {

using scanps::HeterogeneousNetwork;
using scanps::UserId;

inline HeterogeneousNetwork make_network(std::initializer_list<UserId> users,
                                         std::initializer_list<std::pair<UserId, UserId>> links = {}) {
  HeterogeneousNetwork net;
  for (UserId u : users) net.add_user(u);
  for (const auto& [a, b] : links) net.add_link(a, b);
  return net;
}

// Two identically-shaped 4-user networks with full alignment (t: 1..4,
// s: 101..104); source has one extra link so pseudo labels are non-trivial.
inline scanps::AlignedPair make_small_pair() {
  HeterogeneousNetwork target = make_network({1, 2, 3, 4}, {{1, 2}, {2, 3}});
  HeterogeneousNetwork source = make_network({101, 102, 103, 104}, {{101, 102}, {103, 104}});
  scanps::AlignedPair pair(std::move(target), std::move(source));
  pair.add_anchor(1, 101);
  pair.add_anchor(2, 102);
  pair.add_anchor(3, 103);
  pair.add_anchor(4, 104);
  return pair;
}

inline std::string temp_dir(const std::string& name) {
  auto path = std::filesystem::temp_directory_path() / ("scanps_test_" + name);
  std::filesystem::remove_all(path);
  std::filesystem::create_directories(path);
  return path.string();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out);
  out << content;
}

}  // namespace testutil
