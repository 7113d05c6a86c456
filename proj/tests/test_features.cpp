#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "scanps/features.hpp"
#include "scanps/rng.hpp"
#include "scanps/synthgen.hpp"

using namespace scanps;
using testutil::make_network;

TEST_CASE("common_neighbors counts the shared neighborhood") {
  // Gamma(1) = {3,4,5}, Gamma(2) = {4,5,6}
  HeterogeneousNetwork net =
      make_network({1, 2, 3, 4, 5, 6}, {{1, 3}, {1, 4}, {1, 5}, {2, 4}, {2, 5}, {2, 6}});
  CHECK(common_neighbors(net, 1, 2) == 2);
  CHECK(common_neighbors(net, 3, 6) == 0);

  HeterogeneousNetwork with_isolated = make_network({1, 2, 3}, {{2, 3}});
  CHECK(common_neighbors(with_isolated, 1, 2) == 0);
  CHECK_THROWS_AS(common_neighbors(net, 1, 99), IntegrityError);
}

TEST_CASE("jaccard normalizes by the union") {
  HeterogeneousNetwork net =
      make_network({1, 2, 3, 4, 5, 6}, {{1, 3}, {1, 4}, {1, 5}, {2, 4}, {2, 5}, {2, 6}});
  CHECK(jaccard(net, 1, 2) == doctest::Approx(0.5));

  HeterogeneousNetwork same = make_network({1, 2, 3, 4}, {{1, 3}, {1, 4}, {2, 3}, {2, 4}});
  CHECK(jaccard(same, 1, 2) == doctest::Approx(1.0));

  HeterogeneousNetwork empty = make_network({1, 2});
  CHECK(jaccard(empty, 1, 2) == 0.0);
}

TEST_CASE("adamic_adar weights common neighbors by 1/ln(degree)") {
  // common neighbors 3 (degree 2) and 4 (degree 4)
  HeterogeneousNetwork net =
      make_network({1, 2, 3, 4, 5, 6}, {{1, 3}, {2, 3}, {1, 4}, {2, 4}, {4, 5}, {4, 6}});
  double expected = 1.0 / std::log(2.0) + 1.0 / std::log(4.0);
  CHECK(adamic_adar(net, 1, 2) == doctest::Approx(expected));
  CHECK(expected == doctest::Approx(2.1640).epsilon(1e-4));
  CHECK(adamic_adar(net, 5, 6) == doctest::Approx(1.0 / std::log(4.0)));
  CHECK(adamic_adar(net, 3, 4) == doctest::Approx(2.0 / std::log(2.0)));  // shared 1 and 2

  HeterogeneousNetwork disjoint = make_network({1, 2, 3, 4}, {{1, 3}, {2, 4}});
  CHECK(adamic_adar(disjoint, 1, 2) == 0.0);
}

TEST_CASE("spatial_features on hand-built location histories") {
  HeterogeneousNetwork net = make_network({1, 2, 3});
  // A at (0,0); B at (0,1): one degree of longitude on the equator
  net.add_location_event(1, {100, 0.0, 0.0});
  net.add_location_event(2, {100, 0.0, 0.0});

  SUBCASE("identical singleton histories") {
    auto f = spatial_features(net, 1, 2);
    CHECK(f[0] == doctest::Approx(1.0));  // inner
    CHECK(f[1] == doctest::Approx(1.0));  // cosine
    CHECK(f[2] == doctest::Approx(0.0));  // euclidean
    CHECK(f[3] == doctest::Approx(1.0));  // shared locations
    CHECK(f[4] == doctest::Approx(1.0));  // location jaccard
    CHECK(f[5] == doctest::Approx(0.0));  // geo distance
  }

  SUBCASE("asymmetric visit counts") {
    net.add_location_event(1, {100, 0.0, 0.0});  // user 1 twice at A
    net.add_location_event(2, {101, 0.0, 1.0});  // user 2 once at A, once at B
    auto f = spatial_features(net, 1, 2);
    CHECK(f[0] == doctest::Approx(2.0));
    CHECK(f[1] == doctest::Approx(2.0 / (2.0 * std::sqrt(2.0))));
    CHECK(f[2] == doctest::Approx(std::sqrt(2.0)));
    CHECK(f[3] == doctest::Approx(1.0));
    CHECK(f[4] == doctest::Approx(0.5));
    // mean over {A} x {A, B}: (0 + R * 1 degree) / 2
    double one_degree_km = 6371.0 * std::numbers::pi / 180.0;
    CHECK(f[5] == doctest::Approx(one_degree_km / 2.0).epsilon(1e-6));
  }

  SUBCASE("an empty operand zeroes the family") {
    auto f = spatial_features(net, 1, 3);
    for (double x : f) CHECK(x == 0.0);
  }
}

TEST_CASE("temporal_features on hand-built hour histograms") {
  HeterogeneousNetwork net = make_network({1, 2, 3});
  for (int i = 0; i < 3; ++i) net.add_time_event(1, 9);
  net.add_time_event(2, 9);
  net.add_time_event(2, 20);
  net.add_time_event(2, 20);

  auto f = temporal_features(net, 1, 2);
  CHECK(f[0] == doctest::Approx(1.0));                        // shared slots
  CHECK(f[1] == doctest::Approx(3.0));                        // inner
  CHECK(f[2] == doctest::Approx(3.0 / (3.0 * std::sqrt(5.0))));
  CHECK(f[3] == doctest::Approx(std::sqrt(8.0)));             // sqrt(4+4)
  CHECK(f[4] == doctest::Approx(3.0 / (9.0 + 5.0 - 3.0)));    // 0.2727...

  HeterogeneousNetwork same = make_network({1, 2});
  same.add_time_event(1, 5);
  same.add_time_event(2, 5);
  auto g = temporal_features(same, 1, 2);
  CHECK(g[2] == doctest::Approx(1.0));
  CHECK(g[3] == doctest::Approx(0.0));
  CHECK(g[4] == doctest::Approx(1.0));

  HeterogeneousNetwork disjoint = make_network({1, 2});
  disjoint.add_time_event(1, 5);
  disjoint.add_time_event(2, 6);
  auto h = temporal_features(disjoint, 1, 2);
  CHECK(h[0] == 0.0);
  CHECK(h[1] == 0.0);
  CHECK(h[4] == 0.0);
}

TEST_CASE("text_features use TF-IDF weights and a raw shared-word count") {
  HeterogeneousNetwork net = make_network({1, 2, 3});
  net.add_word_event(1, "the");
  net.add_word_event(1, "apple");
  net.add_word_event(2, "the");
  net.add_word_event(2, "banana");
  net.add_word_event(3, "the");

  auto f = text_features(net, 1, 2);
  // "the" is used by every user: idf = ln(1) = 0, so it only shows up in the
  // raw shared-word count.
  CHECK(f[0] == doctest::Approx(1.0));
  CHECK(f[1] == doctest::Approx(0.0));  // weighted vectors are orthogonal
  CHECK(f[2] == doctest::Approx(0.0));
  CHECK(f[3] == doctest::Approx(std::sqrt(2.0) * std::log(3.0)));  // both rare words weigh ln 3
  CHECK(f[4] == doctest::Approx(0.0));

  HeterogeneousNetwork same = make_network({1, 2, 3});
  same.add_word_event(1, "kiwi");
  same.add_word_event(1, "mango");
  same.add_word_event(2, "kiwi");
  same.add_word_event(2, "mango");
  auto g = text_features(same, 1, 2);
  CHECK(g[0] == doctest::Approx(2.0));
  CHECK(g[2] == doctest::Approx(1.0));
  CHECK(g[4] == doctest::Approx(1.0));

  HeterogeneousNetwork one_empty = make_network({1, 2});
  one_empty.add_word_event(1, "solo");
  auto h = text_features(one_empty, 1, 2);
  for (double x : h) CHECK(x == 0.0);
}

TEST_CASE("pseudo_label reads the source counterpart link") {
  AlignedPair pair = testutil::make_small_pair();
  CHECK(pseudo_label(pair, 1, 2) == 1);  // 101-102 exists
  CHECK(pseudo_label(pair, 3, 4) == 1);  // 103-104 exists
  CHECK(pseudo_label(pair, 1, 3) == 0);  // no 101-103
  CHECK(pseudo_label(pair, 2, 3) == 0);

  AlignedPair partial(make_network({1, 2}), make_network({101, 102}, {{101, 102}}));
  partial.add_anchor(1, 101);
  CHECK(pseudo_label(partial, 1, 2) == 0);  // user 2 unanchored
}

TEST_CASE("extract produces the frozen layouts") {
  AlignedPair pair = testutil::make_small_pair();
  FeatureExtractor extractor(pair);

  FeatureVector merged = extractor.extract(1, 2, Layout::Merged39);
  REQUIRE(merged.values.size() == 39);
  for (double x : merged.values) CHECK(std::isfinite(x));
  CHECK(merged.values[38] == doctest::Approx(1.0));

  FeatureVector t19 = extractor.extract(1, 2, Layout::Target19);
  REQUIRE(t19.values.size() == 19);
  FeatureVector s19 = extractor.extract(1, 2, Layout::Source19);
  REQUIRE(s19.values.size() == 19);
  for (std::size_t i = 0; i < 19; ++i) {
    CHECK(merged.values[i] == t19.values[i]);
    CHECK(merged.values[19 + i] == s19.values[i]);
  }

  CHECK_THROWS_AS(layout_size(static_cast<Layout>(99)), std::invalid_argument);
}

TEST_CASE("target block ignores the source network entirely") {
  AlignedPair pair = testutil::make_small_pair();
  FeatureVector before = FeatureExtractor(pair).extract(1, 2, Layout::Target19);

  HeterogeneousNetwork mutated_source = make_network({101, 102, 103, 104}, {{101, 103}});
  mutated_source.add_word_event(101, "noise");
  AlignedPair other(pair.target(), std::move(mutated_source));
  other.add_anchor(1, 101);
  other.add_anchor(2, 102);
  FeatureVector after = FeatureExtractor(other).extract(1, 2, Layout::Target19);
  CHECK(before.values == after.values);
}

TEST_CASE("source block is zero for unanchored users") {
  AlignedPair partial(make_network({1, 2}, {{1, 2}}),
                      make_network({101, 102}, {{101, 102}}));
  partial.add_anchor(1, 101);
  FeatureVector fv = FeatureExtractor(partial).extract(1, 2, Layout::Merged39);
  for (std::size_t i = 19; i < 39; ++i) CHECK(fv.values[i] == 0.0);
}

TEST_CASE("a brand-new target user has an all-zero target block") {
  GeneratorParams params;
  params.n_users = 60;
  params.seed = 5;
  AlignedPair pair = generate(params);
  std::vector<UserId> newbies = {pair.target().users()[0]};
  AlignedPair visible = pair.with_target(withhold_information(pair.target(), newbies, 0.0, 3));
  FeatureExtractor extractor(visible);
  for (UserId partner : visible.target().users()) {
    if (partner == newbies[0]) continue;
    FeatureVector fv = extractor.extract(newbies[0], partner, Layout::Merged38);
    for (std::size_t i = 0; i < 19; ++i) CHECK(fv.values[i] == 0.0);
  }
}

TEST_CASE("with zero events only the social features can be nonzero") {
  HeterogeneousNetwork net = make_network({1, 2, 3}, {{1, 3}, {2, 3}});
  AlignedPair pair(net, HeterogeneousNetwork{});
  FeatureVector fv = FeatureExtractor(pair).extract(1, 2, Layout::Target19);
  CHECK(fv.values[0] == 1.0);  // common neighbor 3
  for (std::size_t i = 3; i < 19; ++i) CHECK(fv.values[i] == 0.0);
}

TEST_CASE("pairwise features are symmetric and bounded on random pairs") {
  GeneratorParams params;
  params.n_users = 120;
  params.aux_intensity = 6.0;
  params.seed = 99;
  AlignedPair pair = generate(params);
  FeatureExtractor extractor(pair);
  std::vector<UserId> users = pair.target().users();
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    UserId a = users[rng.below(users.size())];
    UserId b = users[rng.below(users.size())];
    if (a == b) continue;
    auto fab = extractor.extract(a, b, Layout::Merged39);
    auto fba = extractor.extract(b, a, Layout::Merged39);
    for (std::size_t i = 0; i < 39; ++i) CHECK(fab.values[i] == doctest::Approx(fba.values[i]));

    // bounded entries per block: JC=1, loc-cos=4, loc-JC=7, time-cos=11,
    // time-extJC=13, word-cos=16, word-extJC=18
    for (std::size_t offset : {std::size_t{0}, std::size_t{19}}) {
      CHECK(fab.values[offset + 1] >= 0.0);
      CHECK(fab.values[offset + 1] <= 1.0);
      CHECK(fab.values[offset + 4] >= 0.0);
      CHECK(fab.values[offset + 4] <= 1.0 + 1e-12);
      CHECK(fab.values[offset + 7] >= 0.0);
      CHECK(fab.values[offset + 7] <= 1.0);
      CHECK(fab.values[offset + 11] >= 0.0);
      CHECK(fab.values[offset + 11] <= 1.0 + 1e-12);
      CHECK(fab.values[offset + 13] >= 0.0);
      CHECK(fab.values[offset + 13] <= 1.0 + 1e-12);
      CHECK(fab.values[offset + 16] >= 0.0);
      CHECK(fab.values[offset + 16] <= 1.0 + 1e-12);
      CHECK(fab.values[offset + 18] >= 0.0);
      CHECK(fab.values[offset + 18] <= 1.0 + 1e-12);
    }

    // CN <= min degree
    double cn = fab.values[0];
    CHECK(cn <= static_cast<double>(
                    std::min(pair.target().degree(a), pair.target().degree(b))));
  }
}
