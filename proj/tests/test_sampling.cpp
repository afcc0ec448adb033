#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tblockgs/sampling.hpp"

#include <array>
#include <cmath>
#include <set>
#include <vector>

using namespace tblockgs;

TEST_CASE("partition into equal blocks") {
  const BlockSet t = BlockSet::partition(10, 5);
  REQUIRE(t.size() == 2);
  CHECK(t.block(0) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(t.block(1) == std::vector<int>{5, 6, 7, 8, 9});
  CHECK(t.weights()[0] == doctest::Approx(0.5));
  CHECK(t.weights()[1] == doctest::Approx(0.5));
}

TEST_CASE("partition with a single full block") {
  const BlockSet t = BlockSet::partition(10, 10);
  REQUIRE(t.size() == 1);
  CHECK(t.block(0).size() == 10);
  CHECK(t.weights()[0] == doctest::Approx(1.0));
}

TEST_CASE("partition with a remainder keeps a short tail block") {
  const BlockSet t = BlockSet::partition(7, 3);
  REQUIRE(t.size() == 3);
  CHECK(t.block(0) == std::vector<int>{0, 1, 2});
  CHECK(t.block(1) == std::vector<int>{3, 4, 5});
  CHECK(t.block(2) == std::vector<int>{6});
}

TEST_CASE("partition rejects out-of-range block sizes") {
  CHECK_THROWS(BlockSet::partition(10, 0));
  CHECK_THROWS(BlockSet::partition(10, 11));
  CHECK_THROWS(BlockSet::partition(10, -2));
}

TEST_CASE("partition covers every index exactly once") {
  for (int n : {5, 8, 12}) {
    for (int s : {1, 2, 3, n}) {
      const BlockSet t = BlockSet::partition(n, s);
      std::vector<int> count(n, 0);
      for (std::size_t i = 0; i < t.size(); ++i)
        for (int j : t.block(i)) ++count[j];
      for (int j = 0; j < n; ++j) CHECK(count[j] == 1);
      CHECK(t.c_min() == 1);
    }
  }
}

TEST_CASE("c_min counts the least-covered index") {
  const BlockSet two(3, {{0, 1}, {1, 2}}, {0.5, 0.5});
  CHECK(two.c_min() == 1);  // indices 0 and 2 appear once

  const BlockSet pairs(3, {{0, 1}, {0, 2}, {1, 2}}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(pairs.c_min() == 2);  // each index is in two pairs
}

TEST_CASE("constructor validates blocks and weights") {
  // empty block
  CHECK_THROWS(BlockSet(3, {{0, 1}, {}}, {0.5, 0.5}));
  // duplicate / non-increasing indices
  CHECK_THROWS(BlockSet(3, {{0, 0}, {1, 2}}, {0.5, 0.5}));
  CHECK_THROWS(BlockSet(3, {{1, 0}, {2}}, {0.5, 0.5}));
  // out of range
  CHECK_THROWS(BlockSet(3, {{0, 3}}, {1.0}));
  // uncovered index => vacuous rates, rejected
  CHECK_THROWS(BlockSet(3, {{0, 1}}, {1.0}));
  // weight count mismatch and negative weights
  CHECK_THROWS(BlockSet(3, {{0, 1}, {2}}, {1.0}));
  CHECK_THROWS(BlockSet(3, {{0, 1}, {2}}, {1.5, -0.5}));
}

TEST_CASE("weights are normalised to sum one") {
  const BlockSet t(4, {{0, 1}, {2, 3}}, {2.0, 6.0});
  CHECK(t.weights()[0] == doctest::Approx(0.25));
  CHECK(t.weights()[1] == doctest::Approx(0.75));
  CHECK_FALSE(t.uniform_weights());
  CHECK(BlockSet::partition(4, 2).uniform_weights());
}

TEST_CASE("sampling a single block always returns index zero") {
  const BlockSet t = BlockSet::partition(6, 6);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) CHECK(t.sample(rng) == 0);
}

TEST_CASE("sampling never selects a zero-weight block") {
  const BlockSet t(4, {{0, 1, 2, 3}, {0, 1, 2, 3}}, {1.0, 0.0});
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) CHECK(t.sample(rng) == 0);
}

TEST_CASE("two uniform blocks sample near half-half") {
  const BlockSet t = BlockSet::partition(10, 5);
  Rng rng(42);
  int first = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i)
    if (t.sample(rng) == 0) ++first;
  const double freq = static_cast<double>(first) / draws;
  CHECK(freq >= 0.47);
  CHECK(freq <= 0.53);
}

TEST_CASE("empirical frequencies match the weights (chi-square)") {
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  const BlockSet t(8, {{0, 1}, {2, 3}, {4, 5}, {6, 7}}, w);
  Rng rng(2024);
  const int draws = 10000;
  std::array<int, 4> count{};
  for (int i = 0; i < draws; ++i) ++count[t.sample(rng)];
  double chi_sq = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double expect = w[j] * draws;
    chi_sq += (count[j] - expect) * (count[j] - expect) / expect;
  }
  // chi-square with 3 degrees of freedom, p = 0.001 critical value
  CHECK(chi_sq < 16.27);
}

TEST_CASE("identical seeds give identical draw sequences") {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.normal() == b.normal());
  }
  Rng c(100);
  bool all_equal = true;
  Rng d(99);
  for (int i = 0; i < 20; ++i) all_equal = all_equal && (c.uniform() == d.uniform());
  CHECK_FALSE(all_equal);
}

TEST_CASE("sliding windows wrap and raise the cover count") {
  const BlockSet t = BlockSet::sliding(6, 3, 2);
  REQUIRE(t.size() == 3);  // starts 0, 2, 4
  CHECK(t.block(0) == std::vector<int>{0, 1, 2});
  CHECK(t.block(1) == std::vector<int>{2, 3, 4});
  // window starting at 4 wraps to {4, 5, 0}, stored sorted
  CHECK(t.block(2) == std::vector<int>{0, 4, 5});
  CHECK(t.uniform_weights());

  // stride < size covers some indices twice; here every index is in >= 1
  // window and the wrap makes 0 and 2 and 4 appear twice
  CHECK(t.c_min() == 1);

  const BlockSet dense = BlockSet::sliding(6, 3, 1);
  CHECK(dense.size() == 6);
  CHECK(dense.c_min() == 3);  // every index in exactly three windows
}
