#include <random>

#include "coarsedim/errors.hpp"
#include "coarsedim/space.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coarsedim;
using coarsedim::testing::grid;
using coarsedim::testing::interval;

TEST_SUITE("space") {

TEST_CASE("interval of length 5") {
  auto s = interval(5);
  CHECK(s->size() == 5);
  CHECK(s->ids().front() == "0");
  CHECK(s->dist(0, 4) == 4.0);
  CHECK(s->exact());
}

TEST_CASE("grid metrics") {
  auto l1 = grid({2, 2}, GridMetric::l1);
  auto a = *l1->index_of("0,0"), b = *l1->index_of("1,1");
  CHECK(l1->dist(a, b) == 2.0);
  auto linf = grid({3, 3}, GridMetric::linf);
  CHECK(linf->dist(*linf->index_of("0,0"), *linf->index_of("2,2")) == 2.0);
  // brute-force table: linf distance is the largest coordinate gap
  for (std::size_t x = 0; x < linf->size(); ++x)
    for (std::size_t y = 0; y < linf->size(); ++y) {
      auto cx = grid_coordinates(*linf->grid(), x), cy = grid_coordinates(*linf->grid(), y);
      CHECK(linf->dist(x, y) == std::max(std::abs(cx[0] - cy[0]), std::abs(cx[1] - cy[1])));
    }
}

TEST_CASE("bad parameters") {
  GridParams gp;
  gp.sides = {0};
  CHECK_THROWS_AS(generate_space(gp), InvalidParameter);
  gp.sides = {3};
  gp.spacing = -1;
  CHECK_THROWS_AS(generate_space(gp), InvalidParameter);
}

TEST_CASE("from_matrix validates the axioms") {
  CHECK_THROWS_AS(FiniteMetricSpace::from_matrix({"a", "b"}, {{0, 1}, {2, 0}}), InvalidSpace);
  CHECK_THROWS_AS(FiniteMetricSpace::from_matrix({"a", "b"}, {{0, 0}, {0, 0}}), InvalidSpace);
  CHECK_THROWS_AS(FiniteMetricSpace::from_matrix({"a", "b", "c"}, {{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}), InvalidSpace);
  auto s = FiniteMetricSpace::from_matrix({"a", "b", "c"}, {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
  CHECK(!s.exact());
  CHECK(s.diameter() == 2.0);
}

TEST_CASE("ulf profile") {
  auto s = interval(5);
  auto p = ulf_profile(*s, {0.0, 1.0});
  CHECK(p.at(0.0) == 1);
  CHECK(p.at(1.0) == 3);
  auto g = grid({10, 10}, GridMetric::l1);
  CHECK(ulf_profile(*g, {1.0}).at(1.0) == 5);
  // nondecreasing
  auto q = ulf_profile(*g, {0.0, 1.0, 2.0, 3.0, 5.0});
  std::size_t prev = 0;
  for (const auto& [r, n] : q.entries) {
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("enlarge") {
  auto s = interval(10);
  CHECK(enlarge(*s, {5}, 2) == PointSet{3, 4, 5, 6, 7});
  CHECK(enlarge(*s, {}, 3).empty());
  auto g = grid({5, 5}, GridMetric::l1);
  const PointSet seeds{*g->index_of("0,0"), *g->index_of("3,0")};
  PointSet expect;
  for (std::size_t x = 0; x < g->size(); ++x)
    if (g->dist(x, seeds[0]) <= 1 || g->dist(x, seeds[1]) <= 1) expect.push_back(x);
  CHECK(enlarge(*g, seeds, 1) == expect);
}

TEST_CASE("exact comparisons at fractional spacing") {
  auto s = interval(11, 0.1);
  // 0.3 is not a double sum of 0.1s, but lattice arithmetic is exact
  CHECK(s->compare(0, 3, 0.3) == 0);
  CHECK(s->within(0, 3, 0.3));
  CHECK(!s->within(0, 4, 0.3));
  CHECK(s->closer(0, 2, 0, 3));
}

TEST_CASE("random spaces satisfy the metric axioms") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    auto g = grid({2 + static_cast<int>(rng() % 4), 2 + static_cast<int>(rng() % 4)},
                  rng() % 2 ? GridMetric::l1 : GridMetric::linf);
    for (std::size_t x = 0; x < g->size(); ++x)
      for (std::size_t y = 0; y < g->size(); ++y) {
        CHECK(g->dist(x, y) == g->dist(y, x));
        CHECK((g->dist(x, y) == 0) == (x == y));
        for (std::size_t z = 0; z < g->size(); ++z) CHECK(g->dist(x, z) <= g->dist(x, y) + g->dist(y, z));
      }
  }
}

}
