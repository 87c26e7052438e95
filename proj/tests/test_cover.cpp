#include <limits>

#include "coarsedim/cover.hpp"
#include "coarsedim/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coarsedim;
using coarsedim::testing::grid;
using coarsedim::testing::interval;

namespace {

// Oracle: minimum same-color gap by brute force over all cross pairs.
double brute_gap(const FiniteMetricSpace& s, const std::vector<PointSet>& fam) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < fam.size(); ++a)
    for (std::size_t b = a + 1; b < fam.size(); ++b)
      for (auto x : fam[a])
        for (auto y : fam[b]) best = std::min(best, s.dist(x, y));
  return best;
}

}  // namespace

TEST_SUITE("cover") {

TEST_CASE("interval bricks alternate two colors") {
  auto s = interval(60);
  auto c = brick_cover(*s, 5, 20);
  CHECK(c.nonempty_colors() == 2);
  for (const auto& fam : c.families)
    for (const auto& set : fam) CHECK(set.size() == 20);
  auto rep = verify_cover(c, *s, 5);
  CHECK(rep.passes());
  for (std::size_t i = 0; i < c.families.size(); ++i) CHECK(rep.per_color[i].min_gap == brute_gap(*s, c.families[i]));
}

TEST_CASE("single brick") {
  auto s = interval(20);
  auto c = brick_cover(*s, 5, 20);
  CHECK(c.nonempty_colors() == 1);
  CHECK(verify_cover(c, *s, 5).passes());
}

TEST_CASE("planar bricks use at most three colors") {
  auto s = grid({12, 12}, GridMetric::linf);
  auto c = brick_cover(*s, 2, 6);
  CHECK(c.nonempty_colors() <= 3);
  auto rep = verify_cover(c, *s, 2);
  CHECK(rep.passes());
  for (std::size_t i = 0; i < c.families.size(); ++i)
    if (c.families[i].size() > 1) CHECK(rep.per_color[i].min_gap == brute_gap(*s, c.families[i]));
}

TEST_CASE("brick preconditions") {
  auto s = interval(30);
  CHECK_THROWS_AS(brick_cover(*s, 5, 10), InvalidParameter);
  auto cube = testing::grid({3, 3, 3}, GridMetric::linf);
  CHECK_THROWS_AS(brick_cover(*cube, 1, 3), InvalidParameter);
}

TEST_CASE("verify_cover verdicts") {
  auto s = interval(10);
  ColoredCover whole{{{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}}, 3, 0};
  auto rep = verify_cover(whole, *s, 3);
  CHECK(rep.passes());
  CHECK(std::isinf(rep.per_color[0].min_gap));
  ColoredCover close{{{{0, 1, 2}, {5, 6, 7, 8, 9}}, {{3, 4}}}, 5, 0};
  auto bad = verify_cover(close, *s, 5);
  CHECK(bad.covers);
  CHECK(bad.per_color[0].min_gap == 3.0);
  CHECK(!bad.passes());
  ColoredCover holes{{{{0, 1}}}, 1, 0};
  CHECK(verify_cover(holes, *s, 1).uncovered.size() == 8);
}

TEST_CASE("exact gap: separation is strict") {
  auto s = interval(10);
  ColoredCover c{{{{0, 1}, {4, 5}}, {{2, 3}, {6, 7, 8, 9}}}, 3, 0};
  // gaps are exactly 3 for both colors: not more than r = 3
  CHECK(!verify_cover(c, *s, 3).passes());
  CHECK(verify_cover(c, *s, 2).passes());
}

TEST_CASE("minimal color search") {
  auto one = interval(1);
  CHECK(min_colors_search(*one, 1, 1, 3)->d_min == 0);
  auto s = interval(12);
  auto r = min_colors_search(*s, 3, 3, 3);
  REQUIRE(r);
  CHECK(r->d_min == 1);
  CHECK(verify_cover(r->cover, *s, 3).passes());
  CHECK(r->cover.diam_bound_R <= 3);
  CHECK(min_colors_search(*s, 3, 30, 3)->d_min == 0);
  CHECK(!min_colors_search(*s, 3, 3, 1));
  auto greedy = min_colors_search(*s, 3, 3, 4, SearchMode::greedy);
  REQUIRE(greedy);
  CHECK(greedy->d_min >= 1);
  CHECK(verify_cover(greedy->cover, *s, 3).passes());
}

}
