#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "coarsedim/space.hpp"

namespace coarsedim {

// (d+1)-colored family of point sets. families[i] lists the sets of color i.
struct ColoredCover {
  std::vector<std::vector<PointSet>> families;
  double scale_r = 0.0;
  double diam_bound_R = 0.0;  // filled by verify_cover / constructors

  std::size_t colors() const { return families.size(); }
  std::size_t nonempty_colors() const;
};

struct ColorReport {
  double min_gap;  // +inf when the color holds fewer than two sets
  bool separated;  // min_gap > r, exactly
};

struct CoverReport {
  bool covers = false;
  std::vector<std::size_t> uncovered;
  std::vector<ColorReport> per_color;
  double max_diameter = 0.0;
  double r = 0.0;

  bool separated() const;
  bool passes() const { return covers && separated(); }
};

CoverReport verify_cover(const ColoredCover& cover, const FiniteMetricSpace& space, double r);

// Brick decomposition of a generated grid of dimension 1 or 2. Intervals are
// cut into alternately colored bricks; planar grids use a running-bond
// pattern (odd rows offset by half a brick) with three colors.
ColoredCover brick_cover(const FiniteMetricSpace& space, double r, double brick_side);

enum class SearchMode { exact, greedy };

struct ColorSearchResult {
  std::size_t d_min;  // colors - 1
  ColoredCover cover;
};

inline constexpr std::size_t kExactSearchLimit = 64;

// Covers by sets of diameter <= R whose same-color members are more than r
// apart. Returns nullopt when max_colors do not suffice.
std::optional<ColorSearchResult> min_colors_search(const FiniteMetricSpace& space, double r,
                                                   double R, std::size_t max_colors,
                                                   SearchMode mode = SearchMode::exact);

}  // namespace coarsedim
