#include "coarsedim/cover.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

#include "coarsedim/errors.hpp"

namespace coarsedim {

std::size_t ColoredCover::nonempty_colors() const {
  return static_cast<std::size_t>(std::count_if(families.begin(), families.end(), [](const auto& f) {
    return std::any_of(f.begin(), f.end(), [](const PointSet& s) { return !s.empty(); });
  }));
}

bool CoverReport::separated() const {
  return std::all_of(per_color.begin(), per_color.end(), [](const ColorReport& c) { return c.separated; });
}

CoverReport verify_cover(const ColoredCover& cover, const FiniteMetricSpace& space, double r) {
  CoverReport report;
  report.r = r;
  std::vector<bool> hit(space.size(), false);
  for (const auto& family : cover.families) {
    for (const auto& set : family) {
      for (std::size_t x : set) {
        if (x >= space.size()) throw InvalidParameter("cover references a point outside the space");
        hit[x] = true;
      }
      report.max_diameter = std::max(report.max_diameter, set_diameter(space, set));
    }
  }
  for (std::size_t x = 0; x < space.size(); ++x)
    if (!hit[x]) report.uncovered.push_back(x);
  report.covers = report.uncovered.empty();

  const auto scale = space.scale(r);
  for (const auto& family : cover.families) {
    ColorReport color{std::numeric_limits<double>::infinity(), true};
    for (std::size_t a = 0; a < family.size(); ++a) {
      for (std::size_t b = a + 1; b < family.size(); ++b) {
        if (family[a].empty() || family[b].empty()) continue;
        const SetGap gap = set_distance(space, family[a], family[b]);
        color.min_gap = std::min(color.min_gap, gap.value);
        if (space.compare(gap.from, gap.to, scale) <= 0) color.separated = false;
      }
    }
    report.per_color.push_back(color);
  }
  return report;
}

namespace {

void finish_cover(ColoredCover& cover, const FiniteMetricSpace& space) {
  for (auto& family : cover.families) {
    family.erase(std::remove_if(family.begin(), family.end(), [](const PointSet& s) { return s.empty(); }),
                 family.end());
    for (auto& set : family) cover.diam_bound_R = std::max(cover.diam_bound_R, set_diameter(space, set));
  }
  while (!cover.families.empty() && cover.families.back().empty()) cover.families.pop_back();
}

long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace

ColoredCover brick_cover(const FiniteMetricSpace& space, double r, double brick_side) {
  if (!space.grid()) throw InvalidParameter("brick_cover needs a generated grid");
  if (!(r >= 0)) throw InvalidParameter("scale must be nonnegative");
  if (!(brick_side > 2 * r)) throw InvalidParameter("brick side must exceed twice the scale");
  const GridInfo& grid = *space.grid();
  const double cells_real = brick_side / grid.spacing;
  const long cells = std::lround(cells_real);
  if (cells < 1 || std::abs(cells_real - static_cast<double>(cells)) > 1e-9 * std::max(1.0, cells_real))
    throw InvalidParameter("brick side must be a positive multiple of the grid spacing");

  ColoredCover cover;
  cover.scale_r = r;
  const std::size_t dim = grid.sides.size();
  if (dim == 1) {
    cover.families.resize(2);
    std::map<long, PointSet> bricks;
    for (std::size_t x = 0; x < space.size(); ++x) bricks[floor_div(grid_coordinates(grid, x)[0], cells)].push_back(x);
    for (auto& [b, set] : bricks) cover.families[static_cast<std::size_t>(b % 2)].push_back(std::move(set));
  } else if (dim == 2) {
    // Rows of height `cells`; odd rows shifted by half a brick. Brick b of row
    // q gets color (b + 2 (q mod 2)) mod 3, which keeps touching bricks apart.
    cover.families.resize(3);
    const long offset = cells / 2;
    std::map<std::pair<long, long>, PointSet> bricks;
    for (std::size_t x = 0; x < space.size(); ++x) {
      const auto c = grid_coordinates(grid, x);
      const long row = floor_div(c[0], cells);
      const long shift = (row % 2) * offset;
      const long b = floor_div(c[1] - shift, cells);
      bricks[{row, b}].push_back(x);
    }
    for (auto& [key, set] : bricks) {
      const long color = ((key.second % 3) + 3 + 2 * (key.first % 2)) % 3;
      cover.families[static_cast<std::size_t>(color)].push_back(std::move(set));
    }
  } else {
    throw InvalidParameter("brick_cover supports grids of dimension 1 or 2");
  }
  finish_cover(cover, space);
  return cover;
}

namespace {

using Mask = std::uint64_t;

struct SearchContext {
  std::size_t n;
  std::vector<Mask> near;  // dist <= r
  std::vector<Mask> far;   // dist > R
};

// r-chain component of `seed` inside `pool`.
Mask component(const SearchContext& ctx, Mask pool, std::size_t seed) {
  Mask comp = Mask{1} << seed;
  Mask frontier = comp;
  while (frontier) {
    const auto x = static_cast<std::size_t>(std::countr_zero(frontier));
    frontier &= frontier - 1;
    const Mask fresh = ctx.near[x] & pool & ~comp;
    comp |= fresh;
    frontier |= fresh;
  }
  return comp;
}

// Adding x keeps every r-chain component of the color within diameter R.
bool admissible(const SearchContext& ctx, Mask color, std::size_t x) {
  const Mask pool = color | (Mask{1} << x);
  const Mask comp = component(ctx, pool, x);
  for (Mask rest = comp; rest;) {
    const auto y = static_cast<std::size_t>(std::countr_zero(rest));
    rest &= rest - 1;
    if (ctx.far[y] & comp) return false;
  }
  return true;
}

bool assign(const SearchContext& ctx, std::vector<Mask>& colors, std::size_t used, std::size_t x,
            std::size_t limit) {
  if (x == ctx.n) return true;
  // New colors are opened in order, which removes color-permutation symmetry.
  for (std::size_t c = 0; c < std::min(used + 1, limit); ++c) {
    if (!admissible(ctx, colors[c], x)) continue;
    colors[c] |= Mask{1} << x;
    if (assign(ctx, colors, std::max(used, c + 1), x + 1, limit)) return true;
    colors[c] &= ~(Mask{1} << x);
  }
  return false;
}

ColoredCover masks_to_cover(const FiniteMetricSpace& space, const SearchContext& ctx,
                            const std::vector<Mask>& colors, double r) {
  ColoredCover cover;
  cover.scale_r = r;
  for (Mask color : colors) {
    if (!color) continue;
    std::vector<PointSet> family;
    Mask left = color;
    while (left) {
      const auto seed = static_cast<std::size_t>(std::countr_zero(left));
      const Mask comp = component(ctx, color, seed);
      left &= ~comp;
      PointSet set;
      for (Mask m = comp; m; m &= m - 1) set.push_back(static_cast<std::size_t>(std::countr_zero(m)));
      family.push_back(std::move(set));
    }
    cover.families.push_back(std::move(family));
  }
  finish_cover(cover, space);
  return cover;
}

// Greedy first-fit on an arbitrary number of points, using explicit point lists.
std::optional<ColorSearchResult> greedy_search(const FiniteMetricSpace& space, double r, double R,
                                               std::size_t max_colors) {
  const auto near = space.scale(r);
  const auto far = space.scale(R);
  // Each color keeps its r-chain components; a point joins the first color where
  // the merged component stays within diameter R.
  std::vector<std::vector<PointSet>> colors;
  for (std::size_t x = 0; x < space.size(); ++x) {
    bool placed = false;
    for (auto& comps : colors) {
      PointSet merged{x};
      std::vector<std::size_t> touched;
      for (std::size_t c = 0; c < comps.size(); ++c) {
        if (std::any_of(comps[c].begin(), comps[c].end(), [&](std::size_t y) { return space.within(x, y, near); })) {
          touched.push_back(c);
          merged.insert(merged.end(), comps[c].begin(), comps[c].end());
        }
      }
      bool ok = true;
      for (std::size_t a = 0; a < merged.size() && ok; ++a)
        for (std::size_t b = a + 1; b < merged.size() && ok; ++b)
          if (space.compare(merged[a], merged[b], far) > 0) ok = false;
      if (!ok) continue;
      for (auto it = touched.rbegin(); it != touched.rend(); ++it) comps.erase(comps.begin() + static_cast<long>(*it));
      comps.push_back(normalized(std::move(merged)));
      placed = true;
      break;
    }
    if (!placed) {
      if (colors.size() >= max_colors) return std::nullopt;
      colors.push_back({PointSet{x}});
    }
  }
  ColoredCover cover;
  cover.scale_r = r;
  cover.families = std::move(colors);
  finish_cover(cover, space);
  const std::size_t used = cover.families.size();
  return ColorSearchResult{used == 0 ? 0 : used - 1, std::move(cover)};
}

}  // namespace

std::optional<ColorSearchResult> min_colors_search(const FiniteMetricSpace& space, double r, double R,
                                                   std::size_t max_colors, SearchMode mode) {
  if (r < 0 || R < 0) throw InvalidParameter("scales must be nonnegative");
  if (max_colors == 0) return std::nullopt;
  if (mode == SearchMode::greedy) return greedy_search(space, r, R, max_colors);
  if (space.size() > kExactSearchLimit)
    throw SizeLimitExceeded("exact color search is limited to 64 points; use greedy mode");
  if (space.size() == 0) return ColorSearchResult{0, ColoredCover{{}, r, 0.0}};

  SearchContext ctx{space.size(), std::vector<Mask>(space.size(), 0), std::vector<Mask>(space.size(), 0)};
  const auto near = space.scale(r);
  const auto far = space.scale(R);
  for (std::size_t x = 0; x < ctx.n; ++x)
    for (std::size_t y = 0; y < ctx.n; ++y) {
      if (space.within(x, y, near)) ctx.near[x] |= Mask{1} << y;
      if (space.compare(x, y, far) > 0) ctx.far[x] |= Mask{1} << y;
    }
  for (std::size_t k = 1; k <= std::min(max_colors, ctx.n); ++k) {
    std::vector<Mask> colors(k, 0);
    if (assign(ctx, colors, 0, 0, k)) return ColorSearchResult{k - 1, masks_to_cover(space, ctx, colors, r)};
  }
  return std::nullopt;
}

}  // namespace coarsedim
