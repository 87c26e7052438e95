#include "coarsedim/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "coarsedim/errors.hpp"

namespace coarsedim {

namespace {

constexpr double kDistanceTolerance = 1e-12;

double relative_slack(double r) { return kDistanceTolerance * std::max(1.0, std::abs(r)); }

}  // namespace

std::optional<Rational> Rational::from_double(double value, std::int64_t max_den) {
  if (!std::isfinite(value)) return std::nullopt;
  const bool negative = value < 0;
  double x = std::abs(value);
  // Convergents h/k of the continued fraction of x.
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(x));
  std::int64_t k_prev = 0, k = 1;
  double frac = x - std::floor(x);
  for (int iter = 0; iter < 64; ++iter) {
    if (std::abs(static_cast<double>(h) / static_cast<double>(k) - x) <= relative_slack(x)) {
      Rational out{negative ? -h : h, k};
      return out;
    }
    if (frac < 1e-300) break;
    const double inv = 1.0 / frac;
    const auto a = static_cast<std::int64_t>(std::floor(inv));
    frac = inv - std::floor(inv);
    const std::int64_t h_next = a * h + h_prev;
    const std::int64_t k_next = a * k + k_prev;
    if (k_next > max_den) break;
    h_prev = h;
    k_prev = k;
    h = h_next;
    k = k_next;
  }
  return std::nullopt;
}

FiniteMetricSpace FiniteMetricSpace::from_matrix(std::vector<std::string> ids,
                                                 std::vector<std::vector<double>> dist) {
  const std::size_t n = ids.size();
  if (dist.size() != n) throw InvalidSpace("distance matrix has wrong number of rows");
  FiniteMetricSpace s;
  s.dist_.resize(n * n);
  double largest = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    if (dist[x].size() != n) throw InvalidSpace("distance matrix is not square");
    for (std::size_t y = 0; y < n; ++y) {
      const double d = dist[x][y];
      if (!std::isfinite(d) || d < 0) throw InvalidSpace("distance entries must be finite and nonnegative");
      s.dist_[x * n + y] = d;
      largest = std::max(largest, d);
    }
  }
  const double tol = kDistanceTolerance * std::max(1.0, largest);
  for (std::size_t x = 0; x < n; ++x) {
    if (s.dist_[x * n + x] != 0.0) throw InvalidSpace("nonzero diagonal at point " + ids[x]);
    for (std::size_t y = x + 1; y < n; ++y) {
      if (std::abs(s.dist_[x * n + y] - s.dist_[y * n + x]) > tol)
        throw InvalidSpace("asymmetric distance between " + ids[x] + " and " + ids[y]);
      if (s.dist_[x * n + y] <= 0.0)
        throw InvalidSpace("distinct points " + ids[x] + " and " + ids[y] + " at distance zero");
    }
  }
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        if (s.dist_[x * n + z] > s.dist_[x * n + y] + s.dist_[y * n + z] + tol)
          throw InvalidSpace("triangle inequality fails for " + ids[x] + ", " + ids[y] + ", " + ids[z]);
  s.ids_ = std::move(ids);
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.index_.emplace(s.ids_[i], i).second) throw InvalidSpace("duplicate point id " + s.ids_[i]);
  }
  return s;
}

double FiniteMetricSpace::diameter() const {
  double d = 0.0;
  for (double v : dist_) d = std::max(d, v);
  return d;
}

FiniteMetricSpace::Scale FiniteMetricSpace::scale(double r) const {
  Scale s{r, std::nullopt};
  if (exact()) s.exact = Rational::from_double(r);
  return s;
}

int FiniteMetricSpace::compare(std::size_t x, std::size_t y, const Scale& r) const {
  if (exact() && r.exact) {
    // lattice * unit.num / unit.den  vs  r.num / r.den
    const __int128 lhs = static_cast<__int128>(lattice_dist(x, y)) * unit_.num * r.exact->den;
    const __int128 rhs = static_cast<__int128>(r.exact->num) * unit_.den;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
  }
  const double d = dist(x, y);
  const double slack = relative_slack(r.value);
  if (d < r.value - slack) return -1;
  if (d > r.value + slack) return 1;
  return 0;
}

bool FiniteMetricSpace::closer(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
  if (exact()) return lattice_dist(a, b) < lattice_dist(c, d);
  return dist(a, b) < dist(c, d);
}

std::optional<std::size_t> FiniteMetricSpace::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> grid_coordinates(const GridInfo& grid, std::size_t index) {
  std::vector<int> coords(grid.sides.size());
  for (std::size_t axis = grid.sides.size(); axis-- > 0;) {
    coords[axis] = static_cast<int>(index % grid.sides[axis]);
    index /= grid.sides[axis];
  }
  return coords;
}

FiniteMetricSpace generate_space(const GridParams& params) {
  if (params.sides.empty()) throw InvalidParameter("grid needs at least one dimension");
  if (params.family == SpaceFamily::interval && params.sides.size() != 1)
    throw InvalidParameter("an interval has exactly one side length");
  for (int side : params.sides)
    if (side < 1) throw InvalidParameter("side lengths must be at least 1");
  if (!(params.spacing > 0) || !std::isfinite(params.spacing))
    throw InvalidParameter("spacing must be positive");

  GridInfo grid{params.sides, params.metric, params.spacing};
  std::size_t n = 1;
  for (int side : params.sides) n *= static_cast<std::size_t>(side);

  FiniteMetricSpace s;
  s.grid_ = grid;
  s.ids_.reserve(n);
  std::vector<std::vector<int>> coords(n);
  for (std::size_t i = 0; i < n; ++i) {
    coords[i] = grid_coordinates(grid, i);
    std::ostringstream id;
    for (std::size_t a = 0; a < coords[i].size(); ++a) id << (a ? "," : "") << coords[i][a];
    s.ids_.push_back(id.str());
    s.index_.emplace(s.ids_.back(), i);
  }
  s.dist_.resize(n * n);
  s.lattice_.resize(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      std::int64_t d = 0;
      for (std::size_t a = 0; a < coords[x].size(); ++a) {
        const std::int64_t step = std::abs(coords[x][a] - coords[y][a]);
        d = params.metric == GridMetric::l1 ? d + step : std::max(d, step);
      }
      s.lattice_[x * n + y] = d;
      s.dist_[x * n + y] = static_cast<double>(d) * params.spacing;
    }
  }
  if (auto unit = Rational::from_double(params.spacing)) {
    s.unit_ = *unit;
  } else {
    s.lattice_.clear();  // spacing has no short fraction: fall back to tolerance comparisons
  }
  return s;
}

UlfProfile ulf_profile(const FiniteMetricSpace& space, const std::vector<double>& radii) {
  UlfProfile profile;
  for (double r : radii) {
    if (r < 0) throw InvalidParameter("radii must be nonnegative");
    const auto scale = space.scale(r);
    std::size_t best = 0;
    for (std::size_t x = 0; x < space.size(); ++x) {
      std::size_t count = 0;
      for (std::size_t y = 0; y < space.size(); ++y) count += space.within(x, y, scale) ? 1 : 0;
      best = std::max(best, count);
    }
    profile.entries[r] = best;
  }
  return profile;
}

PointSet enlarge(const FiniteMetricSpace& space, const PointSet& subset, double r) {
  if (r < 0) throw InvalidParameter("enlargement radius must be nonnegative");
  PointSet out;
  if (subset.empty()) return out;
  const auto scale = space.scale(r);
  for (std::size_t x = 0; x < space.size(); ++x) {
    for (std::size_t u : subset) {
      if (space.within(x, u, scale)) {
        out.push_back(x);
        break;
      }
    }
  }
  return out;
}

SetGap set_distance(const FiniteMetricSpace& space, const PointSet& a, const PointSet& b) {
  if (a.empty() || b.empty()) throw InvalidParameter("set distance needs nonempty sets");
  SetGap best{space.dist(a.front(), b.front()), a.front(), b.front()};
  for (std::size_t x : a)
    for (std::size_t y : b)
      if (space.closer(x, y, best.from, best.to)) best = {space.dist(x, y), x, y};
  return best;
}

double set_diameter(const FiniteMetricSpace& space, const PointSet& s) {
  double d = 0.0;
  for (std::size_t x : s)
    for (std::size_t y : s) d = std::max(d, space.dist(x, y));
  return d;
}

PointSet normalized(PointSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace coarsedim
