#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace coarsedim {

// Exact length value p/q used when a space is generated from an integer
// lattice. Denominators stay small (grid spacings and user scales).
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  // Continued-fraction recovery of a short fraction; nullopt when the value
  // is not within 1e-12 of any fraction with denominator <= max_den.
  static std::optional<Rational> from_double(double value,
                                             std::int64_t max_den = 1'000'000);
  double to_double() const { return static_cast<double>(num) / den; }
};

enum class GridMetric { l1, linf };
enum class SpaceFamily { interval, grid };

struct GridInfo {
  std::vector<int> sides;  // lattice points per axis
  GridMetric metric = GridMetric::linf;
  double spacing = 1.0;
};

struct GridParams {
  SpaceFamily family = SpaceFamily::interval;
  std::vector<int> sides;
  GridMetric metric = GridMetric::linf;
  double spacing = 1.0;
};

// Finite metric space with a dense distance table. Immutable once built.
class FiniteMetricSpace {
 public:
  // Validates symmetry, zero diagonal, positivity off the diagonal and the
  // triangle inequality (tolerance 1e-12 relative to the largest distance).
  static FiniteMetricSpace from_matrix(std::vector<std::string> ids,
                                       std::vector<std::vector<double>> dist);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  double dist(std::size_t x, std::size_t y) const { return dist_[x * size() + y]; }
  double diameter() const;

  bool exact() const { return !lattice_.empty(); }
  const std::optional<GridInfo>& grid() const { return grid_; }
  // Lattice distance in units of spacing; valid only when exact().
  std::int64_t lattice_dist(std::size_t x, std::size_t y) const {
    return lattice_[x * size() + y];
  }
  const Rational& unit() const { return unit_; }

  // A length prepared for repeated comparisons against distances.
  struct Scale {
    double value;
    std::optional<Rational> exact;
  };
  Scale scale(double r) const;

  // Sign of dist(x, y) - r. Exact rational arithmetic on lattice spaces,
  // tolerance 1e-12 otherwise.
  int compare(std::size_t x, std::size_t y, const Scale& r) const;
  int compare(std::size_t x, std::size_t y, double r) const { return compare(x, y, scale(r)); }
  bool within(std::size_t x, std::size_t y, const Scale& r) const { return compare(x, y, r) <= 0; }
  bool within(std::size_t x, std::size_t y, double r) const { return compare(x, y, r) <= 0; }
  // true iff dist(a, b) < dist(c, d), exactly on lattice spaces.
  bool closer(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const;

  std::optional<std::size_t> index_of(const std::string& id) const;

 private:
  friend FiniteMetricSpace generate_space(const GridParams&);
  FiniteMetricSpace() = default;

  std::vector<std::string> ids_;
  std::vector<double> dist_;
  std::vector<std::int64_t> lattice_;
  Rational unit_;
  std::optional<GridInfo> grid_;
  std::map<std::string, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;
using PointSet = std::vector<std::size_t>;  // sorted, unique

FiniteMetricSpace generate_space(const GridParams& params);

// Lattice coordinates of a point of a generated grid (row-major, last axis fastest).
std::vector<int> grid_coordinates(const GridInfo& grid, std::size_t index);

struct UlfProfile {
  std::map<double, std::size_t> entries;  // radius -> max ball cardinality
  std::size_t at(double r) const { return entries.at(r); }
};

UlfProfile ulf_profile(const FiniteMetricSpace& space, const std::vector<double>& radii);

// {x : dist(x, subset) <= r}
PointSet enlarge(const FiniteMetricSpace& space, const PointSet& subset, double r);

// Smallest distance between two nonempty point sets, and its witnesses.
struct SetGap {
  double value;
  std::size_t from;
  std::size_t to;
};
SetGap set_distance(const FiniteMetricSpace& space, const PointSet& a, const PointSet& b);
double set_diameter(const FiniteMetricSpace& space, const PointSet& s);

PointSet normalized(PointSet s);

}  // namespace coarsedim
