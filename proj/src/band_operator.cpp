#include "coarsedim/band_operator.hpp"

#include <algorithm>
#include <cmath>

#include "coarsedim/errors.hpp"

namespace coarsedim {

BandOperator::BandOperator(SpacePtr s, BlockMatrix m) : space(std::move(s)), mat(std::move(m)) {
  if (!space) throw InvalidParameter("band operator needs a space");
  if (mat.nodes() != space->size()) throw IncompatibleOperands("operator size does not match the space");
}

BandOperator identity(SpacePtr space, std::size_t fiber) {
  const std::size_t n = space->size();
  return BandOperator(std::move(space), BlockMatrix::identity(n, fiber));
}

BandOperator partial_translation(SpacePtr space, std::size_t fiber,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  BandOperator t(std::move(space), fiber);
  const auto f = static_cast<long>(fiber);
  for (const auto& [x, y] : pairs) t.mat.set(x, y, Block::Identity(f, f));
  return t;
}

BandOperator unit_shift(SpacePtr space, std::size_t fiber) {
  if (!space->grid() || space->grid()->sides.size() != 1) throw InvalidParameter("unit shift needs an interval");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t x = 0; x + 1 < space->size(); ++x) pairs.emplace_back(x + 1, x);
  return partial_translation(std::move(space), fiber, pairs);
}

namespace {
void require_compatible(const BandOperator& s, const BandOperator& t) {
  if (s.space != t.space && (s.space->size() != t.space->size() || s.space->ids() != t.space->ids()))
    throw IncompatibleOperands("operators live on different spaces");
  if (s.fiber() != t.fiber()) throw IncompatibleOperands("operators have different fibers");
}
}  // namespace

BandOperator compose(const BandOperator& s, const BandOperator& t) {
  require_compatible(s, t);
  return BandOperator(s.space, s.mat * t.mat);
}

BandOperator add(const BandOperator& s, const BandOperator& t) {
  require_compatible(s, t);
  return BandOperator(s.space, s.mat + t.mat);
}

BandOperator subtract(const BandOperator& s, const BandOperator& t) {
  require_compatible(s, t);
  return BandOperator(s.space, s.mat - t.mat);
}

BandOperator scale(Complex c, const BandOperator& t) { return BandOperator(t.space, c * t.mat); }

BandOperator adjoint(const BandOperator& t) { return BandOperator(t.space, adjoint(t.mat)); }

PropSupport prop_support(const BandOperator& t) {
  PropSupport out;
  for (const auto& [k, b] : t.mat.blocks()) {
    out.support.insert(k);
    out.propagation = std::max(out.propagation, t.space->dist(k.first, k.second));
  }
  return out;
}

double propagation(const BandOperator& t) {
  double p = 0.0;
  for (const auto& [k, b] : t.mat.blocks()) p = std::max(p, t.space->dist(k.first, k.second));
  return p;
}

double operator_norm(const BandOperator& t, const NormOptions& opts) { return operator_norm(t.mat, opts); }

BandOperator compress(const BandOperator& t, const PointSet& v, const PointSet& u) {
  return BandOperator(t.space, compress(t.mat, v, u));
}

DiagonalVerdict diagonal_membership(const BlockMatrix& t, double tol) {
  if (tol < 0) throw InvalidParameter("tolerance must be nonnegative");
  double off = 0.0;
  for (const auto& [k, b] : t.blocks())
    if (k.first != k.second) off = std::max(off, b.operatorNorm());
  if (off == 0.0) return {true, 0.0};
  return {off <= tol * std::max(1.0, operator_norm(t)), off};
}

DiagonalVerdict diagonal_membership(const BandOperator& t, double tol) { return diagonal_membership(t.mat, tol); }

namespace {

// Worst off-diagonal block of u v^* relative to max(1, |u||v|), where u and v
// are given blockwise. The largest off-diagonal product |u_y||v_z| (y != z)
// comes from the top two entries of each side.
double rank_one_off_diagonal(const std::map<std::size_t, double>& u, const std::map<std::size_t, double>& v) {
  auto top2 = [](const std::map<std::size_t, double>& w) {
    std::pair<std::size_t, double> a{0, -1.0}, b{0, -1.0};
    double total = 0.0;
    for (const auto& [i, n] : w) {
      total += n * n;
      if (n > a.second) {
        b = a;
        a = {i, n};
      } else if (n > b.second) {
        b = {i, n};
      }
    }
    return std::tuple{a, b, std::sqrt(total)};
  };
  const auto [ua, ub, un] = top2(u);
  const auto [va, vb, vn] = top2(v);
  double off = 0.0;
  if (ua.second > 0 && va.second > 0) {
    if (ua.first != va.first) {
      off = ua.second * va.second;
    } else {
      if (vb.second > 0) off = std::max(off, ua.second * vb.second);
      if (ub.second > 0) off = std::max(off, ub.second * va.second);
    }
  }
  return off / std::max(1.0, un * vn);
}

}  // namespace

NormalizerVerdict normalizer_check(const BlockMatrix& a, double tol) {
  if (tol < 0) throw InvalidParameter("tolerance must be nonnegative");
  const long m = static_cast<long>(a.fiber());
  // Column view (for a e a^*) and row view (for a^* e a) grouped by the generator's point.
  std::map<std::size_t, std::vector<std::pair<std::size_t, const Block*>>> by_col, by_row;
  for (const auto& [k, b] : a.blocks()) {
    by_col[k.second].emplace_back(k.first, &b);
    by_row[k.first].emplace_back(k.second, &b);
  }
  double worst = 0.0;
  for (long al = 0; al < m; ++al)
    for (long be = 0; be < m; ++be) {
      // a (1_x (x) e_{al,be}) a^*: blocks (y, z) = A_{yx}[:, al] A_{zx}[:, be]^*
      for (const auto& [x, col] : by_col) {
        std::map<std::size_t, double> u, v;
        for (const auto& [y, b] : col) {
          u[y] = b->col(al).norm();
          v[y] = b->col(be).norm();
        }
        worst = std::max(worst, rank_one_off_diagonal(u, v));
      }
      // a^* (1_x (x) e_{al,be}) a: blocks (y, z) = A_{xy}[al, :]^* A_{xz}[be, :]
      for (const auto& [x, row] : by_row) {
        std::map<std::size_t, double> u, v;
        for (const auto& [y, b] : row) {
          u[y] = b->row(al).norm();
          v[y] = b->row(be).norm();
        }
        worst = std::max(worst, rank_one_off_diagonal(u, v));
      }
    }
  return {worst <= tol, worst};
}

NormalizerVerdict normalizer_check(const BandOperator& a, double tol) { return normalizer_check(a.mat, tol); }

}  // namespace coarsedim
