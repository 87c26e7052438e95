#pragma once

#include <cstddef>
#include <set>

#include "coarsedim/block_matrix.hpp"
#include "coarsedim/space.hpp"

namespace coarsedim {

// Operator on l^2(X, C^m) stored block-sparse over point pairs.
struct BandOperator {
  SpacePtr space;
  BlockMatrix mat;

  BandOperator() = default;
  BandOperator(SpacePtr s, BlockMatrix m);
  BandOperator(SpacePtr s, std::size_t fiber) : BandOperator(s, BlockMatrix(s->size(), fiber)) {}

  std::size_t fiber() const { return mat.fiber(); }
  bool is_zero() const { return mat.empty(); }
};

BandOperator identity(SpacePtr space, std::size_t fiber);
// Partial translation with identity fiber blocks at (x, y) for each pair.
BandOperator partial_translation(SpacePtr space, std::size_t fiber,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs);
// Unit shift on a generated interval: blocks (x+1, x).
BandOperator unit_shift(SpacePtr space, std::size_t fiber);

BandOperator compose(const BandOperator& s, const BandOperator& t);
BandOperator add(const BandOperator& s, const BandOperator& t);
BandOperator subtract(const BandOperator& s, const BandOperator& t);
BandOperator scale(Complex c, const BandOperator& t);
BandOperator adjoint(const BandOperator& t);

struct PropSupport {
  std::set<Key> support;
  double propagation = 0.0;
};
PropSupport prop_support(const BandOperator& t);
double propagation(const BandOperator& t);

double operator_norm(const BandOperator& t, const NormOptions& opts = {});

// 1_V T 1_U
BandOperator compress(const BandOperator& t, const PointSet& v, const PointSet& u);

struct DiagonalVerdict {
  bool diagonal;
  double off_diagonal_mass;  // largest off-diagonal block norm
};
DiagonalVerdict diagonal_membership(const BlockMatrix& t, double tol);
DiagonalVerdict diagonal_membership(const BandOperator& t, double tol);

struct NormalizerVerdict {
  bool normalizer;
  double worst;  // worst off-diagonal block norm relative to max(1, ||a e a*||)
};
// Tests a e a* and a* e a against every generator e = 1_x (x) e_{ab}. Each
// conjugate is rank one, so its blocks are outer products of fiber columns.
NormalizerVerdict normalizer_check(const BlockMatrix& a, double tol);
NormalizerVerdict normalizer_check(const BandOperator& a, double tol);

}  // namespace coarsedim
