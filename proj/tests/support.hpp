#pragma once

// Fixtures shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <memory>
#include <random>

#include "coarsedim/cover.hpp"
#include "coarsedim/cpmap.hpp"
#include "coarsedim/extract.hpp"
#include "coarsedim/witness.hpp"

namespace coarsedim::testing {

inline SpacePtr interval(int length, double spacing = 1.0) {
  GridParams gp;
  gp.family = SpaceFamily::interval;
  gp.sides = {length};
  gp.spacing = spacing;
  return std::make_shared<const FiniteMetricSpace>(generate_space(gp));
}

inline SpacePtr grid(std::vector<int> sides, GridMetric metric) {
  GridParams gp;
  gp.family = SpaceFamily::grid;
  gp.sides = std::move(sides);
  gp.metric = metric;
  return std::make_shared<const FiniteMetricSpace>(generate_space(gp));
}

// Interval of length 150, m = 2, bricks of side 30 at r = 5.
inline DiagDimWitness interval_witness(double r = 5.0, double brick_side = 30.0, std::size_t fiber = 2,
                                       const UpperWitnessOptions& opts = {}) {
  auto space = interval(150);
  return build_upper_witness(space, brick_cover(*space, r, brick_side), r, fiber, opts);
}

inline Block haar_unitary(long n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Block z(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) z(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Block> qr(z);
  Block q = qr.householderQ();
  const Block r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (long i = 0; i < n; ++i) q.col(i) *= std::polar(1.0, std::arg(r(i, i)));
  return q;
}

// Block-diagonal unitary over `nodes` nodes of fiber m.
inline BlockMatrix diagonal_unitary(std::size_t nodes, std::size_t m, std::mt19937_64& rng) {
  BlockMatrix u(nodes, m);
  for (std::size_t x = 0; x < nodes; ++x) u.set(x, x, haar_unitary(static_cast<long>(m), rng));
  return u;
}

// Upper-bound witness on a space of at most 20 points, twisted so the maps are
// no longer plain inclusions: phi' = c U phi(V . V*) U*, psi' = V* psi(U* . U) V
// with U in D_A, V in D_F (x) B, and c in (1/2, 1].
inline DiagDimWitness random_small_witness(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 2);
  const std::size_t m = 1 + static_cast<std::size_t>(rng() % 2);
  SpacePtr space;
  double r = 1.0, side = 7.0;
  switch (pick(rng)) {
    case 0:
      space = interval(12 + static_cast<int>(rng() % 9));
      break;
    case 1:
      space = interval(16 + static_cast<int>(rng() % 5));
      r = 2.0;
      side = 13.0;
      break;
    default:
      // Too small for more than one brick; still exercises the 2D metric.
      space = grid({4, 5}, rng() % 2 ? GridMetric::l1 : GridMetric::linf);
      break;
  }
  const auto base = build_upper_witness(space, brick_cover(*space, r, side), r, m);
  const BlockMatrix U = diagonal_unitary(space->size(), m, rng);
  Element V;
  for (auto n : base.F.summand_sizes) V.push_back(diagonal_unitary(n, m, rng));
  std::uniform_real_distribution<double> scale(0.5, 1.0);
  std::vector<double> c(base.d + 1);
  for (auto& v : c) v = 1.0 - scale(rng) + 0.5;  // (0.5, 1]

  const auto colors = base.summand_color;
  const CpMap phi(base.F, base.A(),
                  [phi = base.phi, U, V, colors, c](const Element& x) {
                    Element y = V * x * adjoint(V);
                    for (std::size_t s = 0; s < y.size(); ++s) y[s] *= Complex(c[colors[s]]);
                    const Element img = phi(y);
                    return Element{U * img[0] * adjoint(U)};
                  },
                  "twisted phi");
  const CpMap psi(base.A(), base.F,
                  [psi = base.psi, U, V](const Element& a) {
                    return adjoint(V) * psi({adjoint(U) * a[0] * U}) * V;
                  },
                  "twisted psi");
  DiagDimWitness w(space, m, base.d, base.F, base.summand_color, psi, phi, base.test_set, base.epsilon, r);
  w.windows = base.windows;
  return w;
}

// Random order-zero map a -> h pi(a) from a random F into an |X| = N band
// algebra. pi(a) = sum_s W_s (a_s (x) 1_mu) W_s* for isometries W_s with
// orthogonal ranges and h = sum_s W_s (1 (x) K_s) W_s* with K_s > 0.
struct RandomOrderZero {
  CpMap map;
  std::function<Element(const Element&)> pi;
  Element h;
};

inline RandomOrderZero random_order_zero(std::uint64_t seed, std::size_t fiber_dim = 0) {
  std::mt19937_64 rng(seed);
  const std::size_t m_dom = fiber_dim ? fiber_dim : 1 + rng() % 2;
  const std::size_t m_cod = fiber_dim ? fiber_dim : 1 + rng() % 2;
  FiniteDimAlgebra F;
  F.fiber = m_dom;
  const std::size_t k = 1 + rng() % 3;
  std::vector<long> mult;
  std::size_t used = 0;
  for (std::size_t s = 0; s < k; ++s) {
    F.summand_sizes.push_back(1 + rng() % 3);
    mult.push_back(1 + static_cast<long>(rng() % 2));
    used += F.summand_sizes.back() * m_dom * static_cast<std::size_t>(mult.back());
  }
  const std::size_t slack = rng() % 3;
  const std::size_t nodes = (used + slack * m_cod + m_cod - 1) / m_cod;
  const FiniteDimAlgebra A{{nodes}, m_cod};
  const long n = static_cast<long>(nodes * m_cod);
  const Block Q = haar_unitary(n, rng);

  std::vector<Block> W, K;
  std::uniform_real_distribution<double> spec(0.05, 1.0);
  long col = 0;
  for (std::size_t s = 0; s < k; ++s) {
    const long dim = static_cast<long>(F.summand_sizes[s] * m_dom);
    W.push_back(Q.middleCols(col, dim * mult[s]));
    col += dim * mult[s];
    const Block u = haar_unitary(mult[s], rng);
    Eigen::VectorXd lam(mult[s]);
    for (long i = 0; i < mult[s]; ++i) lam(i) = spec(rng);
    K.push_back(u * lam.cast<Complex>().asDiagonal() * u.adjoint());
  }
  auto amplify = [W, m_cod, mult](const Element& a, const std::vector<Block>& coeff) {
    Block out = Block::Zero(W[0].rows(), W[0].rows());
    for (std::size_t s = 0; s < a.size(); ++s) {
      const Block x = a[s].to_dense();
      Block big = Block::Zero(x.rows() * mult[s], x.cols() * mult[s]);
      for (long i = 0; i < x.rows(); ++i)
        for (long j = 0; j < x.cols(); ++j) big.block(i * mult[s], j * mult[s], mult[s], mult[s]) = x(i, j) * coeff[s];
      out += W[s] * big * W[s].adjoint();
    }
    return Element{BlockMatrix::from_dense(out, m_cod)};
  };
  std::vector<Block> ones;
  for (long mu : mult) ones.push_back(Block::Identity(mu, mu));
  RandomOrderZero out{CpMap(F, A, [amplify, K](const Element& a) { return amplify(a, K); }, "h pi"),
                      [amplify, ones](const Element& a) { return amplify(a, ones); },
                      amplify(unit_element(F), K)};
  return out;
}

// Order-zero map with fiber 1 whose images of diagonal units are diagonal:
// disjoint copies of each summand placed on nodes, weighted by a constant.
inline CpMap random_diagonal_order_zero(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FiniteDimAlgebra F;
  F.fiber = 1;
  const std::size_t k = 1 + rng() % 3;
  std::vector<EmbedTerm> terms;
  std::size_t nodes = 0;
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  for (std::size_t s = 0; s < k; ++s) {
    F.summand_sizes.push_back(1 + rng() % 4);
    const std::size_t copies = 1 + rng() % 2;
    for (std::size_t c = 0; c < copies; ++c) {
      EmbedTerm t;
      t.summand = s;
      t.weight = weight(rng);
      for (std::size_t i = 0; i < F.summand_sizes[s]; ++i) t.window.push_back(nodes++);
      terms.push_back(std::move(t));
    }
  }
  nodes += rng() % 3;
  // Scatter the windows over the nodes so they are not consecutive.
  std::vector<std::size_t> relabel(nodes);
  std::iota(relabel.begin(), relabel.end(), 0);
  std::shuffle(relabel.begin(), relabel.end(), rng);
  for (auto& t : terms) {
    for (auto& x : t.window) x = relabel[x];
  }
  const FiniteDimAlgebra A{{nodes}, 1};
  const CpMap structural = CpMap::embedding(F, A, terms, "diagonal order zero");
  // Hide the structure so the checks go through the sampled path.
  return CpMap(F, A, [structural](const Element& a) { return structural(a); }, "diagonal order zero");
}

// x -> x^T on one summand: positive, not completely positive.
inline CpMap transpose_map(std::size_t n, std::size_t m) {
  const FiniteDimAlgebra alg{{n}, m};
  return CpMap(alg, alg,
               [m](const Element& a) {
                 return Element{BlockMatrix::from_dense(a[0].to_dense().transpose(), m)};
               },
               "transpose");
}

}  // namespace coarsedim::testing
