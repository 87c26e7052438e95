#include <cmath>

#include "coarsedim/cpmap.hpp"
#include "coarsedim/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coarsedim;
using namespace coarsedim::testing;

namespace {

CpMap identity_map(const FiniteDimAlgebra& alg) {
  return CpMap(alg, alg, [](const Element& a) { return a; }, "identity");
}

}  // namespace

TEST_SUITE("cpmap") {

TEST_CASE("algebra elements") {
  const FiniteDimAlgebra alg{{2, 3}, 2};
  CHECK(alg.coords() == 10);
  auto e = matrix_unit(alg, 1, 0, 2, 1, 0);
  auto f = matrix_unit(alg, 1, 2, 1, 0, 1);
  auto ef = e * f;
  CHECK(norm(ef - matrix_unit(alg, 1, 0, 1, 1, 1)) < 1e-15);
  CHECK(norm(f * e) < 1e-15);
  CHECK(norm(adjoint(e) - matrix_unit(alg, 1, 2, 0, 0, 1)) < 1e-15);
  CHECK(in_canonical_diagonal(matrix_unit(alg, 0, 1, 1, 0, 0), 0));
  CHECK(!in_canonical_diagonal(e, 0));
  CHECK(norm(unit_element(alg)) == doctest::Approx(1.0));
}

TEST_CASE("Choi: identity is completely positive, transpose is not") {
  for (std::size_t n : {1, 2, 3})
    for (std::size_t m : {1, 2}) {
      const FiniteDimAlgebra alg{{n}, m};
      CHECK(choi_check(identity_map(alg)).completely_positive);
      const auto t = choi_check(transpose_map(n, m));
      CHECK(t.completely_positive == (n * m == 1));
      if (n * m > 1) CHECK(t.min_eigenvalue == doctest::Approx(-1.0));
    }
}

TEST_CASE("Choi: compression by a contraction is completely positive") {
  const FiniteDimAlgebra alg{{4}, 1};
  const FiniteDimAlgebra small{{2}, 1};
  const auto map = CpMap::compression(alg, small, {{0, 0, {1, 3}, {0.5, 0.9}}});
  CHECK(choi_check(map).completely_positive);
  CHECK(choi_sweep(map, 2, 1).completely_positive);
}

TEST_CASE("order zero") {
  const FiniteDimAlgebra alg{{3}, 1};
  CHECK(order_zero_check(identity_map(alg)).order_zero);
  // a -> h a h with h not central fails
  const Block hd = Eigen::Vector3d(1.0, 0.5, 0.25).cast<Complex>().asDiagonal();
  const BlockMatrix h = BlockMatrix::from_dense(Block::Ones(3, 3) / 3.0 + hd, 1);
  const CpMap hah(alg, alg, [h](const Element& a) { return Element{h * a[0] * h}; }, "h a h");
  auto v = order_zero_check(hah);
  CHECK(!v.order_zero);
  CHECK(v.worst > 1e-3);
  CHECK_THROWS_AS(factorize_order_zero(hah), FactorizationInvalid);
}

TEST_CASE("factorization of a scalar multiple") {
  const FiniteDimAlgebra alg{{2}, 2};
  const CpMap half(alg, alg, [](const Element& a) { return Complex(0.5) * a; }, "half");
  auto fac = factorize_order_zero(half);
  CHECK(norm(fac.h() - Complex(0.5) * unit_element(alg)) < 1e-12);
  const auto e = matrix_unit(alg, 0, 0, 1, 1, 0);
  CHECK(norm(fac.pi(e) - e) < 1e-12);
  CHECK(fac.residual() < 1e-12);
}

TEST_CASE("random order-zero maps factor as h pi") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    auto ro = random_order_zero(seed);
    auto fac = factorize_order_zero(ro.map);
    CHECK(norm(fac.h() - ro.h) < 1e-10);
    const auto& F = ro.map.domain();
    const auto e = matrix_unit(F, 0, 0, F.summand_sizes[0] - 1, 0, F.fiber - 1);
    CHECK(norm(fac.pi(e) - ro.pi(e)) < 1e-9);
  }
}

TEST_CASE("functional calculus: z squared") {
  const auto ro = random_order_zero(21);
  const auto fac = factorize_order_zero(ro.map);
  const auto sq = functional_calculus([](double t) { return t * t; }, fac);
  const auto& F = ro.map.domain();
  for (std::size_t s = 0; s < F.summands(); ++s) {
    const auto e = generalized_unit(F, s, 0, F.summand_sizes[s] - 1);
    const Element expect = fac.h() * fac.h() * ro.pi(e);
    CHECK(norm(sq(e) - expect) < 1e-9);
  }
  CHECK_THROWS_AS(functional_calculus([](double t) { return t + 1; }, fac), InvalidFunction);
}

TEST_CASE("bump functions") {
  const double delta = 0.1;
  const auto f = f_delta(delta), g = g_delta(delta);
  CHECK(f(0) == 0.0);
  CHECK(f(delta) == 0.0);
  CHECK(f(2 * delta) == doctest::Approx(2 * delta));
  CHECK(f(0.5) == 0.5);
  CHECK(f(1.0) == 1.0);
  CHECK(g(0) == 0.0);
  CHECK(g(delta / 2) == 0.0);
  CHECK(g(delta) == doctest::Approx(1.0));
  double worst = 0;
  for (int i = 0; i <= 10000; ++i) {
    const double t = i / 10000.0;
    worst = std::max(worst, std::abs(f(t) * g(t) - f(t)));
    CHECK(f(t) >= 0.0);
    CHECK(f(t) <= 1.0);
  }
  CHECK(worst < 1e-15);

  const std::size_t d = 2;
  const double eps = 0.01;
  const auto z = zeta(d, eps), zp = zeta_prime(d, eps);
  double zz = 0;
  for (int i = 0; i <= 10000; ++i) {
    const double t = i / 10000.0;
    if (z(t) != 0.0) zz = std::max(zz, std::abs(z(t) * zp(t) - 1.0));
  }
  CHECK(zz < 1e-12);
  CHECK(bump_function(BumpKind::f_delta, delta)(0.15) == doctest::Approx(f(0.15)));
}

TEST_CASE("commutation with the diagonal") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto fac = factorize_order_zero(random_diagonal_order_zero(seed));
    auto v = cop_check(fac, 1e-9);
    CHECK(v.passes);
    CHECK(v.worst <= 1e-9);
  }
  // pi~ : M_2 -> M_2, a -> u a u* with u a Hadamard rotation
  const FiniteDimAlgebra alg{{2}, 1};
  Block u(2, 2);
  u << 1, 1, 1, -1;
  u /= std::sqrt(2.0);
  const BlockMatrix U = BlockMatrix::from_dense(u, 1);
  const CpMap rot(alg, alg, [U](const Element& a) { return Element{U * a[0] * adjoint(U)}; }, "rotation");
  auto v = cop_check(factorize_order_zero(rot), 1e-9);
  CHECK(!v.passes);
  CHECK(v.worst == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(!v.witness.empty());
}

TEST_CASE("compose and scale") {
  const FiniteDimAlgebra alg{{2}, 1};
  const auto e = matrix_unit(alg, 0, 0, 1, 0, 0);
  const auto c = compose(scaled(identity_map(alg), 0.5), transpose_map(2, 1));
  CHECK(norm(c(e) - Complex(0.5) * matrix_unit(alg, 0, 1, 0, 0, 0)) < 1e-15);
  CHECK_THROWS_AS(compose(identity_map(alg), identity_map(FiniteDimAlgebra{{3}, 1})), IncompatibleOperands);
}

}
