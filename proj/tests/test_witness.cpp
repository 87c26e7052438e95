#include <cmath>

#include "coarsedim/errors.hpp"
#include "coarsedim/witness.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coarsedim;
using namespace coarsedim::testing;

namespace {

DiagDimWitness small_interval_witness(std::size_t fiber = 1) {
  auto s = interval(20);
  return build_upper_witness(s, brick_cover(*s, 1, 7), 1, fiber);
}

void check_structural(const ConditionReport& rep) {
  for (int c : {1, 3, 4, 5, 6}) {
    INFO("condition " << c << ": " << rep.row(c).note);
    CHECK(rep.passes(c));
  }
}

}  // namespace

TEST_SUITE("witness") {

TEST_CASE("partition of unity on an interval") {
  auto s = interval(60);
  auto cover = brick_cover(*s, 5, 30);
  auto pu = partition_of_unity(*s, cover, 5);
  REQUIRE(pu.h.size() == 2);
  for (std::size_t x = 0; x < s->size(); ++x) {
    double sum = 0;
    for (const auto& h : pu.h) sum += h[x] * h[x];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(pu.h[0][0] == 1.0);
  CHECK(pu.h[0][20] == 1.0);
  CHECK(pu.h[1][59] == 1.0);
  CHECK(pu.h[0][45] == 0.0);
  // across the seam both colors share the mass
  CHECK(pu.h[0][30] > 0.0);
  CHECK(pu.h[1][29] > 0.0);
}

TEST_CASE("upper witness on an interval passes the structural conditions") {
  auto s = interval(60);
  auto w = build_upper_witness(s, brick_cover(*s, 5, 30), 5, 1);
  CHECK(w.d == 1);
  auto rep = check_witness(w, 1e-9);
  check_structural(rep);
  CHECK(rep.row(2).worst < 1.0);
  const auto [err, idx] = approximation_error(w);
  CHECK(err == doctest::Approx(rep.row(2).worst));
  CHECK(idx < w.test_set.size());
}

TEST_CASE("approximation error shrinks as r grows") {
  auto s = interval(120);
  double prev = 2.0;
  for (double r : {2.0, 4.0, 8.0}) {
    UpperWitnessOptions o;
    o.test_scale = 1.0;
    auto w = build_upper_witness(s, brick_cover(*s, r, 6 * r), r, 1, o);
    const double e = approximation_error(w).first;
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("cover must be 3r separated") {
  auto s = interval(40);
  CHECK_THROWS_AS(build_upper_witness(s, brick_cover(*s, 5, 10), 5, 1), Error);
  auto ok = brick_cover(*s, 5, 20);
  CHECK_THROWS_AS(build_upper_witness(s, ok, 2.5, 1), InvalidParameter);
}

TEST_CASE("single point") {
  auto w = single_point_witness(2);
  CHECK(w.d == 0);
  auto rep = check_witness(w, 1e-12);
  CHECK(rep.all_pass());
  CHECK(rep.row(2).worst == 0.0);
  CHECK(hat_epsilon(w) == 1.0);
}

TEST_CASE("perturbed phi fails the normalizer condition") {
  auto w = small_interval_witness();
  const auto n = w.space->size();
  const BlockMatrix t = unit_shift(w.space, 1).mat + BlockMatrix::identity(n, 1);
  DiagDimWitness bad(w.space, w.fiber, w.d, w.F, w.summand_color, w.psi,
                     CpMap(w.F, w.A(), [phi = w.phi, t](const Element& a) { return Element{t * phi(a)[0] * adjoint(t)}; }),
                     w.test_set, w.epsilon, w.r);
  auto rep = check_witness(bad, 1e-9);
  CHECK(!rep.passes(5));
  CHECK(rep.passes(1));
}

TEST_CASE("twisted random witnesses stay valid") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto w = random_small_witness(seed);
    check_structural(check_witness(w, 1e-9));
  }
}

TEST_CASE("permanence") {
  auto w = small_interval_witness();
  auto sum = direct_sum(w, single_point_witness(1));
  CHECK(sum.space->size() == w.space->size() + 1);
  CHECK(sum.d == w.d);
  check_structural(check_witness(sum, 1e-9));
  CHECK(approximation_error(sum).first == doctest::Approx(approximation_error(w).first));

  auto t = tensor_matrix(w, 2);
  CHECK(t.space->size() == 2 * w.space->size());
  check_structural(check_witness(t, 1e-9));
  CHECK(approximation_error(t).first <= approximation_error(w).first + 1e-12);
  CHECK_THROWS_AS(direct_sum(w, single_point_witness(2)), IncompatibleOperands);
}

TEST_CASE("hat normalisation on a small witness") {
  auto w = small_interval_witness();
  const double eps = hat_epsilon(w);
  CHECK(eps >= 9 * std::sqrt(square_family_error(w)));
  w.epsilon = eps;
  HatOptions o;
  o.samples = 10;
  auto hp = hat_normalize(w, o);
  CHECK(hp.factor == doctest::Approx(1.0 / (1.0 + eps * eps / 81.0)));
  CHECK(hp.relation_error < 1e-9);
  CHECK(hp.approximation_error < hp.approximation_bound);
  CHECK(hp.multiplicativity_defect < hp.multiplicativity_bound);
}

}
