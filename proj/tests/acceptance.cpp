// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "coarsedim/band_operator.hpp"
#include "support.hpp"

using namespace coarsedim;
using namespace coarsedim::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const std::function<Outcome()>& body) {
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  if (!out.pass) ++failures;
  std::printf("criterion %d %s %s\n", id, out.pass ? "PASS" : "FAIL", out.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Element random_element(const FiniteDimAlgebra& alg, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Element out;
  for (auto n : alg.summand_sizes) {
    const auto dim = static_cast<long>(n * alg.fiber);
    Block d(dim, dim);
    for (long i = 0; i < dim; ++i)
      for (long j = 0; j < dim; ++j) d(i, j) = Complex(g(rng), g(rng));
    out.push_back(BlockMatrix::from_dense(d, alg.fiber));
  }
  const double n = norm(out);
  return n > 0 ? Complex(1.0 / n) * out : out;
}

std::size_t nonempty_colors(const ColoredCover& c) {
  std::size_t k = 0;
  for (const auto& fam : c.families) k += fam.empty() ? 0 : 1;
  return k;
}

Outcome constants() {
  const auto t = Clock::now();
  const auto c0 = threshold_setup(single_point_witness(1)).constants;
  const double elapsed = seconds_since(t);
  // A d = 1 witness: two bricks on a short interval.
  auto space = interval(20);
  const auto w1 = build_upper_witness(space, brick_cover(*space, 1, 7), 1, 1);
  const auto c1 = threshold_setup(w1).constants;
  const bool ok = c0.delta == 1.0 / 128 && c0.eta == 1.0 / 8 && c0.epsilon == std::ldexp(1.0, -23) &&
                  w1.d == 1 && c1.delta == 1.0 / 512 && c1.eta == 1.0 / 16 && elapsed < 1e-3;
  return {ok, "d=0 (" + fmt(c0.delta) + ", " + fmt(c0.eta) + ", " + fmt(c0.epsilon) + ") d=1 (" + fmt(c1.delta) +
                  ", " + fmt(c1.eta) + ") in " + fmt(elapsed * 1e3) + " ms"};
}

Outcome upper_witness() {
  const auto t = Clock::now();
  const auto w = interval_witness();
  const auto rep = check_witness(w, 1e-9);
  bool ok = true;
  for (int c : {1, 3, 4, 5, 6}) ok = ok && rep.passes(c);
  const double e2 = rep.row(2).worst;
  ok = ok && std::isfinite(e2);
  std::string detail = "conditions 1,3,4,5,6 " + std::string(ok ? "pass" : "do not all pass") + "; error(2) " + fmt(e2) +
                       "; sweep";
  double previous = std::numeric_limits<double>::infinity();
  auto space = interval(150);
  for (double r : {5.0, 10.0, 20.0, 40.0}) {
    UpperWitnessOptions opts;
    opts.test_scale = 1.0;
    const auto ws = build_upper_witness(space, brick_cover(*space, r, 6 * r), r, 2, opts);
    const double e = approximation_error(ws).first;
    detail += " " + fmt(e);
    ok = ok && std::isfinite(e) && e < previous;
    previous = e;
  }
  const double elapsed = seconds_since(t);
  ok = ok && elapsed < 60.0;
  return {ok, detail + "; " + fmt(elapsed) + " s"};
}

Outcome round_trip() {
  const auto t = Clock::now();
  const auto w = interval_witness();
  const auto td = threshold_setup(w);
  const auto pts = build_translation_system(w, td);
  const auto ex = extract_cover(pts, *w.space, 5.0);
  const double elapsed = seconds_since(t);
  const bool ok = ex.report.passes() && nonempty_colors(ex.cover) <= 2 && ex.S <= ex.s_max && ex.recursion_violations == 0 &&
                  pts.round_trip_failures == 0 && elapsed < 120.0;
  return {ok, "colors " + std::to_string(nonempty_colors(ex.cover)) + ", S " + std::to_string(ex.S) + " <= s_max " +
                  std::to_string(ex.s_max) + ", verify_cover " + (ex.report.passes() ? "ok" : "fails") + "; " +
                  fmt(elapsed) + " s"};
}

Outcome identities() {
  const auto w = interval_witness();
  double worst = build_translation_system(w, threshold_setup(w)).identities.overall();
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto ws = random_small_witness(seed);
    worst = std::max(worst, build_translation_system(ws, threshold_setup(ws)).identities.overall());
  }
  return {worst <= 1e-8, "worst deviation " + fmt(worst) + " over 26 witnesses"};
}

Outcome hat() {
  auto w = interval_witness();
  w.epsilon = hat_epsilon(w);
  const auto hp = hat_normalize(w);
  const bool ok = hp.approximation_error < hp.approximation_bound && hp.multiplicativity_defect < hp.multiplicativity_bound &&
                  hp.relation_error <= 1e-9;
  return {ok, "epsilon " + fmt(w.epsilon) + ": approximation " + fmt(hp.approximation_error) + " < " +
                  fmt(hp.approximation_bound) + ", multiplicativity " + fmt(hp.multiplicativity_defect) + " < " +
                  fmt(hp.multiplicativity_bound) + ", relation " + fmt(hp.relation_error)};
}

Outcome factorization() {
  double residual = 0.0, defect = 0.0, recovery = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto oz = random_order_zero(seed);
    const auto fac = factorize_order_zero(oz.map, 50, seed);
    std::mt19937_64 rng(seed);
    const auto& F = oz.map.domain();
    for (int k = 0; k < 5; ++k) {
      const Element a = random_element(F, rng), b = random_element(F, rng);
      residual = std::max(residual, norm(oz.map(a) - fac.h() * fac.pi(a)));
      defect = std::max(defect, norm(fac.pi(a) * fac.pi(b) - fac.pi(a * b)));
      recovery = std::max(recovery, norm(fac.pi(a) - oz.pi(a)));
    }
  }
  const bool ok = residual <= 1e-10 && defect <= 1e-10 && recovery <= 1e-10;
  return {ok, "residual " + fmt(residual) + ", multiplicativity " + fmt(defect) + ", pi recovery " + fmt(recovery) +
                  " over 100 maps"};
}

Outcome choi() {
  const auto w = interval_witness();
  const auto psi = choi_sweep(w.psi, 16, 8);
  const auto phi = choi_sweep(w.phi, 16, 8);
  bool rejected = true;
  double transpose_min = 0.0;
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t m = 1; m <= 2; ++m) {
      if (n * m < 2) continue;
      const auto t = choi_check(transpose_map(n, m));
      rejected = rejected && !t.completely_positive;
      transpose_min = std::min(transpose_min, t.min_eigenvalue);
    }
  const bool ok = psi.min_eigenvalue >= -1e-10 && phi.min_eigenvalue >= -1e-10 && psi.max_dimension <= 2048 &&
                  phi.max_dimension <= 2048 && rejected;
  return {ok, "Psi min eig " + fmt(psi.min_eigenvalue) + " (" + std::to_string(psi.windows) + " windows), Phi min eig " +
                  fmt(phi.min_eigenvalue) + " (" + std::to_string(phi.windows) + " windows), transpose " +
                  (rejected ? "rejected" : "accepted") + " (" + fmt(transpose_min) + ")"};
}

Outcome permanence() {
  const auto w = interval_witness();
  const auto sum = direct_sum(w, single_point_witness(2));
  const auto rs = check_witness(sum, 1e-9);
  const auto tensor = tensor_matrix(w, 2);
  const auto rt = check_witness(tensor, 1e-9);
  const bool ok = sum.d == 1 && rs.all_pass() && tensor.d == w.d && rt.all_pass();
  return {ok, "direct sum d=" + std::to_string(sum.d) + (rs.all_pass() ? " passes" : " fails") + ", tensor n=2 d=" +
                  std::to_string(tensor.d) + (rt.all_pass() ? " passes" : " fails")};
}

Outcome cop() {
  double worst = 0.0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto fac = factorize_order_zero(random_diagonal_order_zero(seed), 50, seed);
    const auto v = cop_check(fac, 1e-9);
    ok = ok && v.passes;
    worst = std::max(worst, v.worst);
  }
  return {ok, "worst commutator " + fmt(worst) + " over 50 maps"};
}

Outcome edges() {
  auto space = interval(5);
  const auto dec = decompose_neighbors(space, 1.0);
  const auto check = verify_decomposition(dec, *space, 1.0);
  bool ok = dec.M() == 3 && check.injective && check.exact_cover;
  std::mt19937_64 rng(2024);
  std::size_t worst_slack = std::numeric_limits<std::size_t>::max();
  for (int trial = 0; trial < 40; ++trial) {
    SpacePtr s;
    switch (trial % 3) {
      case 0:
        s = interval(3 + static_cast<int>(rng() % 30));
        break;
      case 1:
        s = grid({2 + static_cast<int>(rng() % 5), 2 + static_cast<int>(rng() % 5)},
                 rng() % 2 ? GridMetric::l1 : GridMetric::linf);
        break;
      default: {
        // Random subset of a grid, as an abstract metric space.
        auto g = grid({6, 6}, GridMetric::l1);
        std::vector<std::size_t> keep;
        for (std::size_t x = 0; x < g->size(); ++x)
          if (rng() % 2) keep.push_back(x);
        if (keep.size() < 2) keep = {0, 1};
        std::vector<std::string> ids;
        std::vector<std::vector<double>> d(keep.size(), std::vector<double>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) {
          ids.push_back(g->ids()[keep[i]]);
          for (std::size_t j = 0; j < keep.size(); ++j) d[i][j] = g->dist(keep[i], keep[j]);
        }
        s = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_matrix(ids, d));
      }
    }
    const double r = static_cast<double>(rng() % 4);
    const auto dr = decompose_neighbors(s, r);
    const auto cr = verify_decomposition(dr, *s, r);
    ok = ok && cr.injective && cr.exact_cover && cr.within_bound;
    worst_slack = std::min(worst_slack, cr.bound - dr.M());
  }
  return {ok, "interval {0..4}, r=1: M=" + std::to_string(dec.M()) + "; 40 random instances within 2N-1 (min slack " +
                  std::to_string(worst_slack) + ")"};
}

}  // namespace

int main() {
  run(1, constants);
  run(2, upper_witness);
  run(3, round_trip);
  run(4, identities);
  run(5, hat);
  run(6, factorization);
  run(7, choi);
  run(8, permanence);
  run(9, cop);
  run(10, edges);
  return failures == 0 ? 0 : 1;
}
