#include "coarsedim/witness.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "coarsedim/errors.hpp"
#include "coarsedim/extract.hpp"

namespace coarsedim {

DiagDimWitness::DiagDimWitness(SpacePtr space_, std::size_t fiber_, std::size_t d_, FiniteDimAlgebra F_,
                               std::vector<std::size_t> summand_color_, CpMap psi_, CpMap phi_,
                               std::vector<BandOperator> test_set_, double epsilon_, double r_)
    : space(std::move(space_)),
      fiber(fiber_),
      d(d_),
      F(std::move(F_)),
      summand_color(std::move(summand_color_)),
      psi(std::move(psi_)),
      phi(std::move(phi_)),
      test_set(std::move(test_set_)),
      epsilon(epsilon_),
      r(r_) {
  if (!space) throw InvalidWitness("witness needs a space");
  if (F.fiber != fiber) throw InvalidWitness("F carries a different fiber");
  if (summand_color.size() != F.summands()) throw InvalidWitness("every summand of F needs a color");
  for (auto c : summand_color)
    if (c > d) throw InvalidWitness("summand color exceeds d");
  const auto a = A();
  if (!(psi.domain() == a) || !(psi.codomain() == F)) throw InvalidWitness("psi must map A to F (x) B");
  if (!(phi.domain() == F) || !(phi.codomain() == a)) throw InvalidWitness("phi must map F (x) B to A");
  for (const auto& t : test_set)
    if (t.mat.nodes() != space->size() || t.fiber() != fiber) throw InvalidWitness("test element outside A");
}

std::vector<std::size_t> DiagDimWitness::summands_of(std::size_t color) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < summand_color.size(); ++j)
    if (summand_color[j] == color) out.push_back(j);
  return out;
}

CpMap DiagDimWitness::phi_color(std::size_t color) const { return restrict_domain(phi, summands_of(color)); }

namespace {

std::size_t integral_scale(double r) {
  const double rounded = std::round(r);
  if (!(r >= 1.0) || std::abs(r - rounded) > 1e-12 * std::max(1.0, r))
    throw InvalidParameter("the witness scale r must be a positive integer");
  return static_cast<std::size_t>(rounded);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

PartitionOfUnity partition_of_unity(const FiniteMetricSpace& space, const ColoredCover& cover, double r) {
  const std::size_t steps = integral_scale(r);
  PartitionOfUnity pu;
  const std::size_t n = space.size();
  pu.f.assign(cover.colors(), std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < cover.colors(); ++i) {
    for (const auto& u : cover.families[i]) {
      if (u.empty()) continue;
      for (std::size_t x : enlarge(space, u, r)) {
        const SetGap gap = set_distance(space, PointSet{x}, u);
        std::size_t count = 0;
        for (std::size_t m = 1; m <= steps; ++m)
          if (space.within(x, gap.to, static_cast<double>(m))) ++count;
        pu.f[i][x] += static_cast<double>(count) / static_cast<double>(steps);
      }
    }
  }
  pu.h.assign(cover.colors(), std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x) {
    double total = 0.0;
    for (const auto& fi : pu.f) total += fi[x];
    if (total <= 0.0) throw CoverGap("the partition of unity vanishes at point " + space.ids()[x], space.ids()[x]);
    for (std::size_t i = 0; i < pu.f.size(); ++i) pu.h[i][x] = std::sqrt(pu.f[i][x] / total);
  }
  return pu;
}

DiagDimWitness build_upper_witness(SpacePtr space, const ColoredCover& cover, double r, std::size_t fiber,
                                   const UpperWitnessOptions& opts) {
  if (fiber == 0) throw InvalidParameter("fiber must be positive");
  if (cover.colors() == 0) throw InvalidParameter("cover has no colors");
  integral_scale(r);
  const CoverReport rep = verify_cover(cover, *space, 3 * r);
  for (std::size_t i = 0; i < rep.per_color.size(); ++i)
    if (!rep.per_color[i].separated)
      throw PreconditionFailed("color " + std::to_string(i) + " is not 3r-separated (gap " +
                               fmt(rep.per_color[i].min_gap) + ", 3r = " + fmt(3 * r) + ")");
  const PartitionOfUnity pu = partition_of_unity(*space, cover, r);

  FiniteDimAlgebra F{{}, fiber};
  std::vector<std::size_t> colors;
  std::vector<PointSet> windows;
  std::vector<CompressTerm> down;
  std::vector<EmbedTerm> up;
  for (std::size_t i = 0; i < cover.colors(); ++i)
    for (const auto& u : cover.families[i]) {
      if (u.empty()) continue;
      PointSet w = enlarge(*space, u, r);
      const std::size_t j = F.summand_sizes.size();
      F.summand_sizes.push_back(w.size());
      colors.push_back(i);
      std::vector<double> weights;
      for (std::size_t x : w) weights.push_back(pu.h[i][x]);
      down.push_back({0, j, w, std::move(weights)});
      up.push_back({j, 0, w, 1.0});
      windows.push_back(std::move(w));
    }
  const auto a = band_algebra(*space, fiber);
  CpMap psi = CpMap::compression(a, F, std::move(down), "psi");
  CpMap phi = CpMap::embedding(F, a, std::move(up), "phi");

  std::vector<BandOperator> tests{identity(space, fiber)};
  for (auto& t : decompose_neighbors(space, opts.test_scale.value_or(r), fiber).translations) tests.push_back(std::move(t));
  for (const auto& t : opts.extra_tests) tests.push_back(t);

  DiagDimWitness w(space, fiber, cover.colors() - 1, F, colors, std::move(psi), std::move(phi), std::move(tests),
                   opts.epsilon, r);
  w.windows = std::move(windows);
  return w;
}

DiagDimWitness single_point_witness(std::size_t fiber, double epsilon) {
  auto space = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_matrix({"0"}, {{0.0}}));
  const FiniteDimAlgebra F{{1}, fiber};
  const auto a = band_algebra(*space, fiber);
  CpMap psi = CpMap::compression(a, F, {{0, 0, {0}, {1.0}}}, "psi");
  CpMap phi = CpMap::embedding(F, a, {{0, 0, {0}, 1.0}}, "phi");
  DiagDimWitness w(space, fiber, 0, F, {0}, std::move(psi), std::move(phi), {identity(space, fiber)}, epsilon, 1.0);
  w.windows = {{0}};
  return w;
}

// ---- condition checker

bool ConditionReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ConditionRow& r) { return r.verdict; });
}

const ConditionRow& ConditionReport::row(int condition) const {
  for (const auto& r : rows)
    if (r.condition == condition) return r;
  throw InvalidParameter("no such condition in report");
}

bool ConditionReport::passes(int condition) const { return row(condition).verdict; }

std::pair<double, std::size_t> approximation_error(const DiagDimWitness& w) {
  double worst = 0.0;
  std::size_t at = 0;
  for (std::size_t t = 0; t < w.test_set.size(); ++t) {
    const Element img = w.phi(w.psi({w.test_set[t].mat}));
    const double e = operator_norm(img[0] - w.test_set[t].mat);
    if (e > worst) {
      worst = e;
      at = t;
    }
  }
  return {worst, at};
}

double square_family_error(const DiagDimWitness& w) {
  RunningMax worst;
  for (const auto& a : w.test_set) {
    worst.offer(w.phi(w.psi({a.mat}))[0] - a.mat);
    const BlockMatrix sq = a.mat * a.mat;
    worst.offer(w.phi(w.psi({sq}))[0] - sq);
  }
  return worst.value();
}

double hat_epsilon(const DiagDimWitness& w, double margin) {
  if (!(margin > 1.0)) throw InvalidParameter("margin must exceed 1");
  const double err = square_family_error(w);
  // An exact witness satisfies the premise for every epsilon.
  return err > 0.0 ? 9.0 * std::sqrt(err) * margin : 1.0;
}

namespace {

Block random_block(long m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Block b(m, m);
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < m; ++j) b(i, j) = Complex(g(rng), g(rng));
  return b;
}

std::string element_name(std::size_t s, std::size_t k, std::size_t l, const std::string& fiber_part) {
  std::ostringstream os;
  os << "e_{" << k << "," << l << "} (x) " << fiber_part << " in summand " << s;
  return os.str();
}

}  // namespace

ConditionReport check_witness(const DiagDimWitness& w, double tol, const CheckOptions& opts) {
  if (w.test_set.empty()) throw InvalidWitness("test set is empty");
  ConditionReport report;
  const auto A = w.A();
  const long m = static_cast<long>(w.fiber);
  std::mt19937_64 rng(opts.seed);

  {  // (1) psi contractive
    const double n = norm(w.psi(unit_element(A)));
    report.rows.push_back({1, n <= 1.0 + tol, n, "1_A", "||psi(1)||"});
  }
  {  // (2) approximation on the test set
    const auto [err, at] = approximation_error(w);
    report.rows.push_back({2, err < w.epsilon, err, "F[" + std::to_string(at) + "]",
                           "max ||phi psi(a) - a|| against epsilon = " + fmt(w.epsilon)});
  }
  std::vector<CpMap> colored;
  for (std::size_t i = 0; i <= w.d; ++i) colored.push_back(w.phi_color(i));
  {  // (3) phi^(i) contractive order zero
    ConditionRow row{3, true, 0.0, "", ""};
    bool all_certified = true;
    for (std::size_t i = 0; i <= w.d; ++i) {
      const auto oz = order_zero_check(colored[i], opts.order_zero_trials, opts.seed + i, tol);
      const double n = norm(colored[i](unit_element(w.F)));
      const double excess = std::max(0.0, n - 1.0);
      const double worst = std::max(oz.worst, excess);
      all_certified = all_certified && oz.certified;
      if (!oz.order_zero || n > 1.0 + tol) row.verdict = false;
      if (worst >= row.worst) {
        row.worst = worst;
        row.witness_element = "phi^(" + std::to_string(i) + ")";
      }
    }
    row.note = all_certified ? "structural certificate (disjoint windows)" : "sampling falsifier";
    report.rows.push_back(row);
  }
  {  // (4) psi(D_A) in D_F (x) B
    ConditionRow row{4, true, 0.0, "", "psi(1_x (x) e_ab) for all generators"};
    for (std::size_t x = 0; x < w.space->size(); ++x)
      for (long al = 0; al < m; ++al)
        for (long be = 0; be < m; ++be) {
          const Element img = w.psi(matrix_unit(A, 0, x, x, static_cast<std::size_t>(al), static_cast<std::size_t>(be)));
          for (const auto& blk : img) {
            const auto dv = diagonal_membership(blk, tol);
            if (!dv.diagonal) row.verdict = false;
            if (dv.off_diagonal_mass > row.worst) {
              row.worst = dv.off_diagonal_mass;
              row.witness_element = "1_" + w.space->ids()[x];
            }
          }
        }
    report.rows.push_back(row);
  }
  {  // (5) matrix units and diagonal go to normalizers
    ConditionRow row{5, true, 0.0, "", "phi(v (x) b) for matrix units v, fiber units and random b; random diagonal"};
    auto probe = [&](const Element& e, const std::string& name) {
      const Element img = w.phi(e);
      const auto nv = normalizer_check(img[0], tol);
      if (!nv.normalizer) row.verdict = false;
      if (nv.worst > row.worst) {
        row.worst = nv.worst;
        row.witness_element = name;
      }
    };
    for (std::size_t s = 0; s < w.F.summands(); ++s) {
      const std::size_t n = w.F.summand_sizes[s];
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
          for (long al = 0; al < m; ++al)
            for (long be = 0; be < m; ++be)
              probe(matrix_unit(w.F, s, k, l, static_cast<std::size_t>(al), static_cast<std::size_t>(be)),
                    element_name(s, k, l, "e_{" + std::to_string(al) + "," + std::to_string(be) + "}"));
          if (m > 1) {
            Element e = zero_element(w.F);
            e[s].set(k, l, random_block(m, rng));
            probe(e, element_name(s, k, l, "random b"));
          }
        }
      for (std::size_t t = 0; t < opts.random_probes; ++t) {
        Element e = zero_element(w.F);
        for (std::size_t k = 0; k < n; ++k) e[s].set(k, k, random_block(m, rng));
        probe(e, "random diagonal element of summand " + std::to_string(s));
      }
    }
    report.rows.push_back(row);
  }
  {  // (6) commutation property of the supporting homomorphisms
    ConditionRow row{6, true, 0.0, "", "SOT limit replaced by exact unital evaluation"};
    for (std::size_t i = 0; i <= w.d; ++i) {
      try {
        const auto fac = factorize_order_zero(colored[i], opts.order_zero_trials, opts.seed + i, std::max(tol, 1e-9));
        const auto cop = cop_check(fac, tol);
        if (!cop.passes) row.verdict = false;
        if (cop.worst >= row.worst) {
          row.worst = cop.worst;
          row.witness_element = "pi^(" + std::to_string(i) + "): " + cop.witness;
        }
      } catch (const FactorizationInvalid& e) {
        row.verdict = false;
        row.worst = std::numeric_limits<double>::infinity();
        row.witness_element = "phi^(" + std::to_string(i) + ")";
        row.note = std::string("no supporting homomorphism: ") + e.what();
      }
    }
    report.rows.push_back(row);
  }
  return report;
}

// ---- hat normalization

HatPair hat_normalize(const DiagDimWitness& w, const HatOptions& opts) {
  const auto A = w.A();
  const Element one = w.psi(unit_element(A));
  for (std::size_t s = 0; s < one.size(); ++s)
    if (min_eigenvalue(one[s]) < -1e-12) throw InvalidWitness("psi(1) has negative spectrum in summand " + std::to_string(s));

  const double eps = w.epsilon;
  const double factor = 1.0 / (1.0 + eps * eps / 81.0);
  const auto z = zeta(w.d, eps);
  const auto zp = zeta_prime(w.d, eps);
  Element p, pp;
  for (const auto& blk : one) {
    p.push_back(hermitian_function(blk, z));
    pp.push_back(hermitian_function(blk, zp));
  }
  CpMap psi_hat(A, w.F, [psi = w.psi, pp](const Element& a) { return pp * psi(a) * pp; }, "psi_hat");
  CpMap phi_hat(w.F, A, [phi = w.phi, p, factor](const Element& x) { return Complex(factor) * phi(p * x * p); },
                "phi_hat");

  HatPair hp{p, pp, psi_hat, phi_hat, factor};
  hp.approximation_bound = eps * eps / 27.0;
  hp.multiplicativity_bound = 6.0 * std::sqrt(eps * eps / 81.0);

  // F u F^2 with F^2 = {a^2 : a in F}.
  std::vector<BlockMatrix> family;
  for (const auto& a : w.test_set) family.push_back(a.mat);
  std::vector<BlockMatrix> with_squares = family;
  for (const auto& a : family) with_squares.push_back(a * a);

  std::vector<Element> hat_images;
  std::vector<Block> round_dense;
  RunningMax relation, approx, mult;
  for (const auto& a : family) {
    const Element direct = w.phi(w.psi({a}));
    const Element via = psi_hat({a});
    hat_images.push_back(via);
    const Element round = phi_hat(via);
    round_dense.push_back(round[0].to_dense());
    relation.offer(direct[0] - Complex(1.0 / factor) * round[0]);
  }
  for (const auto& a : with_squares) approx.offer(phi_hat(psi_hat({a}))[0] - a);
  hp.relation_error = relation.value();
  hp.approximation_error = approx.value();

  // Unit-ball samples in the corner cut out by the support of psi(1).
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> g;
  Element support;
  for (const auto& blk : one) support.push_back(positive_pseudo_inverse(blk) * blk);
  for (std::size_t t = 0; t < opts.samples; ++t) {
    Element b;
    for (std::size_t s = 0; s < w.F.summands(); ++s) {
      const auto dim = static_cast<long>(w.F.summand_sizes[s] * w.F.fiber);
      Block d(dim, dim);
      for (long i = 0; i < dim; ++i)
        for (long j = 0; j < dim; ++j) d(i, j) = Complex(g(rng), g(rng));
      b.push_back(support[s] * BlockMatrix::from_dense(d, w.F.fiber) * support[s]);
    }
    const double bn = norm(b);
    if (bn == 0.0) continue;
    b = Complex(1.0 / bn) * b;
    const Block phb = phi_hat(b)[0].to_dense();
    for (std::size_t i = 0; i < family.size(); ++i) {
      Block defect = phi_hat(hat_images[i] * b)[0].to_dense();
      defect.noalias() -= round_dense[i] * phb;
      mult.offer(defect);
    }
  }
  hp.multiplicativity_defect = mult.value();
  return hp;
}

// ---- permanence

namespace {

BlockMatrix extract_block(const BlockMatrix& t, std::size_t row_off, std::size_t col_off, std::size_t size) {
  BlockMatrix out(size, t.fiber());
  for (const auto& [k, b] : t.blocks())
    if (k.first >= row_off && k.first < row_off + size && k.second >= col_off && k.second < col_off + size)
      out.set(k.first - row_off, k.second - col_off, b);
  return out;
}

void place_block(BlockMatrix& into, const BlockMatrix& t, std::size_t row_off, std::size_t col_off) {
  for (const auto& [k, b] : t.blocks()) into.accumulate(k.first + row_off, k.second + col_off, b);
}

PointSet shifted(const PointSet& s, std::size_t by) {
  PointSet out;
  for (auto x : s) out.push_back(x + by);
  return out;
}

}  // namespace

DiagDimWitness direct_sum(const DiagDimWitness& w1, const DiagDimWitness& w2) {
  if (w1.fiber != w2.fiber) throw IncompatibleOperands("direct sum needs equal fibers");
  const std::size_t n1 = w1.space->size(), n2 = w2.space->size(), n = n1 + n2;
  const double far = std::max(w1.space->diameter(), w2.space->diameter()) + 1.0;
  std::vector<std::string> ids;
  for (const auto& id : w1.space->ids()) ids.push_back("a:" + id);
  for (const auto& id : w2.space->ids()) ids.push_back("b:" + id);
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, far));
  for (std::size_t x = 0; x < n; ++x) dist[x][x] = 0.0;
  for (std::size_t x = 0; x < n1; ++x)
    for (std::size_t y = 0; y < n1; ++y) dist[x][y] = w1.space->dist(x, y);
  for (std::size_t x = 0; x < n2; ++x)
    for (std::size_t y = 0; y < n2; ++y) dist[n1 + x][n1 + y] = w2.space->dist(x, y);
  auto space = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_matrix(ids, dist));

  const std::size_t fiber = w1.fiber;
  const std::size_t k1 = w1.F.summands();
  FiniteDimAlgebra F{w1.F.summand_sizes, fiber};
  F.summand_sizes.insert(F.summand_sizes.end(), w2.F.summand_sizes.begin(), w2.F.summand_sizes.end());
  std::vector<std::size_t> colors = w1.summand_color;
  colors.insert(colors.end(), w2.summand_color.begin(), w2.summand_color.end());
  const auto A = band_algebra(*space, fiber);

  const bool structural = w1.psi.embeds().empty() && w2.psi.embeds().empty() && !w1.psi.compressions().empty() &&
                          !w2.psi.compressions().empty() && w1.phi.compressions().empty() &&
                          w2.phi.compressions().empty() && !w1.phi.embeds().empty() && !w2.phi.embeds().empty();
  std::optional<CpMap> psi, phi;
  if (structural) {
    std::vector<CompressTerm> down;
    std::vector<EmbedTerm> up;
    for (auto t : w1.psi.compressions()) down.push_back(t);
    for (auto t : w2.psi.compressions()) {
      t.window = shifted(t.window, n1);
      t.summand += k1;
      down.push_back(t);
    }
    for (auto t : w1.phi.embeds()) up.push_back(t);
    for (auto t : w2.phi.embeds()) {
      t.window = shifted(t.window, n1);
      t.summand += k1;
      up.push_back(t);
    }
    psi.emplace(CpMap::compression(A, F, down, "psi"));
    phi.emplace(CpMap::embedding(F, A, up, "phi"));
  } else {
    psi.emplace(A, F,
                [p1 = w1.psi, p2 = w2.psi, n1, n2](const Element& a) {
                  Element out = p1({extract_block(a[0], 0, 0, n1)});
                  Element rest = p2({extract_block(a[0], n1, n1, n2)});
                  out.insert(out.end(), rest.begin(), rest.end());
                  return out;
                },
                "psi");
    phi.emplace(F, A,
                [f1 = w1.phi, f2 = w2.phi, k1, n1, n, fiber](const Element& x) {
                  Element x1(x.begin(), x.begin() + static_cast<long>(k1));
                  Element x2(x.begin() + static_cast<long>(k1), x.end());
                  BlockMatrix out(n, fiber);
                  place_block(out, f1(x1)[0], 0, 0);
                  place_block(out, f2(x2)[0], n1, n1);
                  out.prune();
                  return Element{out};
                },
                "phi");
  }

  std::vector<BandOperator> tests{identity(space, fiber)};
  for (const auto& t : w1.test_set) {
    BlockMatrix b(n, fiber);
    place_block(b, t.mat, 0, 0);
    tests.emplace_back(space, b);
  }
  for (const auto& t : w2.test_set) {
    BlockMatrix b(n, fiber);
    place_block(b, t.mat, n1, n1);
    tests.emplace_back(space, b);
  }
  DiagDimWitness w(space, fiber, std::max(w1.d, w2.d), F, colors, *psi, *phi, tests,
                   std::max(w1.epsilon, w2.epsilon), std::max(w1.r, w2.r));
  if (w1.windows.size() == w1.F.summands() && w2.windows.size() == w2.F.summands()) {
    w.windows = w1.windows;
    for (const auto& win : w2.windows) w.windows.push_back(shifted(win, n1));
  }
  return w;
}

DiagDimWitness tensor_matrix(const DiagDimWitness& w0, std::size_t n) {
  if (n == 0) throw InvalidParameter("matrix size must be at least 1");
  const std::size_t nx = w0.space->size();
  const double c = w0.space->diameter() + 1.0;
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < n; ++k)
    for (const auto& id : w0.space->ids()) ids.push_back(id + "#" + std::to_string(k));
  std::vector<std::vector<double>> dist(n * nx, std::vector<double>(n * nx));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < nx; ++y) dist[k * nx + x][l * nx + y] = w0.space->dist(x, y) + (k == l ? 0.0 : c);
  auto space = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_matrix(ids, dist));

  const std::size_t fiber = w0.fiber;
  FiniteDimAlgebra F{{}, fiber};
  for (auto s : w0.F.summand_sizes) F.summand_sizes.push_back(s * n);
  const auto A = band_algebra(*space, fiber);
  auto layered = [n, nx](const PointSet& win) {
    PointSet out;
    for (std::size_t k = 0; k < n; ++k)
      for (auto x : win) out.push_back(k * nx + x);
    return out;
  };

  const bool structural = w0.psi.embeds().empty() && !w0.psi.compressions().empty() &&
                          w0.phi.compressions().empty() && !w0.phi.embeds().empty();
  std::optional<CpMap> psi, phi;
  if (structural) {
    std::vector<CompressTerm> down;
    std::vector<EmbedTerm> up;
    for (auto t : w0.psi.compressions()) {
      t.window = layered(t.window);
      std::vector<double> weights;
      for (std::size_t k = 0; k < n; ++k) weights.insert(weights.end(), t.weights.begin(), t.weights.end());
      t.weights = std::move(weights);
      down.push_back(std::move(t));
    }
    for (auto t : w0.phi.embeds()) {
      t.window = layered(t.window);
      up.push_back(std::move(t));
    }
    psi.emplace(CpMap::compression(A, F, down, "psi"));
    phi.emplace(CpMap::embedding(F, A, up, "phi"));
  } else {
    const auto F0 = w0.F;
    psi.emplace(A, F,
                [p = w0.psi, n, nx, F, F0](const Element& a) {
                  Element out = zero_element(F);
                  for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t l = 0; l < n; ++l) {
                      const Element img = p({extract_block(a[0], k * nx, l * nx, nx)});
                      for (std::size_t s = 0; s < img.size(); ++s)
                        place_block(out[s], img[s], k * F0.summand_sizes[s], l * F0.summand_sizes[s]);
                    }
                  for (auto& blk : out) blk.prune();
                  return out;
                },
                "psi");
    phi.emplace(F, A,
                [f = w0.phi, n, nx, F0, fiber](const Element& x) {
                  BlockMatrix out(n * nx, fiber);
                  for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t l = 0; l < n; ++l) {
                      Element part;
                      for (std::size_t s = 0; s < x.size(); ++s) {
                        const std::size_t ns = F0.summand_sizes[s];
                        BlockMatrix b(ns, fiber);
                        for (const auto& [key, blk] : x[s].blocks())
                          if (key.first / ns == k && key.second / ns == l) b.set(key.first % ns, key.second % ns, blk);
                        part.push_back(std::move(b));
                      }
                      place_block(out, f(part)[0], k * nx, l * nx);
                    }
                  out.prune();
                  return Element{out};
                },
                "phi");
  }

  std::vector<BandOperator> tests{identity(space, fiber)};
  for (const auto& t : w0.test_set)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = 0; l < n; ++l) {
        BlockMatrix b(n * nx, fiber);
        place_block(b, t.mat, k * nx, l * nx);
        tests.emplace_back(space, b);
      }
  DiagDimWitness w(space, fiber, w0.d, F, w0.summand_color, *psi, *phi, tests, w0.epsilon, w0.r);
  if (w0.windows.size() == w0.F.summands())
    for (const auto& win : w0.windows) w.windows.push_back(layered(win));
  return w;
}

}  // namespace coarsedim
