#include "coarsedim/cpmap.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "coarsedim/band_operator.hpp"
#include "coarsedim/errors.hpp"

namespace coarsedim {

std::size_t FiniteDimAlgebra::coords() const {
  return std::accumulate(summand_sizes.begin(), summand_sizes.end(), std::size_t{0}) * fiber;
}

FiniteDimAlgebra band_algebra(const FiniteMetricSpace& space, std::size_t fiber) {
  return FiniteDimAlgebra{{space.size()}, fiber};
}

Element zero_element(const FiniteDimAlgebra& alg) {
  Element e;
  for (auto n : alg.summand_sizes) e.emplace_back(n, alg.fiber);
  return e;
}

Element unit_element(const FiniteDimAlgebra& alg) {
  Element e;
  for (auto n : alg.summand_sizes) e.push_back(BlockMatrix::identity(n, alg.fiber));
  return e;
}

Element matrix_unit(const FiniteDimAlgebra& alg, std::size_t s, std::size_t k, std::size_t l, std::size_t a,
                    std::size_t b) {
  if (s >= alg.summands() || k >= alg.summand_sizes[s] || l >= alg.summand_sizes[s] || a >= alg.fiber ||
      b >= alg.fiber)
    throw InvalidParameter("matrix unit index out of range");
  Element e = zero_element(alg);
  const auto m = static_cast<long>(alg.fiber);
  Block blk = Block::Zero(m, m);
  blk(static_cast<long>(a), static_cast<long>(b)) = 1.0;
  e[s].set(k, l, std::move(blk));
  return e;
}

Element generalized_unit(const FiniteDimAlgebra& alg, std::size_t s, std::size_t k, std::size_t l) {
  if (s >= alg.summands() || k >= alg.summand_sizes[s] || l >= alg.summand_sizes[s])
    throw InvalidParameter("matrix unit index out of range");
  Element e = zero_element(alg);
  const auto m = static_cast<long>(alg.fiber);
  e[s].set(k, l, Block::Identity(m, m));
  return e;
}

namespace {
void require_same_shape(const Element& a, const Element& b) {
  if (a.size() != b.size()) throw IncompatibleOperands("elements have different summand counts");
}
}  // namespace

Element operator+(Element a, const Element& b) {
  require_same_shape(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

Element operator-(Element a, const Element& b) {
  require_same_shape(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

Element operator*(Complex c, Element a) {
  for (auto& blk : a) blk *= c;
  return a;
}

Element operator*(const Element& a, const Element& b) {
  require_same_shape(a, b);
  Element out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(a[i] * b[i]);
  return out;
}

Element adjoint(const Element& a) {
  Element out;
  out.reserve(a.size());
  for (const auto& blk : a) out.push_back(adjoint(blk));
  return out;
}

double norm(const Element& a) {
  double n = 0.0;
  for (const auto& blk : a) n = std::max(n, operator_norm(blk));
  return n;
}

bool in_canonical_diagonal(const Element& a, double tol) {
  return std::all_of(a.begin(), a.end(), [tol](const BlockMatrix& b) { return diagonal_membership(b, tol).diagonal; });
}

// ---- CpMap

CpMap::CpMap(FiniteDimAlgebra domain, FiniteDimAlgebra codomain, Action action, std::string label)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), action_(std::move(action)), label_(std::move(label)) {
  if (!action_) throw InvalidParameter("map needs an action");
}

Element CpMap::operator()(const Element& a) const {
  if (a.size() != domain_.summands()) throw IncompatibleOperands("element does not belong to the map's domain");
  for (std::size_t s = 0; s < a.size(); ++s)
    if (a[s].nodes() != domain_.summand_sizes[s] || a[s].fiber() != domain_.fiber)
      throw IncompatibleOperands("element does not belong to the map's domain");
  return action_(a);
}

CpMap CpMap::embedding(FiniteDimAlgebra domain, FiniteDimAlgebra codomain, std::vector<EmbedTerm> terms,
                       std::string label) {
  if (domain.fiber != codomain.fiber) throw IncompatibleOperands("embedding needs equal fibers");
  for (const auto& t : terms) {
    if (t.summand >= domain.summands() || t.target >= codomain.summands())
      throw InvalidParameter("embedding term refers to a missing summand");
    if (t.window.size() != domain.summand_sizes[t.summand])
      throw InvalidParameter("embedding window size differs from its summand");
    for (auto x : t.window)
      if (x >= codomain.summand_sizes[t.target]) throw InvalidParameter("embedding window leaves the codomain");
    if (!(t.weight >= 0.0)) throw InvalidParameter("embedding weights must be nonnegative");
  }
  auto shared = std::make_shared<const std::vector<EmbedTerm>>(terms);
  auto cod = codomain;
  Action act = [shared, cod](const Element& a) {
    Element out = zero_element(cod);
    for (const auto& t : *shared) {
      if (t.weight == 0.0) continue;
      for (const auto& [k, b] : a[t.summand].blocks()) out[t.target].accumulate(t.window[k.first], t.window[k.second], t.weight * b);
    }
    for (auto& blk : out) blk.prune();
    return out;
  };
  CpMap map(std::move(domain), std::move(codomain), std::move(act), std::move(label));
  map.embeds_ = std::move(terms);
  return map;
}

CpMap CpMap::compression(FiniteDimAlgebra domain, FiniteDimAlgebra codomain, std::vector<CompressTerm> terms,
                         std::string label) {
  if (domain.fiber != codomain.fiber) throw IncompatibleOperands("compression needs equal fibers");
  struct Prepared {
    CompressTerm term;
    std::vector<long> pos;
  };
  std::vector<Prepared> prepared;
  for (const auto& t : terms) {
    if (t.source >= domain.summands() || t.summand >= codomain.summands())
      throw InvalidParameter("compression term refers to a missing summand");
    if (t.window.size() != codomain.summand_sizes[t.summand] || t.weights.size() != t.window.size())
      throw InvalidParameter("compression window size differs from its summand");
    Prepared p{t, std::vector<long>(domain.summand_sizes[t.source], -1)};
    for (std::size_t i = 0; i < t.window.size(); ++i) {
      if (t.window[i] >= domain.summand_sizes[t.source]) throw InvalidParameter("compression window leaves the domain");
      p.pos[t.window[i]] = static_cast<long>(i);
    }
    prepared.push_back(std::move(p));
  }
  auto shared = std::make_shared<const std::vector<Prepared>>(std::move(prepared));
  auto cod = codomain;
  Action act = [shared, cod](const Element& a) {
    Element out = zero_element(cod);
    for (const auto& p : *shared) {
      for (const auto& [k, b] : a[p.term.source].blocks()) {
        const long i = p.pos[k.first], j = p.pos[k.second];
        if (i < 0 || j < 0) continue;
        const double w = p.term.weights[static_cast<std::size_t>(i)] * p.term.weights[static_cast<std::size_t>(j)];
        if (w != 0.0) out[p.term.summand].accumulate(static_cast<std::size_t>(i), static_cast<std::size_t>(j), w * b);
      }
    }
    for (auto& blk : out) blk.prune();
    return out;
  };
  CpMap map(std::move(domain), std::move(codomain), std::move(act), std::move(label));
  map.compressions_ = std::move(terms);
  return map;
}

CpMap compose(const CpMap& outer, const CpMap& inner) {
  if (!(inner.codomain() == outer.domain())) throw IncompatibleOperands("maps cannot be composed");
  return CpMap(inner.domain(), outer.codomain(), [outer, inner](const Element& a) { return outer(inner(a)); },
               outer.label() + " o " + inner.label());
}

CpMap scaled(const CpMap& map, double c) {
  if (c >= 0.0 && map.structural()) {
    if (map.compressions().empty()) {
      auto terms = map.embeds();
      for (auto& t : terms) t.weight *= c;
      return CpMap::embedding(map.domain(), map.codomain(), terms, map.label());
    }
    if (map.embeds().empty()) {
      auto terms = map.compressions();
      for (auto& t : terms)
        for (auto& w : t.weights) w *= std::sqrt(c);
      return CpMap::compression(map.domain(), map.codomain(), terms, map.label());
    }
  }
  return CpMap(map.domain(), map.codomain(), [map, c](const Element& a) { return Complex(c) * map(a); }, map.label());
}

CpMap restrict_domain(const CpMap& map, const std::vector<std::size_t>& summands) {
  std::vector<bool> keep(map.domain().summands(), false);
  for (auto s : summands) {
    if (s >= keep.size()) throw InvalidParameter("restriction to a missing summand");
    keep[s] = true;
  }
  if (map.structural() && map.compressions().empty()) {
    std::vector<EmbedTerm> terms;
    for (const auto& t : map.embeds())
      if (keep[t.summand]) terms.push_back(t);
    return CpMap::embedding(map.domain(), map.codomain(), terms, map.label());
  }
  if (map.structural() && map.embeds().empty()) {
    std::vector<CompressTerm> terms;
    for (const auto& t : map.compressions())
      if (keep[t.source]) terms.push_back(t);
    return CpMap::compression(map.domain(), map.codomain(), terms, map.label());
  }
  const auto dom = map.domain();
  return CpMap(
      map.domain(), map.codomain(),
      [map, keep, dom](const Element& a) {
        Element cut = a;
        for (std::size_t s = 0; s < cut.size(); ++s)
          if (!keep[s]) cut[s] = BlockMatrix(dom.summand_sizes[s], dom.fiber);
        return map(cut);
      },
      map.label());
}

// ---- Choi

namespace {
ChoiResult merge(ChoiResult a, const ChoiResult& b) {
  if (a.windows == 0) return b;
  a.min_eigenvalue = std::min(a.min_eigenvalue, b.min_eigenvalue);
  a.completely_positive = a.completely_positive && b.completely_positive;
  a.windows += b.windows;
  a.max_dimension = std::max(a.max_dimension, b.max_dimension);
  return a;
}

constexpr std::size_t kChoiMatrixLimit = 2048;
}  // namespace

ChoiResult choi_check(const CpMap& map, const ChoiWindow& window) {
  const auto& dom = map.domain();
  if (window.summand >= dom.summands()) throw InvalidParameter("Choi window refers to a missing summand");
  const std::size_t m = dom.fiber;
  const std::size_t dim = window.nodes.size() * m;
  if (dim > kChoiLimit) throw SizeLimitExceeded("Choi truncation exceeds 512 coordinates");
  if (dim == 0) return ChoiResult{0.0, true, 1, 0};

  std::vector<Element> images(dim * dim);
  const std::size_t targets = map.codomain().summands();
  std::vector<std::set<std::size_t>> touched(targets);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) {
      Element& img = images[a * dim + b] =
          map(matrix_unit(dom, window.summand, window.nodes[a / m], window.nodes[b / m], a % m, b % m));
      for (std::size_t t = 0; t < targets; ++t)
        for (const auto& [k, blk] : img[t].blocks()) {
          touched[t].insert(k.first);
          touched[t].insert(k.second);
        }
    }

  ChoiResult result{0.0, true, 1, 0};
  const std::size_t mo = map.codomain().fiber;
  for (std::size_t t = 0; t < targets; ++t) {
    if (touched[t].empty()) continue;
    std::map<std::size_t, std::size_t> pos;
    for (auto x : touched[t]) pos.emplace(x, pos.size());
    const std::size_t out_dim = pos.size() * mo;
    const std::size_t total = dim * out_dim;
    if (total > kChoiMatrixLimit) throw SizeLimitExceeded("Choi matrix too large; use a smaller window");
    Block choi = Block::Zero(static_cast<long>(total), static_cast<long>(total));
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b)
        for (const auto& [k, blk] : images[a * dim + b][t].blocks()) {
          const auto r = static_cast<long>(a * out_dim + pos[k.first] * mo);
          const auto c = static_cast<long>(b * out_dim + pos[k.second] * mo);
          choi.block(r, c, static_cast<long>(mo), static_cast<long>(mo)) = blk;
        }
    Block sym = 0.5 * (choi + choi.adjoint());
    const double lo = Eigen::SelfAdjointEigenSolver<Block>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
    result.min_eigenvalue = std::min(result.min_eigenvalue, lo);
    result.max_dimension = std::max(result.max_dimension, total);
  }
  result.completely_positive = result.min_eigenvalue >= -kChoiTolerance;
  return result;
}

ChoiResult choi_check(const CpMap& map) {
  ChoiResult total;
  for (std::size_t s = 0; s < map.domain().summands(); ++s) {
    ChoiWindow w{s, std::vector<std::size_t>(map.domain().summand_sizes[s])};
    std::iota(w.nodes.begin(), w.nodes.end(), 0);
    total = merge(total, choi_check(map, w));
  }
  return total;
}

ChoiResult choi_sweep(const CpMap& map, std::size_t window_nodes, std::size_t step) {
  if (window_nodes == 0 || step == 0) throw InvalidParameter("window and step must be positive");
  ChoiResult total;
  for (std::size_t s = 0; s < map.domain().summands(); ++s) {
    const std::size_t n = map.domain().summand_sizes[s];
    for (std::size_t start = 0;; start += step) {
      const std::size_t lo = std::min(start, n > window_nodes ? n - window_nodes : 0);
      ChoiWindow w{s, {}};
      for (std::size_t x = lo; x < std::min(n, lo + window_nodes); ++x) w.nodes.push_back(x);
      total = merge(total, choi_check(map, w));
      if (lo + window_nodes >= n) break;
    }
  }
  return total;
}

// ---- order zero

namespace {

bool structurally_order_zero(const CpMap& map) {
  if (map.embeds().empty() || !map.compressions().empty()) return false;
  std::map<std::size_t, std::set<std::size_t>> used;
  for (const auto& t : map.embeds()) {
    if (t.weight < 0.0) return false;
    if (t.weight == 0.0) continue;
    auto& seen = used[t.target];
    for (auto x : t.window)
      if (!seen.insert(x).second) return false;
  }
  return true;
}

Block haar_unitary(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Block z(static_cast<long>(n), static_cast<long>(n));
  for (long i = 0; i < z.rows(); ++i)
    for (long j = 0; j < z.cols(); ++j) z(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Block> qr(z);
  return qr.householderQ() * Block::Identity(z.rows(), z.cols());
}

// Random positive element supported on the given nodes of summand s, built
// from the chosen columns of a unitary on those coordinates.
Element positive_from(const FiniteDimAlgebra& alg, std::size_t s, const std::vector<std::size_t>& nodes,
                      const Block& q, const std::vector<long>& cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.1, 1.0);
  const long m = static_cast<long>(alg.fiber);
  Block acc = Block::Zero(q.rows(), q.rows());
  for (long c : cols) acc += w(rng) * q.col(c) * q.col(c).adjoint();
  Element e = zero_element(alg);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = 0; j < nodes.size(); ++j)
      e[s].set(nodes[i], nodes[j], acc.block(static_cast<long>(i) * m, static_cast<long>(j) * m, m, m));
  e[s].prune();
  return e;
}

std::vector<std::size_t> random_nodes(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(n, k));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

OrderZeroVerdict order_zero_check(const CpMap& map, std::size_t trials, std::uint64_t seed, double tol) {
  if (trials == 0) throw InvalidParameter("at least one trial is required");
  if (structurally_order_zero(map)) return {true, 0.0, true, 0};

  const auto& alg = map.domain();
  std::vector<std::size_t> live;
  for (std::size_t s = 0; s < alg.summands(); ++s)
    if (alg.summand_sizes[s] > 0) live.push_back(s);
  OrderZeroVerdict v{true, 0.0, false, 0};
  if (live.empty()) return v;
  const double scale = std::max(1.0, std::pow(norm(map(unit_element(alg))), 2));

  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t s = live[rng() % live.size()];
    const bool cross = live.size() > 1 && rng() % 2 == 0;
    Element a, b;
    if (cross) {
      std::size_t s2 = live[rng() % live.size()];
      while (s2 == s) s2 = live[rng() % live.size()];
      auto n1 = random_nodes(alg.summand_sizes[s], 1 + rng() % 3, rng);
      auto n2 = random_nodes(alg.summand_sizes[s2], 1 + rng() % 3, rng);
      Block q1 = haar_unitary(n1.size() * alg.fiber, rng), q2 = haar_unitary(n2.size() * alg.fiber, rng);
      std::vector<long> c1(static_cast<std::size_t>(q1.cols())), c2(static_cast<std::size_t>(q2.cols()));
      std::iota(c1.begin(), c1.end(), 0);
      std::iota(c2.begin(), c2.end(), 0);
      a = positive_from(alg, s, n1, q1, c1, rng);
      b = positive_from(alg, s2, n2, q2, c2, rng);
    } else {
      auto nodes = random_nodes(alg.summand_sizes[s], 1 + rng() % 4, rng);
      const std::size_t dim = nodes.size() * alg.fiber;
      if (dim < 2) continue;
      Block q = haar_unitary(dim, rng);
      std::vector<long> ca, cb;
      for (long c = 0; c < static_cast<long>(dim); ++c) {
        const auto bucket = rng() % 3;
        if (bucket == 0) ca.push_back(c);
        else if (bucket == 1) cb.push_back(c);
      }
      if (ca.empty()) ca.push_back(0);
      if (cb.empty()) cb.push_back(static_cast<long>(dim) - 1);
      if (ca.back() == cb.back() && ca.size() == 1 && cb.size() == 1) cb[0] = ca[0] == 0 ? 1 : 0;
      std::erase_if(cb, [&](long c) { return std::find(ca.begin(), ca.end(), c) != ca.end(); });
      if (cb.empty()) continue;
      a = positive_from(alg, s, nodes, q, ca, rng);
      b = positive_from(alg, s, nodes, q, cb, rng);
    }
    ++v.trials;
    v.worst = std::max(v.worst, norm(map(a) * map(b)) / scale);
  }
  v.order_zero = v.worst <= tol;
  return v;
}

// ---- factorization

Element OrderZeroFactorization::pi(const Element& a) const { return h_pinv_ * map_(a); }

namespace {
std::string describe(const char* identity, double value) {
  std::ostringstream os;
  os.precision(17);
  os << identity << " violated (deviation " << value << ")";
  return os.str();
}
}  // namespace

OrderZeroFactorization factorize_order_zero(const CpMap& map, std::size_t trials, std::uint64_t seed, double tol) {
  const auto oz = order_zero_check(map, trials, seed, tol);
  if (!oz.order_zero) throw FactorizationInvalid(describe("phi(a) phi(b) = 0 for orthogonal positives", oz.worst));

  OrderZeroFactorization fac(map);
  const auto& dom = map.domain();
  fac.h_ = map(unit_element(dom));
  double top = 0.0;
  for (const auto& blk : fac.h_) top = std::max(top, operator_norm(blk));
  for (const auto& blk : fac.h_) fac.h_pinv_.push_back(positive_pseudo_inverse(blk, 1e-12, top));
  fac.support_ = fac.h_pinv_ * fac.h_;

  // Probe identities on generalized matrix units (all of them when few).
  struct Unit {
    std::size_t s, k, l;
  };
  std::vector<Unit> units;
  for (std::size_t s = 0; s < dom.summands(); ++s)
    for (std::size_t k = 0; k < dom.summand_sizes[s]; ++k)
      for (std::size_t l = 0; l < dom.summand_sizes[s]; ++l) units.push_back({s, k, l});
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  if (units.size() > 64) {
    std::shuffle(units.begin(), units.end(), rng);
    units.resize(64);
  }
  const double bound = tol * std::max(1.0, top);
  for (const auto& u : units) {
    const Element e = generalized_unit(dom, u.s, u.k, u.l);
    const Element img = map(e);
    const Element p = fac.h_pinv_ * img;
    const double r1 = norm(img - fac.h_ * p);
    fac.residual_ = std::max(fac.residual_, r1);
    if (r1 > bound) throw FactorizationInvalid(describe("phi(a) = h pi(a)", r1));
    const double r2 = norm(fac.h_ * p - p * fac.h_);
    if (r2 > bound) throw FactorizationInvalid(describe("h pi(a) = pi(a) h", r2));
    // pi(e_kl) pi(e_lj) = pi(e_kj) and pi(e_kl) pi(e_jk') = 0 for j != l.
    const std::size_t j = rng() % dom.summand_sizes[u.s];
    const Element f = generalized_unit(dom, u.s, u.l, j);
    const double r3 = norm(p * fac.pi(f) - fac.pi(generalized_unit(dom, u.s, u.k, j)));
    if (r3 > bound) throw FactorizationInvalid(describe("pi(a) pi(b) = pi(ab)", r3));
    if (dom.summand_sizes[u.s] > 1) {
      const std::size_t other = (u.l + 1) % dom.summand_sizes[u.s];
      const double r4 = norm(p * fac.pi(generalized_unit(dom, u.s, other, j)));
      if (r4 > bound) throw FactorizationInvalid(describe("pi(a) pi(b) = pi(ab)", r4));
    }
  }
  return fac;
}

CpMap functional_calculus(const RealFunction& f, const OrderZeroFactorization& fac) {
  if (std::abs(f(0.0)) > 1e-15) throw InvalidFunction("functional calculus needs f(0) = 0");
  const CpMap& map = fac.map();
  if (structurally_order_zero(map)) {
    double top = 0.0;
    for (const auto& t : map.embeds()) top = std::max(top, t.weight);
    auto terms = map.embeds();
    for (auto& t : terms) t.weight = t.weight > 1e-12 * top ? f(t.weight) : 0.0;
    if (std::all_of(terms.begin(), terms.end(), [](const EmbedTerm& t) { return t.weight >= 0.0; }))
      return CpMap::embedding(map.domain(), map.codomain(), terms, map.label());
  }
  Element coeff;
  for (std::size_t i = 0; i < fac.h().size(); ++i) coeff.push_back(hermitian_function(fac.h()[i], f) * fac.h_pinv()[i]);
  return CpMap(map.domain(), map.codomain(), [map, coeff](const Element& a) { return coeff * map(a); }, map.label());
}

// ---- bump functions

RealFunction f_delta(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidParameter("delta must lie in (0, 1/2)");
  return [delta](double t) {
    if (t <= delta) return 0.0;
    if (t <= 2 * delta) return 2 * (t - delta);
    return t;
  };
}

RealFunction g_delta(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidParameter("delta must lie in (0, 1/2)");
  return [delta](double t) {
    if (t <= delta / 2) return 0.0;
    if (t <= delta) return (t - delta / 2) / (delta / 2);
    return 1.0;
  };
}

RealFunction zeta(std::size_t d, double eps) {
  if (!(eps > 0.0)) throw InvalidParameter("epsilon must be positive");
  const double k = 2.0 * static_cast<double>(d + 1);
  const double floor_value = eps / (9.0 * std::sqrt(k));
  const double knee = eps * eps / (81.0 * k);
  return [floor_value, knee](double z) { return z <= knee ? floor_value : std::sqrt(z); };
}

RealFunction zeta_prime(std::size_t d, double eps) {
  auto z = zeta(d, eps);
  return [z](double t) { return 1.0 / z(t); };
}

RealFunction bump_function(BumpKind kind, double delta, std::size_t d, double eps) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidParameter("delta must lie in (0, 1/2)");
  switch (kind) {
    case BumpKind::f_delta: return f_delta(delta);
    case BumpKind::g_delta: return g_delta(delta);
    case BumpKind::zeta: return zeta(d, eps);
    case BumpKind::zeta_prime: return zeta_prime(d, eps);
  }
  throw InvalidParameter("unknown bump function");
}

// ---- commutation property

CopVerdict cop_check(const OrderZeroFactorization& fac, double tol) {
  if (tol < 0) throw InvalidParameter("tolerance must be nonnegative");
  const auto& dom = fac.map().domain();
  const auto& cod = fac.map().codomain();
  const long mo = static_cast<long>(cod.fiber);
  CopVerdict verdict;
  for (std::size_t s = 0; s < dom.summands(); ++s)
    for (std::size_t k = 0; k < dom.summand_sizes[s]; ++k) {
      const Element p = fac.pi(generalized_unit(dom, s, k, k));
      for (std::size_t t = 0; t < p.size(); ++t) {
        const BlockMatrix& P = p[t];
        const long dim = static_cast<long>(P.dim());
        std::set<std::size_t> nodes;
        for (const auto& [key, blk] : P.blocks()) {
          nodes.insert(key.first);
          nodes.insert(key.second);
        }
        for (std::size_t x : nodes)
          for (long al = 0; al < mo; ++al)
            for (long be = 0; be < mo; ++be) {
              // [P, e_i e_j^T] = (P e_i) e_j^T - e_i (e_j^T P)
              const long i = static_cast<long>(x) * mo + al, j = static_cast<long>(x) * mo + be;
              Block X = Block::Zero(dim, 2), Y = Block::Zero(dim, 2);
              for (const auto& [key, blk] : P.blocks()) {
                if (key.second == x) X.col(0).segment(static_cast<long>(key.first) * mo, mo) = blk.col(al);
                if (key.first == x)
                  Y.col(1).segment(static_cast<long>(key.second) * mo, mo) = -blk.row(be).adjoint();
              }
              X(i, 1) = 1.0;
              Y(j, 0) = 1.0;
              const double n = rank_two_norm(X, Y);
              if (n > verdict.worst) {
                verdict.worst = n;
                std::ostringstream os;
                os << "summand " << s << ", slot " << k << ", point " << x;
                verdict.witness = os.str();
              }
            }
      }
    }
  verdict.passes = verdict.worst <= tol;
  return verdict;
}

}  // namespace coarsedim
