#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coarsedim/block_matrix.hpp"
#include "coarsedim/space.hpp"

namespace coarsedim {

// M_{n_1}(M_m) (+) ... (+) M_{n_K}(M_m). The band algebra of a space is the
// one-summand case with n_1 = |X|.
struct FiniteDimAlgebra {
  std::vector<std::size_t> summand_sizes;
  std::size_t fiber = 1;

  std::size_t summands() const { return summand_sizes.size(); }
  std::size_t coords() const;  // sum of n_k * m
  bool operator==(const FiniteDimAlgebra& o) const {
    return summand_sizes == o.summand_sizes && fiber == o.fiber;
  }
};

FiniteDimAlgebra band_algebra(const FiniteMetricSpace& space, std::size_t fiber);

using Element = std::vector<BlockMatrix>;

Element zero_element(const FiniteDimAlgebra& alg);
Element unit_element(const FiniteDimAlgebra& alg);
// e_{kl} (x) e_{ab} in summand s
Element matrix_unit(const FiniteDimAlgebra& alg, std::size_t s, std::size_t k, std::size_t l,
                    std::size_t a, std::size_t b);
// e_{kl} (x) 1_m in summand s
Element generalized_unit(const FiniteDimAlgebra& alg, std::size_t s, std::size_t k, std::size_t l);

Element operator+(Element a, const Element& b);
Element operator-(Element a, const Element& b);
Element operator*(Complex c, Element a);
Element operator*(const Element& a, const Element& b);
Element adjoint(const Element& a);
double norm(const Element& a);
bool in_canonical_diagonal(const Element& a, double tol);

// x in `summand` (of size |window|) goes to weight * V x V^* inside codomain
// block `target`, V the inclusion of the window.
struct EmbedTerm {
  std::size_t summand = 0;
  std::size_t target = 0;
  PointSet window;
  double weight = 1.0;
};

// Domain block `source` cut down to the window and conjugated by diag(weights),
// landing in codomain summand `summand`.
struct CompressTerm {
  std::size_t source = 0;
  std::size_t summand = 0;
  PointSet window;
  std::vector<double> weights;
};

class CpMap {
 public:
  using Action = std::function<Element(const Element&)>;

  CpMap(FiniteDimAlgebra domain, FiniteDimAlgebra codomain, Action action, std::string label = {});
  static CpMap embedding(FiniteDimAlgebra domain, FiniteDimAlgebra codomain, std::vector<EmbedTerm> terms,
                         std::string label = {});
  static CpMap compression(FiniteDimAlgebra domain, FiniteDimAlgebra codomain,
                           std::vector<CompressTerm> terms, std::string label = {});

  Element operator()(const Element& a) const;

  const FiniteDimAlgebra& domain() const { return domain_; }
  const FiniteDimAlgebra& codomain() const { return codomain_; }
  const std::vector<EmbedTerm>& embeds() const { return embeds_; }
  const std::vector<CompressTerm>& compressions() const { return compressions_; }
  bool structural() const { return !embeds_.empty() || !compressions_.empty(); }
  const std::string& label() const { return label_; }

 private:
  FiniteDimAlgebra domain_;
  FiniteDimAlgebra codomain_;
  Action action_;
  std::vector<EmbedTerm> embeds_;
  std::vector<CompressTerm> compressions_;
  std::string label_;
};

CpMap compose(const CpMap& outer, const CpMap& inner);
CpMap scaled(const CpMap& map, double c);
// The map precomposed with the projection onto the listed summands.
CpMap restrict_domain(const CpMap& map, const std::vector<std::size_t>& summands);

// ---- complete positivity

struct ChoiWindow {
  std::size_t summand = 0;
  std::vector<std::size_t> nodes;  // domain coordinates are nodes x fiber
};

struct ChoiResult {
  double min_eigenvalue = 0.0;
  bool completely_positive = true;
  std::size_t windows = 0;
  std::size_t max_dimension = 0;  // largest Choi matrix assembled
};

inline constexpr std::size_t kChoiLimit = 512;
inline constexpr double kChoiTolerance = 1e-10;

// Choi matrix of the map restricted to the corner spanned by the window.
ChoiResult choi_check(const CpMap& map, const ChoiWindow& window);
// Whole domain; each summand must fit under the coordinate limit.
ChoiResult choi_check(const CpMap& map);
// Overlapping windows of `window_nodes` consecutive nodes, advanced by `step`,
// over every domain summand.
ChoiResult choi_sweep(const CpMap& map, std::size_t window_nodes, std::size_t step);

// ---- order zero

struct OrderZeroVerdict {
  bool order_zero = false;
  double worst = 0.0;
  bool certified = false;  // structural proof rather than sampling
  std::size_t trials = 0;
};

OrderZeroVerdict order_zero_check(const CpMap& map, std::size_t trials = 200, std::uint64_t seed = 1,
                                  double tol = 1e-9);

class OrderZeroFactorization {
 public:
  const CpMap& map() const { return map_; }
  const Element& h() const { return h_; }
  const Element& h_pinv() const { return h_pinv_; }
  const Element& support() const { return support_; }
  Element pi(const Element& a) const;
  double residual() const { return residual_; }

 private:
  friend OrderZeroFactorization factorize_order_zero(const CpMap&, std::size_t, std::uint64_t, double);
  explicit OrderZeroFactorization(CpMap m) : map_(std::move(m)) {}
  CpMap map_;
  Element h_, h_pinv_, support_;
  double residual_ = 0.0;
};

// h = phi(1), pi(a) = h^+ phi(a). Verifies phi = h pi, [h, pi(a)] = 0 and
// multiplicativity of pi on matrix-unit probes; throws FactorizationInvalid
// naming the identity that fails.
OrderZeroFactorization factorize_order_zero(const CpMap& map, std::size_t trials = 200,
                                            std::uint64_t seed = 1, double tol = 1e-9);

using RealFunction = std::function<double(double)>;

// a -> f(h) pi(a); f(0) must vanish.
CpMap functional_calculus(const RealFunction& f, const OrderZeroFactorization& fac);

enum class BumpKind { f_delta, g_delta, zeta, zeta_prime };
RealFunction bump_function(BumpKind kind, double delta, std::size_t d = 0, double eps = 0.0);
RealFunction f_delta(double delta);
RealFunction g_delta(double delta);
RealFunction zeta(std::size_t d, double eps);
RealFunction zeta_prime(std::size_t d, double eps);

struct CopVerdict {
  bool passes = true;
  double worst = 0.0;
  std::string witness;  // "summand s, slot k, point x" of the worst commutator
};

// max over minimal diagonal projections v of the domain and generators
// 1_x (x) e_ab of the codomain diagonal of ||[pi(v (x) 1), d]||.
CopVerdict cop_check(const OrderZeroFactorization& fac, double tol);

}  // namespace coarsedim
