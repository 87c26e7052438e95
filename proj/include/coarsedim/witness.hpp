#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coarsedim/band_operator.hpp"
#include "coarsedim/cover.hpp"
#include "coarsedim/cpmap.hpp"

namespace coarsedim {

// (F, D_F, psi, phi, d) together with the finite test set and epsilon.
// Summand j of F carries color summand_color[j].
struct DiagDimWitness {
  SpacePtr space;
  std::size_t fiber = 1;
  std::size_t d = 0;
  FiniteDimAlgebra F;
  std::vector<std::size_t> summand_color;
  CpMap psi;
  CpMap phi;
  std::vector<BandOperator> test_set;
  double epsilon = 0.0;
  double r = 0.0;
  std::vector<PointSet> windows;  // where summand j sits in X, when known

  DiagDimWitness(SpacePtr space, std::size_t fiber, std::size_t d, FiniteDimAlgebra F,
                 std::vector<std::size_t> summand_color, CpMap psi, CpMap phi,
                 std::vector<BandOperator> test_set, double epsilon, double r = 0.0);

  FiniteDimAlgebra A() const { return band_algebra(*space, fiber); }
  std::vector<std::size_t> summands_of(std::size_t color) const;
  CpMap phi_color(std::size_t color) const;
};

struct UpperWitnessOptions {
  double epsilon = 1.0;
  // Scale of the partial translations in the default test set; the witness
  // scale r when unset.
  std::optional<double> test_scale;
  std::vector<BandOperator> extra_tests;
};

// Partition of unity h_i built from a 3r-separated cover: f_i(x) =
// (1/r) #{(U, m) : U of color i, 1 <= m <= r, dist(x, U) <= m}, h_i = sqrt(f_i / f).
struct PartitionOfUnity {
  std::vector<std::vector<double>> f;  // per color, per point
  std::vector<std::vector<double>> h;
};
PartitionOfUnity partition_of_unity(const FiniteMetricSpace& space, const ColoredCover& cover, double r);

DiagDimWitness build_upper_witness(SpacePtr space, const ColoredCover& cover, double r, std::size_t fiber,
                                   const UpperWitnessOptions& opts = {});

// d = 0 witness on a one-point space: psi = phi = identity on M_m.
DiagDimWitness single_point_witness(std::size_t fiber, double epsilon = 1.0);

struct ConditionRow {
  int condition = 0;
  bool verdict = false;
  double worst = 0.0;
  std::string witness_element;
  std::string note;
};

struct ConditionReport {
  std::vector<ConditionRow> rows;
  bool all_pass() const;
  bool passes(int condition) const;
  const ConditionRow& row(int condition) const;
};

struct CheckOptions {
  std::uint64_t seed = 7;
  std::size_t order_zero_trials = 200;
  std::size_t random_probes = 4;  // random fiber elements / diagonal elements per summand
};

ConditionReport check_witness(const DiagDimWitness& w, double tol, const CheckOptions& opts = {});

// Largest ||phi(psi(a)) - a|| over the test set, and the index where it occurs.
std::pair<double, std::size_t> approximation_error(const DiagDimWitness& w);

// Largest ||phi(psi(a)) - a|| over F u F^2, F^2 = {a^2}.
double square_family_error(const DiagDimWitness& w);

// Smallest epsilon (times margin) with the witness within epsilon^2/81 on F u F^2,
// which is what the hat construction assumes. 1 for an exact witness.
double hat_epsilon(const DiagDimWitness& w, double margin = 1.05);

struct HatPair {
  Element p;
  Element p_prime;
  CpMap psi_hat;
  CpMap phi_hat;
  double factor;  // 1 / (1 + eps^2 / 81)
  double relation_error = 0.0;       // max ||phi psi(a) - (1 + eps^2/81) phi_hat psi_hat(a)||
  double approximation_error = 0.0;  // max over F u F^2 of ||phi_hat psi_hat(a) - a||
  double multiplicativity_defect = 0.0;
  double approximation_bound = 0.0;    // eps^2 / 27
  double multiplicativity_bound = 0.0; // 6 (eps^2 / 81)^{1/2}
};

struct HatOptions {
  std::size_t samples = 50;
  std::uint64_t seed = 11;
};

HatPair hat_normalize(const DiagDimWitness& w, const HatOptions& opts = {});

enum class PermanenceKind { direct_sum, tensor_matrix };

DiagDimWitness direct_sum(const DiagDimWitness& w1, const DiagDimWitness& w2);
DiagDimWitness tensor_matrix(const DiagDimWitness& w, std::size_t n);

}  // namespace coarsedim
