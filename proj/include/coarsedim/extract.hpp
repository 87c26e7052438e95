#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "coarsedim/band_operator.hpp"
#include "coarsedim/cover.hpp"
#include "coarsedim/witness.hpp"

namespace coarsedim {

using PairList = std::vector<std::pair<std::size_t, std::size_t>>;

// The r-neighbour relation split into partial bijections S_1..S_M, with the
// partial translations a_m carrying identity fiber blocks on S_m.
struct EdgeDecomposition {
  std::size_t edges = 0;
  std::vector<PairList> parts;
  std::vector<BandOperator> translations;

  std::size_t M() const { return parts.size(); }
};

EdgeDecomposition decompose_neighbors(SpacePtr space, double r, std::size_t fiber = 1);

struct DecompositionCheck {
  bool injective = true;      // first and second coordinates distinct inside each part
  bool exact_cover = true;    // parts are disjoint and their union is E_0
  bool within_bound = true;   // M <= 2 N(r) - 1
  std::size_t bound = 0;
};
DecompositionCheck verify_decomposition(const EdgeDecomposition& dec, const FiniteMetricSpace& space, double r);

struct Constants {
  double delta;
  double eta;
  double epsilon;
};
Constants lower_bound_constants(std::size_t d);

// One corner q_j (F_j (x) B) q_j = M_s(B): the selected diagonal slots of summand j.
struct Corner {
  std::size_t color = 0;
  std::size_t summand = 0;
  std::vector<std::size_t> slots;
};

struct ThresholdData {
  std::size_t d = 0;
  Constants constants{};
  Element qhat;
  Element q;
  std::vector<Corner> corners;
  std::size_t s_max = 0;
};

ThresholdData threshold_setup(const DiagDimWitness& w);

struct CornerSystem {
  Corner corner;
  std::vector<BlockMatrix> f_units;  // f_delta(phi)(e_kl), index k * s + l
  std::vector<BlockMatrix> g_units;  // g_delta(phi)(e_kl)
  std::vector<PointSet> U;           // per slot k
  std::vector<std::map<std::size_t, std::size_t>> sigma;  // index k * s + l
  std::size_t s() const { return corner.slots.size(); }
};

struct IdentityReport {
  // Worst deviation of identities (i)..(v), in that order.
  std::array<double, 5> worst{};
  double overall() const;
  bool passes(double tol) const { return overall() <= tol; }
};

struct PartialTranslationSystem {
  SpacePtr space;
  std::size_t fiber = 1;
  std::size_t d = 0;
  Constants constants{};
  std::vector<CornerSystem> corners;
  std::size_t round_trip_failures = 0;
  std::vector<std::string> warnings;
  IdentityReport identities;
};

PartialTranslationSystem build_translation_system(const DiagDimWitness& w, const ThresholdData& td);

IdentityReport matrix_unit_identities(const PartialTranslationSystem& pts, double tol);

struct ExtractedCover {
  ColoredCover cover;
  std::vector<std::vector<std::size_t>> class_sizes;  // per color
  std::size_t S = 0;
  std::size_t s_max = 0;
  CoverReport report;
  std::size_t recursion_violations = 0;  // r-close pairs not related by the sigma recursion
  std::size_t cover_lemma_violations = 0;

  bool passes(std::size_t d) const {
    return report.passes() && cover.colors() <= d + 1 && S <= s_max && recursion_violations == 0 &&
           cover_lemma_violations == 0;
  }
};

ExtractedCover extract_cover(const PartialTranslationSystem& pts, const FiniteMetricSpace& space, double r);

}  // namespace coarsedim
