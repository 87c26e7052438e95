#pragma once

#include <filesystem>
#include <string>

#include "coarsedim/band_operator.hpp"
#include "coarsedim/cover.hpp"
#include "coarsedim/cpmap.hpp"
#include "coarsedim/extract.hpp"
#include "coarsedim/witness.hpp"
#include "json.hpp"

namespace coarsedim::io {

using Json = nlohmann::json;

// Whole-file helpers; FileError on any I/O or parse problem.
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);
std::string dump(const Json& doc);  // two-space indent, trailing newline

// { "points": [...], "dist": [[...]] } plus "grid" when the space was generated,
// so the loader can restore exact lattice arithmetic.
Json space_to_json(const FiniteMetricSpace& space);
SpacePtr space_from_json(const Json& doc);

// Sets are written as point ids.
Json cover_to_json(const ColoredCover& cover, const FiniteMetricSpace& space);
ColoredCover cover_from_json(const Json& doc, const FiniteMetricSpace& space);
Json cover_report_to_json(const CoverReport& report, const FiniteMetricSpace& space);

Json block_to_json(const Block& b);
Block block_from_json(const Json& doc);
Json operator_to_json(const BandOperator& t);
BandOperator operator_from_json(const Json& doc, SpacePtr space);

Json algebra_to_json(const FiniteDimAlgebra& alg);
FiniteDimAlgebra algebra_from_json(const Json& doc);
Json element_to_json(const Element& e);
Element element_from_json(const Json& doc, const FiniteDimAlgebra& alg);

// Structural maps serialize their terms; others are written as the images of
// every matrix unit, which needs a domain of at most kDenseMapLimit coordinates.
inline constexpr std::size_t kDenseMapLimit = 64;
Json cpmap_to_json(const CpMap& map);
CpMap cpmap_from_json(const Json& doc);

Json condition_report_to_json(const ConditionReport& report);
ConditionReport condition_report_from_json(const Json& doc);

Json hat_to_json(const HatPair& hp, double epsilon);

// Standard cover JSON extended with S, class_sizes, s_max and the lemma checks.
Json extraction_to_json(const ExtractedCover& ex, const PartialTranslationSystem& pts,
                        const FiniteMetricSpace& space);

// Self-contained: embeds the space and both maps, plus the build parameters.
Json witness_to_json(const DiagDimWitness& w);
DiagDimWitness witness_from_json(const Json& doc);

}  // namespace coarsedim::io
