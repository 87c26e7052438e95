#include "coarsedim/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "coarsedim/errors.hpp"

namespace coarsedim::io {

namespace {

std::size_t lookup(const FiniteMetricSpace& space, const std::string& id) {
  auto at = space.index_of(id);
  if (!at) throw FileError("unknown point id '" + id + "'");
  return *at;
}

Json ids_of(const PointSet& set, const FiniteMetricSpace& space) {
  Json out = Json::array();
  for (auto x : set) out.push_back(space.ids()[x]);
  return out;
}

// JSON has no infinities; they are written as null and read back as +inf.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
double number_from(const Json& j) { return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>(); }

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw FileError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FileError(path.string() + ": " + e.what());
  }
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const Json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw FileError("cannot write " + path.string());
  out << dump(doc);
  if (!out) throw FileError("write failed for " + path.string());
}

// ---- space

Json space_to_json(const FiniteMetricSpace& space) {
  Json doc;
  doc["points"] = space.ids();
  Json dist = Json::array();
  for (std::size_t x = 0; x < space.size(); ++x) {
    Json row = Json::array();
    for (std::size_t y = 0; y < space.size(); ++y) row.push_back(space.dist(x, y));
    dist.push_back(std::move(row));
  }
  doc["dist"] = std::move(dist);
  if (const auto& g = space.grid()) {
    doc["grid"] = {{"family", g->sides.size() == 1 ? "interval" : "grid"},
                   {"sides", g->sides},
                   {"metric", g->metric == GridMetric::l1 ? "l1" : "linf"},
                   {"spacing", g->spacing}};
  }
  return doc;
}

SpacePtr space_from_json(const Json& doc) {
  return guarded("space", [&] {
    auto ids = doc.at("points").get<std::vector<std::string>>();
    auto dist = doc.at("dist").get<std::vector<std::vector<double>>>();
    if (doc.contains("grid")) {
      const auto& g = doc.at("grid");
      GridParams gp;
      gp.family = g.at("family").get<std::string>() == "interval" ? SpaceFamily::interval : SpaceFamily::grid;
      gp.sides = g.at("sides").get<std::vector<int>>();
      gp.metric = g.at("metric").get<std::string>() == "l1" ? GridMetric::l1 : GridMetric::linf;
      gp.spacing = g.at("spacing").get<double>();
      auto space = std::make_shared<const FiniteMetricSpace>(generate_space(gp));
      if (space->ids() != ids) throw FileError("grid parameters do not reproduce the listed points");
      for (std::size_t x = 0; x < ids.size(); ++x)
        for (std::size_t y = 0; y < ids.size(); ++y)
          if (std::abs(space->dist(x, y) - dist.at(x).at(y)) > 1e-12 * std::max(1.0, space->dist(x, y)))
            throw FileError("grid parameters do not reproduce the distance table");
      return space;
    }
    return std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_matrix(std::move(ids), std::move(dist)));
  });
}

// ---- cover

Json cover_to_json(const ColoredCover& cover, const FiniteMetricSpace& space) {
  Json fams = Json::array();
  for (const auto& fam : cover.families) {
    Json sets = Json::array();
    for (const auto& set : fam) sets.push_back(ids_of(set, space));
    fams.push_back(std::move(sets));
  }
  return {{"r", cover.scale_r}, {"R", cover.diam_bound_R}, {"families", std::move(fams)}};
}

ColoredCover cover_from_json(const Json& doc, const FiniteMetricSpace& space) {
  return guarded("cover", [&] {
    ColoredCover cover;
    cover.scale_r = doc.at("r").get<double>();
    for (const auto& fam : doc.at("families")) {
      std::vector<PointSet> sets;
      for (const auto& set : fam) {
        PointSet s;
        for (const auto& id : set) s.push_back(lookup(space, id.get<std::string>()));
        std::sort(s.begin(), s.end());
        sets.push_back(std::move(s));
      }
      cover.families.push_back(std::move(sets));
    }
    for (const auto& fam : cover.families)
      for (const auto& set : fam) cover.diam_bound_R = std::max(cover.diam_bound_R, set_diameter(space, set));
    return cover;
  });
}

Json cover_report_to_json(const CoverReport& report, const FiniteMetricSpace& space) {
  Json colors = Json::array();
  for (std::size_t i = 0; i < report.per_color.size(); ++i)
    colors.push_back({{"color", i}, {"min_gap", number(report.per_color[i].min_gap)},
                      {"separated", report.per_color[i].separated}});
  return {{"r", report.r},
          {"covers", report.covers},
          {"uncovered", ids_of(report.uncovered, space)},
          {"per_color", std::move(colors)},
          {"max_diameter", report.max_diameter},
          {"passes", report.passes()}};
}

// ---- operators

Json block_to_json(const Block& b) {
  Json rows = Json::array();
  for (long i = 0; i < b.rows(); ++i) {
    Json row = Json::array();
    for (long j = 0; j < b.cols(); ++j) row.push_back({b(i, j).real(), b(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Block block_from_json(const Json& doc) {
  return guarded("block", [&] {
    const long n = static_cast<long>(doc.size());
    Block b(n, n);
    for (long i = 0; i < n; ++i) {
      if (static_cast<long>(doc[i].size()) != n) throw FileError("blocks must be square");
      for (long j = 0; j < n; ++j) b(i, j) = Complex(doc[i][j].at(0).get<double>(), doc[i][j].at(1).get<double>());
    }
    return b;
  });
}

Json operator_to_json(const BandOperator& t) {
  Json blocks = Json::array();
  for (const auto& [k, b] : t.mat.blocks())
    blocks.push_back({{"x", t.space->ids()[k.first]}, {"y", t.space->ids()[k.second]}, {"block", block_to_json(b)}});
  return {{"fiber", t.fiber()}, {"blocks", std::move(blocks)}};
}

BandOperator operator_from_json(const Json& doc, SpacePtr space) {
  return guarded("operator", [&] {
    const auto fiber = doc.at("fiber").get<std::size_t>();
    BlockMatrix mat(space->size(), fiber);
    for (const auto& e : doc.at("blocks")) {
      Block b = block_from_json(e.at("block"));
      if (static_cast<std::size_t>(b.rows()) != fiber) throw FileError("block size differs from the fiber");
      mat.accumulate(lookup(*space, e.at("x").get<std::string>()), lookup(*space, e.at("y").get<std::string>()), b);
    }
    return BandOperator(space, std::move(mat));
  });
}

// ---- algebras and maps

Json algebra_to_json(const FiniteDimAlgebra& alg) {
  return {{"summand_sizes", alg.summand_sizes}, {"fiber", alg.fiber}};
}

FiniteDimAlgebra algebra_from_json(const Json& doc) {
  return guarded("algebra", [&] {
    return FiniteDimAlgebra{doc.at("summand_sizes").get<std::vector<std::size_t>>(), doc.at("fiber").get<std::size_t>()};
  });
}

Json element_to_json(const Element& e) {
  Json out = Json::array();
  for (const auto& blk : e) {
    Json blocks = Json::array();
    for (const auto& [k, b] : blk.blocks()) blocks.push_back({{"k", k.first}, {"l", k.second}, {"block", block_to_json(b)}});
    out.push_back(std::move(blocks));
  }
  return out;
}

Element element_from_json(const Json& doc, const FiniteDimAlgebra& alg) {
  return guarded("element", [&] {
    if (doc.size() != alg.summands()) throw FileError("element has the wrong number of summands");
    Element e = zero_element(alg);
    for (std::size_t s = 0; s < alg.summands(); ++s)
      for (const auto& b : doc[s]) {
        const auto k = b.at("k").get<std::size_t>(), l = b.at("l").get<std::size_t>();
        if (k >= alg.summand_sizes[s] || l >= alg.summand_sizes[s]) throw FileError("element block out of range");
        e[s].set(k, l, block_from_json(b.at("block")));
      }
    return e;
  });
}

Json cpmap_to_json(const CpMap& map) {
  Json doc{{"label", map.label()}, {"domain", algebra_to_json(map.domain())}, {"codomain", algebra_to_json(map.codomain())}};
  if (map.structural()) {
    doc["kind"] = "compress-conjugate-sum";
    Json terms = Json::array();
    for (const auto& t : map.embeds())
      terms.push_back({{"type", "embed"}, {"summand", t.summand}, {"target", t.target}, {"window", t.window},
                       {"weight", t.weight}});
    for (const auto& t : map.compressions())
      terms.push_back({{"type", "compress"}, {"source", t.source}, {"summand", t.summand}, {"window", t.window},
                       {"weights", t.weights}});
    doc["terms"] = std::move(terms);
    return doc;
  }
  const auto& dom = map.domain();
  if (dom.coords() > kDenseMapLimit)
    throw SizeLimitExceeded("map '" + map.label() + "' has no structural form and a domain of " +
                            std::to_string(dom.coords()) + " coordinates");
  doc["kind"] = "dense";
  Json images = Json::array();
  for (std::size_t s = 0; s < dom.summands(); ++s)
    for (std::size_t k = 0; k < dom.summand_sizes[s]; ++k)
      for (std::size_t l = 0; l < dom.summand_sizes[s]; ++l)
        for (std::size_t a = 0; a < dom.fiber; ++a)
          for (std::size_t b = 0; b < dom.fiber; ++b)
            images.push_back({{"unit", {s, k, l, a, b}}, {"image", element_to_json(map(matrix_unit(dom, s, k, l, a, b)))}});
  doc["images"] = std::move(images);
  return doc;
}

CpMap cpmap_from_json(const Json& doc) {
  return guarded("map", [&]() -> CpMap {
    const auto dom = algebra_from_json(doc.at("domain"));
    const auto cod = algebra_from_json(doc.at("codomain"));
    const auto label = doc.value("label", std::string{});
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "compress-conjugate-sum") {
      std::vector<EmbedTerm> embeds;
      std::vector<CompressTerm> compressions;
      for (const auto& t : doc.at("terms")) {
        const auto type = t.at("type").get<std::string>();
        if (type == "embed")
          embeds.push_back({t.at("summand").get<std::size_t>(), t.at("target").get<std::size_t>(),
                            t.at("window").get<PointSet>(), t.at("weight").get<double>()});
        else if (type == "compress")
          compressions.push_back({t.at("source").get<std::size_t>(), t.at("summand").get<std::size_t>(),
                                  t.at("window").get<PointSet>(), t.at("weights").get<std::vector<double>>()});
        else
          throw FileError("unknown term type '" + type + "'");
      }
      if (!embeds.empty() && !compressions.empty()) throw FileError("a map mixes embedding and compression terms");
      return embeds.empty() ? CpMap::compression(dom, cod, std::move(compressions), label)
                            : CpMap::embedding(dom, cod, std::move(embeds), label);
    }
    if (kind != "dense") throw FileError("unknown map kind '" + kind + "'");
    struct Image {
      std::size_t s, k, l, a, b;
      Element img;
    };
    std::vector<Image> images;
    for (const auto& e : doc.at("images")) {
      const auto u = e.at("unit").get<std::vector<std::size_t>>();
      if (u.size() != 5) throw FileError("matrix unit needs five indices");
      images.push_back({u[0], u[1], u[2], u[3], u[4], element_from_json(e.at("image"), cod)});
    }
    return CpMap(
        dom, cod,
        [images, cod](const Element& x) {
          Element out = zero_element(cod);
          for (const auto& im : images) {
            const Block* blk = x[im.s].find(im.k, im.l);
            if (!blk) continue;
            const Complex c = (*blk)(static_cast<long>(im.a), static_cast<long>(im.b));
            if (c != Complex(0.0)) out = out + c * im.img;
          }
          return out;
        },
        label);
  });
}

// ---- reports

Json condition_report_to_json(const ConditionReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"condition", r.condition},
                    {"verdict", r.verdict},
                    {"worst", number(r.worst)},
                    {"witness_element", r.witness_element},
                    {"note", r.note}});
  return {{"conditions", std::move(rows)}, {"all_pass", report.all_pass()}};
}

ConditionReport condition_report_from_json(const Json& doc) {
  return guarded("condition report", [&] {
    ConditionReport rep;
    for (const auto& r : doc.at("conditions"))
      rep.rows.push_back({r.at("condition").get<int>(), r.at("verdict").get<bool>(), number_from(r.at("worst")),
                          r.value("witness_element", std::string{}), r.value("note", std::string{})});
    return rep;
  });
}

Json hat_to_json(const HatPair& hp, double epsilon) {
  return {{"epsilon", epsilon},
          {"factor", hp.factor},
          {"relation_error", hp.relation_error},
          {"approximation_error", hp.approximation_error},
          {"approximation_bound", hp.approximation_bound},
          {"approximation_pass", hp.approximation_error < hp.approximation_bound},
          {"multiplicativity_defect", hp.multiplicativity_defect},
          {"multiplicativity_bound", hp.multiplicativity_bound},
          {"multiplicativity_pass", hp.multiplicativity_defect < hp.multiplicativity_bound}};
}

Json extraction_to_json(const ExtractedCover& ex, const PartialTranslationSystem& pts, const FiniteMetricSpace& space) {
  Json doc = cover_to_json(ex.cover, space);
  doc["S"] = ex.S;
  doc["class_sizes"] = ex.class_sizes;
  doc["s_max"] = ex.s_max;
  const char* names[] = {"(i) f-image diagonal and positive", "(ii) g-image diagonal and positive",
                         "(iii) f-image adjoint symmetry", "(iv) g-image adjoint symmetry", "(v) f g = f"};
  Json identities = Json::array();
  for (std::size_t i = 0; i < 5; ++i) identities.push_back({{"identity", names[i]}, {"worst", pts.identities.worst[i]}});
  doc["checks"] = {
      {"matrix_unit_identities", std::move(identities)},
      {"round_trip_failures", pts.round_trip_failures},
      {"recursion_violations", ex.recursion_violations},
      {"cover_lemma_violations", ex.cover_lemma_violations},
      {"class_bound", {{"S", ex.S}, {"s_max", ex.s_max}, {"holds", ex.S <= ex.s_max}}},
      {"verify_cover", cover_report_to_json(ex.report, space)},
      {"warnings", pts.warnings},
  };
  doc["constants"] = {{"delta", pts.constants.delta}, {"eta", pts.constants.eta}, {"epsilon", pts.constants.epsilon}};
  doc["passes"] = ex.passes(pts.d);
  return doc;
}

// ---- witness bundle

Json witness_to_json(const DiagDimWitness& w) {
  Json tests = Json::array();
  for (const auto& t : w.test_set) tests.push_back(operator_to_json(t));
  Json windows = Json::array();
  for (const auto& win : w.windows) windows.push_back(ids_of(win, *w.space));
  return {{"d", w.d},
          {"fiber", w.fiber},
          {"r", w.r},
          {"epsilon", w.epsilon},
          {"F", algebra_to_json(w.F)},
          {"summand_color", w.summand_color},
          {"windows", std::move(windows)},
          {"space", space_to_json(*w.space)},
          {"psi", cpmap_to_json(w.psi)},
          {"phi", cpmap_to_json(w.phi)},
          {"test_set", std::move(tests)}};
}

DiagDimWitness witness_from_json(const Json& doc) {
  return guarded("witness", [&] {
    auto space = space_from_json(doc.at("space"));
    std::vector<BandOperator> tests;
    for (const auto& t : doc.at("test_set")) tests.push_back(operator_from_json(t, space));
    DiagDimWitness w(space, doc.at("fiber").get<std::size_t>(), doc.at("d").get<std::size_t>(),
                     algebra_from_json(doc.at("F")), doc.at("summand_color").get<std::vector<std::size_t>>(),
                     cpmap_from_json(doc.at("psi")), cpmap_from_json(doc.at("phi")), std::move(tests),
                     doc.at("epsilon").get<double>(), doc.value("r", 0.0));
    for (const auto& win : doc.value("windows", Json::array())) {
      PointSet s;
      for (const auto& id : win) s.push_back(lookup(*space, id.get<std::string>()));
      w.windows.push_back(std::move(s));
    }
    return w;
  });
}

}  // namespace coarsedim::io
