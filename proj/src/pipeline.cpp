#include "coarsedim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "coarsedim/extract.hpp"
#include "coarsedim/witness.hpp"

namespace coarsedim {

using io::Json;
namespace fs = std::filesystem;

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::space: return "space";
    case Stage::cover: return "cover";
    case Stage::witness: return "witness";
    case Stage::check: return "check";
    case Stage::hat: return "hat";
    case Stage::extract: return "extract";
    case Stage::report: return "report";
  }
  return "?";
}

namespace {

Stage stage_from(const std::string& name) {
  for (Stage s : kStageOrder)
    if (name == stage_name(s)) return s;
  throw UsageError("unknown stage '" + name + "'");
}

template <class T>
T field(const Json& doc, const char* key, const char* what) {
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception&) {
    throw UsageError(std::string("config key '") + key + "' must be " + what);
  }
}

void reject_unknown(const Json& doc, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, value] : doc.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; });
    if (!known) throw UsageError("unknown key '" + key + "' in " + where);
  }
}

const char* artifact_name(Stage s) {
  switch (s) {
    case Stage::space: return "space.json";
    case Stage::cover: return "cover.json";
    case Stage::witness: return "witness.json";
    case Stage::check:
    case Stage::hat: return "conditions.json";
    case Stage::extract: return "extraction.json";
    case Stage::report: return "report.json";
  }
  return "";
}

const char* condition_title(int c) {
  switch (c) {
    case 1: return "condition 1: psi contractive";
    case 2: return "condition 2: phi psi approximates the test set";
    case 3: return "condition 3: each phi^(i) contractive order zero";
    case 4: return "condition 4: psi(D_A) in D_F (x) B";
    case 5: return "condition 5: phi maps matrix units to normalizers";
    case 6: return "condition 6: supporting homomorphism commutes with D_A";
  }
  return "condition";
}

}  // namespace

ExperimentConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  reject_unknown(doc, {"space", "cover", "r", "fiber", "epsilon", "hat_epsilon", "test_scale", "extra_tests", "stages",
                       "output_dir", "seed", "tolerance", "sweep"},
                 "config");
  ExperimentConfig cfg;
  if (doc.contains("space")) {
    const Json& sp = doc["space"];
    if (!sp.is_object()) throw UsageError("config key 'space' must be an object");
    if (sp.contains("file")) {
      reject_unknown(sp, {"file"}, "space");
      cfg.space_file = field<std::string>(sp, "file", "a path");
    } else {
      reject_unknown(sp, {"family", "sides", "metric", "spacing"}, "space");
      const auto family = sp.contains("family") ? field<std::string>(sp, "family", "a string") : "interval";
      if (family != "interval" && family != "grid") throw UsageError("space family must be interval or grid");
      cfg.space.family = family == "interval" ? SpaceFamily::interval : SpaceFamily::grid;
      cfg.space.sides = field<std::vector<int>>(sp, "sides", "a list of integers");
      if (sp.contains("metric")) {
        const auto metric = field<std::string>(sp, "metric", "a string");
        if (metric != "l1" && metric != "linf") throw UsageError("space metric must be l1 or linf");
        cfg.space.metric = metric == "l1" ? GridMetric::l1 : GridMetric::linf;
      }
      if (sp.contains("spacing")) cfg.space.spacing = field<double>(sp, "spacing", "a number");
    }
  } else {
    throw UsageError("config needs a 'space' entry");
  }
  if (doc.contains("cover")) {
    const Json& cv = doc["cover"];
    if (cv.is_string()) {
      if (cv.get<std::string>() != "auto-brick") throw UsageError("cover must be \"auto-brick\" or an object");
    } else if (cv.is_object()) {
      if (cv.contains("file")) {
        reject_unknown(cv, {"file"}, "cover");
        cfg.cover_file = field<std::string>(cv, "file", "a path");
      } else {
        reject_unknown(cv, {"method", "brick_side"}, "cover");
        if (cv.contains("method") && field<std::string>(cv, "method", "a string") != "auto-brick")
          throw UsageError("the only cover method is auto-brick");
        if (cv.contains("brick_side")) cfg.brick_side = field<double>(cv, "brick_side", "a number");
      }
    } else {
      throw UsageError("cover must be \"auto-brick\" or an object");
    }
  }
  if (doc.contains("r")) cfg.r = field<double>(doc, "r", "a number");
  if (doc.contains("fiber")) cfg.fiber = field<std::size_t>(doc, "fiber", "a positive integer");
  if (doc.contains("epsilon")) cfg.epsilon = field<double>(doc, "epsilon", "a number");
  if (doc.contains("hat_epsilon") && !(doc["hat_epsilon"].is_string() && doc["hat_epsilon"] == "auto"))
    cfg.hat_epsilon = field<double>(doc, "hat_epsilon", "a number or \"auto\"");
  if (doc.contains("test_scale")) cfg.test_scale = field<double>(doc, "test_scale", "a number");
  if (doc.contains("extra_tests"))
    for (const auto& p : field<std::vector<std::string>>(doc, "extra_tests", "a list of paths")) cfg.extra_test_files.push_back(p);
  if (doc.contains("stages")) {
    cfg.stages.clear();
    for (const auto& name : field<std::vector<std::string>>(doc, "stages", "a list of stage names"))
      cfg.stages.push_back(stage_from(name));
    for (std::size_t i = 0; i < cfg.stages.size(); ++i)
      if (cfg.stages[i] != kStageOrder[i])
        throw UsageError("stages must be a prefix of space, cover, witness, check, hat, extract, report");
  }
  if (doc.contains("output_dir")) cfg.output_dir = field<std::string>(doc, "output_dir", "a path");
  if (doc.contains("seed")) cfg.seed = field<std::uint64_t>(doc, "seed", "a nonnegative integer");
  if (doc.contains("tolerance")) cfg.tolerance = field<double>(doc, "tolerance", "a number");
  if (doc.contains("sweep")) cfg.sweep_radii = field<std::vector<double>>(doc, "sweep", "a list of numbers");

  if (!(cfg.r > 0)) throw UsageError("r must be positive");
  if (cfg.fiber < 1) throw UsageError("fiber must be at least 1");
  if (!(cfg.epsilon > 0)) throw UsageError("epsilon must be positive");
  if (cfg.hat_epsilon && !(*cfg.hat_epsilon > 0)) throw UsageError("hat_epsilon must be positive");
  if (!(cfg.tolerance >= 0)) throw UsageError("tolerance must be nonnegative");
  for (double r : cfg.sweep_radii)
    if (!(r > 0)) throw UsageError("sweep radii must be positive");
  return cfg;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json doc;
  if (cfg.space_file) {
    doc["space"] = {{"file", cfg.space_file->string()}};
  } else {
    doc["space"] = {{"family", cfg.space.family == SpaceFamily::interval ? "interval" : "grid"},
                    {"sides", cfg.space.sides},
                    {"metric", cfg.space.metric == GridMetric::l1 ? "l1" : "linf"},
                    {"spacing", cfg.space.spacing}};
  }
  if (cfg.cover_file)
    doc["cover"] = {{"file", cfg.cover_file->string()}};
  else
    doc["cover"] = {{"method", "auto-brick"}, {"brick_side", cfg.brick_side}};
  doc["r"] = cfg.r;
  doc["fiber"] = cfg.fiber;
  doc["epsilon"] = cfg.epsilon;
  doc["hat_epsilon"] = cfg.hat_epsilon ? Json(*cfg.hat_epsilon) : Json("auto");
  if (cfg.test_scale) doc["test_scale"] = *cfg.test_scale;
  Json extras = Json::array();
  for (const auto& p : cfg.extra_test_files) extras.push_back(p.string());
  doc["extra_tests"] = std::move(extras);
  Json stages = Json::array();
  for (Stage s : cfg.stages) stages.push_back(stage_name(s));
  doc["stages"] = std::move(stages);
  doc["output_dir"] = cfg.output_dir.string();
  doc["seed"] = cfg.seed;
  doc["tolerance"] = cfg.tolerance;
  doc["sweep"] = cfg.sweep_radii;
  return doc;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_to_json(cfg).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

Json provenance(const ExperimentConfig& cfg) {
  return {{"config_hash", config_hash(cfg)}, {"version", kVersion}, {"config", config_to_json(cfg)}};
}

namespace {

struct Context {
  const ExperimentConfig& cfg;
  SpacePtr space;
  std::optional<ColoredCover> cover;
  std::optional<DiagDimWitness> witness;
  Json conditions;
  RunResult result;

  fs::path path(Stage s) const { return cfg.output_dir / artifact_name(s); }

  void write(Stage s, Json doc) {
    doc["provenance"] = provenance(cfg);
    io::write_json(path(s), doc);
    if (std::find(result.artifacts.begin(), result.artifacts.end(), path(s)) == result.artifacts.end())
      result.artifacts.push_back(path(s));
  }
};

void stage_space(Context& c) {
  c.space = c.cfg.space_file ? io::space_from_json(io::read_json(*c.cfg.space_file))
                             : std::make_shared<const FiniteMetricSpace>(generate_space(c.cfg.space));
  Json doc = io::space_to_json(*c.space);
  const auto radii = std::vector<double>{0.0, c.cfg.r, 3 * c.cfg.r};
  const auto prof = ulf_profile(*c.space, radii);
  Json ulf = Json::array();
  for (const auto& [radius, n] : prof.entries) ulf.push_back({{"r", radius}, {"N", n}});
  doc["ulf_profile"] = std::move(ulf);
  c.write(Stage::space, std::move(doc));
}

void stage_cover(Context& c) {
  c.cover = c.cfg.cover_file ? io::cover_from_json(io::read_json(*c.cfg.cover_file), *c.space)
                             : brick_cover(*c.space, c.cfg.r, c.cfg.brick_side);
  Json doc = io::cover_to_json(*c.cover, *c.space);
  doc["report"] = io::cover_report_to_json(verify_cover(*c.cover, *c.space, 3 * c.cfg.r), *c.space);
  c.write(Stage::cover, std::move(doc));
}

void stage_witness(Context& c) {
  UpperWitnessOptions opts;
  opts.epsilon = c.cfg.epsilon;
  opts.test_scale = c.cfg.test_scale;
  for (const auto& p : c.cfg.extra_test_files) opts.extra_tests.push_back(io::operator_from_json(io::read_json(p), c.space));
  c.witness.emplace(build_upper_witness(c.space, *c.cover, c.cfg.r, c.cfg.fiber, opts));
  c.write(Stage::witness, io::witness_to_json(*c.witness));
}

void stage_check(Context& c) {
  CheckOptions opts;
  opts.seed = c.cfg.seed;
  const auto rep = check_witness(*c.witness, c.cfg.tolerance, opts);
  c.conditions = io::condition_report_to_json(rep);
  c.conditions["tolerance"] = c.cfg.tolerance;
  c.conditions["epsilon"] = c.witness->epsilon;
  c.write(Stage::check, c.conditions);
}

void stage_hat(Context& c) {
  DiagDimWitness w = *c.witness;
  w.epsilon = c.cfg.hat_epsilon ? *c.cfg.hat_epsilon : hat_epsilon(w);
  HatOptions opts;
  opts.seed = c.cfg.seed;
  Json hat = io::hat_to_json(hat_normalize(w, opts), w.epsilon);
  hat["epsilon_rule"] = c.cfg.hat_epsilon ? "configured" : "9 sqrt(max error on F u F^2) * 1.05";
  c.conditions["hat"] = std::move(hat);
  c.write(Stage::hat, c.conditions);
}

void stage_extract(Context& c) {
  const auto td = threshold_setup(*c.witness);
  const auto pts = build_translation_system(*c.witness, td);
  const auto ex = extract_cover(pts, *c.space, c.cfg.r);
  c.write(Stage::extract, io::extraction_to_json(ex, pts, *c.space));
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
  Context c{cfg, nullptr, std::nullopt, std::nullopt, Json::object(), {}};
  for (Stage s : cfg.stages) {
    try {
      switch (s) {
        case Stage::space: stage_space(c); break;
        case Stage::cover: stage_cover(c); break;
        case Stage::witness: stage_witness(c); break;
        case Stage::check: stage_check(c); break;
        case Stage::hat: stage_hat(c); break;
        case Stage::extract: stage_extract(c); break;
        case Stage::report:
          if (!cfg.sweep_radii.empty()) {
            io::write_json(cfg.output_dir / "sweep.json", sweep(cfg));
            c.result.artifacts.push_back(cfg.output_dir / "sweep.json");
          }
          c.result.report = report(cfg.output_dir);
          io::write_json(c.path(Stage::report), c.result.report);
          if (std::find(c.result.artifacts.begin(), c.result.artifacts.end(), c.path(Stage::report)) ==
              c.result.artifacts.end())
            c.result.artifacts.push_back(c.path(Stage::report));
          break;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage_name(s), c.path(s), e.what());
    }
  }
  return c.result;
}

Json sweep(const ExperimentConfig& cfg) {
  const SpacePtr space = cfg.space_file ? io::space_from_json(io::read_json(*cfg.space_file))
                                        : std::make_shared<const FiniteMetricSpace>(generate_space(cfg.space));
  const double test_scale = cfg.test_scale.value_or(1.0);
  Json rows = Json::array();
  for (double r : cfg.sweep_radii) {
    UpperWitnessOptions opts;
    opts.epsilon = cfg.epsilon;
    opts.test_scale = test_scale;
    const double side = cfg.brick_side * r / cfg.r;
    const auto w = build_upper_witness(space, brick_cover(*space, r, side), r, cfg.fiber, opts);
    const auto [err, at] = approximation_error(w);
    rows.push_back({{"r", r}, {"brick_side", side}, {"error", err}, {"epsilon", cfg.epsilon}, {"pass", err < cfg.epsilon}});
  }
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    monotone = monotone && rows[i]["error"].get<double>() <= rows[i - 1]["error"].get<double>();
  return {{"test_scale", test_scale}, {"rows", std::move(rows)}, {"non_increasing", monotone},
          {"provenance", provenance(cfg)}};
}

Json report(const fs::path& dir) {
  auto load = [&](const char* name) -> std::optional<Json> {
    const fs::path p = dir / name;
    if (!fs::exists(p)) return std::nullopt;
    return io::read_json(p);
  };
  const auto space = load("space.json");
  const auto cover = load("cover.json");
  const auto witness = load("witness.json");
  const auto conditions = load("conditions.json");
  const auto extraction = load("extraction.json");
  const auto sw = load("sweep.json");
  if (!space && !cover && !witness && !conditions && !extraction && !sw)
    throw FileError("no artifacts found in " + dir.string());

  Json doc;
  for (const auto* a : {&space, &cover, &witness, &conditions, &extraction, &sw})
    if (*a && (*a)->contains("provenance")) {
      doc["provenance"] = (**a)["provenance"];
      break;
    }
  Json rows = Json::array();
  if (space) doc["space"] = {{"points", (*space)["points"].size()}, {"ulf_profile", space->value("ulf_profile", Json::array())}};
  if (cover && cover->contains("report")) {
    const auto& rep = (*cover)["report"];
    Json gap = nullptr;  // smallest same-color gap; null when no color holds two sets
    for (const auto& c : rep["per_color"])
      if (!c["min_gap"].is_null() && (gap.is_null() || c["min_gap"].get<double>() < gap.get<double>())) gap = c["min_gap"];
    rows.push_back({{"check", "input cover is 3r-separated (worst: smallest gap)"}, {"verdict", rep["passes"]}, {"worst", gap}});
  }
  if (witness) doc["witness"] = {{"d", (*witness)["d"]}, {"r", (*witness)["r"]}, {"fiber", (*witness)["fiber"]},
                                 {"summands", (*witness)["summand_color"].size()},
                                 {"tests", (*witness)["test_set"].size()}};
  if (conditions) {
    for (const auto& row : (*conditions)["conditions"]) {
      const int k = row["condition"].get<int>();
      rows.push_back({{"check", condition_title(k)}, {"verdict", row["verdict"]}, {"worst", row["worst"]},
                      {"witness_element", row["witness_element"]}});
    }
    if (conditions->contains("hat")) {
      const auto& h = (*conditions)["hat"];
      doc["hat"] = h;
      rows.push_back({{"check", "hat: approximation below eps^2/27"}, {"verdict", h["approximation_pass"]},
                      {"worst", h["approximation_error"]}});
      rows.push_back({{"check", "hat: multiplicativity below 6 (eps^2/81)^(1/2)"}, {"verdict", h["multiplicativity_pass"]},
                      {"worst", h["multiplicativity_defect"]}});
    }
  }
  if (extraction) {
    const auto& ch = (*extraction)["checks"];
    for (const auto& id : ch["matrix_unit_identities"])
      rows.push_back({{"check", "identity " + id["identity"].get<std::string>()}, {"verdict", id["worst"].get<double>() <= 1e-8},
                      {"worst", id["worst"]}});
    rows.push_back({{"check", "sigma round trip"}, {"verdict", ch["round_trip_failures"] == 0},
                    {"worst", ch["round_trip_failures"]}});
    rows.push_back({{"check", "sigma recursion well defined"}, {"verdict", ch["recursion_violations"] == 0},
                    {"worst", ch["recursion_violations"]}});
    rows.push_back({{"check", "cover lemma implication"}, {"verdict", ch["cover_lemma_violations"] == 0},
                    {"worst", ch["cover_lemma_violations"]}});
    rows.push_back({{"check", "class bound S <= max s"}, {"verdict", ch["class_bound"]["holds"]},
                    {"worst", (*extraction)["S"]}});
    rows.push_back({{"check", "extracted cover verified at r"}, {"verdict", ch["verify_cover"]["passes"]},
                    {"worst", ch["verify_cover"]["max_diameter"]}});
    doc["extraction"] = {{"S", (*extraction)["S"]}, {"s_max", (*extraction)["s_max"]},
                         {"class_sizes", (*extraction)["class_sizes"]}, {"passes", (*extraction)["passes"]}};
  }
  if (sw) doc["sweep"] = {{"test_scale", (*sw)["test_scale"]}, {"rows", (*sw)["rows"]}, {"non_increasing", (*sw)["non_increasing"]}};
  doc["rows"] = std::move(rows);
  return doc;
}

std::string summary_table(const Json& rep) {
  std::ostringstream os;
  os << std::left;
  auto value = [](const Json& v) {
    if (v.is_null()) return std::string("inf");
    if (v.is_number_float()) {
      std::ostringstream s;
      s << std::setprecision(6) << v.get<double>();
      return s.str();
    }
    return v.dump();
  };
  os << std::setw(56) << "check" << std::setw(8) << "verdict" << "worst\n";
  for (const auto& row : rep.value("rows", Json::array()))
    os << std::setw(56) << row["check"].get<std::string>() << std::setw(8) << (row["verdict"].get<bool>() ? "pass" : "FAIL")
       << value(row["worst"]) << "\n";
  if (rep.contains("extraction"))
    os << "\nextraction: S = " << rep["extraction"]["S"] << ", s_max = " << rep["extraction"]["s_max"] << "\n";
  if (rep.contains("sweep")) {
    os << "\nsweep (test scale " << value(rep["sweep"]["test_scale"]) << ")\n";
    os << std::setw(10) << "r" << std::setw(14) << "error" << "pass\n";
    for (const auto& row : rep["sweep"]["rows"])
      os << std::setw(10) << value(row["r"]) << std::setw(14) << value(row["error"]) << (row["pass"].get<bool>() ? "yes" : "no")
         << "\n";
  }
  if (rep.contains("provenance"))
    os << "\nconfig " << rep["provenance"]["config_hash"].get<std::string>() << ", version "
       << rep["provenance"]["version"].get<std::string>() << "\n";
  return os.str();
}

}  // namespace coarsedim
