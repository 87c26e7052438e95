// coarsedim: batch front end. Exit codes: 0 success, 2 usage, 3 stage failure.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coarsedim/errors.hpp"
#include "coarsedim/extract.hpp"
#include "coarsedim/io.hpp"
#include "coarsedim/pipeline.hpp"
#include "coarsedim/witness.hpp"

using namespace coarsedim;
using io::Json;

namespace {

void emit(const Json& doc, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << io::dump(doc);
  else
    io::write_json(out, doc);
}

SpacePtr load_space(const std::string& path) { return io::space_from_json(io::read_json(path)); }

// Flags shared by run and sweep; only the ones given end up in the JSON.
struct ExperimentFlags {
  std::string config;
  std::string family;
  std::vector<int> sides;
  std::string metric;
  double spacing = 1.0;
  double brick_side = 0.0;
  double r = 0.0;
  std::size_t fiber = 1;
  double epsilon = 1.0;
  double test_scale = 1.0;
  std::vector<std::string> stages;
  std::string output_dir;
  std::uint64_t seed = 7;
  double tolerance = 1e-9;
  std::vector<double> radii;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "experiment config JSON");
    app->add_option("--family", family, "interval or grid");
    app->add_option("--sides", sides, "lattice points per axis");
    app->add_option("--metric", metric, "l1 or linf");
    app->add_option("--spacing", spacing, "lattice spacing");
    app->add_option("--brick-side", brick_side, "auto-brick side length");
    app->add_option("--r", r, "witness scale");
    app->add_option("--fiber", fiber, "fiber dimension m");
    app->add_option("--epsilon", epsilon, "epsilon for condition 2");
    app->add_option("--test-scale", test_scale, "scale of the partial translations in the test set");
    app->add_option("--stages", stages, "prefix of space cover witness check hat extract report");
    app->add_option("--output-dir", output_dir, "artifact directory");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--tolerance", tolerance, "verdict tolerance");
    app->add_option("--radii", radii, "sweep radii");
  }

  ExperimentConfig resolve(CLI::App* app) const {
    Json flags = Json::object();
    Json space = Json::object();
    if (app->count("--family")) space["family"] = family;
    if (app->count("--sides")) space["sides"] = sides;
    if (app->count("--metric")) space["metric"] = metric;
    if (app->count("--spacing")) space["spacing"] = spacing;
    if (!space.empty()) flags["space"] = space;
    if (app->count("--brick-side")) flags["cover"] = {{"method", "auto-brick"}, {"brick_side", brick_side}};
    if (app->count("--r")) flags["r"] = r;
    if (app->count("--fiber")) flags["fiber"] = fiber;
    if (app->count("--epsilon")) flags["epsilon"] = epsilon;
    if (app->count("--test-scale")) flags["test_scale"] = test_scale;
    if (app->count("--stages")) flags["stages"] = stages;
    if (app->count("--output-dir")) flags["output_dir"] = output_dir;
    if (app->count("--seed")) flags["seed"] = seed;
    if (app->count("--tolerance")) flags["tolerance"] = tolerance;
    if (app->count("--radii")) flags["sweep"] = radii;

    Json doc = Json::object();
    if (!config.empty()) {
      try {
        doc = io::read_json(config);
      } catch (const FileError& e) {
        throw UsageError(e.what());
      }
    }
    for (const auto& [key, value] : flags.items()) {
      if (doc.contains(key) && doc[key] != value)
        std::cerr << "warning: --" << key << " conflicts with the config file; the config file wins\n";
      else if (!doc.contains(key))
        doc[key] = value;
    }
    return parse_config(doc);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diagonal dimension witnesses and cover extraction on finite metric spaces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // space gen
  auto* space_cmd = app.add_subcommand("space", "metric spaces")->require_subcommand(1);
  auto* space_gen = space_cmd->add_subcommand("gen", "generate an interval or grid");
  std::string family = "interval", metric = "linf", out;
  std::vector<int> sides;
  double spacing = 1.0;
  space_gen->add_option("--family", family, "interval or grid")->check(CLI::IsMember({"interval", "grid"}));
  space_gen->add_option("--sides", sides, "lattice points per axis")->required();
  space_gen->add_option("--metric", metric, "l1 or linf")->check(CLI::IsMember({"l1", "linf"}));
  space_gen->add_option("--spacing", spacing, "lattice spacing");
  space_gen->add_option("-o,--out", out, "output file (stdout if omitted)");

  // cover gen / check
  auto* cover_cmd = app.add_subcommand("cover", "colored covers")->require_subcommand(1);
  auto* cover_gen = cover_cmd->add_subcommand("gen", "brick cover or minimal-color search");
  auto* cover_check = cover_cmd->add_subcommand("check", "verify a cover at scale r");
  std::string space_file, cover_file, method = "brick";
  double r = 0.0, brick_side = 0.0, R = 0.0;
  std::size_t max_colors = 4;
  cover_gen->add_option("--space", space_file, "space JSON")->required();
  cover_gen->add_option("--r", r, "separation scale")->required();
  cover_gen->add_option("--method", method, "brick, exact or greedy")->check(CLI::IsMember({"brick", "exact", "greedy"}));
  cover_gen->add_option("--brick-side", brick_side, "brick side (brick method)");
  cover_gen->add_option("--R", R, "diameter bound (search methods)");
  cover_gen->add_option("--max-colors", max_colors, "color budget (search methods)");
  cover_gen->add_option("-o,--out", out, "output file");
  cover_check->add_option("--space", space_file, "space JSON")->required();
  cover_check->add_option("--cover", cover_file, "cover JSON")->required();
  cover_check->add_option("--r", r, "separation scale")->required();
  cover_check->add_option("-o,--out", out, "output file");

  // witness build / check / hat
  auto* witness_cmd = app.add_subcommand("witness", "upper-bound witnesses")->require_subcommand(1);
  auto* witness_build = witness_cmd->add_subcommand("build", "build from a 3r-separated cover");
  auto* witness_check = witness_cmd->add_subcommand("check", "evaluate the six conditions");
  auto* witness_hat = witness_cmd->add_subcommand("hat", "hat normalization bounds");
  std::string witness_file;
  std::size_t fiber = 1, samples = 50;
  double epsilon = 1.0, test_scale = 0.0, tol = 1e-9;
  std::uint64_t seed = 7;
  std::vector<std::string> extra_tests;
  witness_build->add_option("--space", space_file, "space JSON")->required();
  witness_build->add_option("--cover", cover_file, "cover JSON")->required();
  witness_build->add_option("--r", r, "witness scale")->required();
  witness_build->add_option("--fiber", fiber, "fiber dimension m");
  witness_build->add_option("--epsilon", epsilon, "epsilon for condition 2");
  witness_build->add_option("--test-scale", test_scale, "scale of the test partial translations (default r)");
  witness_build->add_option("--extra-test", extra_tests, "operator JSON to add to the test set");
  witness_build->add_option("-o,--out", out, "output file");
  witness_check->add_option("--witness", witness_file, "witness JSON")->required();
  witness_check->add_option("--tol", tol, "tolerance");
  witness_check->add_option("--seed", seed, "sampling seed");
  witness_check->add_option("-o,--out", out, "output file");
  witness_hat->add_option("--witness", witness_file, "witness JSON")->required();
  witness_hat->add_option("--epsilon", epsilon, "epsilon (default: smallest admissible)");
  witness_hat->add_option("--samples", samples, "unit-ball samples");
  witness_hat->add_option("--seed", seed, "sampling seed");
  witness_hat->add_option("-o,--out", out, "output file");

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "extract a colored cover from a witness");
  extract_cmd->add_option("--witness", witness_file, "witness JSON")->required();
  extract_cmd->add_option("--r", r, "scale (default: the witness scale)");
  extract_cmd->add_option("-o,--out", out, "output file");

  // report
  auto* report_cmd = app.add_subcommand("report", "consolidate the artifacts of a run");
  std::string dir;
  report_cmd->add_option("--dir", dir, "artifact directory")->required();
  report_cmd->add_option("-o,--out", out, "report JSON (default <dir>/report.json)");

  // sweep and run
  ExperimentFlags sweep_flags, run_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "condition-2 error along a list of radii");
  sweep_flags.attach(sweep_cmd);
  sweep_cmd->add_option("-o,--out", out, "output file");
  auto* run_cmd = app.add_subcommand("run", "run the configured pipeline stages");
  run_flags.attach(run_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (space_gen->parsed()) {
      GridParams gp;
      gp.family = family == "interval" ? SpaceFamily::interval : SpaceFamily::grid;
      gp.sides = sides;
      gp.metric = metric == "l1" ? GridMetric::l1 : GridMetric::linf;
      gp.spacing = spacing;
      emit(io::space_to_json(generate_space(gp)), out);
    } else if (cover_gen->parsed()) {
      const auto space = load_space(space_file);
      ColoredCover cover;
      if (method == "brick") {
        if (!cover_gen->count("--brick-side")) throw UsageError("--brick-side is required for the brick method");
        cover = brick_cover(*space, r, brick_side);
      } else {
        if (!cover_gen->count("--R")) throw UsageError("--R is required for the search methods");
        auto found = min_colors_search(*space, r, R, max_colors, method == "exact" ? SearchMode::exact : SearchMode::greedy);
        if (!found) throw PreconditionFailed("no cover with at most " + std::to_string(max_colors) + " colors");
        cover = found->cover;
      }
      Json doc = io::cover_to_json(cover, *space);
      doc["report"] = io::cover_report_to_json(verify_cover(cover, *space, r), *space);
      emit(doc, out);
    } else if (cover_check->parsed()) {
      const auto space = load_space(space_file);
      const auto cover = io::cover_from_json(io::read_json(cover_file), *space);
      emit(io::cover_report_to_json(verify_cover(cover, *space, r), *space), out);
    } else if (witness_build->parsed()) {
      const auto space = load_space(space_file);
      const auto cover = io::cover_from_json(io::read_json(cover_file), *space);
      UpperWitnessOptions opts;
      opts.epsilon = epsilon;
      if (witness_build->count("--test-scale")) opts.test_scale = test_scale;
      for (const auto& p : extra_tests) opts.extra_tests.push_back(io::operator_from_json(io::read_json(p), space));
      emit(io::witness_to_json(build_upper_witness(space, cover, r, fiber, opts)), out);
    } else if (witness_check->parsed()) {
      const auto w = io::witness_from_json(io::read_json(witness_file));
      CheckOptions opts;
      opts.seed = seed;
      Json doc = io::condition_report_to_json(check_witness(w, tol, opts));
      doc["tolerance"] = tol;
      doc["epsilon"] = w.epsilon;
      emit(doc, out);
    } else if (witness_hat->parsed()) {
      auto w = io::witness_from_json(io::read_json(witness_file));
      w.epsilon = witness_hat->count("--epsilon") ? epsilon : hat_epsilon(w);
      HatOptions opts;
      opts.samples = samples;
      opts.seed = seed;
      emit(io::hat_to_json(hat_normalize(w, opts), w.epsilon), out);
    } else if (extract_cmd->parsed()) {
      const auto w = io::witness_from_json(io::read_json(witness_file));
      const double scale = extract_cmd->count("--r") ? r : w.r;
      const auto pts = build_translation_system(w, threshold_setup(w));
      emit(io::extraction_to_json(extract_cover(pts, *w.space, scale), pts, *w.space), out);
    } else if (report_cmd->parsed()) {
      const Json doc = report(dir);
      io::write_json(out.empty() ? std::filesystem::path(dir) / "report.json" : std::filesystem::path(out), doc);
      std::cout << summary_table(doc);
    } else if (sweep_cmd->parsed()) {
      auto cfg = sweep_flags.resolve(sweep_cmd);
      if (cfg.sweep_radii.empty()) cfg.sweep_radii = {5, 10, 20, 40};
      emit(sweep(cfg), out);
    } else if (run_cmd->parsed()) {
      const auto cfg = run_flags.resolve(run_cmd);
      const auto result = run(cfg);
      for (const auto& p : result.artifacts) std::cerr << "wrote " << p.string() << "\n";
      if (!result.report.is_null()) std::cout << summary_table(result.report);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
