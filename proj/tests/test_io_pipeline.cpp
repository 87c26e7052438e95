#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "coarsedim/io.hpp"
#include "coarsedim/pipeline.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coarsedim;
using namespace coarsedim::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("coarsedim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

io::Json small_config(const fs::path& out) {
  return io::Json{{"space", {{"family", "interval"}, {"sides", {24}}}},
                  {"cover", {{"brick_side", 7}}},
                  {"r", 1},
                  {"output_dir", out.string()}};
}

int cli(const std::string& args) {
  const std::string cmd = std::string(COARSEDIM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

io::Json without_provenance(io::Json doc) {
  doc.erase("provenance");
  return doc;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("space and cover round trip") {
  auto g = grid({3, 4}, GridMetric::l1);
  auto back = io::space_from_json(io::space_to_json(*g));
  REQUIRE(back->size() == g->size());
  CHECK(back->ids() == g->ids());
  CHECK(back->exact());
  for (std::size_t x = 0; x < g->size(); ++x)
    for (std::size_t y = 0; y < g->size(); ++y) CHECK(back->dist(x, y) == g->dist(x, y));

  auto s = interval(40);
  auto c = brick_cover(*s, 2, 10);
  auto c2 = io::cover_from_json(io::cover_to_json(c, *s), *s);
  CHECK(c2.families == c.families);
  CHECK(c2.scale_r == c.scale_r);
}

TEST_CASE("operator round trip keeps full precision") {
  auto s = interval(5);
  BlockMatrix m(5, 2);
  Block b(2, 2);
  b << Complex(0.1, 1.0 / 3), 2, Complex(0, -1e-17), 0.7;
  m.set(1, 3, b);
  auto back = io::operator_from_json(io::operator_to_json(BandOperator(s, m)), s);
  CHECK(back.mat.to_dense() == m.to_dense());
  CHECK_THROWS_AS(io::operator_from_json(io::Json::parse(R"({"fiber": 2, "blocks": [{"x": 9, "y": 0, "block": []}]})"), s),
                  Error);
}

TEST_CASE("witness round trip") {
  auto s = interval(20);
  auto w = build_upper_witness(s, brick_cover(*s, 1, 7), 1, 1);
  auto back = io::witness_from_json(io::witness_to_json(w));
  CHECK(back.d == w.d);
  CHECK(back.F == w.F);
  CHECK(back.test_set.size() == w.test_set.size());
  const Element a{w.test_set.back().mat};
  CHECK(norm(back.phi(back.psi(a)) - w.phi(w.psi(a))) < 1e-14);
  CHECK(approximation_error(back).first == doctest::Approx(approximation_error(w).first));
}

TEST_CASE("dense cp maps round trip") {
  auto t = transpose_map(2, 2);
  auto back = io::cpmap_from_json(io::cpmap_to_json(t));
  const auto e = matrix_unit(t.domain(), 0, 0, 1, 1, 0);
  CHECK(norm(back(e) - t(e)) == 0.0);
}

}

TEST_SUITE("pipeline") {

TEST_CASE("config validation") {
  auto out = scratch("cfg");
  auto doc = small_config(out);
  auto cfg = parse_config(doc);
  CHECK(cfg.r == 1.0);
  CHECK(cfg.brick_side == 7.0);
  CHECK(parse_config(config_to_json(cfg)).brick_side == 7.0);
  CHECK(config_hash(cfg) == config_hash(parse_config(config_to_json(cfg))));

  auto bad = doc;
  bad["radius"] = 3;
  CHECK_THROWS_AS(parse_config(bad), UsageError);
  bad = doc;
  bad["stages"] = {"space", "witness"};
  CHECK_THROWS_AS(parse_config(bad), UsageError);
  bad = doc;
  bad["r"] = "five";
  CHECK_THROWS_AS(parse_config(bad), UsageError);
  bad = doc;
  bad.erase("space");
  CHECK_THROWS_AS(parse_config(bad), UsageError);
}

TEST_CASE("a run is deterministic") {
  auto a = scratch("run_a"), b = scratch("run_b");
  auto cfg_a = parse_config(small_config(a));
  auto cfg_b = parse_config(small_config(b));
  auto ra = run(cfg_a);
  run(cfg_b);
  CHECK(ra.artifacts.size() >= 6);
  for (const auto& p : ra.artifacts) {
    INFO(p.string());
    const auto other = b / p.filename();
    REQUIRE(fs::exists(other));
    CHECK(without_provenance(io::read_json(p)) == without_provenance(io::read_json(other)));
    CHECK(io::read_json(p)["provenance"]["version"] == kVersion);
  }
  auto rep = report(a);
  CHECK(!summary_table(rep).empty());
  CHECK_THROWS_AS(report(scratch("empty")), FileError);
}

TEST_CASE("stage failures carry the stage name") {
  auto out = scratch("fail");
  auto doc = small_config(out);
  doc["cover"]["brick_side"] = 2;  // not 3r separated once the witness is built
  doc["r"] = 1;
  auto cfg = parse_config(doc);
  try {
    run(cfg);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(!e.stage().empty());
  }
}

TEST_CASE("command line exit codes") {
  auto dir = scratch("cli");
  const auto space = (dir / "space.json").string();
  CHECK(cli("space gen --family interval --sides 30 -o " + space) == 0);
  CHECK(fs::exists(space));
  CHECK(cli("cover gen --space " + space + " --r 1 --brick-side 7 -o " + (dir / "cover.json").string()) == 0);
  CHECK(cli("cover check --space " + space + " --cover " + (dir / "cover.json").string() + " --r 1") == 0);
  CHECK(cli("space gen --sides") == 2);
  CHECK(cli("nonsense") == 2);
  CHECK(cli("run --family interval --sides 30 --r 1 --brick-side 7 --stages space witness --output-dir " +
            (dir / "bad").string()) == 2);
  CHECK(cli("run --family interval --sides 30 --r 1 --brick-side 2 --stages space cover witness --output-dir " +
            (dir / "fail").string()) == 3);
  CHECK(cli("run --family interval --sides 30 --r 1 --brick-side 7 --stages space cover witness check --output-dir " +
            (dir / "ok").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "conditions.json"));
}

}
