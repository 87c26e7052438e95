#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coarsedim/errors.hpp"
#include "coarsedim/io.hpp"
#include "coarsedim/space.hpp"

namespace coarsedim {

inline constexpr const char* kVersion = "0.1.0";

// Bad configuration or command line; exit status 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

// A stage raised a hard error; exit status 3.
class StageError : public Error {
 public:
  StageError(std::string stage, std::filesystem::path file, const std::string& what)
      : Error(stage + " stage failed (" + file.string() + "): " + what), stage_(std::move(stage)), file_(std::move(file)) {}
  const std::string& stage() const { return stage_; }
  const std::filesystem::path& file() const { return file_; }

 private:
  std::string stage_;
  std::filesystem::path file_;
};

enum class Stage { space, cover, witness, check, hat, extract, report };
inline constexpr Stage kStageOrder[] = {Stage::space, Stage::cover, Stage::witness, Stage::check,
                                        Stage::hat,   Stage::extract, Stage::report};
const char* stage_name(Stage s);

struct ExperimentConfig {
  GridParams space;
  std::optional<std::filesystem::path> space_file;  // instead of generating
  std::optional<std::filesystem::path> cover_file;  // instead of auto-brick
  double brick_side = 30.0;
  double r = 5.0;
  std::size_t fiber = 1;
  double epsilon = 1.0;
  std::optional<double> hat_epsilon;  // unset: smallest admissible, see hat_epsilon()
  std::optional<double> test_scale;
  std::vector<std::filesystem::path> extra_test_files;  // operator JSON, added to the test set
  std::vector<Stage> stages{std::begin(kStageOrder), std::end(kStageOrder)};
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 7;
  double tolerance = 1e-9;
  std::vector<double> sweep_radii;
};

// Throws UsageError on unknown keys, bad types or a stage list that is not a
// prefix of the canonical order.
ExperimentConfig parse_config(const io::Json& doc);
io::Json config_to_json(const ExperimentConfig& cfg);

// FNV-1a over the canonical JSON of the config.
std::string config_hash(const ExperimentConfig& cfg);
io::Json provenance(const ExperimentConfig& cfg);

struct RunResult {
  std::vector<std::filesystem::path> artifacts;
  io::Json report;  // empty unless the report stage ran
};

// Runs the configured stages, writing one artifact per stage into
// output_dir. Failed verdicts are recorded in the artifacts; hard errors
// become StageError.
RunResult run(const ExperimentConfig& cfg);

// Error of condition (2) along the radii with the test scale held fixed. The
// brick side scales with r.
io::Json sweep(const ExperimentConfig& cfg);

// Consolidates the artifacts found in a directory. FileError if none exist.
io::Json report(const std::filesystem::path& dir);
std::string summary_table(const io::Json& report);

}  // namespace coarsedim
