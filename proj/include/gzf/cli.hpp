#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gzf/config.hpp"
#include "gzf/grad_check.hpp"
#include "gzf/trainer.hpp"

namespace gzf {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitIo = 2, kExitNumeric = 3, kExitVerification = 4 };

/// Entry point of the `gzf` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

struct TrainRunOptions {
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> resume;
  int save_every = 0;  // checkpoint cadence in epochs; 0 writes only the final one
  std::optional<int> stop_after_epoch;
};

/// Trains `run` on the manifest and writes metrics.jsonl, metrics.csv,
/// summary.json, checkpoint.gzf and config.resolved.json under `out_dir`.
/// The dataset's class count overrides the model's.
TrainResult run_training(RunConfig run, const TrainRunOptions& opts, std::ostream& log);

/// Matches the model's dropout sites and class count to the run and dataset.
RunConfig resolve_run_config(RunConfig run, const DatasetManifest& m);

struct ModuleGradCheck {
  std::string module;
  GradCheckResult result;
};

/// Finite-difference checks of each module at tiny sizes: gaze encoder with a
/// classifier, image encoder with a classifier, fusion layer, cross-attention.
std::vector<ModuleGradCheck> gradcheck_modules(double eps, std::uint64_t seed = 0);

inline constexpr double kGradCheckTolerance = 1e-4;

/// One cell of an ablation grid.
struct AblationCell {
  std::string name;
  RunConfig run;
  int nominal_hidden = 0;  // grid label h before desk scaling (table2 only)
  int layers = 0;
};

/// axis: "gaze", "table3" or "table2".
std::vector<AblationCell> ablation_cells(const std::string& axis, const RunConfig& base);

}  // namespace gzf
