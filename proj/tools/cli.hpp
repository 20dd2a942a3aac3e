#pragma once

#include "seqei/io.hpp"
#include "seqei/sequential.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace seqei::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kUsage = 2 };

struct InitialDesignSpec {
  std::string generator = "maximin_lhs";  // maximin_lhs | lhs
  int n = 0;                              // 0: ten runs per input
  int restarts = 20;
  bool centered = false;
  std::string file;  // design or dataset CSV; a trailing z column skips evaluation
};

struct CandidateSpec {
  std::vector<int> grid;
  int lhs = 0;
  std::string file;
};

/// Everything needed for one sequential run, parsed from run-config JSON.
struct RunConfig {
  std::optional<Domain> domain;
  SimulatorSpec simulator;
  std::optional<SimulatorSpec> constraint_simulator;
  InitialDesignSpec initial;
  Transformation transformation;
  bool maximize = false;
  CriterionSpec criterion;
  CandidateSpec candidates;
  StopRule stop;
  FitConfig fit;
  int refit_every = 1;
  int percentile_mc = 10000;
  std::uint64_t seed = 0;
  std::string history_path;
  std::string surfaces_dir;
  std::string dataset_path;
};

/// Parses and validates a run config; relative paths resolve against base_dir.
/// `seed` is used when the config has none.
RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir,
                           std::uint64_t seed = 0);

/// Runs the configured loop and returns the history JSON (with run metadata).
json execute_run(const RunConfig& config);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace seqei::cli
