#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairflow/instance.hpp"
#include "fairflow/metrics.hpp"
#include "fairflow/milp.hpp"

namespace fairflow {

// Process exit codes shared by the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitInstance = 4,
};

// One experiment: a set of algorithms run against a single instance, with
// files written under out_dir. `solver` is "embedded" or "external:<command>";
// an external command is invoked as `<command> <model.lp>` and must print the
// path of its solution file as the last line of stdout.
struct ExperimentConfig {
  std::vector<std::string> algorithms;            // empty = all eight
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};  // Random reports the mean over these
  std::optional<double> alpha;                    // required by FlowMILP2S
  std::optional<double> penalty;                  // absent = auto from the instance
  std::string solver = "embedded";
  std::string out_dir = ".";
  bool trace = false;
  InitialMode initial_mode = InitialMode::Free;
};

struct AlgoFailure {
  std::string algorithm;
  std::string message;
};

struct ExperimentResult {
  int exit_code = kExitOk;
  std::vector<MetricsRow> rows;  // sorted by algorithm name
  std::vector<AlgoFailure> failures;
  std::vector<std::string> files_written;
};

// The eight supported algorithm names, canonical spelling.
const std::vector<std::string>& canonical_algorithms();
bool is_offline_algorithm(const std::string& name);

// Validates config-level requirements (known names, FlowMILP2S needs alpha).
// Throws InvalidParameter with a user-facing message.
void validate_config(const ExperimentConfig& cfg);

// Runs every requested algorithm, writes metrics.csv, per-algorithm
// summary/Lorenz CSVs, offline model and solution files, optional traces,
// and failures.json when something went wrong. Per-algorithm errors are
// collected rather than thrown; the exit code is kExitSolver if any
// algorithm failed, else kExitOk. Outputs are byte-deterministic for a
// fixed (instance, config).
ExperimentResult run_experiment(const Instance& inst, const ExperimentConfig& cfg);

// Rebuilds the combined metrics.csv from summary_<Algo>.csv files found in
// `dir`. Returns the rows (sorted by algorithm name). Throws IoError when
// the directory holds no summaries.
std::vector<MetricsRow> reaggregate_summaries(const std::string& dir);

}  // namespace fairflow
