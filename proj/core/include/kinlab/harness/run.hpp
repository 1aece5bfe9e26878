#pragma once

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "kinlab/harness/config.hpp"

namespace kinlab {

// Line-delimited metrics: {"ordinal", "episodes", ...named scalars}.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& file);
  void write(std::uint64_t episodes, nlohmann::json metrics);
  std::uint64_t ordinal() const { return ordinal_; }

 private:
  std::ofstream out_;
  std::uint64_t ordinal_ = 0;
};

struct RunOutcome {
  std::filesystem::path directory;
  nlohmann::json summary;
  bool ok = true;
};

// Creates <root>/<name>/ with config.json, metrics.jsonl, artifacts/,
// summary.json and summary.txt.  On failure the partial artifacts are kept
// and error.json records the message; the outcome has ok = false.
RunOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& root = {});

// Wraps homer with doubling N and halving eta until the mean validation
// loss stops improving by more than `rel_tol`, or `max_rounds` is reached.
nlohmann::json restart_loop(const ExperimentConfig& cfg, int max_rounds = 4, double rel_tol = 0.01);

}  // namespace kinlab
