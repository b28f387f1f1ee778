#pragma once

// Experiment configuration, dispatch, seeded replication and CSV emission.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "treerange/distributions.hpp"
#include "treerange/point.hpp"

namespace treerange::harness {

struct ExperimentConfig {
  std::string experiment;

  // Distribution blocks.
  std::string offspring_kind = "geometric";  // geometric | table
  std::vector<std::pair<std::int64_t, double>> offspring_pmf;
  std::string jump_kind = "srw";  // srw | table
  int dim = 4;
  std::vector<std::pair<Point, double>> jump_support;

  // Size parameters (used per experiment).
  std::int64_t n = 0;
  std::int64_t p = 1;
  std::int64_t horizon = 0;
  std::int64_t j_max = 0;
  std::int64_t m = 0;
  std::int64_t k = 0;
  std::int64_t reps = 1;
  std::int64_t cap = 100000000;
  std::optional<std::int64_t> stop_p;
  std::int32_t box_radius = 0;  // 0 = experiment default
  std::int64_t h_reps = 0;      // 0 = experiment default

  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;

  // Analytic knobs.
  std::vector<std::int32_t> x;
  double eps = 1e-6;
  double r = 1.0;
  double t = 7.389056;
  double dt = 0.001;
  std::string level = "fast";  // verify

  distributions::OffspringDistribution make_offspring() const;
  distributions::JumpDistribution make_jump() const;
};

// Parse a JSON config document; unknown keys are rejected.
ExperimentConfig parse_config(const std::string& json_text);

// Apply the TREERANGE_SEED environment override if present.
void apply_env_seed(ExperimentConfig& config);

// Run the experiment: writes the fixed-header CSV to `csv` (and, for the
// population experiment, per-replica rows to config.out). Returns 0 on
// success, 2 on configuration/validation failure.
int run(const ExperimentConfig& config, std::ostream& csv, std::ostream& err);

// CSV header shared by every experiment row.
extern const char* const kCsvHeader;

}  // namespace treerange::harness
