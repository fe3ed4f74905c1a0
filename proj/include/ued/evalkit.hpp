#pragma once

#include <span>
#include <string>
#include <vector>

#include "ued/level.hpp"
#include "ued/policy.hpp"
#include "ued/rng.hpp"

namespace ued::evalkit {

enum class ProceduralSuite { None, PerfectMaze, TerrainExtreme };

struct SuiteLevel {
  std::string name;
  Level level;
};

struct TestSuite {
  std::string name;
  std::vector<SuiteLevel> fixtures;  // empty for procedural suites
  ProceduralSuite procedural = ProceduralSuite::None;
  int width = 51, height = 51;  // perfect-maze dimensions
  TerrainMode terrain_mode = TerrainMode::FiveD;
  int episodes_per_level = 100;
  int t_max = 0;  // 0: grid default (perfect mazes use 2*W*H)
};

// Fixture file: '# <name>' header lines, one encoded level per line.
// Decode failures are collected and reported together with line numbers.
TestSuite load_fixtures(const std::string& path);

// Built-in procedural suites: "perfect-maze-51", "perfect-maze-21",
// "terrain-extreme-5d", "terrain-extreme-8d".
TestSuite builtin_suite(const std::string& name);

// Named suite: a fixture path, or one of the built-ins above.
TestSuite resolve_suite(const std::string& name_or_path);

struct LevelResult {
  std::string name;
  int episodes = 0;
  double solved_rate = 0.0;
  double mean_return = 0.0;
  double return_sem = 0.0;
};

struct EvalResult {
  std::vector<LevelResult> per_level;
  double solved_rate = 0.0;  // episode-weighted
  double mean_return = 0.0;
};

// Greedy evaluation (grids: argmax with ties to the lowest action id;
// terrain: distribution mean) for the configured episode count per level.
EvalResult evaluate(const PolicyParams& params, const TestSuite& suite,
                    RngState rng, int episodes_override = 0);

// Mean of the middle 50% of the sorted sample, with fractional weights at
// the quartile boundaries.
double iqm(std::span<const double> samples);

// Mean over samples of max(0, 1 - sample/optimum).
double optimality_gap(std::span<const double> samples, double optimum);

}  // namespace ued::evalkit
