#pragma once

#include <array>
#include <vector>

#include "ued/level.hpp"
#include "ued/rng.hpp"

namespace ued::terrain {

inline constexpr int kActionDim = 2;   // (thrust, hop)
inline constexpr int kObsDim = 9;
inline constexpr int kMaxSteps = 2000;
inline constexpr double kCourseLength = 200.0;
inline constexpr double kFallPenalty = -100.0;
inline constexpr double kMaxSpeed = 2.0;

enum class DifficultyCategory {
  Easy,
  Challenging,
  VeryChallenging,
  ExtremelyChallenging,
};

const char* to_string(DifficultyCategory c);

// Table-driven thresholds: stump high >= 2.4, pit high >= 6, roughness >= 4.5;
// the category is the count of thresholds met.
DifficultyCategory categorize(const Level& level);

Level easy_init(TerrainMode mode, RngState& rng, uint64_t id);

// Every parameter uniform on [0, max]; range pairs sorted low <= high.
Level sample_dr(RngState& rng, TerrainMode mode, uint64_t id);

// Mutates exactly one parameter by its edit size with a random sign
// (roughness draws its magnitude from Unif(0, 0.6)). A step that clamping
// would turn into a no-op flips direction so the child always differs.
Level edit(const Level& parent, RngState& rng, uint64_t child_id);

enum class ObstacleKind { Stump, Pit, Stair };

struct Obstacle {
  ObstacleKind kind;
  double position;
  double size;
};

// Deterministic rendering of the genotype: obstacle positions and sizes are
// drawn from the level's seed, so identical (payload, seed) give identical
// courses.
struct Course {
  std::vector<Obstacle> obstacles;  // sorted by position
  std::vector<double> drag;         // per-unit speed drag in [0, 0.6]
  double roughness = 0.0;
};

Course render_course(const TerrainPayload& payload);

// Heightfield profile for plotting (x, ground height) at 0.5-unit steps.
std::vector<std::array<double, 2>> heightfield(const TerrainPayload& payload);

struct TerrainState {
  double x = 0.0;
  double velocity = 0.0;
  bool airborne = false;  // hopped on the previous step
  int t = 0;
  bool done = false;
};

struct StepResult {
  TerrainState state;
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
};

std::vector<double> observe(const Course& course, const TerrainState& state);

TerrainState reset(const Level& level);

// Kinematic runner: thrust accelerates, hopping boosts obstacle clearance at
// a reward cost. Crossing an obstacle larger than the current capability is
// a fall (-100, terminal). Episodes end at the course end, a fall, or
// kMaxSteps.
StepResult step(const Course& course, const TerrainState& state,
                const std::array<double, 2>& action);

}  // namespace ued::terrain
