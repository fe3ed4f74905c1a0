#pragma once

#include <optional>
#include <vector>

#include "ued/level.hpp"
#include "ued/rng.hpp"

namespace ued::grid {

// Maze actions (MiniGrid-style); the agent turns in place or steps forward.
inline constexpr int kMazeActionCount = 3;
inline constexpr int kActTurnLeft = 0;
inline constexpr int kActTurnRight = 1;
inline constexpr int kActForward = 2;

// Lava actions: 8-way position moves, N clockwise through NW.
inline constexpr int kLavaActionCount = 8;

inline constexpr int kDefaultTMax = 250;
inline constexpr double kLavaStepPenalty = 0.01;

// Maze observation: egocentric forward-facing 7x7 crop, 3 channels per cell
// (tile code, two unused), plus a 4-way facing one-hot.
inline constexpr int kMazeCrop = 7;
inline constexpr int kMazeObsDim = kMazeCrop * kMazeCrop * 3 + 4;

struct GridState {
  int agent = 0;
  Dir facing = Dir::E;
  int t = 0;
  bool done = false;
};

struct StepResult {
  GridState state;
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
};

int action_count(LevelKind kind);
int observation_dim(const Level& level);

std::vector<double> observe(const Level& level, const GridState& state);

// Deterministic; validates the level and throws on a non-grid kind.
GridState reset(const Level& level);

// Pure transition function; throws on invalid action ids or done episodes.
StepResult step(const Level& level, const GridState& state, int action,
                int t_max = kDefaultTMax);

// BFS distance agent_start -> goal. Mazes move 4-connected, lava grids
// 8-connected, matching the action sets. Empty when unreachable.
std::optional<int> shortest_path_length(const Level& level);

struct DrConfig {
  int min_obstacles = 0;
  int max_obstacles = 0;
};

// Domain-randomized level: obstacle count uniform on the range, obstacles
// placed one at a time at uniformly random cells (collisions are no-ops),
// then goal and agent on random remaining empty cells.
Level sample_dr(RngState& rng, LevelKind kind, int width, int height,
                DrConfig config, uint64_t id);

// n_edits primitive mutations: toggle-obstacle-at-random-cell, plus
// move-goal for mazes. Obstacles landing on the agent or goal displace the
// occupant to a random empty cell. Lineage fields point at the parent.
Level edit(const Level& parent, RngState& rng, int n_edits, uint64_t child_id);

struct Complexity {
  int obstacle_count = 0;
  std::optional<int> shortest_path;
  bool solvable = false;
};

Complexity complexity(const Level& level);

// Spanning-tree maze over odd cells (recursive backtracker); agent and goal
// at random distinct corridor cells. Width and height must be odd and >= 5.
Level perfect_maze(RngState& rng, int width, int height, uint64_t id);

}  // namespace ued::grid
