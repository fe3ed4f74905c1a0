#include "ued/grid_env.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace ued::grid {

namespace {

constexpr int kRowDelta[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kColDelta[8] = {0, 1, 1, 1, 0, -1, -1, -1};

void require_grid(const Level& level) {
  if (!level.is_grid()) {
    throw std::invalid_argument("expected a grid level, got terrain");
  }
}

Tile obstacle_tile(LevelKind kind) {
  return kind == LevelKind::MazeGrid ? Tile::Wall : Tile::Lava;
}

Dir turn(Dir d, int delta) {
  return static_cast<Dir>((static_cast<int>(d) + delta + 4) % 4);
}

// Forward/lateral crop offsets to world deltas for each facing.
void crop_to_world(Dir facing, int fwd, int lat, int& dr, int& dc) {
  switch (facing) {
    case Dir::N: dr = -fwd; dc = lat; break;
    case Dir::E: dr = lat; dc = fwd; break;
    case Dir::S: dr = fwd; dc = -lat; break;
    case Dir::W: dr = -lat; dc = -fwd; break;
  }
}

double tile_code(const GridPayload& g, int r, int c) {
  if (!g.in_bounds(r, c)) return 1.0;  // out of bounds reads as wall
  const int idx = g.index(r, c);
  if (idx == g.goal) return 2.0;
  switch (g.cells[idx]) {
    case Tile::Empty: return 0.0;
    case Tile::Wall: return 1.0;
    case Tile::Lava: return 3.0;
  }
  return 0.0;
}

int random_empty_cell(const GridPayload& g, RngState& rng,
                      const std::vector<int>& exclude) {
  std::vector<int> candidates;
  for (int i = 0; i < g.width * g.height; ++i) {
    if (g.cells[i] != Tile::Empty) continue;
    if (std::find(exclude.begin(), exclude.end(), i) != exclude.end()) continue;
    candidates.push_back(i);
  }
  if (candidates.empty()) return -1;
  return candidates[rng.uniform_u64(candidates.size())];
}

}  // namespace

int action_count(LevelKind kind) {
  return kind == LevelKind::MazeGrid ? kMazeActionCount : kLavaActionCount;
}

int observation_dim(const Level& level) {
  require_grid(level);
  if (level.kind == LevelKind::MazeGrid) return kMazeObsDim;
  const GridPayload& g = level.grid();
  return 3 * g.width * g.height;
}

std::vector<double> observe(const Level& level, const GridState& state) {
  const GridPayload& g = level.grid();
  if (level.kind == LevelKind::MazeGrid) {
    // 7x7 crop with the agent at the bottom-center cell looking "up".
    std::vector<double> obs(kMazeObsDim, 0.0);
    const int ar = g.row(state.agent);
    const int ac = g.col(state.agent);
    for (int i = 0; i < kMazeCrop; ++i) {
      for (int j = 0; j < kMazeCrop; ++j) {
        const int fwd = kMazeCrop - 1 - i;
        const int lat = j - kMazeCrop / 2;
        int dr = 0, dc = 0;
        crop_to_world(state.facing, fwd, lat, dr, dc);
        obs[(i * kMazeCrop + j) * 3] = tile_code(g, ar + dr, ac + dc);
      }
    }
    obs[kMazeCrop * kMazeCrop * 3 + static_cast<int>(state.facing)] = 1.0;
    return obs;
  }
  // Lava grid: full-observability planes (lava, goal, agent).
  const int n = g.width * g.height;
  std::vector<double> obs(3 * n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (g.cells[i] == Tile::Lava) obs[i] = 1.0;
  }
  obs[n + g.goal] = 1.0;
  obs[2 * n + state.agent] = 1.0;
  return obs;
}

GridState reset(const Level& level) {
  require_grid(level);
  level.validate();
  GridState s;
  s.agent = level.grid().agent_start;
  s.facing = level.grid().agent_facing;
  s.t = 0;
  s.done = false;
  return s;
}

StepResult step(const Level& level, const GridState& state, int action,
                int t_max) {
  require_grid(level);
  if (state.done) throw std::logic_error("step on a done episode");
  const GridPayload& g = level.grid();
  if (action < 0 || action >= action_count(level.kind)) {
    throw std::invalid_argument("invalid action id " + std::to_string(action));
  }

  GridState next = state;
  next.t = state.t + 1;
  double reward = 0.0;
  bool done = false;

  if (level.kind == LevelKind::MazeGrid) {
    if (action == kActTurnLeft) {
      next.facing = turn(state.facing, -1);
    } else if (action == kActTurnRight) {
      next.facing = turn(state.facing, +1);
    } else {
      int dr = 0, dc = 0;
      crop_to_world(state.facing, 1, 0, dr, dc);
      const int r = g.row(state.agent) + dr;
      const int c = g.col(state.agent) + dc;
      if (g.in_bounds(r, c) && g.at(r, c) == Tile::Empty) {
        next.agent = g.index(r, c);
      }
    }
    if (next.agent == g.goal) {
      reward = 1.0 - static_cast<double>(next.t) / t_max;
      done = true;
    } else if (next.t >= t_max) {
      done = true;
    }
  } else {
    reward = -kLavaStepPenalty;
    const int r = g.row(state.agent) + kRowDelta[action];
    const int c = g.col(state.agent) + kColDelta[action];
    if (g.in_bounds(r, c)) next.agent = g.index(r, c);
    if (g.cells[next.agent] == Tile::Lava) {
      done = true;  // no terminal bonus; step penalties stand
    } else if (next.agent == g.goal) {
      reward += 1.0;
      done = true;
    } else if (next.t >= t_max) {
      done = true;
    }
  }

  next.done = done;
  return StepResult{next, observe(level, next), reward, done};
}

std::optional<int> shortest_path_length(const Level& level) {
  require_grid(level);
  const GridPayload& g = level.grid();
  const int n = g.width * g.height;
  const int dirs = level.kind == LevelKind::MazeGrid ? 4 : 8;
  // 4-connectivity uses the cardinal subset of the 8-way deltas.
  static constexpr int kCardinal[4] = {0, 2, 4, 6};
  std::vector<int> dist(n, -1);
  std::deque<int> queue;
  dist[g.agent_start] = 0;
  queue.push_back(g.agent_start);
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    if (cur == g.goal) return dist[cur];
    for (int k = 0; k < dirs; ++k) {
      const int d = dirs == 4 ? kCardinal[k] : k;
      const int r = g.row(cur) + kRowDelta[d];
      const int c = g.col(cur) + kColDelta[d];
      if (!g.in_bounds(r, c)) continue;
      const int idx = g.index(r, c);
      if (dist[idx] >= 0 || g.cells[idx] != Tile::Empty) continue;
      dist[idx] = dist[cur] + 1;
      queue.push_back(idx);
    }
  }
  return std::nullopt;
}

Level sample_dr(RngState& rng, LevelKind kind, int width, int height,
                DrConfig config, uint64_t id) {
  if (kind == LevelKind::Terrain) {
    throw std::invalid_argument("sample_dr: grid kinds only");
  }
  const int n = width * height;
  if (config.min_obstacles < 0 || config.max_obstacles < config.min_obstacles ||
      config.max_obstacles > n - 2) {
    throw std::invalid_argument("obstacle range exceeds cell count");
  }
  GridPayload g;
  g.width = width;
  g.height = height;
  g.cells.assign(n, Tile::Empty);
  const int count =
      rng.uniform_int(config.min_obstacles, config.max_obstacles);
  for (int k = 0; k < count; ++k) {
    const int cell = static_cast<int>(rng.uniform_u64(n));
    if (g.cells[cell] == Tile::Empty) g.cells[cell] = obstacle_tile(kind);
  }
  // Goal and agent take the final two placements, on remaining empty cells.
  g.goal = random_empty_cell(g, rng, {});
  g.agent_start = random_empty_cell(g, rng, {g.goal});
  if (g.goal < 0 || g.agent_start < 0) {
    throw std::invalid_argument("no empty cells left for goal/agent");
  }
  g.agent_facing = kind == LevelKind::MazeGrid
                       ? static_cast<Dir>(rng.uniform_u64(4))
                       : Dir::E;
  Level level;
  level.kind = kind;
  level.id = id;
  level.generation = 0;
  level.payload = std::move(g);
  level.validate();
  return level;
}

Level edit(const Level& parent, RngState& rng, int n_edits, uint64_t child_id) {
  require_grid(parent);
  if (n_edits < 1) throw std::invalid_argument("n_edits must be >= 1");
  Level child = parent;
  child.id = child_id;
  child.parent_id = parent.id;
  child.generation = parent.generation + 1;
  GridPayload& g = child.grid();
  const int n = g.width * g.height;
  const Tile obstacle = obstacle_tile(parent.kind);
  const bool can_move_goal = parent.kind == LevelKind::MazeGrid;

  for (int e = 0; e < n_edits; ++e) {
    const bool move_goal = can_move_goal && rng.uniform_u64(2) == 1;
    if (move_goal) {
      const int target = random_empty_cell(g, rng, {g.agent_start, g.goal});
      if (target >= 0) g.goal = target;
      continue;
    }
    const int cell = static_cast<int>(rng.uniform_u64(n));
    if (cell == g.agent_start || cell == g.goal) {
      // Placing an obstacle on an occupant displaces it; void the edit when
      // there is nowhere left to put it.
      const int target = random_empty_cell(g, rng, {g.agent_start, g.goal, cell});
      if (target < 0) continue;
      g.cells[cell] = obstacle;
      (cell == g.agent_start ? g.agent_start : g.goal) = target;
    } else if (g.cells[cell] != Tile::Empty) {
      g.cells[cell] = Tile::Empty;
    } else {
      g.cells[cell] = obstacle;
    }
  }
  child.validate();
  return child;
}

Complexity complexity(const Level& level) {
  require_grid(level);
  Complexity m;
  for (Tile t : level.grid().cells) {
    if (t != Tile::Empty) ++m.obstacle_count;
  }
  m.shortest_path = shortest_path_length(level);
  m.solvable = m.shortest_path.has_value();
  return m;
}

Level perfect_maze(RngState& rng, int width, int height, uint64_t id) {
  if (width < 5 || height < 5 || width % 2 == 0 || height % 2 == 0) {
    throw std::invalid_argument("perfect_maze requires odd dimensions >= 5");
  }
  GridPayload g;
  g.width = width;
  g.height = height;
  g.cells.assign(static_cast<size_t>(width) * height, Tile::Wall);

  const int rooms_w = (width - 1) / 2;
  const int rooms_h = (height - 1) / 2;
  auto room_index = [&](int rr, int rc) { return g.index(2 * rr + 1, 2 * rc + 1); };

  std::vector<uint8_t> visited(static_cast<size_t>(rooms_w) * rooms_h, 0);
  std::vector<std::pair<int, int>> stack;
  int rr = static_cast<int>(rng.uniform_u64(rooms_h));
  int rc = static_cast<int>(rng.uniform_u64(rooms_w));
  visited[rr * rooms_w + rc] = 1;
  g.cells[room_index(rr, rc)] = Tile::Empty;
  stack.emplace_back(rr, rc);

  constexpr int dr[4] = {-1, 0, 1, 0};
  constexpr int dc[4] = {0, 1, 0, -1};
  while (!stack.empty()) {
    auto [cr, cc] = stack.back();
    int options[4];
    int n_options = 0;
    for (int k = 0; k < 4; ++k) {
      const int nr = cr + dr[k];
      const int nc = cc + dc[k];
      if (nr < 0 || nr >= rooms_h || nc < 0 || nc >= rooms_w) continue;
      if (!visited[nr * rooms_w + nc]) options[n_options++] = k;
    }
    if (n_options == 0) {
      stack.pop_back();
      continue;
    }
    const int k = options[rng.uniform_u64(n_options)];
    const int nr = cr + dr[k];
    const int nc = cc + dc[k];
    visited[nr * rooms_w + nc] = 1;
    g.cells[room_index(nr, nc)] = Tile::Empty;
    g.cells[g.index(2 * cr + 1 + dr[k], 2 * cc + 1 + dc[k])] = Tile::Empty;
    stack.emplace_back(nr, nc);
  }

  std::vector<int> corridors;
  for (int i = 0; i < width * height; ++i) {
    if (g.cells[i] == Tile::Empty) corridors.push_back(i);
  }
  const int a = static_cast<int>(rng.uniform_u64(corridors.size()));
  int b = static_cast<int>(rng.uniform_u64(corridors.size() - 1));
  if (b >= a) ++b;
  g.agent_start = corridors[a];
  g.goal = corridors[b];
  g.agent_facing = static_cast<Dir>(rng.uniform_u64(4));

  Level level;
  level.kind = LevelKind::MazeGrid;
  level.id = id;
  level.generation = 0;
  level.payload = std::move(g);
  level.validate();
  return level;
}

}  // namespace ued::grid
