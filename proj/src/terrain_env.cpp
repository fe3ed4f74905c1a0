#include "ued/terrain_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ued::terrain {

namespace {

constexpr double kThrustGain = 0.45;
constexpr double kDragBase = 0.85;
constexpr double kStride = 0.35;
constexpr double kStepCost = 0.05;
constexpr double kHopCost = 0.1;
constexpr double kProgressGain = 1.5;
// Capability rules: an obstacle is passable iff its size is at most
// f(velocity, hop). Tuned so the hardest genotypes are barely passable at
// full speed with a full hop.
constexpr double kJumpSpeedGain = 1.2;
constexpr double kJumpHopGain = 3.6;
constexpr double kLeapGain = 2.8;
constexpr double kLeapHopGain = 1.7;

void require_terrain(const Level& level) {
  if (level.kind != LevelKind::Terrain) {
    throw std::invalid_argument("expected a terrain level");
  }
}

double clamp(double v, double lo, double hi) {
  return std::min(hi, std::max(lo, v));
}

int64_t course_seed(const TerrainPayload& p) { return p.seed.value_or(0); }

}  // namespace

const char* to_string(DifficultyCategory c) {
  switch (c) {
    case DifficultyCategory::Easy: return "easy";
    case DifficultyCategory::Challenging: return "challenging";
    case DifficultyCategory::VeryChallenging: return "very-challenging";
    case DifficultyCategory::ExtremelyChallenging: return "extremely-challenging";
  }
  return "?";
}

DifficultyCategory categorize(const Level& level) {
  require_terrain(level);
  const TerrainPayload& t = level.terrain();
  int met = 0;
  if (t.stump_high() >= 2.4) ++met;
  if (t.pit_high() >= 6.0) ++met;
  if (t.roughness() >= 4.5) ++met;
  return static_cast<DifficultyCategory>(met);
}

Level easy_init(TerrainMode mode, RngState& rng, uint64_t id) {
  TerrainPayload t;
  t.mode = mode;
  const double rough = rng.uniform(0.0, 0.6);
  if (mode == TerrainMode::EightD) {
    t.params = {0.0, 0.4, 0.0, 0.4, 1.0, rough, 0.0, 0.8};
  } else {
    t.params = {0.4, 0.8, rough, 0.4, 1.0};
  }
  t.seed = static_cast<int64_t>(rng.next_u64() >> 1);
  Level level;
  level.kind = LevelKind::Terrain;
  level.id = id;
  level.payload = std::move(t);
  level.validate();
  return level;
}

Level sample_dr(RngState& rng, TerrainMode mode, uint64_t id) {
  TerrainPayload t;
  t.mode = mode;
  const auto& info = terrain_param_info(mode);
  t.params.resize(info.size());
  for (size_t i = 0; i < info.size(); ++i) {
    if (info[i].integer) {
      t.params[i] = rng.uniform_int(0, static_cast<int>(info[i].max_value));
    } else {
      t.params[i] = rng.uniform(0.0, info[i].max_value);
    }
  }
  for (size_t i = 0; i < info.size(); ++i) {
    if (info[i].range_group >= 0 && info[i].is_high &&
        t.params[i - 1] > t.params[i]) {
      std::swap(t.params[i - 1], t.params[i]);
    }
  }
  t.seed = static_cast<int64_t>(rng.next_u64() >> 1);
  Level level;
  level.kind = LevelKind::Terrain;
  level.id = id;
  level.payload = std::move(t);
  level.validate();
  return level;
}

Level edit(const Level& parent, RngState& rng, uint64_t child_id) {
  require_terrain(parent);
  Level child = parent;
  child.id = child_id;
  child.parent_id = parent.id;
  child.generation = parent.generation + 1;
  TerrainPayload& t = child.terrain();
  const auto& info = terrain_param_info(t.mode);

  const size_t i = rng.uniform_u64(info.size());
  const double magnitude =
      info[i].name == std::string("roughness") ? rng.uniform(0.0, 0.6)
                                               : info[i].edit_size;
  double sign = rng.uniform_u64(2) == 0 ? 1.0 : -1.0;
  const double old = t.params[i];
  double next = clamp(old + sign * magnitude, 0.0, info[i].max_value);
  if (next == old) {  // clamped into a no-op: flip direction
    next = clamp(old - sign * magnitude, 0.0, info[i].max_value);
  }
  t.params[i] = info[i].integer ? std::round(next) : next;

  if (info[i].range_group >= 0) {
    const size_t lo = info[i].is_high ? i - 1 : i;
    if (t.params[lo] > t.params[lo + 1]) std::swap(t.params[lo], t.params[lo + 1]);
  }
  child.validate();
  return child;
}

Course render_course(const TerrainPayload& p) {
  Course course;
  course.roughness = p.roughness();
  RngState rng(static_cast<uint64_t>(course_seed(p)), 0xC0u);

  auto add = [&](ObstacleKind kind, double pos, double size) {
    if (size > 1e-9) course.obstacles.push_back({kind, pos, size});
  };

  for (int k = 0; k < 4; ++k) {
    add(ObstacleKind::Stump, rng.uniform(15.0, kCourseLength - 15.0),
        rng.uniform(p.stump_low(), p.stump_high()));
  }
  for (int k = 0; k < 4; ++k) {
    add(ObstacleKind::Pit, rng.uniform(15.0, kCourseLength - 15.0),
        rng.uniform(p.pit_low(), p.pit_high()));
  }
  // One staircase; each step is a separate clearance test one unit apart.
  const double stair_pos = rng.uniform(15.0, kCourseLength - 15.0);
  const double stair_size = rng.uniform(p.stair_low(), p.stair_high());
  for (int s = 0; s < p.stair_steps(); ++s) {
    add(ObstacleKind::Stair, stair_pos + s, stair_size);
  }
  std::sort(course.obstacles.begin(), course.obstacles.end(),
            [](const Obstacle& a, const Obstacle& b) {
              return a.position < b.position;
            });

  const int cells = static_cast<int>(kCourseLength) + 1;
  course.drag.resize(cells);
  for (int i = 0; i < cells; ++i) {
    course.drag[i] = 0.06 * course.roughness * rng.uniform();
  }
  return course;
}

std::vector<std::array<double, 2>> heightfield(const TerrainPayload& p) {
  const Course course = render_course(p);
  std::vector<std::array<double, 2>> out;
  for (double x = 0.0; x <= kCourseLength; x += 0.5) {
    double h = course.drag[static_cast<int>(x)] * 2.0;  // roughness texture
    for (const Obstacle& o : course.obstacles) {
      if (std::abs(x - o.position) < 0.5) {
        h = o.kind == ObstacleKind::Pit ? -o.size : std::max(h, o.size);
      }
    }
    out.push_back({x, h});
  }
  return out;
}

std::vector<double> observe(const Course& course, const TerrainState& state) {
  std::vector<double> obs(kObsDim, 0.0);
  obs[0] = state.velocity / kMaxSpeed;
  const Obstacle* next = nullptr;
  for (const Obstacle& o : course.obstacles) {
    if (o.position > state.x) {
      next = &o;
      break;
    }
  }
  if (next) {
    obs[1] = clamp((next->position - state.x) / 20.0, 0.0, 1.0);
    obs[2] = next->size / 10.0;
    obs[3 + static_cast<int>(next->kind)] = 1.0;
  } else {
    obs[1] = 1.0;
  }
  const int cell = static_cast<int>(clamp(state.x, 0.0, kCourseLength));
  obs[6] = course.roughness / 10.0 * (0.5 + course.drag[cell]);
  obs[7] = state.x / kCourseLength;
  obs[8] = state.airborne ? 1.0 : 0.0;
  return obs;
}

TerrainState reset(const Level& level) {
  require_terrain(level);
  level.validate();
  return TerrainState{};
}

StepResult step(const Course& course, const TerrainState& state,
                const std::array<double, 2>& action) {
  if (state.done) throw std::logic_error("step on a done episode");
  TerrainState next = state;
  next.t = state.t + 1;

  const double thrust = clamp(action[0], -1.0, 1.0);
  const double hop = clamp(action[1], 0.0, 1.0);

  // Mid-air thrust is half as effective.
  const double gain = state.airborne ? 0.5 * kThrustGain : kThrustGain;
  next.velocity =
      clamp(kDragBase * state.velocity + gain * thrust, 0.0, kMaxSpeed);
  next.airborne = hop > 0.5;

  const int cell = static_cast<int>(clamp(state.x, 0.0, kCourseLength));
  const double v_eff = next.velocity * (1.0 - course.drag[cell]);
  const double x_new = state.x + kStride * v_eff;

  double reward = kProgressGain * (x_new - state.x) - kStepCost - kHopCost * hop;
  bool done = false;
  bool fell = false;

  for (const Obstacle& o : course.obstacles) {
    if (o.position <= state.x || o.position > x_new) continue;
    const double capability =
        o.kind == ObstacleKind::Pit
            ? kLeapGain * (next.velocity + kLeapHopGain * hop)
            : kJumpSpeedGain * next.velocity + kJumpHopGain * hop;
    if (o.size > capability) {
      fell = true;
      break;
    }
  }

  next.x = x_new;
  if (fell) {
    reward += kFallPenalty;
    done = true;
  } else if (x_new >= kCourseLength) {
    done = true;
  } else if (next.t >= kMaxSteps) {
    done = true;
  }
  next.done = done;
  return StepResult{next, observe(course, next), reward, done};
}

}  // namespace ued::terrain
