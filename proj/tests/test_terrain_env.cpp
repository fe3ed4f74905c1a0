#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "ued/level.hpp"
#include "ued/rng.hpp"
#include "ued/terrain_env.hpp"

using namespace ued;

namespace {

Level make_5d(double stump, double pit, double rough, double stair = 0.0,
              double steps = 0.0) {
  Level level;
  level.kind = LevelKind::Terrain;
  level.id = 1;
  level.payload =
      TerrainPayload{TerrainMode::FiveD, {stump, pit, rough, stair, steps}, {}};
  level.validate();
  return level;
}

}  // namespace

TEST_CASE("easy init matches the documented ranges") {
  RngState rng(5);
  for (int i = 0; i < 10000; ++i) {
    const Level level = terrain::easy_init(TerrainMode::EightD, rng, i);
    const TerrainPayload& t = level.terrain();
    CHECK(t.params[0] == 0.0);  // stump range [0, 0.4]
    CHECK(t.params[1] == 0.4);
    CHECK(t.params[2] == 0.0);  // stair range [0, 0.4]
    CHECK(t.params[3] == 0.4);
    CHECK(t.stair_steps() == 1);
    CHECK(t.roughness() >= 0.0);
    CHECK(t.roughness() <= 0.6);
    CHECK(t.params[6] == 0.0);  // pit range [0, 0.8]
    CHECK(t.params[7] == 0.8);
    CHECK(terrain::categorize(level) == terrain::DifficultyCategory::Easy);

    const Level five = terrain::easy_init(TerrainMode::FiveD, rng, i);
    CHECK(five.terrain().stump_high() == 0.4);
    CHECK(five.terrain().pit_high() == 0.8);
    CHECK(terrain::categorize(five) == terrain::DifficultyCategory::Easy);
  }
}

TEST_CASE("DR sampling stays in bounds with sorted ranges") {
  RngState rng(7);
  double rough_max_seen = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const Level level = terrain::sample_dr(
        rng, i % 2 ? TerrainMode::FiveD : TerrainMode::EightD, i);
    const TerrainPayload& t = level.terrain();
    const auto& info = terrain_param_info(t.mode);
    for (size_t p = 0; p < info.size(); ++p) {
      CHECK(t.params[p] >= 0.0);
      CHECK(t.params[p] <= info[p].max_value);
    }
    if (t.mode == TerrainMode::EightD) {
      CHECK(t.params[0] <= t.params[1]);  // stump low <= high
      CHECK(t.params[2] <= t.params[3]);
      CHECK(t.params[6] <= t.params[7]);
    }
    rough_max_seen = std::max(rough_max_seen, t.roughness());
  }
  CHECK(rough_max_seen > 9.5);
}

TEST_CASE("roughness marginal is uniform on [0, 10] (KS test)") {
  RngState rng(11);
  const int n = 100000;
  std::vector<double> samples;
  samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    samples.push_back(
        terrain::sample_dr(rng, TerrainMode::FiveD, i).terrain().roughness());
  }
  std::sort(samples.begin(), samples.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = samples[i] / 10.0;
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - f));
  }
  CHECK(ks < 0.01);
}

TEST_CASE("edit changes exactly one parameter") {
  RngState rng(13);
  SUBCASE("steps at 1 edit to 0 or 2 only") {
    for (int trial = 0; trial < 500; ++trial) {
      Level parent = terrain::easy_init(TerrainMode::FiveD, rng, 1);
      const Level child = terrain::edit(parent, rng, 2);
      const int parent_steps = parent.terrain().stair_steps();
      const int child_steps = child.terrain().stair_steps();
      if (parent_steps != child_steps) {
        CHECK(parent_steps == 1);
        CHECK((child_steps == 0 || child_steps == 2));
      }
    }
  }
  SUBCASE("clamped edits stay in bounds and still change the parameter") {
    Level parent = make_5d(5.0, 10.0, 10.0, 5.0, 9.0);  // everything at max
    for (int trial = 0; trial < 200; ++trial) {
      const Level child = terrain::edit(parent, rng, 2);
      CHECK_NOTHROW(child.validate());
      int differing = 0;
      for (int p = 0; p < 5; ++p) {
        if (parent.terrain().params[p] != child.terrain().params[p]) {
          ++differing;
          CHECK(child.terrain().params[p] <=
                terrain_param_info(TerrainMode::FiveD)[p].max_value);
          CHECK(child.terrain().params[p] < parent.terrain().params[p]);
        }
      }
      CHECK(differing == 1);
    }
  }
  SUBCASE("random parents: one scalar differs, or a re-sorted range pair") {
    uint64_t id = 1;
    for (int trial = 0; trial < 10000; ++trial) {
      const TerrainMode mode =
          trial % 2 ? TerrainMode::FiveD : TerrainMode::EightD;
      const Level parent = terrain::sample_dr(rng, mode, id++);
      const Level child = terrain::edit(parent, rng, id++);
      CHECK_NOTHROW(child.validate());
      CHECK(child.parent_id == parent.id);
      CHECK(child.generation == parent.generation + 1);

      const auto& info = terrain_param_info(mode);
      std::vector<int> diff;
      for (size_t p = 0; p < info.size(); ++p) {
        if (parent.terrain().params[p] != child.terrain().params[p]) {
          diff.push_back(static_cast<int>(p));
        }
      }
      REQUIRE(!diff.empty());
      if (diff.size() == 1) continue;
      // Two scalars may differ only when an edit pushed one side of a range
      // pair past the other and the pair re-sorted.
      REQUIRE(diff.size() == 2);
      CHECK(diff[1] == diff[0] + 1);
      CHECK(info[diff[0]].range_group >= 0);
      CHECK(info[diff[0]].range_group == info[diff[1]].range_group);
    }
  }
}

TEST_CASE("categorize follows the threshold table") {
  using DC = terrain::DifficultyCategory;
  CHECK(terrain::categorize(make_5d(2.5, 6.5, 5.0)) ==
        DC::ExtremelyChallenging);
  CHECK(terrain::categorize(make_5d(0, 0, 0)) == DC::Easy);
  // Boundary is inclusive.
  CHECK(terrain::categorize(make_5d(2.4, 0, 0)) == DC::Challenging);
  CHECK(terrain::categorize(make_5d(2.4, 6.0, 0)) == DC::VeryChallenging);
  CHECK(terrain::categorize(make_5d(2.3999, 5.9999, 4.4999)) == DC::Easy);
}

TEST_CASE("categorize is monotone in each parameter") {
  RngState rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const Level level = terrain::sample_dr(rng, TerrainMode::FiveD, trial);
    const auto before = terrain::categorize(level);
    Level raised = level;
    const size_t p = rng.uniform_u64(5);
    const double max_v = terrain_param_info(TerrainMode::FiveD)[p].max_value;
    double v = raised.terrain().params[p] + rng.uniform(0.0, max_v);
    if (terrain_param_info(TerrainMode::FiveD)[p].integer) v = std::floor(v);
    raised.terrain().params[p] = std::min(v, max_v);
    CHECK(static_cast<int>(terrain::categorize(raised)) >=
          static_cast<int>(before));
  }
}

TEST_CASE("course rendering is a pure function of (payload, seed)") {
  RngState rng(19);
  const Level level = terrain::sample_dr(rng, TerrainMode::EightD, 1);
  const terrain::Course a = terrain::render_course(level.terrain());
  const terrain::Course b = terrain::render_course(level.terrain());
  REQUIRE(a.obstacles.size() == b.obstacles.size());
  for (size_t i = 0; i < a.obstacles.size(); ++i) {
    CHECK(a.obstacles[i].position == b.obstacles[i].position);
    CHECK(a.obstacles[i].size == b.obstacles[i].size);
  }
  CHECK(a.drag == b.drag);

  Level different = level;
  different.terrain().seed = level.terrain().seed.value_or(0) + 1;
  const terrain::Course c = terrain::render_course(different.terrain());
  bool any_diff = c.obstacles.size() != a.obstacles.size();
  for (size_t i = 0; !any_diff && i < a.obstacles.size(); ++i) {
    any_diff = c.obstacles[i].position != a.obstacles[i].position;
  }
  CHECK(any_diff);
}

TEST_CASE("zero genotype: constant thrust completes the course") {
  const Level level = make_5d(0, 0, 0);
  const terrain::Course course = terrain::render_course(level.terrain());
  CHECK(course.obstacles.empty());
  terrain::TerrainState s = terrain::reset(level);
  double ret = 0.0;
  int steps = 0;
  while (!s.done) {
    const auto r = terrain::step(course, s, {1.0, 0.0});
    ret += r.reward;
    s = r.state;
    ++steps;
    REQUIRE(steps <= terrain::kMaxSteps);
  }
  CHECK(s.x >= terrain::kCourseLength);
  CHECK(ret > 0.0);
  CHECK(ret < 300.0);
}

TEST_CASE("an impassable stump causes a fall with the -100 penalty") {
  Level level = make_5d(5.0, 0, 0);
  level.terrain().params[0] = 5.0;
  level.terrain().seed = 4;
  const terrain::Course course = terrain::render_course(level.terrain());
  REQUIRE(!course.obstacles.empty());
  terrain::TerrainState s = terrain::reset(level);
  double last_reward = 0.0;
  while (!s.done) {
    const auto r = terrain::step(course, s, {1.0, 0.0});  // never hops
    last_reward = r.reward;
    s = r.state;
  }
  CHECK(s.x < terrain::kCourseLength);
  CHECK(last_reward < -99.0);
}

TEST_CASE("same (level, seed, action sequence) gives identical returns") {
  RngState rng(23);
  const Level level = terrain::sample_dr(rng, TerrainMode::EightD, 5);
  std::vector<std::array<double, 2>> actions;
  for (int i = 0; i < 400; ++i) {
    actions.push_back({rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.0)});
  }
  auto play = [&] {
    const terrain::Course course = terrain::render_course(level.terrain());
    terrain::TerrainState s = terrain::reset(level);
    double ret = 0.0;
    for (const auto& a : actions) {
      if (s.done) break;
      const auto r = terrain::step(course, s, a);
      ret += r.reward;
      s = r.state;
    }
    return ret;
  };
  const double r1 = play();
  const double r2 = play();
  CHECK(r1 == r2);
}

TEST_CASE("step rejects a done episode; observations stay bounded") {
  const Level level = make_5d(1.0, 1.0, 1.0);
  const terrain::Course course = terrain::render_course(level.terrain());
  terrain::TerrainState s = terrain::reset(level);
  const auto obs = terrain::observe(course, s);
  CHECK(obs.size() == terrain::kObsDim);
  for (double v : obs) {
    CHECK(std::abs(v) <= 2.0);
  }
  s.done = true;
  CHECK_THROWS_AS(terrain::step(course, s, {0.0, 0.0}), std::logic_error);
}

TEST_CASE("heightfield export covers the course") {
  const Level level = make_5d(2.0, 3.0, 5.0);
  const auto profile = terrain::heightfield(level.terrain());
  REQUIRE(profile.size() == 401);
  CHECK(profile.front()[0] == 0.0);
  CHECK(profile.back()[0] == doctest::Approx(200.0));
}
