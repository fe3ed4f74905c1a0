#include "ued/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ued/grid_env.hpp"
#include "ued/terrain_env.hpp"

namespace ued::evalkit {

namespace {

struct EpisodeOutcome {
  double episode_return = 0.0;
  bool solved = false;
};

EpisodeOutcome run_grid_episode(const PolicyParams& params, const Level& level,
                                int t_max) {
  grid::GridState state = grid::reset(level);
  std::vector<double> obs = grid::observe(level, state);
  EpisodeOutcome out;
  while (!state.done) {
    const Action a = greedy_action(params, obs);
    grid::StepResult r = grid::step(level, state, a.discrete, t_max);
    out.episode_return += r.reward;
    state = r.state;
    obs = std::move(r.observation);
  }
  out.solved = state.agent == level.grid().goal;
  return out;
}

EpisodeOutcome run_terrain_episode(const PolicyParams& params,
                                   const Level& level) {
  const terrain::Course course = terrain::render_course(level.terrain());
  terrain::TerrainState state = terrain::reset(level);
  std::vector<double> obs = terrain::observe(course, state);
  EpisodeOutcome out;
  while (!state.done) {
    const Action a = greedy_action(params, obs);
    terrain::StepResult r = terrain::step(course, state, a.continuous);
    out.episode_return += r.reward;
    state = r.state;
    obs = std::move(r.observation);
  }
  out.solved = state.x >= terrain::kCourseLength;
  return out;
}

Level sample_extreme_terrain(RngState& rng, TerrainMode mode) {
  // Direct conditional sampling: threshold parameters uniform above their
  // thresholds, everything else uniform on [0, max].
  TerrainPayload t;
  t.mode = mode;
  const double stump_hi = rng.uniform(2.4, 5.0);
  const double pit_hi = rng.uniform(6.0, 10.0);
  const double rough = rng.uniform(4.5, 10.0);
  const double stair_hi = rng.uniform(0.0, 5.0);
  const double steps = rng.uniform_int(0, 9);
  if (mode == TerrainMode::FiveD) {
    t.params = {stump_hi, pit_hi, rough, stair_hi, steps};
  } else {
    t.params = {rng.uniform(0.0, stump_hi), stump_hi,
                rng.uniform(0.0, stair_hi), stair_hi,
                steps,                      rough,
                rng.uniform(0.0, pit_hi),   pit_hi};
  }
  t.seed = static_cast<int64_t>(rng.next_u64() >> 1);
  Level level;
  level.kind = LevelKind::Terrain;
  level.payload = std::move(t);
  level.validate();
  return level;
}

}  // namespace

TestSuite load_fixtures(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file: " + path);
  TestSuite suite;
  suite.name = path;
  std::string line, pending_name, errors;
  int line_no = 0;
  int unnamed = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    if (line[0] == '#') {
      pending_name = line.substr(line.find_first_not_of("# "));
      continue;
    }
    try {
      SuiteLevel sl;
      sl.level = decode_level(line);
      sl.name = pending_name.empty()
                    ? "level-" + std::to_string(++unnamed)
                    : pending_name;
      pending_name.clear();
      suite.fixtures.push_back(std::move(sl));
    } catch (const std::exception& e) {
      errors += "  line " + std::to_string(line_no) + ": " + e.what() + "\n";
    }
  }
  if (!errors.empty()) {
    throw ParseError("fixture file " + path + " has invalid levels:\n" + errors);
  }
  if (suite.fixtures.empty()) {
    throw std::runtime_error("fixture file " + path + " contains no levels");
  }
  return suite;
}

TestSuite builtin_suite(const std::string& name) {
  TestSuite suite;
  suite.name = name;
  if (name == "perfect-maze-51" || name == "perfect-maze-21") {
    suite.procedural = ProceduralSuite::PerfectMaze;
    suite.width = suite.height = name == "perfect-maze-51" ? 51 : 21;
    return suite;
  }
  if (name == "terrain-extreme-5d" || name == "terrain-extreme-8d") {
    suite.procedural = ProceduralSuite::TerrainExtreme;
    suite.terrain_mode = name == "terrain-extreme-5d" ? TerrainMode::FiveD
                                                      : TerrainMode::EightD;
    return suite;
  }
  throw std::runtime_error("unknown built-in suite: " + name);
}

TestSuite resolve_suite(const std::string& name_or_path) {
  if (name_or_path.rfind("perfect-maze", 0) == 0 ||
      name_or_path.rfind("terrain-extreme", 0) == 0) {
    return builtin_suite(name_or_path);
  }
  return load_fixtures(name_or_path);
}

EvalResult evaluate(const PolicyParams& params, const TestSuite& suite,
                    RngState rng, int episodes_override) {
  const int episodes =
      episodes_override > 0 ? episodes_override : suite.episodes_per_level;
  EvalResult result;
  double solved_total = 0.0, return_total = 0.0;
  int episode_total = 0;

  const int n_units = suite.procedural == ProceduralSuite::None
                          ? static_cast<int>(suite.fixtures.size())
                          : 1;
  for (int u = 0; u < n_units; ++u) {
    LevelResult lr;
    double sum = 0.0, sum_sq = 0.0;
    int solved = 0;
    RngState unit_rng = rng.split(u);
    for (int e = 0; e < episodes; ++e) {
      RngState ep_rng = unit_rng.split(e);
      EpisodeOutcome out;
      if (suite.procedural == ProceduralSuite::PerfectMaze) {
        const Level level =
            grid::perfect_maze(ep_rng, suite.width, suite.height, 0);
        const int t_max = suite.t_max > 0 ? suite.t_max
                                          : 2 * suite.width * suite.height;
        out = run_grid_episode(params, level, t_max);
      } else if (suite.procedural == ProceduralSuite::TerrainExtreme) {
        const Level level = sample_extreme_terrain(ep_rng, suite.terrain_mode);
        out = run_terrain_episode(params, level);
      } else {
        const Level& level = suite.fixtures[u].level;
        if (level.kind == LevelKind::Terrain) {
          out = run_terrain_episode(params, level);
        } else {
          const int t_max =
              suite.t_max > 0 ? suite.t_max : grid::kDefaultTMax;
          out = run_grid_episode(params, level, t_max);
        }
      }
      sum += out.episode_return;
      sum_sq += out.episode_return * out.episode_return;
      if (out.solved) ++solved;
    }
    lr.name = suite.procedural == ProceduralSuite::None
                  ? suite.fixtures[u].name
                  : suite.name;
    lr.episodes = episodes;
    lr.solved_rate = static_cast<double>(solved) / episodes;
    lr.mean_return = sum / episodes;
    if (episodes > 1) {
      const double var =
          std::max(0.0, (sum_sq - sum * sum / episodes) / (episodes - 1));
      lr.return_sem = std::sqrt(var / episodes);
    }
    solved_total += solved;
    return_total += sum;
    episode_total += episodes;
    result.per_level.push_back(std::move(lr));
  }
  result.solved_rate = solved_total / episode_total;
  result.mean_return = return_total / episode_total;
  return result;
}

double iqm(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("iqm: empty input");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  const double lo = 0.25 * n;
  const double hi = 0.75 * n;
  double weighted = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    // Overlap of [i, i+1) with the trimmed window [lo, hi).
    const double w = std::max(
        0.0, std::min(static_cast<double>(i + 1), hi) -
                 std::max(static_cast<double>(i), lo));
    weighted += w * s[i];
  }
  return weighted / (0.5 * n);
}

double optimality_gap(std::span<const double> samples, double optimum) {
  if (!(optimum > 0.0)) {
    throw std::invalid_argument("optimality_gap: optimum must be > 0");
  }
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (double s : samples) total += std::max(0.0, 1.0 - s / optimum);
  return total / static_cast<double>(samples.size());
}

}  // namespace ued::evalkit
