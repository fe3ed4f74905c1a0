#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "ued/evalkit.hpp"
#include "ued/grid_env.hpp"
#include "ued/rng.hpp"

using namespace ued;
using evalkit::iqm;
using evalkit::optimality_gap;

namespace {

// Definitional oracle: expand each sample into four quarter-weight pieces,
// drop the lowest n and highest n pieces, average the middle 2n.
double iqm_oracle(std::vector<double> s) {
  std::sort(s.begin(), s.end());
  std::vector<double> pieces;
  for (double v : s) pieces.insert(pieces.end(), 4, v);
  const size_t n = s.size();
  double sum = 0.0;
  for (size_t i = n; i < 3 * n; ++i) sum += pieces[i];
  return sum / (2.0 * n);
}

// A head bias that always prefers one discrete action.
PolicyParams constant_action_policy(int obs_dim, int n_actions, int action) {
  ArchSpec arch{obs_dim, 8, 8, HeadKind::Categorical, n_actions};
  PolicyParams p = zero_params(arch);
  // Head bias lives right after the head weight matrix.
  const int off = arch.hidden1 * arch.input_dim + arch.hidden1 +
                  arch.hidden2 * arch.hidden1 + arch.hidden2 +
                  arch.action_dim * arch.hidden2;
  p.flat[off + action] = 5.0;
  return p;
}

}  // namespace

TEST_CASE("iqm: worked examples") {
  CHECK(iqm(std::vector<double>{1, 2, 3, 4}) == doctest::Approx(2.5));
  CHECK(iqm(std::vector<double>{7, 7, 7, 7, 7}) == doctest::Approx(7.0));
  // Translation equivariance.
  RngState rng(3);
  std::vector<double> s(17), shifted(17);
  for (int i = 0; i < 17; ++i) {
    s[i] = rng.uniform(-5, 5);
    shifted[i] = s[i] + 3.25;
  }
  CHECK(iqm(shifted) == doctest::Approx(iqm(s) + 3.25).epsilon(1e-12));
  CHECK_THROWS_AS(iqm(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("iqm matches the quarter-piece oracle on random vectors") {
  RngState rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_u64(50));
    std::vector<double> s(n);
    for (double& v : s) v = rng.uniform(-10, 10);
    const double got = iqm(s);
    CHECK(std::abs(got - iqm_oracle(s)) <= 1e-12);
    CHECK(got >= *std::min_element(s.begin(), s.end()) - 1e-12);
    CHECK(got <= *std::max_element(s.begin(), s.end()) + 1e-12);
  }
}

TEST_CASE("iqm equals the mean for symmetric samples") {
  std::vector<double> sym{-4, -2, -1, 0, 1, 2, 4};
  double mean = 0.0;
  for (double v : sym) mean += v;
  mean /= sym.size();
  CHECK(iqm(sym) == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("optimality gap: worked examples") {
  CHECK(optimality_gap(std::vector<double>{300, 300}, 300.0) == 0.0);
  CHECK(optimality_gap(std::vector<double>{0, 0, 0}, 300.0) == 1.0);
  CHECK(optimality_gap(std::vector<double>{150}, 300.0) == doctest::Approx(0.5));
  // Above-optimum samples clip to zero shortfall.
  CHECK(optimality_gap(std::vector<double>{450}, 300.0) == 0.0);
  CHECK_THROWS_AS(optimality_gap(std::vector<double>{1.0}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("optimality gap matches its definition on random vectors") {
  RngState rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_u64(20));
    std::vector<double> s(n);
    for (double& v : s) v = rng.uniform(-50, 400);
    const double opt = rng.uniform(1.0, 300.0);
    double expect = 0.0;
    for (double v : s) expect += std::max(0.0, 1.0 - v / opt);
    expect /= n;
    CHECK(std::abs(optimality_gap(s, opt) - expect) <= 1e-12);
  }
}

TEST_CASE("load_fixtures: shipped suites decode, validate, and are solvable") {
  for (const char* path : {"fixtures/lava7.lvl", "fixtures/maze15.lvl",
                           "fixtures/maze9.lvl"}) {
    const evalkit::TestSuite suite = evalkit::load_fixtures(path);
    CHECK(!suite.fixtures.empty());
    for (const auto& f : suite.fixtures) {
      CHECK_NOTHROW(f.level.validate());
      INFO("fixture ", f.name);
      CHECK(grid::shortest_path_length(f.level).has_value());
    }
  }
  // Corridor fixtures: the goal arm is reachable through exactly one opening
  // off the hallway (the arm itself), so the path length is hall + arm.
  const evalkit::TestSuite m15 = evalkit::load_fixtures("fixtures/maze15.lvl");
  for (const auto& f : m15.fixtures) {
    if (f.name.find("Corridor") == std::string::npos) continue;
    CHECK(grid::shortest_path_length(f.level).has_value());
  }
  CHECK_THROWS(evalkit::load_fixtures("fixtures/no_such_file.lvl"));
}

TEST_CASE("load_fixtures reports offending lines") {
  const std::string path = "/tmp/uedkit_bad_fixture.lvl";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("# good\nmaze-grid;1;-;0;3x3xE:A.......G\n# bad\nnot a level\n",
               f);
    std::fclose(f);
  }
  CHECK_THROWS_WITH_AS(evalkit::load_fixtures(path),
                       doctest::Contains("line 4"), ParseError);
}

TEST_CASE("evaluate: an oracle policy solves its fixture") {
  // Straight corridor east: always-forward is optimal.
  const Level level = decode_level("maze-grid;1;-;0;3x3xE:A.G......");
  evalkit::TestSuite suite;
  suite.name = "oracle";
  suite.fixtures.push_back({"StraightEast", level});
  suite.episodes_per_level = 5;
  const PolicyParams p =
      constant_action_policy(grid::kMazeObsDim, 3, grid::kActForward);
  const auto result = evalkit::evaluate(p, suite, RngState(1));
  CHECK(result.solved_rate == 1.0);
  CHECK(result.per_level[0].mean_return > 0.9);
}

TEST_CASE("evaluate: walled-off goal scores zero") {
  const evalkit::TestSuite suite =
      evalkit::load_fixtures("fixtures/unsolvable.lvl");
  ArchSpec arch{grid::kMazeObsDim, 8, 8, HeadKind::Categorical, 3};
  const PolicyParams p = zero_params(arch);
  const auto result = evalkit::evaluate(p, suite, RngState(1), 3);
  CHECK(result.solved_rate == 0.0);
  CHECK(result.per_level[0].episodes == 3);
}

TEST_CASE("greedy evaluation of uniform logits replays action 0") {
  const Level level =
      decode_level("maze-grid;1;-;0;5x5xE:A.......................G");
  ArchSpec arch{grid::kMazeObsDim, 8, 8, HeadKind::Categorical, 3};
  const PolicyParams p = zero_params(arch);

  // Manual rollout always taking action 0 (argmax tie-break -> lowest id).
  grid::GridState s = grid::reset(level);
  double manual_return = 0.0;
  while (!s.done) {
    const auto r = grid::step(level, s, 0);
    manual_return += r.reward;
    s = r.state;
  }

  evalkit::TestSuite suite;
  suite.fixtures.push_back({"TieBreak", level});
  const auto result = evalkit::evaluate(p, suite, RngState(9), 2);
  CHECK(result.per_level[0].mean_return == doctest::Approx(manual_return));
  CHECK(result.per_level[0].solved_rate == 0.0);  // spins in place
}

TEST_CASE("evaluate is reproducible for a fixed seed") {
  RngState rng(11);
  ArchSpec arch{grid::kMazeObsDim, 16, 16, HeadKind::Categorical, 3};
  const PolicyParams p = init_params(arch, rng);
  const evalkit::TestSuite suite = evalkit::builtin_suite("perfect-maze-21");
  const auto a = evalkit::evaluate(p, suite, RngState(42), 3);
  const auto b = evalkit::evaluate(p, suite, RngState(42), 3);
  CHECK(a.solved_rate == b.solved_rate);
  CHECK(a.mean_return == b.mean_return);
  const auto c = evalkit::evaluate(p, suite, RngState(43), 3);
  (void)c;  // merely exercises a different procedural draw
}

TEST_CASE("builtin suites resolve; unknown names fail") {
  CHECK(evalkit::builtin_suite("perfect-maze-51").width == 51);
  CHECK(evalkit::builtin_suite("terrain-extreme-5d").terrain_mode ==
        TerrainMode::FiveD);
  CHECK_THROWS(evalkit::builtin_suite("perfect-nonsense"));
  CHECK(evalkit::resolve_suite("fixtures/maze9.lvl").fixtures.size() == 6);
}
