#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ued {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LevelKind { LavaGrid, MazeGrid, Terrain };

const char* to_string(LevelKind k);

enum class Tile : uint8_t { Empty, Wall, Lava };

enum class Dir : uint8_t { N, E, S, W };

struct GridPayload {
  int width = 0;
  int height = 0;
  std::vector<Tile> cells;  // row-major
  int agent_start = 0;      // cell index
  Dir agent_facing = Dir::E;
  int goal = 0;  // cell index

  int index(int row, int col) const { return row * width + col; }
  int row(int idx) const { return idx / width; }
  int col(int idx) const { return idx % width; }
  bool in_bounds(int r, int c) const {
    return r >= 0 && r < height && c >= 0 && c < width;
  }
  Tile at(int r, int c) const { return cells[index(r, c)]; }

  bool operator==(const GridPayload&) const = default;
};

enum class TerrainMode { FiveD, EightD };

// Scalar parameter order is fixed by the codec:
//   8D: stump_low, stump_high, stair_low, stair_high, stair_steps,
//       roughness, pit_low, pit_high
//   5D: stump_high, pit_high, roughness, stair_high, stair_steps
struct TerrainPayload {
  TerrainMode mode = TerrainMode::EightD;
  std::vector<double> params;
  std::optional<int64_t> seed;  // obstacle placement seed (replay determinism)

  int param_count() const { return mode == TerrainMode::FiveD ? 5 : 8; }
  double stump_high() const;
  double pit_high() const;
  double roughness() const;
  double stair_high() const;
  double stump_low() const;
  double pit_low() const;
  double stair_low() const;
  int stair_steps() const;

  bool operator==(const TerrainPayload&) const = default;
};

struct TerrainParamInfo {
  const char* name;
  double max_value;
  double edit_size;  // roughness instead draws its magnitude from Unif(0, 0.6)
  bool integer;
  int range_group;  // -1 when the scalar is not half of a [low, high] pair
  bool is_high;
};

// Static metadata for the scalar order above.
const std::vector<TerrainParamInfo>& terrain_param_info(TerrainMode mode);

struct Level {
  LevelKind kind = LevelKind::MazeGrid;
  uint64_t id = 0;
  std::optional<uint64_t> parent_id;
  uint32_t generation = 0;  // edit depth from a generator-produced root
  std::variant<GridPayload, TerrainPayload> payload;

  const GridPayload& grid() const { return std::get<GridPayload>(payload); }
  GridPayload& grid() { return std::get<GridPayload>(payload); }
  const TerrainPayload& terrain() const {
    return std::get<TerrainPayload>(payload);
  }
  TerrainPayload& terrain() { return std::get<TerrainPayload>(payload); }

  bool is_grid() const { return kind != LevelKind::Terrain; }

  // Throws ValidationError when a structural rule is broken.
  void validate() const;

  bool operator==(const Level&) const = default;
};

// Single-line text codec.
//   <kind>;<id>;<parent_id|->;<generation>;<payload>
// Grid payload: <W>x<H>x<F>:<cells> with row-major glyphs
//   '.'=empty '#'=wall 'L'=lava 'G'=goal 'A'=agent-start, F in {N,E,S,W}.
// Terrain payload: comma-separated decimals in the fixed scalar order,
//   optionally followed by ",seed=<int>".
std::string encode_level(const Level& level);

// Inverse of encode_level; validates the result. Throws ParseError on
// malformed text and ValidationError on structural violations.
Level decode_level(const std::string& text);

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

// Multi-line text art of a grid level (one row per line).
std::string render_grid(const Level& level);

}  // namespace ued
