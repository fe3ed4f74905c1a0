#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ued/level.hpp"
#include "ued/rng.hpp"

namespace ued {

struct BufferConfig {
  size_t capacity = 4000;
  double temperature = 0.3;      // rank prioritization beta
  double staleness_coef = 0.5;   // mixture weight on the staleness term
  double fill_ratio = 0.0;       // initial DR fill as a fraction of capacity

  bool operator==(const BufferConfig&) const = default;
};

// Environment-agnostic per-level metrics cached at insertion for logging.
struct LevelStats {
  double obstacle_count = 0.0;
  double shortest_path = -1.0;  // -1 when unreachable / not applicable
  bool solvable = false;
  int category = -1;  // terrain difficulty category, -1 for grids
};

struct BufferEntry {
  Level level;
  double score = 0.0;
  uint64_t last_replayed = 0;
  uint64_t insert_time = 0;
  LevelStats stats;
};

// The replay buffer: threshold insertion (beat the minimum when full),
// rank-prioritized sampling mixed with staleness. Single mutator; callers
// advance the clock once per training iteration via tick().
class LevelBuffer {
 public:
  explicit LevelBuffer(BufferConfig config);

  // Accepts while under capacity; otherwise only with a score strictly above
  // the current minimum, evicting that minimum. Returns acceptance.
  bool insert(const Level& level, double score, LevelStats stats = {});

  // Draws from distribution() and stamps the drawn entry's last_replayed.
  // Throws std::logic_error when empty.
  Level sample(RngState& rng);

  // Throws std::invalid_argument for unknown ids.
  void update_score(uint64_t level_id, double score);

  // Exact mixture probabilities sample() draws from, in entry order:
  //   P = (1 - rho) * P_rank + rho * P_staleness
  // with P_rank(i) proportional to rank_i^(-1/beta) (rank 1 = top score) and
  // P_staleness(i) proportional to now - last_replayed(i).
  std::vector<double> distribution() const;

  void tick(uint64_t steps = 1) { now_ += steps; }
  uint64_t now() const { return now_; }

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  size_t capacity() const { return config_.capacity; }
  const std::vector<BufferEntry>& entries() const { return entries_; }
  std::optional<double> min_score() const;

  // One "<encoded level>\t<score>\t<staleness>" line per entry.
  std::string snapshot() const;

 private:
  std::vector<double> rank_weights() const;

  BufferConfig config_;
  std::vector<BufferEntry> entries_;
  uint64_t now_ = 0;
};

}  // namespace ued
