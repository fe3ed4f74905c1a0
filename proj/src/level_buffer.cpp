#include "ued/level_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ued {

LevelBuffer::LevelBuffer(BufferConfig config) : config_(config) {
  if (config_.capacity < 1) throw std::invalid_argument("capacity must be >= 1");
  if (!(config_.temperature > 0.0)) {
    throw std::invalid_argument("temperature must be > 0");
  }
  if (config_.staleness_coef < 0.0 || config_.staleness_coef > 1.0) {
    throw std::invalid_argument("staleness coefficient must be in [0,1]");
  }
}

bool LevelBuffer::insert(const Level& level, double score, LevelStats stats) {
  if (score < 0.0) throw std::invalid_argument("scores are non-negative");
  if (entries_.size() >= config_.capacity) {
    size_t min_idx = 0;
    for (size_t i = 1; i < entries_.size(); ++i) {
      const BufferEntry& e = entries_[i];
      const BufferEntry& m = entries_[min_idx];
      if (e.score < m.score ||
          (e.score == m.score && e.insert_time < m.insert_time)) {
        min_idx = i;
      }
    }
    if (!(score > entries_[min_idx].score)) return false;  // strict threshold
    entries_.erase(entries_.begin() + min_idx);
  }
  BufferEntry entry;
  entry.level = level;
  entry.score = score;
  entry.insert_time = now_;
  entry.last_replayed = now_;  // never-replayed staleness counts from here
  entry.stats = stats;
  entries_.push_back(std::move(entry));
  return true;
}

std::vector<double> LevelBuffer::rank_weights() const {
  const size_t n = entries_.size();
  // Rank 1 = highest score; ties rank by insertion recency for determinism.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (entries_[a].score != entries_[b].score) {
      return entries_[a].score > entries_[b].score;
    }
    return entries_[a].insert_time < entries_[b].insert_time;
  });
  std::vector<double> w(n, 0.0);
  const double inv_beta = 1.0 / config_.temperature;
  for (size_t r = 0; r < n; ++r) {
    w[order[r]] = std::pow(static_cast<double>(r + 1), -inv_beta);
  }
  return w;
}

std::vector<double> LevelBuffer::distribution() const {
  const size_t n = entries_.size();
  if (n == 0) throw std::logic_error("distribution() on an empty buffer");

  std::vector<double> p_rank = rank_weights();
  double rank_total = std::accumulate(p_rank.begin(), p_rank.end(), 0.0);
  for (double& v : p_rank) v /= rank_total;

  std::vector<double> p_stale(n, 0.0);
  double stale_total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    p_stale[i] = static_cast<double>(now_ - entries_[i].last_replayed);
    stale_total += p_stale[i];
  }
  if (stale_total > 0.0) {
    for (double& v : p_stale) v /= stale_total;
  } else {
    std::fill(p_stale.begin(), p_stale.end(), 1.0 / static_cast<double>(n));
  }

  const double rho = config_.staleness_coef;
  std::vector<double> p(n);
  for (size_t i = 0; i < n; ++i) {
    p[i] = (1.0 - rho) * p_rank[i] + rho * p_stale[i];
  }
  return p;
}

Level LevelBuffer::sample(RngState& rng) {
  if (entries_.empty()) throw std::logic_error("sample() on an empty buffer");
  const std::vector<double> p = distribution();
  const double u = rng.uniform();
  double acc = 0.0;
  size_t chosen = entries_.size() - 1;
  for (size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) {
      chosen = i;
      break;
    }
  }
  entries_[chosen].last_replayed = now_;
  return entries_[chosen].level;
}

void LevelBuffer::update_score(uint64_t level_id, double score) {
  if (score < 0.0) throw std::invalid_argument("scores are non-negative");
  for (BufferEntry& e : entries_) {
    if (e.level.id == level_id) {
      e.score = score;
      return;
    }
  }
  throw std::invalid_argument("update_score: unknown level id " +
                              std::to_string(level_id));
}

std::optional<double> LevelBuffer::min_score() const {
  if (entries_.empty()) return std::nullopt;
  double m = entries_[0].score;
  for (const BufferEntry& e : entries_) m = std::min(m, e.score);
  return m;
}

std::string LevelBuffer::snapshot() const {
  std::string out;
  for (const BufferEntry& e : entries_) {
    out += encode_level(e.level);
    out += '\t';
    out += format_double(e.score);
    out += '\t';
    out += std::to_string(now_ - e.last_replayed);
    out += '\n';
  }
  return out;
}

}  // namespace ued
