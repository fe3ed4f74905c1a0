// Command-line entry point: train / eval / inspect.
//
// Exit codes: 0 ok, 1 configuration error, 2 runtime error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ued/evalkit.hpp"
#include "ued/grid_env.hpp"
#include "ued/level.hpp"
#include "ued/run_config.hpp"
#include "ued/terrain_env.hpp"
#include "ued/ued_loop.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ued::ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_train(const std::string& config_path,
              const std::vector<std::string>& overrides, long seed,
              const std::string& output_dir) {
  ued::RunConfig cfg = ued::parse_run_config(read_file(config_path));
  for (const std::string& o : overrides) ued::apply_override(cfg, o);
  if (seed >= 0) cfg.ued.seed = static_cast<uint64_t>(seed);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (const char* root = std::getenv("UED_OUTPUT_ROOT")) {
    if (!cfg.output_dir.empty() && cfg.output_dir.front() != '/') {
      cfg.output_dir = std::string(root) + "/" + cfg.output_dir;
    }
  }
  ued::validate_run_config(cfg);
  const ued::RunArtifacts artifacts = ued::run_training(cfg);
  std::cout << "run complete: " << artifacts.total_updates << " updates, "
            << artifacts.total_env_steps << " env steps\n"
            << "log: " << artifacts.log_path << "\n"
            << "checkpoints: " << artifacts.checkpoint_dir << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& suite_name,
             int episodes, long seed, const std::string& csv_out) {
  const ued::PolicyParams params = ued::load_checkpoint(checkpoint);
  const ued::evalkit::TestSuite suite = ued::evalkit::resolve_suite(suite_name);
  const ued::evalkit::EvalResult result = ued::evalkit::evaluate(
      params, suite, ued::RngState(static_cast<uint64_t>(seed)), episodes);

  std::string csv = "level,episodes,solved_rate,mean_return,return_sem\n";
  for (const auto& lr : result.per_level) {
    std::printf("%-24s solved %.3f  return %.4f +- %.4f\n", lr.name.c_str(),
                lr.solved_rate, lr.mean_return, lr.return_sem);
    csv += lr.name + "," + std::to_string(lr.episodes) + "," +
           ued::format_double(lr.solved_rate) + "," +
           ued::format_double(lr.mean_return) + "," +
           ued::format_double(lr.return_sem) + "\n";
  }
  std::printf("%-24s solved %.3f  return %.4f\n", "aggregate",
              result.solved_rate, result.mean_return);
  csv += "aggregate,," + ued::format_double(result.solved_rate) + "," +
         ued::format_double(result.mean_return) + ",\n";
  if (!csv_out.empty()) {
    std::ofstream out(csv_out);
    if (!out) throw std::runtime_error("cannot write " + csv_out);
    out << csv;
  }
  return 0;
}

int cmd_inspect_buffer(const std::string& run_dir) {
  // Latest buffer snapshot in the checkpoint directory.
  namespace fs = std::filesystem;
  std::vector<std::string> snaps;
  for (const auto& e : fs::directory_iterator(run_dir + "/checkpoints")) {
    const std::string name = e.path().filename().string();
    if (name.rfind("buffer_", 0) == 0) snaps.push_back(e.path().string());
  }
  if (snaps.empty()) throw std::runtime_error("no buffer snapshots in " + run_dir);
  std::sort(snaps.begin(), snaps.end());
  std::ifstream in(snaps.back());
  std::printf("%-12s %-6s %-10s %-9s %s\n", "score", "stale", "id", "gen",
              "level");
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string level_text, score, stale;
    std::getline(ss, level_text, '\t');
    std::getline(ss, score, '\t');
    std::getline(ss, stale, '\t');
    const ued::Level level = ued::decode_level(level_text);
    std::printf("%-12s %-6s %-10llu %-9u %s\n", score.c_str(), stale.c_str(),
                static_cast<unsigned long long>(level.id), level.generation,
                level_text.c_str());
  }
  return 0;
}

int cmd_inspect_lineage(const std::string& run_dir, uint64_t id) {
  std::ifstream in(run_dir + "/events.jsonl");
  if (!in) throw std::runtime_error("cannot open " + run_dir + "/events.jsonl");
  struct Node {
    std::string level;
    bool has_parent = false;
    uint64_t parent = 0;
  };
  std::map<uint64_t, Node> nodes;
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j.value("event", "") != "insert") continue;
    Node n;
    n.level = j.value("level", "");
    if (j.contains("parent")) {
      n.has_parent = true;
      n.parent = j["parent"].get<uint64_t>();
    }
    nodes[j["id"].get<uint64_t>()] = std::move(n);
  }
  auto it = nodes.find(id);
  if (it == nodes.end()) {
    throw std::runtime_error("unknown level id " + std::to_string(id));
  }
  std::vector<std::string> chain;
  while (true) {
    chain.push_back(it->second.level);
    if (!it->second.has_parent) break;
    it = nodes.find(it->second.parent);
    if (it == nodes.end()) break;  // ancestor predates the event log
  }
  for (auto r = chain.rbegin(); r != chain.rend(); ++r) {
    std::cout << *r << "\n";
  }
  return 0;
}

int cmd_inspect_render(const std::string& level_text,
                       const std::string& csv_out) {
  const ued::Level level = ued::decode_level(level_text);
  if (level.is_grid()) {
    std::cout << ued::render_grid(level);
    return 0;
  }
  const auto profile = ued::terrain::heightfield(level.terrain());
  std::string csv = "x,height\n";
  for (const auto& [x, h] : profile) {
    csv += ued::format_double(x) + "," + ued::format_double(h) + "\n";
  }
  if (csv_out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(csv_out);
    out << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regret-curated level curricula: train, evaluate, inspect"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "run a training loop");
  std::string config_path, output_dir;
  std::vector<std::string> overrides;
  long seed = -1;
  train->add_option("--config", config_path, "INI config file")->required();
  train->add_option("--override", overrides,
                    "section.key=value, applied after the file");
  train->add_option("--seed", seed, "override ued.seed");
  train->add_option("--out", output_dir, "override run.output_dir");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a suite");
  std::string checkpoint, suite, eval_csv;
  int episodes = 0;
  long eval_seed = 0;
  eval->add_option("--checkpoint", checkpoint, "policy checkpoint")->required();
  eval->add_option("--suite", suite, "fixture file or built-in suite name")
      ->required();
  eval->add_option("--episodes", episodes, "episodes per level (default 100)");
  eval->add_option("--seed", eval_seed, "evaluation seed");
  eval->add_option("--csv", eval_csv, "write per-level results as CSV");

  auto* inspect = app.add_subcommand("inspect", "inspect run artifacts");
  auto* ibuf = inspect->add_subcommand("buffer", "latest buffer snapshot");
  std::string run_dir;
  ibuf->add_option("--run", run_dir, "run output directory")->required();
  auto* ilin = inspect->add_subcommand("lineage", "ancestor chain of a level");
  std::string lin_run;
  uint64_t lin_id = 0;
  ilin->add_option("--run", lin_run, "run output directory")->required();
  ilin->add_option("--id", lin_id, "level id")->required();
  auto* irender = inspect->add_subcommand("render", "render an encoded level");
  std::string level_text, render_csv;
  irender->add_option("--level", level_text, "encoded level")->required();
  irender->add_option("--csv", render_csv, "terrain heightfield CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(config_path, overrides, seed, output_dir);
    if (*eval) return cmd_eval(checkpoint, suite, episodes, eval_seed, eval_csv);
    if (*ibuf) return cmd_inspect_buffer(run_dir);
    if (*ilin) return cmd_inspect_lineage(lin_run, lin_id);
    if (*irender) return cmd_inspect_render(level_text, render_csv);
  } catch (const ued::ConfigError& e) {
    std::cerr << "error[config]: " << e.what() << "\n";
    return 1;
  } catch (const ued::ParseError& e) {
    std::cerr << "error[config]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[runtime]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
