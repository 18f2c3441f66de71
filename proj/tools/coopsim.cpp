#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "coop/analytics.hpp"
#include "coop/config.hpp"
#include "coop/runner.hpp"
#include "coop/world_model.hpp"

namespace {

int run_cmd(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed,
            const std::string& world, std::optional<int> episodes, const std::vector<int>& snapshots) {
  coop::ExperimentConfig c = coop::load_config(config_path);
  if (!out.empty()) c.out_dir = out;
  if (seed) c.env.seed = *seed;
  if (!world.empty()) c.world_path = world;
  if (episodes) c.episodes = *episodes;
  if (!snapshots.empty()) c.snapshot_episodes = snapshots;
  auto summary = coop::run_experiment(c);
  for (const auto& m : summary.metrics)
    std::cout << "episode " << m.episode << ": " << m.reason << " env_steps=" << m.env_steps << " delivered="
              << m.completed_count() << "/" << m.blocks.size() << "\n";
  std::cout << "world model: " << summary.world_path.string() << "\n";
  return 0;
}

int timeline_cmd(const std::string& trace_path, const std::string& out) {
  auto trace = coop::read_trace(trace_path);
  std::ofstream o(out);
  if (!o) throw coop::Error(coop::ErrorCode::IoError, "cannot write " + out);
  o << coop::render_timeline(trace);
  return 0;
}

int export_cmd(const std::string& world, const std::string& format) {
  auto g = coop::load_world(world);
  std::cout << coop::export_graph(g, format);
  return 0;
}

int metrics_cmd(const std::string& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().filename().string().ends_with(".trace.jsonl")) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw coop::Error(coop::ErrorCode::IoError, "no *.trace.jsonl files in " + dir);
  std::vector<coop::EpisodeMetrics> metrics;
  for (const auto& f : files) metrics.push_back(coop::compute_metrics(coop::read_trace(f, coop::timing_path_for(f))));
  auto t = coop::aggregate_runs(metrics);
  std::cout << "# completion\n" << t.completion << "\n# series\n" << t.series << "\n# commitments\n" << t.commitments;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative block-pushing simulator"};
  app.require_subcommand(1);

  std::string config, out, world, trace, svg, format = "json", traces;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::vector<int> snapshots;

  auto* run = app.add_subcommand("run", "Run an experiment");
  run->add_option("--config", config, "YAML experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory");
  run->add_option("--seed", seed, "Environment seed");
  run->add_option("--world", world, "World model JSON path");
  run->add_option("--episodes", episodes, "Episode count");
  run->add_option("--snapshot-episodes", snapshots, "Episodes after which to export the graph")->delimiter(',');

  auto* tl = app.add_subcommand("render-timeline", "Render a trace as an SVG timeline");
  tl->add_option("--trace", trace, "Trace file")->required()->check(CLI::ExistingFile);
  tl->add_option("--out", svg, "SVG output path")->required();

  auto* eg = app.add_subcommand("export-graph", "Print the world model graph");
  eg->add_option("--world", world, "World model JSON path")->required();
  eg->add_option("--format", format, "json or dot");

  auto* mt = app.add_subcommand("metrics", "Aggregate metrics over a trace directory");
  mt->add_option("--traces", traces, "Directory of trace files")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_cmd(config, out, seed, world, episodes, snapshots);
    if (*tl) return timeline_cmd(trace, svg);
    if (*eg) return export_cmd(world, format);
    if (*mt) return metrics_cmd(traces);
  } catch (const coop::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
