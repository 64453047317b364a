#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "planlearn/experiment.hpp"
#include "planlearn/model_io.hpp"
#include "planlearn/trace.hpp"

namespace {

namespace fs = std::filesystem;
using namespace planlearn;

int cmd_run(const std::string& config_path) {
  auto cfg = load_experiment_config(config_path);
  const std::string dir = fs::path(config_path).parent_path().string();
  auto result = run_experiment(cfg, dir);
  write_reports(cfg, result);
  std::cout << metrics_to_json(result.metrics).dump(2) << "\n";
  std::cout << "wrote reports to " << effective_output_dir(cfg) << "\n";
  return 0;
}

int cmd_replay(const std::string& trace_path, const std::string& config_path) {
  auto cfg = load_experiment_config(config_path);
  const std::string dir = fs::path(config_path).parent_path().string();
  auto verdict = replay(trace_path, cfg, dir);
  if (verdict.identical) {
    std::cout << "identical\n";
    return 0;
  }
  std::cout << "divergence at step " << verdict.first_divergence << "\n" << verdict.detail << "\n";
  return 1;
}

int cmd_inspect(const std::string& model_path) {
  auto em = load_model_file(model_path);
  std::cout << print_model(em);
  const auto states = enumerate_states(em.model);
  std::cout << "\n# " << states.size() << " states out of " << em.model.all_assignments().size()
            << " assignments, " << em.model.rules.size() << " rules, "
            << em.model.constraints.size() << " constraints\n";
  const auto violations = check_determinism(em.model.rules, em.model);
  for (const auto& v : violations) {
    std::cout << "# determinism violation on " << v.variable << " between [" << v.first.to_string()
              << "] and [" << v.second.to_string() << "] at " << em.model.label(v.witness) << "\n";
  }
  return violations.empty() ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, const std::string& seeds) {
  const auto dots = seeds.find("..");
  if (dots == std::string::npos) {
    std::cerr << "seed range must look like a..b\n";
    return 2;
  }
  const std::uint64_t lo = std::stoull(seeds.substr(0, dots));
  const std::uint64_t hi = std::stoull(seeds.substr(dots + 2));
  if (hi < lo) {
    std::cerr << "empty seed range\n";
    return 2;
  }
  auto base = load_experiment_config(config_path);
  const std::string dir = fs::path(config_path).parent_path().string();
  const std::string out_root = effective_output_dir(base);
  std::cout << "seed,states_learned,assignments_total,transition_agreement,"
               "mean_observation_loglik,constraint_count\n";
  for (std::uint64_t s = lo; s <= hi; ++s) {
    ExperimentConfig cfg = base;
    cfg.environment_seed = s;
    cfg.learner.seed = s ^ 0x9e3779b97f4a7c15ULL;  // unrelated stream per component
    cfg.output_dir = (fs::path(out_root) / ("seed_" + std::to_string(s))).string();
    auto result = run_experiment(cfg, dir);
    std::filesystem::create_directories(cfg.output_dir);
    write_trace_file((fs::path(cfg.output_dir) / "trace.jsonl").string(), result.trace);
    std::ofstream mj(fs::path(cfg.output_dir) / "metrics.json");
    mj << metrics_to_json(result.metrics).dump(2) << "\n";
    std::cout << s << "," << result.metrics.states_learned << ","
              << result.metrics.assignments_total << "," << result.metrics.transition_agreement
              << "," << result.metrics.mean_observation_loglik << ","
              << result.metrics.constraint_count << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planlearn: act in a noisy world, learn a discrete planning domain"};
  app.require_subcommand(1);

  std::string config_path, trace_path, model_path, seeds;

  auto* run_cmd = app.add_subcommand("run", "execute one seeded experiment");
  run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

  auto* replay_cmd = app.add_subcommand("replay", "re-run and diff against a recorded trace");
  replay_cmd->add_option("trace", trace_path, "recorded trace (JSONL)")->required();
  replay_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

  auto* inspect_cmd = app.add_subcommand("inspect", "pretty-print a model file");
  inspect_cmd->add_option("model", model_path, "model file")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "run a range of seeds");
  sweep_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
  sweep_cmd->add_option("--seeds", seeds, "inclusive seed range a..b")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config_path);
    if (replay_cmd->parsed()) return cmd_replay(trace_path, config_path);
    if (inspect_cmd->parsed()) return cmd_inspect(model_path);
    if (sweep_cmd->parsed()) return cmd_sweep(config_path, seeds);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
