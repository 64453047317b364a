#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "planlearn/environment.hpp"
#include "planlearn/learner.hpp"
#include "planlearn/model_io.hpp"
#include "planlearn/trace.hpp"

namespace planlearn {

inline constexpr const char* kOutputDirEnvVar = "PLANLEARN_OUT";

struct ExperimentConfig {
  std::string model_path;
  bool from_scratch = false;
  std::uint64_t environment_seed = 1;
  RpcFlatConfig environment;
  LearnerConfig learner;
  std::optional<Assignment> initial_state;  // defaults to the all-zero assignment
  std::string output_dir = "out";
  std::vector<std::string> reports = {"trace", "csv", "model", "metrics"};
};

struct RunMetrics {
  int steps = 0;
  int states_learned = 0;
  int assignments_total = 0;
  std::map<std::string, int> domain_sizes;
  double transition_agreement = 0.0;
  double mean_observation_loglik = 0.0;
  int constraint_count = 0;
};

struct ExperimentResult {
  std::vector<StepRecord> trace;
  ExtendedModel final_model;
  LearnerState final_state;
  RunMetrics metrics;
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

inline void require_fields(const nlohmann::json& j, const std::vector<std::string>& fields,
                           const std::string& where, std::vector<std::string>& problems) {
  for (const auto& f : fields) {
    if (!j.contains(f)) problems.push_back(where + ": missing field '" + f + "'");
  }
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  std::vector<std::string> problems;
  ExperimentConfig cfg;

  if (!j.is_object()) throw validation_error("experiment config must be a JSON object");
  detail::require_fields(j, {"model", "environment", "learner"}, "config", problems);

  if (j.contains("model")) {
    if (j["model"].is_string()) cfg.model_path = j["model"].get<std::string>();
    else problems.push_back("model: must be a file path string");
  }
  cfg.from_scratch = j.value("from_scratch", false);
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("reports")) cfg.reports = j["reports"].get<std::vector<std::string>>();
  for (const auto& r : cfg.reports) {
    if (r != "trace" && r != "csv" && r != "model" && r != "metrics") {
      problems.push_back("reports: unknown report kind '" + r + "'");
    }
  }

  if (j.contains("environment") && j["environment"].is_object()) {
    const auto& je = j["environment"];
    if (je.value("type", "rpc_flat") != std::string("rpc_flat")) {
      problems.push_back("environment.type: only 'rpc_flat' is available");
    }
    cfg.environment_seed = je.value("seed", 1ULL);
    cfg.environment.robot_room = je.value("robot_room", 0);
    cfg.environment.pack_room = je.value("pack_room", 2);
    cfg.environment.cat_room = je.value("cat_room", 3);
    cfg.environment.pack_carried = je.value("pack_carried", false);
    cfg.environment.cat_on_robot = je.value("cat_on_robot", false);
    cfg.environment.cat_on_pack = je.value("cat_on_pack", false);
    cfg.environment.cat_random_walk = je.value("cat_random_walk", false);
    auto room_ok = [](int r) { return r >= 0 && r <= 5; };
    if (!room_ok(cfg.environment.robot_room)) problems.push_back("environment.robot_room: out of range 0..5");
    if (!room_ok(cfg.environment.pack_room)) problems.push_back("environment.pack_room: out of range 0..5");
    if (!room_ok(cfg.environment.cat_room)) problems.push_back("environment.cat_room: out of range 0..5");
    if (je.contains("sigma_env")) cfg.environment.sensors.sigma_env = je["sigma_env"].get<double>();
    if (!(cfg.environment.sensors.sigma_env > 0)) problems.push_back("environment.sigma_env: must be positive");
    if (je.contains("sensors") && je["sensors"].is_object()) {
      const auto& js = je["sensors"];
      auto read_pdf = [&](const char* name, Pdf& into) {
        if (!js.contains(name)) return;
        const auto& p = js[name];
        if (!p.is_array() || p.size() != 2) {
          problems.push_back(std::string("environment.sensors.") + name + ": expected [a, b]");
          return;
        }
        into.a = p[0].get<double>();
        into.b = p[1].get<double>();
      };
      read_pdf("t_same", cfg.environment.sensors.t_same);
      read_pdf("t_diff", cfg.environment.sensors.t_diff);
      read_pdf("w_zero", cfg.environment.sensors.w_zero);
      read_pdf("w_one", cfg.environment.sensors.w_one);
      read_pdf("w_two", cfg.environment.sensors.w_two);
    }
    if (je.contains("events")) {
      for (const auto& ev : je["events"]) {
        ExogenousEvent e;
        if (!ev.contains("at_step") || !ev.contains("kind")) {
          problems.push_back("environment.events: each event needs at_step and kind");
          continue;
        }
        e.at_step = ev["at_step"].get<int>();
        auto kind = event_kind_from_string(ev["kind"].get<std::string>());
        if (!kind) {
          problems.push_back("environment.events: unknown kind '" +
                             ev["kind"].get<std::string>() + "'");
          continue;
        }
        e.kind = *kind;
        if (e.at_step < 1) problems.push_back("environment.events: at_step must be >= 1");
        cfg.environment.events.push_back(e);
      }
    }
  }

  if (j.contains("learner") && j["learner"].is_object()) {
    const auto& jl = j["learner"];
    cfg.learner.alpha = jl.value("alpha", cfg.learner.alpha);
    cfg.learner.beta = jl.value("beta", cfg.learner.beta);
    cfg.learner.delta = jl.value("delta", cfg.learner.delta);
    cfg.learner.epsilon = jl.value("epsilon", cfg.learner.epsilon);
    cfg.learner.max_iter = jl.value("max_iter", cfg.learner.max_iter);
    cfg.learner.seed = jl.value("seed", cfg.learner.seed);
    cfg.learner.check_invariants = jl.value("check_invariants", true);
    if (jl.contains("explore")) {
      const auto& jx = jl["explore"];
      const std::string policy = jx.value("policy", "random");
      if (policy == "random") cfg.learner.explore = ExplorePolicy::random;
      else if (policy == "novelty") cfg.learner.explore = ExplorePolicy::novelty;
      else if (policy == "scripted") cfg.learner.explore = ExplorePolicy::scripted;
      else problems.push_back("learner.explore.policy: unknown policy '" + policy + "'");
      if (jx.contains("actions")) {
        cfg.learner.scripted_actions = jx["actions"].get<std::vector<std::string>>();
      }
    }
    for (const auto& p : cfg.learner.validate()) problems.push_back("learner." + p);
    if (jl.contains("initial_state")) {
      Assignment a;
      for (const auto& [k, v] : jl["initial_state"].items()) a.set(k, v.get<int>());
      cfg.initial_state = a;
    }
  }

  if (!problems.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw validation_error(msg);
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open config file: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw parse_error("config file is not valid JSON: " + path);
  return parse_experiment_config(j);
}

inline nlohmann::ordered_json experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["model"] = cfg.model_path;
  j["from_scratch"] = cfg.from_scratch;
  nlohmann::ordered_json je;
  je["type"] = "rpc_flat";
  je["seed"] = cfg.environment_seed;
  je["robot_room"] = cfg.environment.robot_room;
  je["pack_room"] = cfg.environment.pack_room;
  je["cat_room"] = cfg.environment.cat_room;
  je["pack_carried"] = cfg.environment.pack_carried;
  je["cat_on_robot"] = cfg.environment.cat_on_robot;
  je["cat_on_pack"] = cfg.environment.cat_on_pack;
  je["cat_random_walk"] = cfg.environment.cat_random_walk;
  je["sigma_env"] = cfg.environment.sensors.sigma_env;
  nlohmann::ordered_json js;
  auto put_pdf = [](const Pdf& p) { return nlohmann::ordered_json::array({p.a, p.b}); };
  js["t_same"] = put_pdf(cfg.environment.sensors.t_same);
  js["t_diff"] = put_pdf(cfg.environment.sensors.t_diff);
  js["w_zero"] = put_pdf(cfg.environment.sensors.w_zero);
  js["w_one"] = put_pdf(cfg.environment.sensors.w_one);
  js["w_two"] = put_pdf(cfg.environment.sensors.w_two);
  je["sensors"] = std::move(js);
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const auto& e : cfg.environment.events) {
    events.push_back(nlohmann::ordered_json{{"at_step", e.at_step}, {"kind", to_string(e.kind)}});
  }
  je["events"] = std::move(events);
  j["environment"] = std::move(je);
  nlohmann::ordered_json jl;
  jl["alpha"] = cfg.learner.alpha;
  jl["beta"] = cfg.learner.beta;
  jl["delta"] = cfg.learner.delta;
  jl["epsilon"] = cfg.learner.epsilon;
  jl["max_iter"] = cfg.learner.max_iter;
  jl["seed"] = cfg.learner.seed;
  jl["check_invariants"] = cfg.learner.check_invariants;
  nlohmann::ordered_json jx;
  jx["policy"] = to_string(cfg.learner.explore);
  jx["actions"] = cfg.learner.scripted_actions;
  jl["explore"] = std::move(jx);
  if (cfg.initial_state) {
    nlohmann::ordered_json ji;
    for (const auto& [k, v] : cfg.initial_state->bindings()) ji[k] = v;
    jl["initial_state"] = std::move(ji);
  }
  j["learner"] = std::move(jl);
  j["output_dir"] = cfg.output_dir;
  j["reports"] = cfg.reports;
  return j;
}

// ---------------------------------------------------------------------------
// From-scratch start: keep the declared structure, shrink every domain to {0},
// drop constraints and rules, and seat one neutral conditional per channel.

inline ExtendedModel make_from_scratch(const ExtendedModel& base) {
  ExtendedModel em = base;
  for (auto& d : em.model.domains) d.size = 1;
  em.model.constraints.clear();
  em.model.rules.clear();
  for (auto& pv : em.perception.variables) {
    pv.table.clear();
    double neutral = 0.0;
    if (pv.family == PdfKind::beta) neutral = 0.5;
    if (pv.family == PdfKind::gamma) neutral = 0.0;  // initializer yields the flattest member
    pv.table[DependencyKey(pv.dependency.size(), 0)] = pv.initializer.make(neutral);
  }
  return em;
}

// ---------------------------------------------------------------------------
// Ground-truth agreement metric

// Learned room values are identified with true rooms through the learned X/Y
// means, carried values through the learned W mean. Unmappable values make a
// visited pair count as disagreement.
inline double transition_agreement(const LearnerState& st) try {
  const auto& m = st.model;
  const auto& f = st.perception;

  std::map<Value, int> room_of_value;
  {
    const auto& px = f.variable("X");
    const auto& py = f.variable("Y");
    const int room_count = m.domain_size("loc_r");
    for (Value v = 0; v < room_count; ++v) {
      const double mx = px.conditional(DependencyKey{v}).mean();
      const double my = py.conditional(DependencyKey{v}).mean();
      int best_room = -1;
      double best_d2 = 0.25;  // require the mean inside the room's quarter
      for (int room = 0; room < 6; ++room) {
        const double dx = mx - RpcFlatEnvironment::room_x(room);
        const double dy = my - RpcFlatEnvironment::room_y(room);
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
          best_d2 = d2;
          best_room = room;
        }
      }
      if (best_room >= 0) room_of_value[v] = best_room;
    }
  }
  std::map<Value, int> load_of_value;
  {
    const auto& pw = f.variable("W");
    const int n = m.domain_size("loaded");
    for (Value v = 0; v < n; ++v) {
      const double mean = pw.conditional(DependencyKey{v}).mean();
      if (mean < 0.5) load_of_value[v] = 0;
      else if (mean < 1.5) load_of_value[v] = 1;
    }
  }

  auto map_state = [&](const Assignment& s) -> std::optional<RpcFlatEnvironment::AbstractState> {
    auto r = room_of_value.find(s.at("loc_r"));
    auto p = room_of_value.find(s.at("loc_p"));
    auto l = load_of_value.find(s.at("loaded"));
    if (r == room_of_value.end() || p == room_of_value.end() || l == load_of_value.end()) {
      return std::nullopt;
    }
    RpcFlatEnvironment::AbstractState a{r->second, p->second, l->second == 1};
    if (a.loaded && a.pack_room != a.robot_room) return std::nullopt;
    return a;
  };

  std::set<std::pair<Assignment, std::string>> visited;
  for (const auto& e : st.transitions) visited.insert({e.from, e.action});
  if (visited.empty()) return 0.0;

  int agree = 0;
  for (const auto& [s, a] : visited) {
    const auto truth = map_state(s);
    if (!truth) continue;
    const auto expected = RpcFlatEnvironment::true_next(*truth, a);
    Assignment predicted;
    try {
      predicted = apply_action(st.model, s, a);
    } catch (const rule_conflict_error&) {
      continue;
    }
    const auto got = map_state(predicted);
    if (got && *got == expected) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(visited.size());
} catch (const validation_error&) {
  return 0.0;  // model is not shaped like the reference world
}

// ---------------------------------------------------------------------------
// Orchestration

inline RunMetrics compute_metrics(const LearnerState& st, const std::vector<StepRecord>& trace) {
  RunMetrics metrics;
  metrics.steps = static_cast<int>(trace.size());
  metrics.states_learned = trace.empty() ? static_cast<int>(enumerate_states(st.model).size())
                                         : trace.back().state_count;
  metrics.assignments_total = static_cast<int>(st.model.all_assignments().size());
  for (const auto& d : st.model.domains) metrics.domain_sizes[d.name] = d.size;
  metrics.constraint_count = static_cast<int>(st.model.constraints.size());
  double total = 0.0;
  for (const auto& rec : trace) total += rec.loglik;
  metrics.mean_observation_loglik = trace.empty() ? 0.0 : total / static_cast<double>(trace.size());
  metrics.transition_agreement = transition_agreement(st);
  return metrics;
}

inline nlohmann::ordered_json metrics_to_json(const RunMetrics& m) {
  nlohmann::ordered_json j;
  j["steps"] = m.steps;
  j["states_learned"] = m.states_learned;
  j["assignments_total"] = m.assignments_total;
  j["domain_sizes"] = m.domain_sizes;
  j["transition_agreement"] = m.transition_agreement;
  j["mean_observation_loglik"] = m.mean_observation_loglik;
  j["constraint_count"] = m.constraint_count;
  return j;
}

inline std::string metrics_csv(const std::vector<StepRecord>& trace) {
  std::ostringstream os;
  os << "iter,branch,candidates,state_count,assignment_count,rule_count,constraint_count,loglik\n";
  for (const auto& rec : trace) {
    os << rec.iter << "," << rec.branch << "," << rec.candidates << "," << rec.state_count << ","
       << rec.assignment_count << "," << rec.rules_after << "," << rec.constraint_count << ","
       << detail::format_double(rec.loglik) << "\n";
  }
  return os.str();
}

inline std::string effective_output_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnvVar); env != nullptr && *env != '\0') {
    return env;
  }
  return cfg.output_dir;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const std::string& config_dir = "") {
  std::string model_path = cfg.model_path;
  if (!config_dir.empty() && !std::filesystem::path(model_path).is_absolute()) {
    model_path = (std::filesystem::path(config_dir) / model_path).string();
  }
  ExtendedModel em = load_model_file(model_path);
  if (cfg.from_scratch) em = make_from_scratch(em);

  LearnerState st;
  st.model = em.model;
  st.perception = em.perception;
  st.rng = Rng(cfg.learner.seed);
  if (cfg.initial_state) {
    st.current = *cfg.initial_state;
  } else {
    for (const auto& v : st.model.variables) st.current.set(v.name, 0);
  }

  RpcFlatEnvironment env(cfg.environment, cfg.environment_seed);

  ExperimentResult result;
  result.trace = run(st, env, cfg.learner);
  result.final_model = {st.model, st.perception};
  result.metrics = compute_metrics(st, result.trace);
  result.final_state = std::move(st);
  return result;
}

inline void write_reports(const ExperimentConfig& cfg, const ExperimentResult& result) {
  const std::filesystem::path dir = effective_output_dir(cfg);
  std::filesystem::create_directories(dir);
  auto wants = [&](const char* kind) {
    return std::find(cfg.reports.begin(), cfg.reports.end(), kind) != cfg.reports.end();
  };
  if (wants("trace")) write_trace_file((dir / "trace.jsonl").string(), result.trace);
  if (wants("model")) write_model_file((dir / "final.model").string(), result.final_model);
  if (wants("metrics")) {
    std::ofstream out(dir / "metrics.json");
    out << metrics_to_json(result.metrics).dump(2) << "\n";
  }
  if (wants("csv")) {
    std::ofstream out(dir / "steps.csv");
    out << metrics_csv(result.trace);
  }
}

inline ReplayVerdict replay(const std::string& trace_path, const ExperimentConfig& cfg,
                            const std::string& config_dir = "") {
  const auto recorded = read_trace_lines(trace_path);
  check_trace_schema(recorded);
  const auto result = run_experiment(cfg, config_dir);
  std::vector<std::string> fresh;
  for (const auto& rec : result.trace) fresh.push_back(step_record_to_json(rec).dump());
  return compare_traces(recorded, fresh);
}

}  // namespace planlearn
