#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "planlearn/errors.hpp"
#include "planlearn/learner.hpp"

namespace planlearn {

inline constexpr int kTraceVersion = 1;

// One line-delimited object per iteration, keys in fixed order so identical
// runs serialize to identical bytes.
inline nlohmann::ordered_json step_record_to_json(const StepRecord& rec) {
  nlohmann::ordered_json j;
  j["v"] = kTraceVersion;
  j["iter"] = rec.iter;
  j["action"] = rec.action;
  j["observation"] = rec.observation.values;
  j["branch"] = rec.branch;
  j["candidates"] = rec.candidates;
  j["candidate_states"] = rec.candidate_states;
  j["chosen"] = rec.chosen;
  j["loglik"] = rec.loglik;
  j["weakened"] = rec.weakened;
  nlohmann::ordered_json ext = nlohmann::ordered_json::array();
  for (const auto& e : rec.extended) {
    ext.push_back(nlohmann::ordered_json{{"domain", e.domain}, {"value", e.value}});
  }
  j["extended"] = std::move(ext);
  j["added_constraints"] = rec.added_constraints;
  j["gamma_changed"] = rec.gamma_changed;
  j["rules_before"] = rec.rules_before;
  j["rules_after"] = rec.rules_after;
  j["touched_params"] = rec.touched_params;
  j["state_count"] = rec.state_count;
  j["assignment_count"] = rec.assignment_count;
  j["constraint_count"] = rec.constraint_count;
  j["domain_sizes"] = rec.domain_sizes;
  return j;
}

inline std::string trace_to_text(const std::vector<StepRecord>& trace) {
  std::ostringstream os;
  for (const auto& rec : trace) os << step_record_to_json(rec).dump() << "\n";
  return os.str();
}

inline void write_trace_file(const std::string& path, const std::vector<StepRecord>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error("cannot write trace file: " + path);
  out << trace_to_text(trace);
}

inline std::vector<std::string> read_trace_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open trace file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// Schema gate for replay: every line must be an object carrying the expected
// version tag.
inline void check_trace_schema(const std::vector<std::string>& lines) {
  if (lines.empty()) throw parse_error("trace is empty");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    nlohmann::json j = nlohmann::json::parse(lines[i], nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("v") || !j.contains("iter")) {
      throw parse_error("trace line " + std::to_string(i + 1) + " is not a step record");
    }
    if (j["v"] != kTraceVersion) {
      throw parse_error("trace version " + j["v"].dump() + " is not supported (expected " +
                        std::to_string(kTraceVersion) + ")");
    }
  }
}

struct ReplayVerdict {
  bool identical = false;
  int first_divergence = 0;  // 1-based step; 0 when identical
  std::string detail;
};

inline ReplayVerdict compare_traces(const std::vector<std::string>& recorded,
                                    const std::vector<std::string>& fresh) {
  const std::size_t n = std::min(recorded.size(), fresh.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (recorded[i] != fresh[i]) {
      return {false, static_cast<int>(i + 1),
              "recorded: " + recorded[i] + "\n   fresh: " + fresh[i]};
    }
  }
  if (recorded.size() != fresh.size()) {
    return {false, static_cast<int>(n + 1),
            "length mismatch: recorded " + std::to_string(recorded.size()) + " steps, fresh " +
                std::to_string(fresh.size())};
  }
  return {true, 0, ""};
}

}  // namespace planlearn
