#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "planlearn/assignment.hpp"
#include "planlearn/domain.hpp"
#include "planlearn/errors.hpp"
#include "planlearn/pdf.hpp"

namespace planlearn {

// Sensor readout, one real per perception variable in declaration order.
struct Observation {
  std::vector<double> values;

  friend bool operator==(const Observation&, const Observation&) = default;
};

using DependencyKey = std::vector<Value>;

// One sensor channel: a parametric family conditioned on a projection of the
// state, stored as a parameter table keyed by that projection.
struct PerceptionVariable {
  std::string name;
  std::vector<std::string> dependency;  // state variables, ordered
  PdfKind family = PdfKind::gaussian;
  PdfInitializer initializer;
  std::map<DependencyKey, Pdf> table;

  DependencyKey project(const Assignment& s) const {
    DependencyKey key;
    key.reserve(dependency.size());
    for (const auto& v : dependency) {
      auto val = s.get(v);
      if (!val) throw eval_error("assignment misses dependency variable " + v + " of " + name);
      key.push_back(*val);
    }
    return key;
  }

  const Pdf& conditional(const DependencyKey& key) const {
    auto it = table.find(key);
    if (it == table.end()) {
      std::string ks;
      for (auto v : key) ks += (ks.empty() ? "" : ",") + std::to_string(v);
      throw undefined_conditional_error("no conditional for " + name + " given (" + ks + ")");
    }
    return it->second;
  }

  const Pdf& conditional(const Assignment& s) const { return conditional(project(s)); }
};

struct PerceptionModel {
  std::vector<PerceptionVariable> variables;

  const PerceptionVariable& variable(const std::string& name) const {
    for (const auto& v : variables) {
      if (v.name == name) return v;
    }
    throw validation_error("unknown perception variable: " + name);
  }
};

inline double pdf_eval(const Pdf& p, double x) { return p.density(x); }

inline double pdf_mode_density(const Pdf& p) { return p.mode_density(); }

// f(x, v) = product of per-channel conditional densities.
inline double likelihood(const PerceptionModel& f, const Observation& x, const Assignment& v) {
  double prod = 1.0;
  for (std::size_t i = 0; i < f.variables.size(); ++i) {
    prod *= f.variables[i].conditional(v).density(x.values[i]);
  }
  return prod;
}

// Candidates whose every channel density reaches (1 - eps) times the mode
// density of that candidate's own conditional. Zero-density components never
// pass, so eps = 1 keeps exactly the candidates with positive support.
inline std::vector<Assignment> above_threshold(const PerceptionModel& f, const Observation& x,
                                               const std::vector<Assignment>& candidates,
                                               double eps) {
  std::vector<Assignment> out;
  for (const auto& s : candidates) {
    bool ok = true;
    for (std::size_t i = 0; i < f.variables.size() && ok; ++i) {
      const Pdf& p = f.variables[i].conditional(s);
      const double d = p.density(x.values[i]);
      ok = d > 0.0 && d >= (1.0 - eps) * p.mode_density();
    }
    if (ok) out.push_back(s);
  }
  return out;
}

struct ObservationEntry {
  Assignment state;
  Observation x;
};

// Refit the conditionals selected by the newest observation's state: for each
// channel, gather every historical observation whose state agrees with s on
// the channel's dependency projection, fit, and blend with weight w.
// Returns the touched (variable, key) pairs for the step record.
inline std::vector<std::pair<std::string, DependencyKey>> update_perception(
    PerceptionModel& f, const std::vector<ObservationEntry>& history, const Assignment& s,
    double w) {
  std::vector<std::pair<std::string, DependencyKey>> touched;
  for (std::size_t i = 0; i < f.variables.size(); ++i) {
    auto& pv = f.variables[i];
    const DependencyKey key = pv.project(s);
    std::vector<double> samples;
    for (const auto& entry : history) {
      if (pv.project(entry.state) == key) samples.push_back(entry.x.values[i]);
    }
    if (samples.empty()) continue;
    const Pdf fitted = fit_mle(pv.family, samples);
    pv.table[key] = blend_update(pv.conditional(key), fitted, w);
    touched.emplace_back(pv.name, key);
  }
  return touched;
}

inline Pdf init_pdf(const PdfInitializer& initializer, double x) { return initializer.make(x); }

}  // namespace planlearn
