#pragma once

#include <string>
#include <vector>

#include "planlearn/model_io.hpp"
#include "planlearn/rng.hpp"

#ifndef PLANLEARN_SOURCE_DIR
#define PLANLEARN_SOURCE_DIR "."
#endif

namespace testutil {

using namespace planlearn;

inline std::string source_path(const std::string& rel) {
  return std::string(PLANLEARN_SOURCE_DIR) + "/" + rel;
}

inline ExtendedModel rpc_prior() {
  return load_model_file(source_path("configs/rpc_flat_prior.model"));
}

// State shorthand in the room/pack/loaded order used by the fixture.
inline Assignment rpc_state(int r, int p, int l) {
  return Assignment::of({{"loc_r", r}, {"loc_p", p}, {"loaded", l}});
}

inline Formula random_formula(Rng& rng, const DomainModel& m, int depth) {
  const auto pick_var = [&]() -> const VariableSpec& {
    return m.variables[rng.uniform_index(m.variables.size())];
  };
  if (depth <= 0 || rng.uniform() < 0.4) {
    const auto& v = pick_var();
    if (rng.uniform() < 0.2) {
      // variable-equality atom when a same-domain partner exists
      std::vector<const VariableSpec*> partners;
      for (const auto& w : m.variables) {
        if (w.name != v.name && w.domain == v.domain) partners.push_back(&w);
      }
      if (!partners.empty()) {
        return Formula::eq_var(v.name, partners[rng.uniform_index(partners.size())]->name);
      }
    }
    return Formula::eq(v.name, static_cast<Value>(rng.uniform_index(
                                   static_cast<std::size_t>(m.domain_size(v.name)))));
  }
  const double roll = rng.uniform();
  if (roll < 0.25) return Formula::negate(random_formula(rng, m, depth - 1));
  if (roll < 0.65) {
    return Formula::conj({random_formula(rng, m, depth - 1), random_formula(rng, m, depth - 1)});
  }
  return Formula::disj({random_formula(rng, m, depth - 1), random_formula(rng, m, depth - 1)});
}

// Small random model: up to 3 variables over up to 2 shared domains of size
// <= 4, up to 3 random constraints.
inline DomainModel random_model(Rng& rng, int max_constraints = 3) {
  DomainModel m;
  const std::size_t n_domains = 1 + rng.uniform_index(2);
  for (std::size_t d = 0; d < n_domains; ++d) {
    m.domains.push_back({"d" + std::to_string(d), 2 + static_cast<int>(rng.uniform_index(3))});
  }
  const std::size_t n_vars = 1 + rng.uniform_index(3);
  for (std::size_t v = 0; v < n_vars; ++v) {
    m.variables.push_back(
        {"v" + std::to_string(v), m.domains[rng.uniform_index(n_domains)].name});
  }
  const std::size_t n_constraints = rng.uniform_index(static_cast<std::size_t>(max_constraints) + 1);
  for (std::size_t c = 0; c < n_constraints; ++c) {
    m.constraints.push_back(random_formula(rng, m, 2));
  }
  m.actions = {"a", "b"};
  return m;
}

inline Assignment random_total(Rng& rng, const DomainModel& m) {
  Assignment s;
  for (const auto& v : m.variables) {
    s.set(v.name, static_cast<Value>(
                      rng.uniform_index(static_cast<std::size_t>(m.domain_size(v.name)))));
  }
  return s;
}

// Random conjunction-of-literals premise (the shape produced by revision).
inline Formula random_literal_premise(Rng& rng, const DomainModel& m) {
  std::vector<Formula> lits;
  const std::size_t n = 1 + rng.uniform_index(3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = m.variables[rng.uniform_index(m.variables.size())];
    Formula atom = Formula::eq(
        v.name,
        static_cast<Value>(rng.uniform_index(static_cast<std::size_t>(m.domain_size(v.name)))));
    lits.push_back(rng.uniform() < 0.3 ? Formula::negate(atom) : atom);
  }
  if (lits.size() == 1) return lits.front();
  return Formula::conj(std::move(lits));
}

// Deterministic random rule set (retries until the pairwise check passes).
inline std::vector<ActionRule> random_deterministic_rules(Rng& rng, const DomainModel& m,
                                                          std::size_t max_rules = 5) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<ActionRule> rules;
    const std::size_t n = 1 + rng.uniform_index(max_rules);
    for (std::size_t i = 0; i < n; ++i) {
      ActionRule r;
      r.action = m.actions[rng.uniform_index(m.actions.size())];
      r.premise = random_literal_premise(rng, m);
      const auto& v = m.variables[rng.uniform_index(m.variables.size())];
      r.effect.set(v.name, static_cast<Value>(rng.uniform_index(
                               static_cast<std::size_t>(m.domain_size(v.name)))));
      rules.push_back(std::move(r));
    }
    if (check_determinism(rules, m).empty()) return rules;
  }
  return {};  // give up; caller treats an empty set as a trivially fine sample
}

}  // namespace testutil
