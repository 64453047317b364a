#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "planlearn/assignment.hpp"
#include "planlearn/errors.hpp"
#include "planlearn/formula.hpp"

namespace planlearn {

// Finite value set {0, 1, ..., size-1}; extending a domain always appends the
// next integer, so the size is the whole representation.
struct Domain {
  std::string name;
  int size = 0;
};

struct VariableSpec {
  std::string name;
  std::string domain;  // name of a shared Domain
};

struct ActionRule {
  std::string action;
  Formula premise;
  Assignment effect;  // partial, consistent by construction

  std::string to_string() const {
    std::string s = premise.to_string() + " => " + action + " :";
    bool first = true;
    for (const auto& [k, v] : effect.bindings()) {
      s += first ? " " : ", ";
      s += k + " = " + std::to_string(v);
      first = false;
    }
    return s;
  }

  friend bool operator==(const ActionRule& a, const ActionRule& b) {
    return a.action == b.action && a.effect == b.effect &&
           Formula::structurally_equal(a.premise.canonical(), b.premise.canonical());
  }
};

struct DeterminismViolation {
  ActionRule first;
  ActionRule second;
  Assignment witness;
  std::string variable;
};

struct DomainModel {
  std::vector<Domain> domains;
  std::vector<VariableSpec> variables;
  std::vector<Formula> constraints;
  std::vector<std::string> actions;
  std::vector<ActionRule> rules;

  const Domain& domain_of(const std::string& var) const {
    for (const auto& v : variables) {
      if (v.name == var) {
        for (const auto& d : domains) {
          if (d.name == v.domain) return d;
        }
        throw validation_error("variable references unknown domain: " + var);
      }
    }
    throw validation_error("unknown variable: " + var);
  }

  Domain& domain_named(const std::string& name) {
    for (auto& d : domains) {
      if (d.name == name) return d;
    }
    throw validation_error("unknown domain: " + name);
  }

  int domain_size(const std::string& var) const { return domain_of(var).size; }

  bool has_action(const std::string& a) const {
    return std::find(actions.begin(), actions.end(), a) != actions.end();
  }

  // All total assignments, enumerated in declaration order with the first
  // variable most significant. The order is part of the trace contract.
  std::vector<Assignment> all_assignments() const {
    std::vector<Assignment> out;
    Assignment cur;
    enumerate_rec(0, cur, out);
    return out;
  }

  bool satisfies_constraints(const Assignment& s) const {
    return std::all_of(constraints.begin(), constraints.end(),
                       [&](const Formula& c) { return c.eval(s); });
  }

  bool is_total(const Assignment& s) const {
    if (s.size() != variables.size()) return false;
    for (const auto& v : variables) {
      auto val = s.get(v.name);
      if (!val || *val < 0 || *val >= domain_size(v.name)) return false;
    }
    return true;
  }

  // Compact state label: digits joined when every domain is single-digit
  // (the usual case), comma-separated otherwise.
  std::string label(const Assignment& s) const {
    bool digits = std::all_of(domains.begin(), domains.end(),
                              [](const Domain& d) { return d.size <= 10; });
    std::string out;
    for (const auto& v : variables) {
      if (!out.empty() && !digits) out += ",";
      out += std::to_string(s.at(v.name));
    }
    return out;
  }

 private:
  void enumerate_rec(std::size_t i, Assignment& cur, std::vector<Assignment>& out) const {
    if (i == variables.size()) {
      out.push_back(cur);
      return;
    }
    const int n = domain_size(variables[i].name);
    for (int v = 0; v < n; ++v) {
      cur.set(variables[i].name, v);
      enumerate_rec(i + 1, cur, out);
    }
    cur.erase(variables[i].name);
  }
};

inline bool eval_formula(const Formula& f, const Assignment& s) { return f.eval(s); }

inline std::vector<Assignment> enumerate_states(const DomainModel& m) {
  std::vector<Assignment> out;
  for (auto& a : m.all_assignments()) {
    if (m.satisfies_constraints(a)) out.push_back(std::move(a));
  }
  return out;
}

// gamma(a, s): effects of applicable rules, frame values elsewhere. Callable
// on non-state assignments; the learner walks those while growing S.
inline Assignment apply_action(const DomainModel& m, const Assignment& s, const std::string& a) {
  Assignment result = s;
  std::map<std::string, const ActionRule*> bound_by;
  for (const auto& r : m.rules) {
    if (r.action != a || !r.premise.eval(s)) continue;
    for (const auto& [var, v] : r.effect.bindings()) {
      auto it = bound_by.find(var);
      if (it != bound_by.end() && result.at(var) != v) {
        throw rule_conflict_error("conflicting effects on " + var + " between rules [" +
                                  it->second->to_string() + "] and [" + r.to_string() + "]");
      }
      result.set(var, v);
      bound_by[var] = &r;
    }
  }
  return result;
}

// Pairwise rule check by enumeration over all total assignments: two rules of
// one action must not disagree on a variable at any assignment satisfying both
// premises.
inline std::vector<DeterminismViolation> check_determinism(const std::vector<ActionRule>& rules,
                                                           const DomainModel& m) {
  std::vector<DeterminismViolation> out;
  const auto assignments = m.all_assignments();
  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t j = i + 1; j < rules.size(); ++j) {
      const auto& r1 = rules[i];
      const auto& r2 = rules[j];
      if (r1.action != r2.action) continue;
      std::optional<std::string> conflict_var;
      for (const auto& [var, v] : r1.effect.bindings()) {
        auto w = r2.effect.get(var);
        if (w && *w != v) {
          conflict_var = var;
          break;
        }
      }
      if (!conflict_var) continue;
      for (const auto& s : assignments) {
        if (r1.premise.eval(s) && r2.premise.eval(s)) {
          out.push_back({r1, r2, s, *conflict_var});
          break;
        }
      }
    }
  }
  return out;
}

// Weakening that admits exactly s0p: every constraint gains the disjunct
// "all variables equal s0p", and every variable with a freshly added value
// gets "V = v_new -> rest of s0p".
inline std::vector<Formula> weaken_constraints(
    const std::vector<Formula>& constraints, const Assignment& s0p,
    const std::vector<std::pair<std::string, Value>>& new_values) {
  std::vector<Formula> equal_s0p;
  for (const auto& [var, v] : s0p.bindings()) equal_s0p.push_back(Formula::eq(var, v));
  const Formula admit = Formula::conj(equal_s0p);

  std::vector<Formula> out;
  out.reserve(constraints.size() + new_values.size());
  for (const auto& c : constraints) {
    if (c.kind() == Formula::Kind::disj) {
      auto children = c.children();
      children.push_back(admit);
      out.push_back(Formula::disj(std::move(children)));
    } else {
      out.push_back(Formula::disj({c, admit}));
    }
  }
  for (const auto& [var, v_new] : new_values) {
    std::vector<Formula> others;
    for (const auto& [w, val] : s0p.bindings()) {
      if (w != var) others.push_back(Formula::eq(w, val));
    }
    out.push_back(Formula::implies(Formula::eq(var, v_new), Formula::conj(std::move(others))));
  }
  return out;
}

inline bool semantically_equivalent(const Formula& f1, const Formula& f2, const DomainModel& m) {
  for (const auto& s : m.all_assignments()) {
    if (f1.eval(s) != f2.eval(s)) return false;
  }
  return true;
}

inline bool same_satisfying_set(const std::vector<Formula>& a, const std::vector<Formula>& b,
                                const DomainModel& m) {
  auto holds = [](const std::vector<Formula>& cs, const Assignment& s) {
    return std::all_of(cs.begin(), cs.end(), [&](const Formula& c) { return c.eval(s); });
  };
  for (const auto& s : m.all_assignments()) {
    if (holds(a, s) != holds(b, s)) return false;
  }
  return true;
}

// Conservative cleanup: drop disjuncts that are redundant for a single
// constraint, then constraints implied by the rest, then disjuncts whose
// removal leaves the conjunction's satisfying set untouched. Verified against
// the original set by enumeration at every step, so the state set never moves.
inline std::vector<Formula> simplify_constraints(const std::vector<Formula>& constraints,
                                                 const DomainModel& m) {
  std::vector<Formula> cur = constraints;

  auto absorb_disjuncts = [&](const Formula& f) {
    if (f.kind() != Formula::Kind::disj) return f;
    std::vector<Formula> kept = f.children();
    bool changed = true;
    while (changed && kept.size() > 1) {
      changed = false;
      for (std::size_t i = 0; i < kept.size(); ++i) {
        std::vector<Formula> without = kept;
        without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
        if (semantically_equivalent(Formula::disj(without), f, m)) {
          kept = std::move(without);
          changed = true;
          break;
        }
      }
    }
    if (kept.size() == 1) return kept.front();
    return Formula::disj(std::move(kept));
  };

  for (int pass = 0; pass < 8; ++pass) {
    bool changed = false;

    for (auto& c : cur) {
      Formula reduced = absorb_disjuncts(c);
      if (!Formula::structurally_equal(reduced.canonical(), c.canonical())) {
        c = std::move(reduced);
        changed = true;
      }
    }

    // Whole constraints implied by the rest (tautologies included).
    for (std::size_t i = 0; i < cur.size();) {
      std::vector<Formula> without = cur;
      without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
      if (same_satisfying_set(without, cur, m)) {
        cur = std::move(without);
        changed = true;
      } else {
        ++i;
      }
    }

    // Disjuncts that only other constraints make redundant.
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (cur[i].kind() != Formula::Kind::disj) continue;
      bool removed = true;
      while (removed && cur[i].children().size() > 1) {
        removed = false;
        for (std::size_t j = 0; j < cur[i].children().size(); ++j) {
          std::vector<Formula> trial = cur;
          auto children = cur[i].children();
          children.erase(children.begin() + static_cast<std::ptrdiff_t>(j));
          trial[i] = children.size() == 1 ? children.front() : Formula::disj(children);
          if (same_satisfying_set(trial, cur, m)) {
            cur = std::move(trial);
            changed = true;
            removed = true;
            break;
          }
        }
      }
    }

    if (!changed) break;
  }
  return cur;
}

// Model-level validation used after parsing and after learning steps.
inline void validate_model(const DomainModel& m) {
  std::set<std::string> names;
  for (const auto& d : m.domains) {
    if (d.size <= 0) throw validation_error("domain " + d.name + " is empty");
    if (!names.insert(d.name).second) throw validation_error("duplicate domain: " + d.name);
  }
  std::set<std::string> vars;
  for (const auto& v : m.variables) {
    if (!vars.insert(v.name).second) throw validation_error("duplicate variable: " + v.name);
    m.domain_of(v.name);  // throws when the domain is missing
  }
  std::function<void(const Formula&, const std::string&)> check_formula_vars =
      [&](const Formula& f, const std::string& what) -> void {
    switch (f.kind()) {
      case Formula::Kind::value_atom:
        if (!vars.count(f.var())) throw validation_error(what + " references unknown variable: " + f.var());
        if (f.value() < 0 || f.value() >= m.domain_size(f.var())) {
          throw validation_error(what + " uses out-of-domain value for " + f.var());
        }
        break;
      case Formula::Kind::var_atom: {
        if (!vars.count(f.var())) throw validation_error(what + " references unknown variable: " + f.var());
        if (!vars.count(f.var2())) throw validation_error(what + " references unknown variable: " + f.var2());
        // Equality atoms only make sense between variables of one domain.
        if (m.domain_of(f.var()).name != m.domain_of(f.var2()).name) {
          throw validation_error(what + " equates variables of different domains: " + f.var() +
                                 ", " + f.var2());
        }
        break;
      }
      default:
        for (const auto& c : f.children()) check_formula_vars(c, what);
    }
  };
  for (const auto& c : m.constraints) check_formula_vars(c, "constraint");
  for (const auto& r : m.rules) {
    if (!m.has_action(r.action)) throw validation_error("rule uses undeclared action: " + r.action);
    check_formula_vars(r.premise, "rule premise");
    for (const auto& [var, v] : r.effect.bindings()) {
      if (!vars.count(var)) throw validation_error("rule effect references unknown variable: " + var);
      if (v < 0 || v >= m.domain_size(var)) {
        throw validation_error("rule effect value out of domain for " + var);
      }
    }
  }
}

}  // namespace planlearn
