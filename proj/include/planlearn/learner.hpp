#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "planlearn/domain.hpp"
#include "planlearn/environment.hpp"
#include "planlearn/errors.hpp"
#include "planlearn/hitting_set.hpp"
#include "planlearn/perception.hpp"
#include "planlearn/rng.hpp"

namespace planlearn {

enum class ExplorePolicy { random, novelty, scripted };

inline std::string to_string(ExplorePolicy p) {
  switch (p) {
    case ExplorePolicy::random: return "random";
    case ExplorePolicy::novelty: return "novelty";
    case ExplorePolicy::scripted: return "scripted";
  }
  return "?";
}

struct LearnerConfig {
  double alpha = 0.6;     // transition trust
  double beta = 0.9;      // perception trust
  double delta = 0.5;     // similarity weight
  double epsilon = 0.999; // threshold openness
  int max_iter = 100;
  std::uint64_t seed = 1;
  ExplorePolicy explore = ExplorePolicy::random;
  std::vector<std::string> scripted_actions;
  bool check_invariants = true;

  std::vector<std::string> validate() const {
    std::vector<std::string> problems;
    auto unit = [&](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) problems.push_back(std::string(name) + " must lie in [0,1]");
    };
    unit(alpha, "alpha");
    unit(beta, "beta");
    unit(delta, "delta");
    unit(epsilon, "epsilon");
    if (max_iter < 1) problems.push_back("max_iter must be at least 1");
    if (explore == ExplorePolicy::scripted &&
        static_cast<int>(scripted_actions.size()) < max_iter) {
      problems.push_back("scripted explore needs one action per iteration");
    }
    return problems;
  }
};

struct TransitionEntry {
  Assignment from;
  std::string action;
  Assignment to;
};

struct LearnerState {
  DomainModel model;
  PerceptionModel perception;
  Assignment current;
  std::vector<TransitionEntry> transitions;     // T, append-only
  std::vector<ObservationEntry> observations;   // O, append-only
  Rng rng{1};
  int step_count = 0;
};

struct DomainExtension {
  std::string domain;
  Value value;
};

// One line of the replayable run log.
struct StepRecord {
  int iter = 0;
  std::string action;
  Observation observation;
  std::string branch;  // "S", "DomMinusS" or "extend"
  int candidates = 0;
  std::vector<std::string> candidate_states;
  std::string chosen;
  double loglik = 0.0;
  bool weakened = false;
  std::vector<DomainExtension> extended;
  std::vector<std::string> added_constraints;
  bool gamma_changed = false;
  int rules_before = 0;
  int rules_after = 0;
  std::vector<std::string> touched_params;
  int state_count = 0;
  int assignment_count = 0;
  int constraint_count = 0;
  std::map<std::string, int> domain_sizes;
};

// ---------------------------------------------------------------------------
// Similarity and next-state selection

// Per-variable agreement product; delta = 0 makes everything similar,
// delta = 1 recovers plain equality.
inline double sim(const Assignment& s, const Assignment& sp, double delta, const DomainModel& m) {
  double prod = 1.0;
  for (const auto& v : m.variables) {
    const double k = static_cast<double>(m.domain_size(v.name)) - 1.0;
    const bool eq = s.at(v.name) == sp.at(v.name);
    prod *= (1.0 + delta * (eq ? k : -1.0)) / (1.0 + delta * k);
  }
  return prod;
}

// argmax of likelihood * similarity; exact score ties are broken by a uniform
// draw from the learner's stream.
inline Assignment select_next_state(const std::vector<Assignment>& candidates, const Observation& x,
                                    const Assignment& predicted, double delta,
                                    const PerceptionModel& f, const DomainModel& m, Rng& rng) {
  if (candidates.empty()) throw internal_error("select_next_state on empty candidate set");
  std::vector<std::size_t> best;
  double best_score = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double score = likelihood(f, x, candidates[i]) * sim(candidates[i], predicted, delta, m);
    if (score > best_score) {
      best_score = score;
      best = {i};
    } else if (score == best_score) {
      best.push_back(i);
    }
  }
  if (best.empty()) throw internal_error("select_next_state: no finite score");
  return candidates[best[rng.uniform_index(best.size())]];
}

// ---------------------------------------------------------------------------
// Exploration

inline std::string explore(const DomainModel& m, const Assignment& s0,
                           const std::vector<TransitionEntry>& history, Rng& rng,
                           const LearnerConfig& cfg, int step_index) {
  if (m.actions.empty()) throw validation_error("explore requires at least one action");
  switch (cfg.explore) {
    case ExplorePolicy::random:
      return m.actions[rng.uniform_index(m.actions.size())];
    case ExplorePolicy::novelty: {
      std::map<std::string, int> visits;
      for (const auto& a : m.actions) visits[a] = 0;
      for (const auto& e : history) {
        if (e.from == s0) ++visits[e.action];
      }
      int least = INT_MAX;
      for (const auto& a : m.actions) least = std::min(least, visits[a]);
      std::vector<std::string> pool;
      for (const auto& a : m.actions) {
        if (visits[a] == least) pool.push_back(a);
      }
      return pool[rng.uniform_index(pool.size())];
    }
    case ExplorePolicy::scripted:
      if (step_index >= static_cast<int>(cfg.scripted_actions.size())) {
        throw validation_error("scripted explore ran out of actions");
      }
      return cfg.scripted_actions[static_cast<std::size_t>(step_index)];
  }
  throw internal_error("unknown explore policy");
}

// ---------------------------------------------------------------------------
// Domain extension

struct ExtendDomResult {
  DomainModel model;
  std::vector<DomainExtension> extended;
};

// Called when no assignment passes the threshold: pick the most likely
// assignment, find the channels that stay unlikely there, and extend a
// minimum hitting set of their dependency domains by one fresh value each.
inline ExtendDomResult extend_dom(const DomainModel& m, const PerceptionModel& f,
                                  const Observation& x, double eps, Rng& rng) {
  const auto all = m.all_assignments();
  std::vector<std::size_t> best;
  double best_score = -1.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double score = likelihood(f, x, all[i]);
    if (score > best_score) {
      best_score = score;
      best = {i};
    } else if (score == best_score) {
      best.push_back(i);
    }
  }
  if (best.empty()) throw internal_error("extend_dom: no finite likelihood");
  const Assignment& s = all[best[rng.uniform_index(best.size())]];

  std::vector<std::set<std::string>> family;
  for (std::size_t i = 0; i < f.variables.size(); ++i) {
    const auto& pv = f.variables[i];
    const Pdf& p = pv.conditional(s);
    if (p.density(x.values[i]) < (1.0 - eps) * p.mode_density()) {
      std::set<std::string> deps;
      for (const auto& v : pv.dependency) deps.insert(m.domain_of(v).name);
      family.push_back(std::move(deps));
    }
  }
  if (family.empty()) {
    throw internal_error("extend_dom: every channel is above threshold at the best assignment");
  }

  ExtendDomResult result{m, {}};
  for (const auto& name : minimal_hitting_set(family)) {
    Domain& d = result.model.domain_named(name);
    result.extended.push_back({name, d.size});
    d.size += 1;
  }
  return result;
}

// Completes the parameter tables after a domain extension. For a channel
// whose existing entries already explain the observation, keys copy from the
// entries realizing the same equality pattern between same-domain dependency
// variables (so pair channels keep their structure). For the channels that
// caused the extension, keys copy the best-matching existing conditional when
// it explains the observation well enough and take a fresh initializer
// conditional otherwise.
inline PerceptionModel extend_f(const DomainModel& m, const PerceptionModel& f,
                                const Observation& x, double eps) {
  PerceptionModel out = f;
  for (std::size_t i = 0; i < out.variables.size(); ++i) {
    auto& pv = out.variables[i];
    const auto existing = pv.table;
    if (existing.empty()) continue;
    const std::size_t arity = pv.dependency.size();

    bool explained = false;
    for (const auto& [cand, pdf] : existing) {
      const double d = pdf.density(x.values[i]);
      if (d > 0.0 && d >= (1.0 - eps) * pdf.mode_density()) explained = true;
    }

    std::vector<std::set<Value>> old_values(arity);
    for (const auto& [key, _] : existing) {
      for (std::size_t p = 0; p < arity; ++p) old_values[p].insert(key[p]);
    }

    std::vector<std::pair<std::size_t, std::size_t>> same_domain_pairs;
    for (std::size_t p = 0; p < arity; ++p) {
      for (std::size_t q = p + 1; q < arity; ++q) {
        if (m.domain_of(pv.dependency[p]).name == m.domain_of(pv.dependency[q]).name) {
          same_domain_pairs.emplace_back(p, q);
        }
      }
    }

    auto agrees_on_old = [&](const DependencyKey& key, const DependencyKey& cand) {
      for (std::size_t p = 0; p < arity; ++p) {
        if (old_values[p].count(key[p]) && cand[p] != key[p]) return false;
      }
      return true;
    };
    auto same_pattern = [&](const DependencyKey& key, const DependencyKey& cand) {
      for (const auto& [p, q] : same_domain_pairs) {
        if ((key[p] == key[q]) != (cand[p] == cand[q])) return false;
      }
      return true;
    };

    // Iterate the full key product in ascending order.
    DependencyKey key(arity, 0);
    for (;;) {
      if (!existing.count(key)) {
        const Pdf* pattern_src = nullptr;
        double pattern_best = -1.0;
        const Pdf* plain_src = nullptr;
        double plain_best = -1.0;
        for (const auto& [cand, pdf] : existing) {
          if (!agrees_on_old(key, cand)) continue;
          const double d = pdf.density(x.values[i]);
          if (d > plain_best) {
            plain_best = d;
            plain_src = &pdf;
          }
          if (explained && !same_domain_pairs.empty() && same_pattern(key, cand) &&
              d > pattern_best) {
            pattern_best = d;
            pattern_src = &pdf;
          }
        }
        // A copy must both beat the initializer alternative and explain the
        // observation at its own threshold, or the next selection round could
        // come up empty.
        if (pattern_src != nullptr) {
          pv.table[key] = *pattern_src;
        } else if (plain_src != nullptr &&
                   plain_best >= (1.0 - eps) * pv.initializer.mode_density(x.values[i]) &&
                   plain_best >= (1.0 - eps) * plain_src->mode_density()) {
          pv.table[key] = *plain_src;
        } else {
          pv.table[key] = init_pdf(pv.initializer, x.values[i]);
        }
      }
      // advance mixed-radix counter
      bool wrapped = arity == 0;
      for (std::size_t p = arity; p > 0;) {
        --p;
        if (++key[p] < m.domain_of(pv.dependency[p]).size) break;
        key[p] = 0;
        if (p == 0) wrapped = true;
      }
      if (wrapped) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rule revision and factorization

namespace detail {

struct Literal {
  bool positive = true;
  bool var_eq = false;
  std::string var;
  std::string var2;
  Value value = 0;

  Formula to_formula() const {
    Formula atom = var_eq ? Formula::eq_var(var, var2) : Formula::eq(var, value);
    return positive ? atom : Formula::negate(atom);
  }

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

inline std::optional<Literal> as_literal(const Formula& f) {
  if (f.kind() == Formula::Kind::value_atom) return Literal{true, false, f.var(), "", f.value()};
  if (f.kind() == Formula::Kind::var_atom) return Literal{true, true, f.var(), f.var2(), 0};
  if (f.kind() == Formula::Kind::neg) {
    auto inner = as_literal(f.children().front());
    if (inner && inner->positive) {
      inner->positive = false;
      return inner;
    }
  }
  return std::nullopt;
}

// Premise as a flat literal conjunction; nullopt when the premise uses any
// other connective shape (such rules are left out of factorization).
inline std::optional<std::vector<Literal>> premise_literals(const Formula& f) {
  if (f.kind() == Formula::Kind::conj) {
    std::vector<Literal> out;
    for (const auto& c : f.children()) {
      auto sub = premise_literals(c);
      if (!sub) return std::nullopt;
      out.insert(out.end(), sub->begin(), sub->end());
    }
    return out;
  }
  auto lit = as_literal(f);
  if (!lit) return std::nullopt;
  return std::vector<Literal>{*lit};
}

inline Formula literals_to_premise(std::vector<Literal> lits) {
  std::vector<Formula> children;
  children.reserve(lits.size());
  for (const auto& l : lits) children.push_back(l.to_formula());
  if (children.size() == 1) return children.front();
  return Formula::conj(std::move(children));
}

}  // namespace detail

// Replace every rule of `a` that fires at s but misses s_new with per-variable
// specializations excluding s, then pin the observed change with one
// full-premise rule per changed variable.
inline std::vector<ActionRule> revise_rules(const std::vector<ActionRule>& rules,
                                            const Assignment& s, const std::string& a,
                                            const Assignment& s_new, const DomainModel& m) {
  auto effect_satisfied = [](const Assignment& eff, const Assignment& state) {
    return eff.subset_of(state);
  };

  std::vector<ActionRule> out;
  std::vector<const ActionRule*> kept_applicable;
  for (const auto& r : rules) {
    if (r.action != a || !r.premise.eval(s) || effect_satisfied(r.effect, s_new)) {
      out.push_back(r);
      if (r.action == a && r.premise.eval(s)) kept_applicable.push_back(&r);
      continue;
    }
    for (const auto& v : m.variables) {
      const Formula exclusion = Formula::negate(Formula::eq(v.name, s.at(v.name)));
      std::vector<Formula> children;
      if (r.premise.kind() == Formula::Kind::conj) {
        children = r.premise.children();
      } else {
        children.push_back(r.premise);
      }
      children.push_back(exclusion);
      out.push_back({a, Formula::conj(std::move(children)), r.effect});
    }
  }
  for (const auto& v : m.variables) {
    if (s.at(v.name) == s_new.at(v.name)) continue;
    // Skip when a surviving applicable rule already produces the observed value.
    bool covered = false;
    for (const ActionRule* r : kept_applicable) {
      auto bound = r->effect.get(v.name);
      if (bound && *bound == s_new.at(v.name)) covered = true;
    }
    if (covered) continue;
    std::vector<Formula> prem;
    for (const auto& w : m.variables) prem.push_back(Formula::eq(w.name, s.at(w.name)));
    Assignment eff;
    eff.set(v.name, s_new.at(v.name));
    out.push_back({a, Formula::conj(std::move(prem)), eff});
  }
  return out;
}

// The three merge patterns, applied to a fixpoint in a deterministic order:
//   1. complementary literal elimination,
//   2. value-set coverage folded into a negated (or dropped) literal,
//   3. equal-value pairs folded into V = V'.
// Each rewrite preserves the induced transition function exactly.
inline std::vector<ActionRule> factorize_rules(const std::vector<ActionRule>& rules,
                                               const DomainModel& m) {
  using detail::Literal;
  std::vector<ActionRule> cur = rules;
  int budget = 1000;

  auto sorted_without = [](const std::vector<Literal>& lits, std::size_t skip) {
    std::vector<Literal> rest;
    rest.reserve(lits.size() - 1);
    for (std::size_t i = 0; i < lits.size(); ++i) {
      if (i != skip) rest.push_back(lits[i]);
    }
    std::sort(rest.begin(), rest.end());
    return rest;
  };

  auto erase_indices = [&](std::vector<std::size_t> idx) {
    std::sort(idx.rbegin(), idx.rend());
    for (auto i : idx) cur.erase(cur.begin() + static_cast<std::ptrdiff_t>(i));
  };

  bool changed = true;
  while (changed && budget > 0) {
    changed = false;

    std::vector<std::optional<std::vector<Literal>>> lits(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) {
      lits[i] = detail::premise_literals(cur[i].premise);
    }

    // Exact duplicates collapse first.
    for (std::size_t i = 0; i < cur.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < cur.size() && !changed; ++j) {
        if (cur[i] == cur[j]) {
          erase_indices({j});
          changed = true;
          --budget;
        }
      }
    }
    if (changed) continue;

    // Pattern 1: {G, V=v => eff ; G, !(V=v) => eff}  ->  {G => eff}
    for (std::size_t i = 0; i < cur.size() && !changed; ++i) {
      if (!lits[i]) continue;
      for (std::size_t j = i + 1; j < cur.size() && !changed; ++j) {
        if (!lits[j] || cur[i].action != cur[j].action || !(cur[i].effect == cur[j].effect)) continue;
        if (lits[i]->size() != lits[j]->size()) continue;
        for (std::size_t pi = 0; pi < lits[i]->size() && !changed; ++pi) {
          const Literal& li = (*lits[i])[pi];
          if (li.var_eq) continue;
          for (std::size_t pj = 0; pj < lits[j]->size() && !changed; ++pj) {
            const Literal& lj = (*lits[j])[pj];
            if (lj.var_eq || li.var != lj.var || li.value != lj.value ||
                li.positive == lj.positive) {
              continue;
            }
            if (sorted_without(*lits[i], pi) != sorted_without(*lits[j], pj)) continue;
            cur[i].premise = detail::literals_to_premise(sorted_without(*lits[i], pi));
            erase_indices({j});
            changed = true;
            --budget;
          }
        }
      }
    }
    if (changed) continue;

    // Pattern 2: rules identical up to one positive V=v literal whose values
    // cover Dom(V) or all but one element of it.
    {
      struct GroupKey {
        std::string action;
        Assignment effect;
        std::string var;
        std::vector<Literal> rest;
        bool operator<(const GroupKey& other) const {
          return std::tie(action, effect, var, rest) <
                 std::tie(other.action, other.effect, other.var, other.rest);
        }
      };
      std::map<GroupKey, std::vector<std::pair<std::size_t, Value>>> groups;
      for (std::size_t i = 0; i < cur.size(); ++i) {
        if (!lits[i]) continue;
        for (std::size_t p = 0; p < lits[i]->size(); ++p) {
          const Literal& l = (*lits[i])[p];
          if (!l.positive || l.var_eq) continue;
          groups[{cur[i].action, cur[i].effect, l.var, sorted_without(*lits[i], p)}]
              .emplace_back(i, l.value);
        }
      }
      for (const auto& [key, members] : groups) {
        if (changed) break;
        std::set<Value> values;
        for (const auto& [idx, v] : members) values.insert(v);
        const int dom = m.domain_size(key.var);
        std::vector<std::size_t> idx;
        for (const auto& [i, v] : members) idx.push_back(i);
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        if (static_cast<int>(values.size()) == dom && dom >= 2) {
          cur[idx.front()].premise = detail::literals_to_premise(key.rest);
          idx.erase(idx.begin());
          erase_indices(idx);
          changed = true;
          --budget;
        } else if (static_cast<int>(values.size()) == dom - 1 && values.size() >= 2) {
          Value missing = 0;
          for (Value v = 0; v < dom; ++v) {
            if (!values.count(v)) missing = v;
          }
          auto rest = key.rest;
          rest.push_back(Literal{false, false, key.var, "", missing});
          cur[idx.front()].premise = detail::literals_to_premise(rest);
          idx.erase(idx.begin());
          erase_indices(idx);
          changed = true;
          --budget;
        }
      }
    }
    if (changed) continue;

    // Pattern 3: premises identical up to positive literals V=u, V'=u over one
    // shared domain, one rule per domain value: fold into V = V'.
    {
      struct PairKey {
        std::string action;
        Assignment effect;
        std::string var_a;
        std::string var_b;
        std::vector<Literal> rest;
        bool operator<(const PairKey& other) const {
          return std::tie(action, effect, var_a, var_b, rest) <
                 std::tie(other.action, other.effect, other.var_a, other.var_b, other.rest);
        }
      };
      std::map<PairKey, std::map<std::pair<Value, Value>, std::size_t>> groups;
      for (std::size_t i = 0; i < cur.size(); ++i) {
        if (!lits[i]) continue;
        const auto& ls = *lits[i];
        for (std::size_t p = 0; p < ls.size(); ++p) {
          if (!ls[p].positive || ls[p].var_eq) continue;
          for (std::size_t q = 0; q < ls.size(); ++q) {
            if (q == p || !ls[q].positive || ls[q].var_eq) continue;
            if (ls[p].var >= ls[q].var) continue;
            if (m.domain_of(ls[p].var).name != m.domain_of(ls[q].var).name) continue;
            std::vector<Literal> rest;
            for (std::size_t r = 0; r < ls.size(); ++r) {
              if (r != p && r != q) rest.push_back(ls[r]);
            }
            std::sort(rest.begin(), rest.end());
            groups[{cur[i].action, cur[i].effect, ls[p].var, ls[q].var, rest}].insert(
                {{ls[p].value, ls[q].value}, i});
          }
        }
      }
      for (const auto& [key, pairs] : groups) {
        if (changed) break;
        const int dom = m.domain_size(key.var_a);
        if (dom < 2) continue;
        bool all_equal_pairs = true;
        for (Value v = 0; v < dom && all_equal_pairs; ++v) {
          all_equal_pairs = pairs.count({v, v}) != 0;
        }
        if (!all_equal_pairs) continue;
        auto rest = key.rest;
        rest.push_back(Literal{true, true, key.var_a, key.var_b, 0});
        std::vector<std::size_t> idx;  // only the diagonal-pair rules merge
        for (Value v = 0; v < dom; ++v) idx.push_back(pairs.at({v, v}));
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        cur[idx.front()].premise = detail::literals_to_premise(rest);
        idx.erase(idx.begin());
        erase_indices(idx);
        changed = true;
        --budget;
      }
    }
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Transition update (newest history entry only)

struct UpdateTransResult {
  DomainModel model;
  bool gamma_changed = false;
  int rules_before = 0;
  int rules_after = 0;
};

inline double transition_score(bool matches_gamma, int occurrences, double alpha) {
  return alpha * (matches_gamma ? 1.0 : 0.0) + (1.0 - alpha) * occurrences;
}

// Re-targets gamma(s, a) for the newest transition when accumulated evidence
// outweighs the current prediction; exact score ties keep the prediction.
inline UpdateTransResult update_trans(const DomainModel& m,
                                      const std::vector<TransitionEntry>& history, double alpha,
                                      Rng& rng) {
  if (history.empty()) throw internal_error("update_trans on empty history");
  const auto& last = history.back();
  const Assignment predicted = apply_action(m, last.from, last.action);

  std::map<Assignment, int> occurrences;
  for (const auto& e : history) {
    if (e.from == last.from && e.action == last.action) ++occurrences[e.to];
  }
  // Only the prediction and observed targets can score above zero.
  std::vector<Assignment> candidates;
  candidates.push_back(predicted);
  for (const auto& [to, n] : occurrences) {
    if (!(to == predicted)) candidates.push_back(to);
  }

  double best = -1.0;
  std::vector<std::size_t> best_idx;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto it = occurrences.find(candidates[i]);
    const int n = it == occurrences.end() ? 0 : it->second;
    const double score = transition_score(candidates[i] == predicted, n, alpha);
    if (score > best) {
      best = score;
      best_idx = {i};
    } else if (score == best) {
      best_idx.push_back(i);
    }
  }

  UpdateTransResult out{m, false, static_cast<int>(m.rules.size()),
                        static_cast<int>(m.rules.size())};
  const bool keep = std::any_of(best_idx.begin(), best_idx.end(),
                                [&](std::size_t i) { return candidates[i] == predicted; });
  if (keep) return out;

  const Assignment& target = candidates[best_idx[rng.uniform_index(best_idx.size())]];
  auto revised = revise_rules(m.rules, last.from, last.action, target, m);
  out.rules_before = static_cast<int>(revised.size());
  revised = factorize_rules(revised, m);
  out.rules_after = static_cast<int>(revised.size());
  out.model.rules = std::move(revised);
  out.gamma_changed = true;

  if (!check_determinism(out.model.rules, out.model).empty()) {
    throw internal_error("rule revision produced a nondeterministic rule set");
  }
  return out;
}

// ---------------------------------------------------------------------------
// The acting-and-learning loop

inline StepRecord alp_step(LearnerState& st, Environment& env, const LearnerConfig& cfg) {
  StepRecord rec;
  rec.iter = ++st.step_count;

  const std::string action = explore(st.model, st.current, st.transitions, st.rng, cfg, rec.iter - 1);
  rec.action = action;
  const Observation x = env.act(action);
  rec.observation = x;

  const Assignment predicted = apply_action(st.model, st.current, action);

  const std::vector<Assignment> states_before = enumerate_states(st.model);
  const std::set<Assignment> state_set(states_before.begin(), states_before.end());

  auto candidates = above_threshold(st.perception, x, states_before, cfg.epsilon);
  rec.branch = "S";
  std::vector<DomainExtension> extended;
  if (candidates.empty()) {
    std::vector<Assignment> rest;
    for (auto& a : st.model.all_assignments()) {
      if (!state_set.count(a)) rest.push_back(std::move(a));
    }
    candidates = above_threshold(st.perception, x, rest, cfg.epsilon);
    rec.branch = "DomMinusS";
    if (candidates.empty()) {
      auto er = extend_dom(st.model, st.perception, x, cfg.epsilon, st.rng);
      st.model = std::move(er.model);
      extended = std::move(er.extended);
      st.perception = extend_f(st.model, st.perception, x, cfg.epsilon);
      candidates = above_threshold(st.perception, x, st.model.all_assignments(), cfg.epsilon);
      rec.branch = "extend";
      if (candidates.empty()) {
        throw internal_error("no candidate state after domain extension");
      }
    }
  }
  rec.extended = extended;
  rec.candidates = static_cast<int>(candidates.size());
  for (const auto& c : candidates) rec.candidate_states.push_back(st.model.label(c));

  const Assignment chosen =
      select_next_state(candidates, x, predicted, cfg.delta, st.perception, st.model, st.rng);
  rec.chosen = st.model.label(chosen);
  rec.loglik = std::log(std::max(likelihood(st.perception, x, chosen), 1e-300));

  std::vector<std::pair<std::string, Value>> new_values;
  for (const auto& e : extended) {
    for (const auto& v : st.model.variables) {
      if (v.domain == e.domain) new_values.emplace_back(v.name, e.value);
    }
  }

  const bool was_state = state_set.count(chosen) != 0;
  if (!was_state) {
    rec.weakened = true;
    auto weakened = weaken_constraints(st.model.constraints, chosen, new_values);
    for (std::size_t i = st.model.constraints.size(); i < weakened.size(); ++i) {
      rec.added_constraints.push_back(weakened[i].to_string());
    }
    st.model.constraints = simplify_constraints(weakened, st.model);
  } else if (!new_values.empty()) {
    // Extension without admission of a new-valued assignment: still fence off
    // the unrealized fresh values so the state set stays under control.
    auto fenced = weaken_constraints({}, chosen, new_values);
    for (auto& c : fenced) {
      rec.added_constraints.push_back(c.to_string());
      st.model.constraints.push_back(std::move(c));
    }
    st.model.constraints = simplify_constraints(st.model.constraints, st.model);
  }

  st.transitions.push_back({st.current, action, chosen});
  st.observations.push_back({chosen, x});

  auto ut = update_trans(st.model, st.transitions, cfg.alpha, st.rng);
  st.model = std::move(ut.model);
  rec.gamma_changed = ut.gamma_changed;
  rec.rules_before = ut.rules_before;
  rec.rules_after = ut.rules_after;

  for (auto& [name, key] : update_perception(st.perception, st.observations, chosen, cfg.beta)) {
    std::string ks;
    for (auto v : key) ks += (ks.empty() ? "" : ",") + std::to_string(v);
    rec.touched_params.push_back(name + "(" + ks + ")");
  }

  st.current = chosen;

  const auto states_after = enumerate_states(st.model);
  rec.state_count = static_cast<int>(states_after.size());
  rec.assignment_count = static_cast<int>(st.model.all_assignments().size());
  rec.constraint_count = static_cast<int>(st.model.constraints.size());
  for (const auto& d : st.model.domains) rec.domain_sizes[d.name] = d.size;

  if (cfg.check_invariants) {
    if (!st.model.is_total(st.current) || !st.model.satisfies_constraints(st.current)) {
      throw internal_error("post-step invariant: current assignment is not a state");
    }
    const std::set<Assignment> after(states_after.begin(), states_after.end());
    for (const auto& s : states_before) {
      if (!after.count(s)) {
        throw internal_error("post-step invariant: state set lost " + st.model.label(s));
      }
    }
    for (const auto& pv : st.perception.variables) {
      std::size_t expect = 1;
      for (const auto& dep : pv.dependency) {
        expect *= static_cast<std::size_t>(st.model.domain_size(dep));
      }
      if (pv.table.size() != expect) {
        throw internal_error("post-step invariant: perception table for " + pv.name +
                             " is not total");
      }
    }
    if (rec.gamma_changed && !check_determinism(st.model.rules, st.model).empty()) {
      throw internal_error("post-step invariant: determinism violated");
    }
  }
  return rec;
}

inline std::vector<StepRecord> run(LearnerState& st, Environment& env, const LearnerConfig& cfg) {
  auto problems = cfg.validate();
  if (!problems.empty()) {
    std::string msg = "invalid learner config:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw validation_error(msg);
  }
  if (!st.model.is_total(st.current) || !st.model.satisfies_constraints(st.current)) {
    throw validation_error("initial assignment is not a state of the model");
  }
  std::vector<StepRecord> trace;
  trace.reserve(static_cast<std::size_t>(cfg.max_iter));
  for (int i = 0; i < cfg.max_iter; ++i) {
    trace.push_back(alp_step(st, env, cfg));
  }
  return trace;
}

}  // namespace planlearn
