#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "planlearn/errors.hpp"

namespace planlearn {

namespace detail {

inline bool hits_all(const std::vector<std::string>& pick,
                     const std::vector<std::set<std::string>>& family) {
  for (const auto& member : family) {
    bool hit = false;
    for (const auto& p : pick) {
      if (member.count(p)) {
        hit = true;
        break;
      }
    }
    if (!hit) return false;
  }
  return true;
}

inline bool combination_search(const std::vector<std::string>& universe, std::size_t k,
                               std::size_t start, std::vector<std::string>& pick,
                               const std::vector<std::set<std::string>>& family,
                               std::vector<std::string>& out) {
  if (pick.size() == k) {
    if (hits_all(pick, family)) {
      out = pick;
      return true;
    }
    return false;
  }
  for (std::size_t i = start; i < universe.size(); ++i) {
    pick.push_back(universe[i]);
    if (combination_search(universe, k, i + 1, pick, family, out)) return true;
    pick.pop_back();
  }
  return false;
}

}  // namespace detail

// Exact minimum-cardinality hitting set over a family of name sets. Candidate
// combinations are scanned in lexicographic order per size, so ties resolve to
// the lexicographically first minimum set.
inline std::set<std::string> minimal_hitting_set(const std::vector<std::set<std::string>>& family) {
  for (const auto& member : family) {
    if (member.empty()) throw parameter_error("hitting set family contains an empty set");
  }
  if (family.empty()) return {};
  std::set<std::string> universe_set;
  for (const auto& member : family) universe_set.insert(member.begin(), member.end());
  std::vector<std::string> universe(universe_set.begin(), universe_set.end());
  for (std::size_t k = 1; k <= universe.size(); ++k) {
    std::vector<std::string> pick, out;
    if (detail::combination_search(universe, k, 0, pick, family, out)) {
      return {out.begin(), out.end()};
    }
  }
  return universe_set;  // unreachable: the full universe always hits
}

}  // namespace planlearn
