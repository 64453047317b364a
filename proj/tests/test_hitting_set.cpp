#include "doctest.h"
#include "planlearn/hitting_set.hpp"

using namespace planlearn;

TEST_CASE("minimal hitting sets") {
  CHECK(minimal_hitting_set({{"room"}}) == std::set<std::string>{"room"});
  CHECK(minimal_hitting_set({{"a", "b"}, {"b", "c"}}) == std::set<std::string>{"b"});
  CHECK(minimal_hitting_set({{"a"}, {"b"}}) == std::set<std::string>{"a", "b"});
  CHECK(minimal_hitting_set({}).empty());
  // lexicographic tie-break: both {a} and {b} hit; a wins
  CHECK(minimal_hitting_set({{"a", "b"}}) == std::set<std::string>{"a"});
  CHECK(minimal_hitting_set({{"b", "a"}, {"a", "b"}}) == std::set<std::string>{"a"});
  CHECK_THROWS_AS(minimal_hitting_set({{"a"}, {}}), parameter_error);
}

TEST_CASE("hitting set exactness on exhaustive instances") {
  // compare against brute force over all subsets for every 3-set family over
  // a 4-element universe
  const std::vector<std::string> universe = {"p", "q", "r", "s"};
  auto subset_of_universe = [&](unsigned mask) {
    std::set<std::string> s;
    for (std::size_t i = 0; i < universe.size(); ++i) {
      if (mask & (1u << i)) s.insert(universe[i]);
    }
    return s;
  };
  for (unsigned m1 = 1; m1 < 16; ++m1) {
    for (unsigned m2 = 1; m2 < 16; ++m2) {
      for (unsigned m3 = 1; m3 < 16; ++m3) {
        const std::vector<std::set<std::string>> family = {
            subset_of_universe(m1), subset_of_universe(m2), subset_of_universe(m3)};
        std::size_t brute_best = universe.size();
        for (unsigned pick = 1; pick < 16; ++pick) {
          bool hits = true;
          for (unsigned fm : {m1, m2, m3}) hits = hits && (pick & fm);
          if (hits) brute_best = std::min<std::size_t>(brute_best, __builtin_popcount(pick));
        }
        REQUIRE(minimal_hitting_set(family).size() == brute_best);
      }
    }
  }
}
