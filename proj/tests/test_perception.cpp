#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "planlearn/perception.hpp"
#include "test_util.hpp"

using namespace planlearn;
using testutil::rpc_prior;
using testutil::rpc_state;

namespace {

std::set<std::string> labels(const DomainModel& m, const std::vector<Assignment>& states) {
  std::set<std::string> out;
  for (const auto& s : states) out.insert(m.label(s));
  return out;
}

}  // namespace

TEST_CASE("likelihood factorizes over channels") {
  auto em = rpc_prior();
  const Observation x{{1.5, 0.5, 0.02, 0.02}};

  // equally plausible pack rooms produce equal products
  const double l0 = likelihood(em.perception, x, rpc_state(1, 0, 0));
  const double l2 = likelihood(em.perception, x, rpc_state(1, 2, 0));
  const double l3 = likelihood(em.perception, x, rpc_state(1, 3, 0));
  CHECK(l0 == l2);
  CHECK(l0 == l3);
  CHECK(l0 > 0.0);
  CHECK(likelihood(em.perception, x, rpc_state(1, 1, 0)) < l0);

  // out-of-support component zeroes the product
  const Observation bad{{1.5, 0.5, 1.2, 0.02}};
  CHECK(likelihood(em.perception, bad, rpc_state(1, 0, 0)) == 0.0);

  // single-channel model degenerates to the plain density
  PerceptionModel single;
  single.variables.push_back(em.perception.variables[0]);
  const Observation xs{{1.5}};
  CHECK(likelihood(single, xs, rpc_state(1, 0, 0)) ==
        pdf_eval(single.variables[0].conditional(rpc_state(1, 0, 0)), 1.5));

  // permuting channel order leaves the product unchanged
  PerceptionModel permuted = em.perception;
  std::reverse(permuted.variables.begin(), permuted.variables.end());
  Observation rx = x;
  std::reverse(rx.values.begin(), rx.values.end());
  CHECK(likelihood(permuted, rx, rpc_state(1, 0, 0)) ==
        doctest::Approx(l0).epsilon(1e-12));
}

TEST_CASE("likelihood reports missing conditionals") {
  auto em = rpc_prior();
  em.perception.variables[3].table.erase(DependencyKey{1});
  CHECK_THROWS_AS(likelihood(em.perception, Observation{{1.5, 0.5, 0.5, 0.5}},
                             rpc_state(1, 1, 1)),
                  undefined_conditional_error);
}

TEST_CASE("threshold candidate selection") {
  auto em = rpc_prior();
  const auto states = enumerate_states(em.model);

  SUBCASE("east move reading keeps the three pack hypotheses") {
    const Observation x{{1.5, 0.5, 0.02, 0.02}};
    const auto picked = above_threshold(em.perception, x, states, 0.5);
    CHECK(labels(em.model, picked) == std::set<std::string>{"100", "120", "130"});
  }

  SUBCASE("eps = 1 keeps every candidate with positive support") {
    const Observation x{{1.5, 0.5, 0.02, 0.02}};
    const auto picked = above_threshold(em.perception, x, states, 1.0);
    CHECK(picked.size() == states.size());  // interior observation: all positive

    const Observation edge{{1.5, 0.5, 0.0, 0.02}};  // zero density under same-room
    const auto picked_edge = above_threshold(em.perception, edge, states, 1.0);
    CHECK(picked_edge.size() == 12);  // all eight same-room states drop out
    for (const auto& s : picked_edge) REQUIRE(s.at("loc_r") != s.at("loc_p"));
  }

  SUBCASE("eps = 0 keeps only exact per-channel maximizers") {
    const Observation at_modes{{1.5, 0.5, 0.0, 0.0}};
    const auto picked = above_threshold(em.perception, at_modes, states, 0.0);
    CHECK(labels(em.model, picked) == std::set<std::string>{"100", "120", "130"});

    const Observation off_mode{{1.5, 0.5, 0.1, 0.0}};
    CHECK(above_threshold(em.perception, off_mode, states, 0.0).empty());
  }

  SUBCASE("monotone in eps") {
    Rng rng(5150);
    for (int round = 0; round < 50; ++round) {
      const Observation x{{rng.uniform() * 3.0, rng.uniform() * 2.0, rng.uniform(),
                           rng.uniform() * 1.5}};
      const double e1 = rng.uniform();
      const double e2 = e1 + (1.0 - e1) * rng.uniform();
      const auto s1 = labels(em.model, above_threshold(em.perception, x, states, e1));
      const auto s2 = labels(em.model, above_threshold(em.perception, x, states, e2));
      REQUIRE(std::includes(s2.begin(), s2.end(), s1.begin(), s1.end()));
    }
  }
}

TEST_CASE("perception update refits only the matching conditionals") {
  auto em = rpc_prior();

  SUBCASE("full trust keeps the model unchanged") {
    auto f = em.perception;
    std::vector<ObservationEntry> history = {
        {rpc_state(1, 3, 0), Observation{{1.4, 0.6, 0.1, 0.05}}}};
    update_perception(f, history, rpc_state(1, 3, 0), 1.0);
    for (std::size_t i = 0; i < f.variables.size(); ++i) {
      REQUIRE(f.variables[i].table == em.perception.variables[i].table);
    }
  }

  SUBCASE("no trust jumps to the fitted parameters") {
    auto f = em.perception;
    std::vector<ObservationEntry> history = {
        {rpc_state(1, 3, 0), Observation{{1.42, 0.6, 0.1, 0.05}}}};
    update_perception(f, history, rpc_state(1, 3, 0), 0.0);
    const Pdf& px = f.variables[0].conditional(DependencyKey{1});
    CHECK(px.a == doctest::Approx(1.42));
    CHECK(px.b == doctest::Approx(1e-3));
    // untouched conditionals stay put
    CHECK(f.variables[0].conditional(DependencyKey{0}) ==
          em.perception.variables[0].conditional(DependencyKey{0}));
  }

  SUBCASE("repeated identical observations converge geometrically") {
    auto f = em.perception;
    std::vector<ObservationEntry> history;
    double expected_mu = 1.5;  // prior mean for room value 1
    for (int k = 0; k < 12; ++k) {
      history.push_back({rpc_state(1, 3, 0), Observation{{2.0, 0.5, 0.1, 0.05}}});
      update_perception(f, history, rpc_state(1, 3, 0), 0.5);
      expected_mu = 0.5 * expected_mu + 0.5 * 2.0;
      REQUIRE(f.variables[0].conditional(DependencyKey{1}).a ==
              doctest::Approx(expected_mu).epsilon(1e-12));
    }
    CHECK(std::abs(f.variables[0].conditional(DependencyKey{1}).a - 2.0) < 1e-3);
  }

  SUBCASE("grouping is by dependency projection, not full state") {
    auto f = em.perception;
    std::vector<ObservationEntry> history = {
        {rpc_state(1, 0, 0), Observation{{1.40, 0.5, 0.1, 0.05}}},
        {rpc_state(1, 2, 0), Observation{{1.60, 0.5, 0.1, 0.05}}},  // different pack room
    };
    update_perception(f, history, rpc_state(1, 2, 0), 0.0);
    // X depends on the robot room only, so both samples count
    CHECK(f.variables[0].conditional(DependencyKey{1}).a == doctest::Approx(1.5));
  }
}
