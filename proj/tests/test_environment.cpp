#include <cmath>
#include <set>

#include "doctest.h"
#include "planlearn/environment.hpp"

using namespace planlearn;

TEST_CASE("room graph matches the 3x2 layout") {
  // adjacency via moves must equal grid adjacency
  for (int room = 0; room < 6; ++room) {
    std::set<int> reachable;
    for (const std::string a : {"N", "S", "E", "W"}) {
      if (auto n = RpcFlatEnvironment::neighbour(room, a)) reachable.insert(*n);
    }
    std::set<int> expected;
    const int col = room % 3, row = room / 3;
    if (col > 0) expected.insert(room - 1);
    if (col < 2) expected.insert(room + 1);
    if (row > 0) expected.insert(room - 3);
    if (row < 1) expected.insert(room + 3);
    REQUIRE(reachable == expected);
  }
  // walls are no-ops
  RpcFlatConfig cfg;
  cfg.robot_room = 0;
  RpcFlatEnvironment env(cfg, 9);
  env.act("W");
  CHECK(env.ground_truth().robot_room == 0);
  env.act("S");
  CHECK(env.ground_truth().robot_room == 0);
}

TEST_CASE("movement, load and unload dynamics") {
  RpcFlatConfig cfg;  // robot A, pack C
  RpcFlatEnvironment env(cfg, 7);
  env.act("E");
  CHECK(env.ground_truth().robot_room == 1);
  env.act("E");
  CHECK(env.ground_truth().robot_room == 2);
  CHECK_FALSE(env.ground_truth().pack_carried);
  env.act("L");
  CHECK(env.ground_truth().pack_carried);
  CHECK(env.ground_truth().carried_objects == 1);
  env.act("N");  // carrying: pack follows
  CHECK(env.ground_truth().robot_room == 5);
  CHECK(env.ground_truth().pack_room == 5);
  env.act("U");
  CHECK_FALSE(env.ground_truth().pack_carried);
  CHECK(env.ground_truth().pack_room == 5);
  // load fails at a distance
  env.act("W");
  env.act("L");
  CHECK_FALSE(env.ground_truth().pack_carried);
}

TEST_CASE("carried pack stays with the robot through every step") {
  RpcFlatConfig cfg;
  cfg.robot_room = 2;  // start on the pack
  RpcFlatEnvironment env(cfg, 21);
  env.act("L");
  Rng rng(77);
  const std::vector<std::string> acts = {"N", "S", "E", "W"};
  for (int i = 0; i < 200; ++i) {
    env.act(acts[rng.uniform_index(acts.size())]);
    const auto gt = env.ground_truth();
    REQUIRE(gt.pack_carried);
    REQUIRE(gt.pack_room == gt.robot_room);
  }
}

TEST_CASE("exogenous events") {
  SUBCASE("pack drop leaves the pack in the origin room") {
    RpcFlatConfig cfg;
    cfg.robot_room = 2;
    cfg.pack_room = 2;
    cfg.events = {{2, ExogenousEvent::Kind::pack_drop},
                  {2, ExogenousEvent::Kind::cat_jump_on_robot}};
    RpcFlatEnvironment env(cfg, 3);
    env.act("L");
    env.act("W");  // drop mid-move, cat lands on the robot
    const auto gt = env.ground_truth();
    CHECK(gt.robot_room == 1);
    CHECK(gt.pack_room == 2);
    CHECK_FALSE(gt.pack_carried);
    CHECK(gt.cat_on_robot);
    CHECK(gt.carried_objects == 1);
  }
  SUBCASE("cat on a carried pack doubles the load") {
    RpcFlatConfig cfg;
    cfg.robot_room = 2;
    cfg.pack_room = 2;
    cfg.events = {{1, ExogenousEvent::Kind::cat_jump_on_pack}};
    RpcFlatEnvironment env(cfg, 3);
    env.act("L");
    const auto gt = env.ground_truth();
    CHECK(gt.carried_objects == 2);
    CHECK(gt.cat_on_pack);
  }
  SUBCASE("cat on a grounded pack adds no weight") {
    RpcFlatConfig cfg;  // robot A, pack C
    cfg.events = {{1, ExogenousEvent::Kind::cat_jump_on_pack}};
    RpcFlatEnvironment env(cfg, 3);
    env.act("E");
    CHECK(env.ground_truth().carried_objects == 0);
  }
  SUBCASE("dismount clears both perches") {
    RpcFlatConfig cfg;
    cfg.cat_on_robot = true;
    cfg.events = {{1, ExogenousEvent::Kind::cat_dismount}};
    RpcFlatEnvironment env(cfg, 3);
    env.act("E");
    const auto gt = env.ground_truth();
    CHECK_FALSE(gt.cat_on_robot);
    CHECK(gt.cat_room == gt.robot_room);
    CHECK(gt.carried_objects == 0);
  }
}

TEST_CASE("sensor statistics match the configured families") {
  RpcFlatConfig cfg;
  cfg.robot_room = 1;
  cfg.pack_room = 1;
  RpcFlatEnvironment env(cfg, 1234);
  const int n = 10000;
  double sx = 0, sy = 0, st = 0, sw = 0;
  for (int i = 0; i < n; ++i) {
    // S at the south wall: position is stable, sensors keep sampling
    const Observation obs = env.act("S");
    sx += obs.values[0];
    sy += obs.values[1];
    st += obs.values[2];
    sw += obs.values[3];
  }
  // three standard errors of each family mean
  CHECK(std::abs(sx / n - 1.5) < 3 * 0.25 / std::sqrt(n));
  CHECK(std::abs(sy / n - 0.5) < 3 * 0.25 / std::sqrt(n));
  const double t_mean = 5.0 / 6.0, t_sd = std::sqrt(5.0 / (36.0 * 7.0));
  CHECK(std::abs(st / n - t_mean) < 3 * t_sd / std::sqrt(n));
  CHECK(std::abs(sw / n - 0.1) < 3 * 0.1 / std::sqrt(n));
}

TEST_CASE("same seed, same action sequence, same observations") {
  RpcFlatConfig cfg;
  cfg.cat_random_walk = true;
  RpcFlatEnvironment a(cfg, 555), b(cfg, 555);
  Rng script(1);
  const std::vector<std::string> acts = {"N", "S", "E", "W", "L", "U"};
  for (int i = 0; i < 100; ++i) {
    const auto& act = acts[script.uniform_index(acts.size())];
    REQUIRE(a.act(act) == b.act(act));
  }
  // reset replays identically
  a.reset(555);
  b.reset(555);
  CHECK(a.act("E") == b.act("E"));
}
