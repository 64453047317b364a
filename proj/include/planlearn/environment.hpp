#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "planlearn/errors.hpp"
#include "planlearn/perception.hpp"
#include "planlearn/rng.hpp"

namespace planlearn {

struct ExogenousEvent {
  int at_step = 0;  // 1-based step index, applied after the action dynamics
  enum class Kind { cat_random_move, cat_jump_on_robot, cat_jump_on_pack, pack_drop, cat_dismount };
  Kind kind = Kind::cat_random_move;
};

inline std::string to_string(ExogenousEvent::Kind k) {
  switch (k) {
    case ExogenousEvent::Kind::cat_random_move: return "cat_random_move";
    case ExogenousEvent::Kind::cat_jump_on_robot: return "cat_jump_on_robot";
    case ExogenousEvent::Kind::cat_jump_on_pack: return "cat_jump_on_pack";
    case ExogenousEvent::Kind::pack_drop: return "pack_drop";
    case ExogenousEvent::Kind::cat_dismount: return "cat_dismount";
  }
  return "?";
}

inline std::optional<ExogenousEvent::Kind> event_kind_from_string(const std::string& s) {
  using K = ExogenousEvent::Kind;
  if (s == "cat_random_move") return K::cat_random_move;
  if (s == "cat_jump_on_robot") return K::cat_jump_on_robot;
  if (s == "cat_jump_on_pack") return K::cat_jump_on_pack;
  if (s == "pack_drop") return K::pack_drop;
  if (s == "cat_dismount") return K::cat_dismount;
  return std::nullopt;
}

// True discrete situation, exposed for tests and metrics only. Rooms are
// indexed 0..5 = A..F on the 3x2 grid; loaded tracks the pack alone.
struct GroundTruth {
  int robot_room = 0;
  int pack_room = 0;
  bool pack_carried = false;
  int cat_room = 0;
  bool cat_on_robot = false;
  bool cat_on_pack = false;
  int carried_objects = 0;
};

// World interface consumed by the learning loop: execute an action, receive
// one noisy observation. Sampling draws only from the environment's stream.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const std::vector<std::string>& actions() const = 0;
  virtual Observation act(const std::string& action) = 0;
  virtual void reset(std::uint64_t seed) = 0;
  virtual void script(std::vector<ExogenousEvent> events) = 0;
  virtual GroundTruth ground_truth() const = 0;
};

// Sensor families of the flat: X/Y gaussian around the room centre, T beta
// concentrated near 1 when robot and pack share a room, W gamma with mean
// close to the number of carried objects.
struct RpcSensorSpec {
  double sigma_env = 0.25;
  Pdf t_same = Pdf::beta(5.0, 1.0);
  Pdf t_diff = Pdf::beta(1.0, 5.0);
  Pdf w_zero = Pdf::gamma(1.0, 0.1);
  Pdf w_one = Pdf::gamma(100.0, 0.01);
  Pdf w_two = Pdf::gamma(200.0, 0.01);

  Pdf weight_pdf(int carried) const {
    if (carried <= 0) return w_zero;
    if (carried == 1) return w_one;
    if (carried == 2) return w_two;
    return Pdf::gamma(100.0 * carried, 0.01);
  }
};

struct RpcFlatConfig {
  int robot_room = 0;  // A
  int pack_room = 2;   // C
  int cat_room = 3;    // D
  bool pack_carried = false;
  bool cat_on_robot = false;
  bool cat_on_pack = false;
  bool cat_random_walk = false;
  RpcSensorSpec sensors;
  std::vector<ExogenousEvent> events;
};

// 3x2 flat with a robot, a pack and a cat. Rooms: A(0.5,0.5) B(1.5,0.5)
// C(2.5,0.5) D(0.5,1.5) E(1.5,1.5) F(2.5,1.5).
class RpcFlatEnvironment final : public Environment {
 public:
  explicit RpcFlatEnvironment(RpcFlatConfig config, std::uint64_t seed)
      : config_(std::move(config)), rng_(seed), seed_(seed) {
    apply_initial();
  }

  static double room_x(int room) { return static_cast<double>(room % 3) + 0.5; }
  static double room_y(int room) { return static_cast<double>(room / 3) + 0.5; }

  static std::optional<int> neighbour(int room, const std::string& action) {
    const int col = room % 3;
    const int row = room / 3;
    if (action == "E" && col < 2) return room + 1;
    if (action == "W" && col > 0) return room - 1;
    if (action == "N" && row < 1) return room + 3;
    if (action == "S" && row > 0) return room - 3;
    return std::nullopt;
  }

  // Transition function of the 6-room, 1-pack abstraction; the reference the
  // learned model is scored against.
  struct AbstractState {
    int robot_room;
    int pack_room;
    bool loaded;
    friend bool operator==(const AbstractState&, const AbstractState&) = default;
  };

  static AbstractState true_next(AbstractState s, const std::string& action) {
    if (auto n = neighbour(s.robot_room, action)) {
      s.robot_room = *n;
      if (s.loaded) s.pack_room = *n;
    } else if (action == "L") {
      if (s.robot_room == s.pack_room) s.loaded = true;
    } else if (action == "U") {
      if (s.loaded) {
        s.loaded = false;
        s.pack_room = s.robot_room;
      }
    }
    return s;
  }

  const std::vector<std::string>& actions() const override { return kActions; }

  Observation act(const std::string& action) override {
    if (std::find(kActions.begin(), kActions.end(), action) == kActions.end()) {
      throw validation_error("unknown action for rpc_flat: " + action);
    }
    ++step_;
    const int origin_room = state_.robot_room;

    if (auto n = neighbour(state_.robot_room, action)) {
      state_.robot_room = *n;
      if (state_.pack_carried) state_.pack_room = *n;
    } else if (action == "L") {
      if (!state_.pack_carried && state_.pack_room == state_.robot_room) {
        state_.pack_carried = true;
      }
    } else if (action == "U") {
      if (state_.pack_carried) {
        state_.pack_carried = false;
        state_.pack_room = state_.robot_room;
      }
    }
    // Illegal moves fall through as position no-ops; sensors still sample.

    if (config_.cat_random_walk && !state_.cat_on_robot && !state_.cat_on_pack) {
      static const std::array<const char*, 4> dirs = {"N", "S", "E", "W"};
      const auto dir = dirs[rng_.uniform_index(dirs.size())];
      if (auto n = neighbour(state_.cat_room, dir)) state_.cat_room = *n;
    }

    for (const auto& ev : config_.events) {
      if (ev.at_step == step_) apply_event(ev, origin_room);
    }

    sync_cat_room();
    state_.carried_objects = carried_objects();

    const auto& sp = config_.sensors;
    Observation obs;
    obs.values.resize(4);
    obs.values[0] = rng_.normal(room_x(state_.robot_room), sp.sigma_env);
    obs.values[1] = rng_.normal(room_y(state_.robot_room), sp.sigma_env);
    const Pdf& t = state_.pack_room == state_.robot_room ? sp.t_same : sp.t_diff;
    obs.values[2] = rng_.beta(t.a, t.b);
    const Pdf w = sp.weight_pdf(state_.carried_objects);
    obs.values[3] = rng_.gamma(w.a, w.b);
    return obs;
  }

  void reset(std::uint64_t seed) override {
    seed_ = seed;
    rng_ = Rng(seed);
    apply_initial();
  }

  void script(std::vector<ExogenousEvent> events) override {
    config_.events = std::move(events);
  }

  GroundTruth ground_truth() const override { return state_; }

  AbstractState abstract_state() const {
    return {state_.robot_room, state_.pack_room, state_.pack_carried};
  }

 private:
  inline static const std::vector<std::string> kActions = {"N", "S", "E", "W", "L", "U"};

  void apply_initial() {
    step_ = 0;
    state_ = GroundTruth{};
    state_.robot_room = config_.robot_room;
    state_.pack_room = config_.pack_room;
    state_.cat_room = config_.cat_room;
    state_.pack_carried = config_.pack_carried;
    state_.cat_on_robot = config_.cat_on_robot;
    state_.cat_on_pack = config_.cat_on_pack;
    sync_cat_room();
    if (state_.pack_carried) state_.pack_room = state_.robot_room;
    state_.carried_objects = carried_objects();
  }

  // The cat counts toward the weight sensor while it rides the robot or a
  // carried pack.
  int carried_objects() const {
    int n = state_.pack_carried ? 1 : 0;
    if (state_.cat_on_robot) ++n;
    if (state_.cat_on_pack && state_.pack_carried) ++n;
    return n;
  }

  void sync_cat_room() {
    if (state_.cat_on_robot) state_.cat_room = state_.robot_room;
    if (state_.cat_on_pack) state_.cat_room = state_.pack_room;
  }

  void apply_event(const ExogenousEvent& ev, int origin_room) {
    using K = ExogenousEvent::Kind;
    switch (ev.kind) {
      case K::cat_random_move: {
        static const std::array<const char*, 4> dirs = {"N", "S", "E", "W"};
        const auto dir = dirs[rng_.uniform_index(dirs.size())];
        state_.cat_on_robot = state_.cat_on_pack = false;
        if (auto n = neighbour(state_.cat_room, dir)) state_.cat_room = *n;
        break;
      }
      case K::cat_jump_on_robot:
        state_.cat_on_robot = true;
        state_.cat_on_pack = false;
        break;
      case K::cat_jump_on_pack:
        state_.cat_on_pack = true;
        state_.cat_on_robot = false;
        break;
      case K::pack_drop:
        // The pack slips out mid-move and stays where the step began.
        if (state_.pack_carried) {
          state_.pack_carried = false;
          state_.pack_room = origin_room;
          if (state_.cat_on_pack) {
            state_.cat_on_pack = false;
            state_.cat_room = origin_room;
          }
        }
        break;
      case K::cat_dismount:
        state_.cat_on_robot = false;
        state_.cat_on_pack = false;
        state_.cat_room = state_.robot_room;
        break;
    }
  }

  RpcFlatConfig config_;
  GroundTruth state_;
  Rng rng_;
  std::uint64_t seed_;
  int step_ = 0;
};

}  // namespace planlearn
