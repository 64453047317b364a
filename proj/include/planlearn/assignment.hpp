#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace planlearn {

using Value = int;

// Mapping from state-variable names to domain values. Total when used as a
// state; partial in rule effects and perception dependency projections.
class Assignment {
 public:
  Assignment() = default;

  static Assignment of(std::initializer_list<std::pair<std::string, Value>> items) {
    Assignment a;
    for (const auto& [k, v] : items) a.set(k, v);
    return a;
  }

  void set(const std::string& var, Value v) { bindings_[var] = v; }
  void erase(const std::string& var) { bindings_.erase(var); }

  bool has(const std::string& var) const { return bindings_.count(var) != 0; }

  std::optional<Value> get(const std::string& var) const {
    auto it = bindings_.find(var);
    if (it == bindings_.end()) return std::nullopt;
    return it->second;
  }

  Value at(const std::string& var) const { return bindings_.at(var); }

  std::size_t size() const { return bindings_.size(); }
  bool empty() const { return bindings_.empty(); }

  const std::map<std::string, Value>& bindings() const { return bindings_; }

  // True when every binding of this assignment also holds in `other`.
  bool subset_of(const Assignment& other) const {
    for (const auto& [k, v] : bindings_) {
      auto w = other.get(k);
      if (!w || *w != v) return false;
    }
    return true;
  }

  bool agrees_on(const Assignment& other, const std::vector<std::string>& vars) const {
    for (const auto& v : vars) {
      if (get(v) != other.get(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;
  friend auto operator<=>(const Assignment& a, const Assignment& b) {
    return a.bindings_ <=> b.bindings_;
  }

 private:
  std::map<std::string, Value> bindings_;
};

}  // namespace planlearn
