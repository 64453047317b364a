#pragma once

#include <algorithm>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "planlearn/assignment.hpp"
#include "planlearn/errors.hpp"

namespace planlearn {

// Propositional formula over atoms V=v and V=V'. Implication and any other
// sugar is resolved to and/or/not before a Formula is built, so the evaluator
// only ever sees these five node kinds.
class Formula {
 public:
  enum class Kind { value_atom, var_atom, conj, disj, neg };

  Formula() : kind_(Kind::conj) {}  // empty conjunction == true

  static Formula eq(std::string var, Value v) {
    Formula f;
    f.kind_ = Kind::value_atom;
    f.var_ = std::move(var);
    f.value_ = v;
    return f;
  }

  static Formula eq_var(std::string a, std::string b) {
    Formula f;
    f.kind_ = Kind::var_atom;
    f.var_ = std::move(a);
    f.var2_ = std::move(b);
    return f;
  }

  static Formula conj(std::vector<Formula> children) {
    Formula f;
    f.kind_ = Kind::conj;
    f.children_ = std::move(children);
    return f;
  }

  static Formula disj(std::vector<Formula> children) {
    Formula f;
    f.kind_ = Kind::disj;
    f.children_ = std::move(children);
    return f;
  }

  static Formula negate(Formula child) {
    Formula f;
    f.kind_ = Kind::neg;
    f.children_.push_back(std::move(child));
    return f;
  }

  static Formula implies(Formula a, Formula b) {
    return disj({negate(std::move(a)), std::move(b)});
  }

  static Formula truth() { return conj({}); }
  static Formula falsity() { return disj({}); }

  Kind kind() const { return kind_; }
  const std::string& var() const { return var_; }
  const std::string& var2() const { return var2_; }
  Value value() const { return value_; }
  const std::vector<Formula>& children() const { return children_; }
  std::vector<Formula>& children() { return children_; }

  bool eval(const Assignment& s) const {
    switch (kind_) {
      case Kind::value_atom: {
        auto v = s.get(var_);
        if (!v) throw eval_error("unbound variable in formula: " + var_);
        return *v == value_;
      }
      case Kind::var_atom: {
        auto a = s.get(var_);
        auto b = s.get(var2_);
        if (!a) throw eval_error("unbound variable in formula: " + var_);
        if (!b) throw eval_error("unbound variable in formula: " + var2_);
        return *a == *b;
      }
      case Kind::conj:
        return std::all_of(children_.begin(), children_.end(),
                           [&](const Formula& c) { return c.eval(s); });
      case Kind::disj:
        return std::any_of(children_.begin(), children_.end(),
                           [&](const Formula& c) { return c.eval(s); });
      case Kind::neg:
        return !children_.front().eval(s);
    }
    throw eval_error("corrupt formula node");
  }

  void collect_vars(std::vector<std::string>& out) const {
    switch (kind_) {
      case Kind::value_atom:
        out.push_back(var_);
        break;
      case Kind::var_atom:
        out.push_back(var_);
        out.push_back(var2_);
        break;
      default:
        for (const auto& c : children_) c.collect_vars(out);
    }
  }

  // Flattens nested conj/disj, sorts and dedups children. Used only for
  // structural comparisons; printing keeps the formula as built.
  Formula canonical() const {
    Formula f = *this;
    for (auto& c : f.children_) c = c.canonical();
    if (f.kind_ == Kind::conj || f.kind_ == Kind::disj) {
      std::vector<Formula> flat;
      for (auto& c : f.children_) {
        if (c.kind_ == f.kind_) {
          for (auto& g : c.children_) flat.push_back(std::move(g));
        } else {
          flat.push_back(std::move(c));
        }
      }
      std::sort(flat.begin(), flat.end(), less);
      flat.erase(std::unique(flat.begin(), flat.end(), structurally_equal), flat.end());
      f.children_ = std::move(flat);
      if (f.children_.size() == 1) return f.children_.front();
    }
    return f;
  }

  static bool structurally_equal(const Formula& a, const Formula& b) {
    return !less(a, b) && !less(b, a);
  }

  static bool less(const Formula& a, const Formula& b) {
    auto ka = std::tie(a.kind_, a.var_, a.var2_, a.value_);
    auto kb = std::tie(b.kind_, b.var_, b.var2_, b.value_);
    if (ka != kb) return ka < kb;
    return std::lexicographical_compare(a.children_.begin(), a.children_.end(),
                                        b.children_.begin(), b.children_.end(), less);
  }

  std::string to_string() const {
    std::ostringstream os;
    print(os, /*parent_prec=*/0);
    return os.str();
  }

 private:
  // Precedence: disj=1, conj=2, neg=3, atoms=4.
  int precedence() const {
    switch (kind_) {
      case Kind::disj: return 1;
      case Kind::conj: return 2;
      case Kind::neg: return 3;
      default: return 4;
    }
  }

  void print(std::ostream& os, int parent_prec) const {
    const int prec = precedence();
    const bool parens = prec < parent_prec;
    if (parens) os << "(";
    switch (kind_) {
      case Kind::value_atom:
        os << var_ << " = " << value_;
        break;
      case Kind::var_atom:
        os << var_ << " = " << var2_;
        break;
      case Kind::neg:
        os << "!";
        children_.front().print(os, /*parent_prec=*/5);  // always parenthesized
        break;
      case Kind::conj:
        if (children_.empty()) {
          os << "true";
          break;
        }
        for (std::size_t i = 0; i < children_.size(); ++i) {
          if (i) os << " & ";
          children_[i].print(os, prec + 1);  // nested conj keeps its own parens
        }
        break;
      case Kind::disj:
        if (children_.empty()) {
          os << "false";
          break;
        }
        for (std::size_t i = 0; i < children_.size(); ++i) {
          if (i) os << " | ";
          children_[i].print(os, prec + 1);
        }
        break;
    }
    if (parens) os << ")";
  }

  Kind kind_;
  std::string var_;
  std::string var2_;
  Value value_ = 0;
  std::vector<Formula> children_;
};

}  // namespace planlearn
