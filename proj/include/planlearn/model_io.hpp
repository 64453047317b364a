#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "planlearn/domain.hpp"
#include "planlearn/errors.hpp"
#include "planlearn/perception.hpp"

namespace planlearn {

struct ExtendedModel {
  DomainModel model;
  PerceptionModel perception;
};

namespace detail {

class Lexer {
 public:
  explicit Lexer(std::string text) : text_(std::move(text)) { skip_ws(); }

  bool done() const { return pos_ >= text_.size(); }
  int line() const { return line_; }

  std::string peek_token() {
    const std::size_t save_pos = pos_;
    const int save_line = line_;
    std::string t = next_token();
    pos_ = save_pos;
    line_ = save_line;
    return t;
  }

  std::string next_token() {
    skip_ws();
    if (done()) return "";
    const char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      return text_.substr(start, pos_ - start);
    }
    const bool sign_start = (c == '-' || c == '+') && pos_ + 1 < text_.size() &&
                            (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
                             text_[pos_ + 1] == '.');
    if (std::isdigit(static_cast<unsigned char>(c)) || sign_start ||
        (c == '.' && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      std::size_t start = pos_;
      ++pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
              text_[pos_] == 'e' || text_[pos_] == 'E' ||
              ((text_[pos_] == '-' || text_[pos_] == '+') &&
               (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
        ++pos_;
      }
      return text_.substr(start, pos_ - start);
    }
    // Multi-char operators first.
    for (const char* op : {"=>", "->"}) {
      if (text_.compare(pos_, 2, op) == 0) {
        pos_ += 2;
        return op;
      }
    }
    ++pos_;
    return std::string(1, c);
  }

  void expect(const std::string& token) {
    std::string t = next_token();
    if (t != token) {
      throw parse_error("line " + std::to_string(line_) + ": expected '" + token + "', found '" +
                        t + "'");
    }
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw parse_error("line " + std::to_string(line_) + ": " + msg);
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

inline bool is_integer(const std::string& t) {
  if (t.empty()) return false;
  std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
  if (i == t.size()) return false;
  for (; i < t.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
  }
  return true;
}

inline bool is_identifier(const std::string& t) {
  if (t.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(t[0])) && t[0] != '_') return false;
  for (char c : t) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

inline double parse_number(Lexer& lx) {
  std::string t = lx.next_token();
  try {
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) lx.fail("malformed number '" + t + "'");
    return v;
  } catch (const std::exception&) {
    lx.fail("malformed number '" + t + "'");
  }
}

// formula := or ('->' or)?   (implication desugars immediately)
// or      := and ('|' and)*
// and     := unary ('&' unary)*
// unary   := '!' unary | '(' formula ')' | 'true' | 'false' | IDENT '=' (INT | IDENT)
inline Formula parse_formula(Lexer& lx);

inline Formula parse_unary(Lexer& lx) {
  std::string t = lx.peek_token();
  if (t == "!") {
    lx.next_token();
    return Formula::negate(parse_unary(lx));
  }
  if (t == "(") {
    lx.next_token();
    Formula f = parse_formula(lx);
    lx.expect(")");
    return f;
  }
  if (t == "true") {
    lx.next_token();
    return Formula::truth();
  }
  if (t == "false") {
    lx.next_token();
    return Formula::falsity();
  }
  if (!is_identifier(t)) lx.fail("expected an atom, found '" + t + "'");
  lx.next_token();
  lx.expect("=");
  std::string rhs = lx.next_token();
  if (is_integer(rhs)) return Formula::eq(t, std::stoi(rhs));
  if (is_identifier(rhs)) return Formula::eq_var(t, rhs);
  lx.fail("atom right-hand side must be a value or a variable, found '" + rhs + "'");
}

inline Formula parse_and(Lexer& lx) {
  std::vector<Formula> children{parse_unary(lx)};
  while (lx.peek_token() == "&") {
    lx.next_token();
    children.push_back(parse_unary(lx));
  }
  if (children.size() == 1) return children.front();
  return Formula::conj(std::move(children));
}

inline Formula parse_or(Lexer& lx) {
  std::vector<Formula> children{parse_and(lx)};
  while (lx.peek_token() == "|") {
    lx.next_token();
    children.push_back(parse_and(lx));
  }
  if (children.size() == 1) return children.front();
  return Formula::disj(std::move(children));
}

inline Formula parse_formula(Lexer& lx) {
  Formula lhs = parse_or(lx);
  if (lx.peek_token() == "->") {
    lx.next_token();
    return Formula::implies(std::move(lhs), parse_formula(lx));
  }
  return lhs;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline Formula parse_formula_text(const std::string& text) {
  detail::Lexer lx(text);
  Formula f = detail::parse_formula(lx);
  if (!lx.done() && !lx.peek_token().empty()) lx.fail("trailing input after formula");
  return f;
}

inline void validate_extended(const ExtendedModel& em);

inline ExtendedModel parse_model_text(const std::string& text) {
  detail::Lexer lx(text);
  ExtendedModel em;
  while (!lx.done()) {
    std::string kw = lx.next_token();
    if (kw.empty()) break;
    if (kw == "domain") {
      Domain d;
      d.name = lx.next_token();
      lx.expect("=");
      lx.expect("{");
      std::vector<int> values;
      for (;;) {
        std::string t = lx.next_token();
        if (!detail::is_integer(t)) lx.fail("domain values must be integers");
        values.push_back(std::stoi(t));
        t = lx.next_token();
        if (t == "}") break;
        if (t != ",") lx.fail("expected ',' or '}' in domain value list");
      }
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] != static_cast<int>(i)) {
          lx.fail("domain " + d.name + " must list values 0..k-1 in order");
        }
      }
      d.size = static_cast<int>(values.size());
      em.model.domains.push_back(std::move(d));
    } else if (kw == "var") {
      VariableSpec v;
      v.name = lx.next_token();
      lx.expect(":");
      v.domain = lx.next_token();
      em.model.variables.push_back(std::move(v));
    } else if (kw == "constraint") {
      em.model.constraints.push_back(detail::parse_formula(lx));
    } else if (kw == "action") {
      em.model.actions.push_back(lx.next_token());
    } else if (kw == "rule") {
      ActionRule r;
      r.premise = detail::parse_formula(lx);
      lx.expect("=>");
      r.action = lx.next_token();
      lx.expect(":");
      for (;;) {
        std::string var = lx.next_token();
        lx.expect("=");
        std::string val = lx.next_token();
        if (!detail::is_integer(val)) lx.fail("rule effects assign integer values");
        if (r.effect.has(var) && r.effect.at(var) != std::stoi(val)) {
          lx.fail("rule effect binds " + var + " twice");
        }
        r.effect.set(var, std::stoi(val));
        if (lx.peek_token() != ",") break;
        lx.next_token();
      }
      em.model.rules.push_back(std::move(r));
    } else if (kw == "perception") {
      PerceptionVariable pv;
      pv.name = lx.next_token();
      lx.expect(":");
      std::string fam = lx.next_token();
      if (fam == "gaussian") pv.family = PdfKind::gaussian;
      else if (fam == "beta") pv.family = PdfKind::beta;
      else if (fam == "gamma") pv.family = PdfKind::gamma;
      else lx.fail("unknown family '" + fam + "'");
      lx.expect("depends");
      lx.expect("(");
      for (;;) {
        pv.dependency.push_back(lx.next_token());
        std::string t = lx.next_token();
        if (t == ")") break;
        if (t != ",") lx.fail("expected ',' or ')' in dependency list");
      }
      lx.expect("init");
      std::string ifam = lx.next_token();
      if (ifam == "gaussian") pv.initializer.kind = PdfKind::gaussian;
      else if (ifam == "beta") pv.initializer.kind = PdfKind::beta;
      else if (ifam == "gamma") pv.initializer.kind = PdfKind::gamma;
      else lx.fail("unknown initializer family '" + ifam + "'");
      lx.expect("(");
      pv.initializer.param = detail::parse_number(lx);
      lx.expect(")");
      lx.expect("{");
      while (lx.peek_token() != "}") {
        lx.expect("(");
        DependencyKey key;
        for (;;) {
          std::string t = lx.next_token();
          if (!detail::is_integer(t)) lx.fail("table keys are integer tuples");
          key.push_back(std::stoi(t));
          t = lx.next_token();
          if (t == ")") break;
          if (t != ",") lx.fail("expected ',' or ')' in table key");
        }
        lx.expect("->");
        lx.expect("(");
        const double a = detail::parse_number(lx);
        lx.expect(",");
        const double b = detail::parse_number(lx);
        lx.expect(")");
        if (key.size() != pv.dependency.size()) lx.fail("table key arity mismatch for " + pv.name);
        Pdf p{pv.family, a, b};
        p.validate();
        if (!pv.table.emplace(std::move(key), p).second) {
          lx.fail("duplicate table key for " + pv.name);
        }
      }
      lx.expect("}");
      em.perception.variables.push_back(std::move(pv));
    } else {
      lx.fail("unknown declaration '" + kw + "'");
    }
  }
  validate_extended(em);
  return em;
}

inline std::string print_model(const ExtendedModel& em) {
  std::ostringstream os;
  for (const auto& d : em.model.domains) {
    os << "domain " << d.name << " = {";
    for (int v = 0; v < d.size; ++v) os << (v ? ", " : "") << v;
    os << "}\n";
  }
  os << "\n";
  for (const auto& v : em.model.variables) os << "var " << v.name << " : " << v.domain << "\n";
  if (!em.model.constraints.empty()) os << "\n";
  for (const auto& c : em.model.constraints) os << "constraint " << c.to_string() << "\n";
  os << "\n";
  for (const auto& a : em.model.actions) os << "action " << a << "\n";
  if (!em.model.rules.empty()) os << "\n";
  for (const auto& r : em.model.rules) os << "rule " << r.to_string() << "\n";
  for (const auto& pv : em.perception.variables) {
    os << "\nperception " << pv.name << " : " << to_string(pv.family) << " depends (";
    for (std::size_t i = 0; i < pv.dependency.size(); ++i) {
      os << (i ? ", " : "") << pv.dependency[i];
    }
    os << ") init " << to_string(pv.initializer.kind) << "("
       << detail::format_double(pv.initializer.param) << ") {\n";
    for (const auto& [key, p] : pv.table) {
      os << "  (";
      for (std::size_t i = 0; i < key.size(); ++i) os << (i ? ", " : "") << key[i];
      os << ") -> (" << detail::format_double(p.a) << ", " << detail::format_double(p.b) << ")\n";
    }
    os << "}\n";
  }
  return os.str();
}

inline void validate_extended(const ExtendedModel& em) {
  validate_model(em.model);
  for (const auto& pv : em.perception.variables) {
    std::size_t expect = 1;
    for (const auto& dep : pv.dependency) {
      expect *= static_cast<std::size_t>(em.model.domain_size(dep));  // throws if unknown
    }
    for (const auto& [key, p] : pv.table) {
      if (p.kind != pv.family) {
        throw validation_error("table entry family mismatch for " + pv.name);
      }
      for (std::size_t i = 0; i < key.size(); ++i) {
        if (key[i] < 0 || key[i] >= em.model.domain_size(pv.dependency[i])) {
          throw validation_error("table key out of domain for " + pv.name);
        }
      }
    }
    if (pv.table.size() != expect) {
      throw validation_error("parameter table for " + pv.name +
                             " must cover every dependency assignment (" +
                             std::to_string(pv.table.size()) + " of " + std::to_string(expect) +
                             ")");
    }
  }
}

inline ExtendedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_text(ss.str());
}

inline void write_model_file(const std::string& path, const ExtendedModel& em) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write model file: " + path);
  out << print_model(em);
}

}  // namespace planlearn
