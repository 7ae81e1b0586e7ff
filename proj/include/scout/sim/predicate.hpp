#pragma once

#include <cctype>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scout/common.hpp"
#include "scout/core/text.hpp"

namespace scout::sim {

// Attribute predicate over sim entities:
//
//   expr  := or
//   or    := and ("OR" and)*
//   and   := unary ("AND" unary)*
//   unary := "NOT" unary | "(" expr ")" | "TRUE" | "FALSE" | atom
//   atom  := field "in" "{" value ("," value)* "}" | field "=" value
//
// Keywords are upper-case; values are compared case-insensitively.
struct Predicate {
  enum class Kind { kTrue, kFalse, kAtom, kAnd, kOr, kNot };

  Kind kind = Kind::kTrue;
  std::string field;
  std::set<std::string> values;
  std::vector<Predicate> children;

  static Predicate always() { return {}; }
  static Predicate never() { return {Kind::kFalse, {}, {}, {}}; }

  static Predicate atom(std::string field, std::set<std::string> values) {
    Predicate p;
    p.kind = Kind::kAtom;
    p.field = std::move(field);
    for (const auto& v : values) p.values.insert(ascii_lower(v));
    return p;
  }

  static Predicate all_of(std::vector<Predicate> parts) {
    if (parts.empty()) return always();
    if (parts.size() == 1) return std::move(parts.front());
    Predicate p;
    p.kind = Kind::kAnd;
    p.children = std::move(parts);
    return p;
  }

  static Predicate any_of(std::vector<Predicate> parts) {
    if (parts.empty()) return never();
    if (parts.size() == 1) return std::move(parts.front());
    Predicate p;
    p.kind = Kind::kOr;
    p.children = std::move(parts);
    return p;
  }

  static Predicate negate(Predicate inner) {
    Predicate p;
    p.kind = Kind::kNot;
    p.children.push_back(std::move(inner));
    return p;
  }

  using Lookup = std::function<std::string(std::string_view field)>;

  bool eval(const Lookup& lookup) const {
    switch (kind) {
      case Kind::kTrue:
        return true;
      case Kind::kFalse:
        return false;
      case Kind::kAtom:
        return values.contains(ascii_lower(lookup(field)));
      case Kind::kAnd:
        for (const auto& c : children) {
          if (!c.eval(lookup)) return false;
        }
        return true;
      case Kind::kOr:
        for (const auto& c : children) {
          if (c.eval(lookup)) return true;
        }
        return false;
      case Kind::kNot:
        return !children.front().eval(lookup);
    }
    return false;
  }

  // Atomic criteria in left-to-right order.
  void collect_atoms(std::vector<const Predicate*>& out) const {
    if (kind == Kind::kAtom) {
      out.push_back(this);
      return;
    }
    for (const auto& c : children) c.collect_atoms(out);
  }

  // Sub-expressions responsible for a false verdict (empty when true).
  std::vector<std::string> failing_clauses(const Lookup& lookup) const {
    if (eval(lookup)) return {};
    if (kind == Kind::kAnd) {
      std::vector<std::string> out;
      for (const auto& c : children) {
        auto sub = c.failing_clauses(lookup);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    return {to_string()};
  }

  // Conjuncts at the top level (the whole predicate if it is not an AND).
  std::vector<Predicate> conjuncts() const {
    if (kind == Kind::kAnd) return children;
    if (kind == Kind::kTrue) return {};
    return {*this};
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::kTrue:
        return "TRUE";
      case Kind::kFalse:
        return "FALSE";
      case Kind::kAtom:
        return field + " in {" + join({values.begin(), values.end()}, ", ") + "}";
      case Kind::kNot:
        return "NOT " + wrap(children.front());
      case Kind::kAnd:
      case Kind::kOr: {
        std::string out;
        for (std::size_t i = 0; i < children.size(); ++i) {
          if (i != 0) out += kind == Kind::kAnd ? " AND " : " OR ";
          out += wrap(children[i]);
        }
        return out;
      }
    }
    return {};
  }

  friend bool operator==(const Predicate&, const Predicate&) = default;

 private:
  static std::string wrap(const Predicate& p) {
    const bool compound = p.kind == Kind::kAnd || p.kind == Kind::kOr;
    return compound ? "(" + p.to_string() + ")" : p.to_string();
  }
};

namespace detail {

class PredicateParser {
 public:
  explicit PredicateParser(std::string_view text) : text_(text) {}

  Predicate parse() {
    Predicate p = parse_or();
    skip_space();
    if (pos_ != text_.size()) fail("trailing input");
    return p;
  }

 private:
  Predicate parse_or() {
    std::vector<Predicate> parts{parse_and()};
    while (keyword("OR")) parts.push_back(parse_and());
    return Predicate::any_of(std::move(parts));
  }

  Predicate parse_and() {
    std::vector<Predicate> parts{parse_unary()};
    while (keyword("AND")) parts.push_back(parse_unary());
    return Predicate::all_of(std::move(parts));
  }

  Predicate parse_unary() {
    if (keyword("NOT")) return Predicate::negate(parse_unary());
    if (keyword("TRUE")) return Predicate::always();
    if (keyword("FALSE")) return Predicate::never();
    skip_space();
    if (peek() == '(') {
      ++pos_;
      Predicate inner = parse_or();
      expect(')');
      return inner;
    }
    return parse_atom();
  }

  Predicate parse_atom() {
    skip_space();
    std::string field;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) != 0 || text_[pos_] == '_')) {
      field.push_back(text_[pos_++]);
    }
    if (field.empty()) fail("expected a field name");
    skip_space();
    if (peek() == '=') {
      ++pos_;
      skip_space();
      std::string value;
      while (pos_ < text_.size() && text_[pos_] != ')' && !at_keyword()) {
        value.push_back(text_[pos_++]);
      }
      value = trim(value);
      if (value.empty()) fail("expected a value after '='");
      return Predicate::atom(field, {value});
    }
    if (!keyword("in")) fail("expected 'in' or '=' after field '" + field + "'");
    expect('{');
    std::set<std::string> values;
    std::string current;
    while (pos_ < text_.size() && text_[pos_] != '}') {
      if (text_[pos_] == ',') {
        values.insert(trim(current));
        current.clear();
      } else {
        current.push_back(text_[pos_]);
      }
      ++pos_;
    }
    expect('}');
    values.insert(trim(current));
    values.erase("");
    if (values.empty()) fail("empty value set for field '" + field + "'");
    return Predicate::atom(field, values);
  }

  bool at_keyword() const {
    for (std::string_view kw : {" AND ", " OR "}) {
      if (text_.substr(pos_, kw.size()) == kw) return true;
    }
    return false;
  }

  bool keyword(std::string_view kw) {
    skip_space();
    if (text_.substr(pos_, kw.size()) != kw) return false;
    const std::size_t end = pos_ + kw.size();
    if (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) != 0 ||
                               text_[end] == '_')) {
      return false;
    }
    pos_ = end;
    return true;
  }

  void expect(char ch) {
    skip_space();
    if (peek() != ch) fail(std::string("expected '") + ch + "'");
    ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) {
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("predicate parse error at offset " + std::to_string(pos_) + ": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Predicate parse_predicate(std::string_view text) {
  return detail::PredicateParser(text).parse();
}

}  // namespace scout::sim
