// Copyright 2026 The veridrive Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "veridrive/error.hpp"

namespace veridrive {

/// Immutable LTL over finite traces formula. "true" and "false" are
/// reserved atom names with constant truth value.
class Formula {
public:
  enum class Op { Atom, Not, And, Or, Implies, Globally, Finally };

  Formula() : Formula(atom("true")) {}

  static Formula atom(std::string name)
  {
    return Formula(std::make_shared<Node>(Node{Op::Atom, std::move(name), nullptr, nullptr}));
  }
  static Formula negation(const Formula & f)
  {
    return Formula(std::make_shared<Node>(Node{Op::Not, "", f.node_, nullptr}));
  }
  static Formula conjunction(const Formula & a, const Formula & b)
  {
    return Formula(std::make_shared<Node>(Node{Op::And, "", a.node_, b.node_}));
  }
  static Formula disjunction(const Formula & a, const Formula & b)
  {
    return Formula(std::make_shared<Node>(Node{Op::Or, "", a.node_, b.node_}));
  }
  static Formula implication(const Formula & a, const Formula & b)
  {
    return Formula(std::make_shared<Node>(Node{Op::Implies, "", a.node_, b.node_}));
  }
  static Formula always(const Formula & f)
  {
    return Formula(std::make_shared<Node>(Node{Op::Globally, "", f.node_, nullptr}));
  }
  static Formula eventually(const Formula & f)
  {
    return Formula(std::make_shared<Node>(Node{Op::Finally, "", f.node_, nullptr}));
  }

  Op op() const { return node_->op; }
  const std::string & atom_name() const { return node_->name; }
  Formula left() const { return Formula(node_->lhs); }
  Formula right() const { return Formula(node_->rhs); }

  bool is_temporal_free() const
  {
    switch (op()) {
      case Op::Atom:
        return true;
      case Op::Not:
        return left().is_temporal_free();
      case Op::And:
      case Op::Or:
      case Op::Implies:
        return left().is_temporal_free() && right().is_temporal_free();
      default:
        return false;
    }
  }

  void collect_atoms(std::set<std::string> & out) const
  {
    switch (op()) {
      case Op::Atom:
        if (node_->name != "true" && node_->name != "false") {
          out.insert(node_->name);
        }
        return;
      case Op::Not:
      case Op::Globally:
      case Op::Finally:
        left().collect_atoms(out);
        return;
      default:
        left().collect_atoms(out);
        right().collect_atoms(out);
        return;
    }
  }

  std::set<std::string> atoms() const
  {
    std::set<std::string> out;
    collect_atoms(out);
    return out;
  }

  bool operator==(const Formula & other) const { return equals(node_, other.node_); }

private:
  struct Node {
    Op op;
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static bool equals(
    const std::shared_ptr<const Node> & a, const std::shared_ptr<const Node> & b)
  {
    if (a == b) {
      return true;
    }
    if (!a || !b || a->op != b->op || a->name != b->name) {
      return false;
    }
    return equals(a->lhs, b->lhs) && equals(a->rhs, b->rhs);
  }

  std::shared_ptr<const Node> node_;
};

inline std::string to_string(const Formula & f)
{
  using Op = Formula::Op;
  switch (f.op()) {
    case Op::Atom:
      return f.atom_name();
    case Op::Not:
      return "!(" + to_string(f.left()) + ")";
    case Op::And:
      return "(" + to_string(f.left()) + " & " + to_string(f.right()) + ")";
    case Op::Or:
      return "(" + to_string(f.left()) + " | " + to_string(f.right()) + ")";
    case Op::Implies:
      return "(" + to_string(f.left()) + " -> " + to_string(f.right()) + ")";
    case Op::Globally:
      return "G(" + to_string(f.left()) + ")";
    case Op::Finally: {
      if (f.left().op() == Op::Globally) {
        return "FG(" + to_string(f.left().left()) + ")";
      }
      return "F(" + to_string(f.left()) + ")";
    }
  }
  return "";
}

/// One truth assignment per time step.
struct Trace {
  std::vector<std::map<std::string, bool>> steps;
};

/// Evaluates a temporal-operator-free formula under an atom valuation.
template <class AtomValue>
bool eval_boolean(const Formula & f, AtomValue && value)
{
  using Op = Formula::Op;
  switch (f.op()) {
    case Op::Atom: {
      if (f.atom_name() == "true") {
        return true;
      }
      if (f.atom_name() == "false") {
        return false;
      }
      return value(f.atom_name());
    }
    case Op::Not:
      return !eval_boolean(f.left(), value);
    case Op::And:
      return eval_boolean(f.left(), value) && eval_boolean(f.right(), value);
    case Op::Or:
      return eval_boolean(f.left(), value) || eval_boolean(f.right(), value);
    case Op::Implies:
      return !eval_boolean(f.left(), value) || eval_boolean(f.right(), value);
    default:
      throw DomainError("eval_boolean: formula contains temporal operators");
  }
}

namespace detail {

template <class AtomAt>
bool eval_suffix(const Formula & f, std::size_t i, std::size_t len, AtomAt && at)
{
  using Op = Formula::Op;
  switch (f.op()) {
    case Op::Atom: {
      if (f.atom_name() == "true") {
        return true;
      }
      if (f.atom_name() == "false") {
        return false;
      }
      return at(i, f.atom_name());
    }
    case Op::Not:
      return !eval_suffix(f.left(), i, len, at);
    case Op::And:
      return eval_suffix(f.left(), i, len, at) && eval_suffix(f.right(), i, len, at);
    case Op::Or:
      return eval_suffix(f.left(), i, len, at) || eval_suffix(f.right(), i, len, at);
    case Op::Implies:
      return !eval_suffix(f.left(), i, len, at) || eval_suffix(f.right(), i, len, at);
    case Op::Globally:
      for (std::size_t j = i; j < len; ++j) {
        if (!eval_suffix(f.left(), j, len, at)) {
          return false;
        }
      }
      return true;
    case Op::Finally:
      for (std::size_t j = i; j < len; ++j) {
        if (eval_suffix(f.left(), j, len, at)) {
          return true;
        }
      }
      return false;
  }
  return false;
}

}  // namespace detail

/// Finite-trace semantics with an arbitrary per-step atom valuation;
/// at(i, name) must yield the truth value of `name` at step i.
template <class AtomAt>
bool evaluate_trace_with(const Formula & f, std::size_t length, AtomAt && at)
{
  if (length == 0) {
    throw DomainError("evaluate_trace: trace must be non-empty");
  }
  return detail::eval_suffix(f, 0, length, at);
}

inline bool evaluate_trace(const Formula & f, const Trace & trace)
{
  return evaluate_trace_with(
    f, trace.steps.size(), [&](std::size_t i, const std::string & name) {
      const auto & step = trace.steps[i];
      const auto it = step.find(name);
      if (it == step.end()) {
        throw DomainError("evaluate_trace: unknown atom '" + name + "' at step " +
                          std::to_string(i));
      }
      return it->second;
    });
}

/// Deterministic finite automaton for the supported fragment: conjunctions
/// of G(beta) and FG(beta) with boolean beta. Live states encode which FG
/// patterns hold at the most recent symbol; violating any G pattern moves
/// to the absorbing reject sink.
struct Dfa {
  std::vector<Formula> g_betas;
  std::vector<Formula> fg_betas;
  std::set<std::string> atoms;

  int initial_state() const { return 0; }
  int num_live_states() const { return 1 << static_cast<int>(fg_betas.size()); }
  std::optional<int> reject_sink() const
  {
    if (g_betas.empty()) {
      return std::nullopt;
    }
    return num_live_states();
  }
  int num_states() const { return num_live_states() + (g_betas.empty() ? 0 : 1); }

  bool is_accepting(int state) const
  {
    if (state >= num_live_states()) {
      return false;
    }
    return state == num_live_states() - 1;  // all FG bits set
  }

  template <class AtomValue>
  int step_with(int state, AtomValue && value) const
  {
    if (reject_sink() && state == *reject_sink()) {
      return state;
    }
    for (const auto & beta : g_betas) {
      if (!eval_boolean(beta, value)) {
        return *reject_sink();
      }
    }
    int next = 0;
    for (std::size_t i = 0; i < fg_betas.size(); ++i) {
      if (eval_boolean(fg_betas[i], value)) {
        next |= 1 << i;
      }
    }
    return next;
  }

  template <class AtomAt>
  bool accepts_with(std::size_t length, AtomAt && at) const
  {
    int state = initial_state();
    for (std::size_t i = 0; i < length; ++i) {
      state = step_with(state, [&](const std::string & name) { return at(i, name); });
    }
    return is_accepting(state);
  }

  bool accepts(const Trace & trace) const
  {
    if (trace.steps.empty()) {
      throw DomainError("dfa: trace must be non-empty");
    }
    return accepts_with(trace.steps.size(), [&](std::size_t i, const std::string & name) {
      const auto & step = trace.steps[i];
      const auto it = step.find(name);
      if (it == step.end()) {
        throw DomainError("dfa: unknown atom '" + name + "' at step " + std::to_string(i));
      }
      return it->second;
    });
  }
};

/// Compiles a supported-fragment formula into its DFA. Anything outside
/// conjunctions of G(beta) / FG(beta) is rejected.
inline Dfa to_dfa(const Formula & formula)
{
  using Op = Formula::Op;
  Dfa dfa;
  dfa.atoms = formula.atoms();
  std::vector<Formula> stack{formula};
  while (!stack.empty()) {
    const Formula f = stack.back();
    stack.pop_back();
    if (f.op() == Op::And) {
      stack.push_back(f.right());
      stack.push_back(f.left());
      continue;
    }
    if (f.op() == Op::Globally && f.left().is_temporal_free()) {
      dfa.g_betas.push_back(f.left());
      continue;
    }
    if (f.op() == Op::Finally && f.left().op() == Op::Globally &&
        f.left().left().is_temporal_free()) {
      dfa.fg_betas.push_back(f.left().left());
      continue;
    }
    throw DomainError("to_dfa: unsupported subformula '" + to_string(f) +
                      "' (expected a conjunction of G(beta) / FG(beta))");
  }
  if (dfa.fg_betas.size() > 20) {
    throw DomainError("to_dfa: too many FG patterns");
  }
  return dfa;
}

inline int dfa_step(const Dfa & dfa, int state, const std::map<std::string, bool> & label)
{
  if (state < 0 || state >= dfa.num_states()) {
    throw DomainError("dfa_step: state " + std::to_string(state) + " does not exist");
  }
  return dfa.step_with(state, [&](const std::string & name) {
    const auto it = label.find(name);
    if (it == label.end()) {
      throw DomainError("dfa_step: unknown atom '" + name + "'");
    }
    return it->second;
  });
}

/// Right-folded conjunction; a singleton list yields its element.
inline Formula conjoin(const std::vector<Formula> & formulas)
{
  if (formulas.empty()) {
    throw DomainError("conjoin: formula list must be non-empty");
  }
  Formula acc = formulas.back();
  for (auto it = formulas.rbegin() + 1; it != formulas.rend(); ++it) {
    acc = Formula::conjunction(*it, acc);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Textual formula syntax: G(p), FG(p), &, |, ->, !, parentheses.

namespace detail {

class FormulaParser {
public:
  explicit FormulaParser(std::string text) : text_(std::move(text)) {}

  Formula parse()
  {
    const Formula f = parse_implies();
    skip_ws();
    if (pos_ != text_.size()) {
      throw InputError("formula: unexpected trailing input at position " + std::to_string(pos_));
    }
    return f;
  }

private:
  Formula parse_implies()
  {
    Formula lhs = parse_or();
    skip_ws();
    if (match("->")) {
      return Formula::implication(lhs, parse_implies());
    }
    return lhs;
  }

  Formula parse_or()
  {
    Formula lhs = parse_and();
    while (true) {
      skip_ws();
      if (peek() == '|') {
        ++pos_;
        lhs = Formula::disjunction(lhs, parse_and());
      } else {
        return lhs;
      }
    }
  }

  Formula parse_and()
  {
    Formula lhs = parse_unary();
    while (true) {
      skip_ws();
      if (peek() == '&') {
        ++pos_;
        lhs = Formula::conjunction(lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Formula parse_unary()
  {
    skip_ws();
    if (peek() == '!') {
      ++pos_;
      return Formula::negation(parse_unary());
    }
    if (peek() == '(') {
      ++pos_;
      const Formula f = parse_implies();
      expect(')');
      return f;
    }
    const std::string ident = parse_identifier();
    skip_ws();
    if (peek() == '(' && (ident == "G" || ident == "F" || ident == "FG")) {
      ++pos_;
      const Formula inner = parse_implies();
      expect(')');
      if (ident == "G") {
        return Formula::always(inner);
      }
      if (ident == "F") {
        return Formula::eventually(inner);
      }
      return Formula::eventually(Formula::always(inner));
    }
    if (ident.empty()) {
      throw InputError("formula: expected atom or operator at position " + std::to_string(pos_));
    }
    return Formula::atom(ident);
  }

  std::string parse_identifier()
  {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  void skip_ws()
  {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  bool match(const std::string & tok)
  {
    if (text_.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(char c)
  {
    skip_ws();
    if (peek() != c) {
      throw InputError(std::string("formula: expected '") + c + "' at position " +
                       std::to_string(pos_));
    }
    ++pos_;
  }

  std::string text_;
  std::size_t pos_{0};
};

}  // namespace detail

inline Formula parse_formula(const std::string & text)
{
  return detail::FormulaParser(text).parse();
}

}  // namespace veridrive
