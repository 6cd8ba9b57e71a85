#ifndef DELGAMES_FORMULA_HPP
#define DELGAMES_FORMULA_HPP

#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "delgames/common.hpp"

namespace delgames {

// Core LTLK constructors. And, ->, F, G, false are sugar and never appear in
// an AST; True is kept as a node so that F phi == True U phi.
enum class Op { True, Atom, Turn, Not, Or, Next, Until, Know };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  Op op;
  int index = -1;  // atom id for Atom, agent id for Turn and Know
  FormulaPtr lhs;
  FormulaPtr rhs;
};

inline FormulaPtr make_node(Op op, int index = -1, FormulaPtr lhs = nullptr, FormulaPtr rhs = nullptr) {
  return std::make_shared<Formula>(Formula{op, index, std::move(lhs), std::move(rhs)});
}

inline FormulaPtr make_true() { return make_node(Op::True); }
inline FormulaPtr make_atom(int atom) { return make_node(Op::Atom, atom); }
inline FormulaPtr make_turn(int agent) { return make_node(Op::Turn, agent); }
inline FormulaPtr make_not(FormulaPtr f) { return make_node(Op::Not, -1, std::move(f)); }
inline FormulaPtr make_or(FormulaPtr a, FormulaPtr b) {
  return make_node(Op::Or, -1, std::move(a), std::move(b));
}
inline FormulaPtr make_next(FormulaPtr f) { return make_node(Op::Next, -1, std::move(f)); }
inline FormulaPtr make_until(FormulaPtr a, FormulaPtr b) {
  return make_node(Op::Until, -1, std::move(a), std::move(b));
}
inline FormulaPtr make_know(int agent, FormulaPtr f) {
  return make_node(Op::Know, agent, std::move(f));
}
inline FormulaPtr make_false() { return make_not(make_true()); }
inline FormulaPtr make_and(FormulaPtr a, FormulaPtr b) {
  return make_not(make_or(make_not(std::move(a)), make_not(std::move(b))));
}
inline FormulaPtr make_implies(FormulaPtr a, FormulaPtr b) { return make_or(make_not(std::move(a)), std::move(b)); }
inline FormulaPtr make_finally(FormulaPtr f) { return make_until(make_true(), std::move(f)); }
inline FormulaPtr make_globally(FormulaPtr f) { return make_not(make_finally(make_not(std::move(f)))); }

inline bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->op == b->op && a->index == b->index && structurally_equal(a->lhs, b->lhs) &&
         structurally_equal(a->rhs, b->rhs);
}

/// Number of AST nodes of the de-sugared formula.
inline int size(const FormulaPtr& f) {
  if (!f) return 0;
  return 1 + size(f->lhs) + size(f->rhs);
}

// Ordered from least to most expressive.
enum class Fragment { Prop, EL, NoNextNoKTemporal, LTLK };

inline const char* to_string(Fragment f) {
  switch (f) {
    case Fragment::Prop: return "PROP";
    case Fragment::EL: return "EL";
    case Fragment::NoNextNoKTemporal: return "LTLK-noX-noKtemporal";
    case Fragment::LTLK: return "LTLK";
  }
  return "?";
}

namespace detail {
struct FragmentFacts {
  bool has_know = false;
  bool has_next = false;
  bool has_until = false;
  bool temporal_under_know = false;
};

inline FragmentFacts fragment_facts(const FormulaPtr& f) {
  FragmentFacts out;
  if (!f) return out;
  auto l = fragment_facts(f->lhs);
  auto r = fragment_facts(f->rhs);
  out.has_know = l.has_know || r.has_know || f->op == Op::Know;
  out.has_next = l.has_next || r.has_next || f->op == Op::Next;
  out.has_until = l.has_until || r.has_until || f->op == Op::Until;
  out.temporal_under_know = l.temporal_under_know || r.temporal_under_know ||
                            (f->op == Op::Know && (l.has_next || l.has_until));
  return out;
}
}  // namespace detail

inline Fragment classify(const FormulaPtr& f) {
  auto facts = detail::fragment_facts(f);
  if (!facts.has_next && !facts.has_until) return facts.has_know ? Fragment::EL : Fragment::Prop;
  if (!facts.has_next && !facts.temporal_under_know) return Fragment::NoNextNoKTemporal;
  return Fragment::LTLK;
}

/// True when the formula has no temporal operator (evaluable at a single world).
inline bool is_state_formula(const FormulaPtr& f) { return classify(f) <= Fragment::EL; }

// ---------------------------------------------------------------------------
// Printing. F, G and false are re-sugared; everything else is printed in core
// syntax with binary operators fully parenthesized, so parse(print(f)) == f.

inline std::string to_string(const FormulaPtr& f, const Vocabulary& voc) {
  switch (f->op) {
    case Op::True: return "true";
    case Op::Atom: return voc.atoms.at(f->index);
    case Op::Turn: return "turn=" + voc.agents.at(f->index);
    case Op::Not: {
      const auto& sub = f->lhs;
      if (sub->op == Op::True) return "false";
      if (sub->op == Op::Until && sub->lhs->op == Op::True && sub->rhs->op == Op::Not)
        return "G " + to_string(sub->rhs->lhs, voc);
      return "!" + to_string(sub, voc);
    }
    case Op::Or: return "(" + to_string(f->lhs, voc) + " | " + to_string(f->rhs, voc) + ")";
    case Op::Next: return "X " + to_string(f->lhs, voc);
    case Op::Until:
      if (f->lhs->op == Op::True) return "F " + to_string(f->rhs, voc);
      return "(" + to_string(f->lhs, voc) + " U " + to_string(f->rhs, voc) + ")";
    case Op::Know: return "K[" + voc.agents.at(f->index) + "] " + to_string(f->lhs, voc);
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parsing.
//
//   impl  := or ('->' impl)?
//   or    := and ('|' and)*
//   and   := until ('&' until)*
//   until := unary ('U' until)?
//   unary := ('!' | 'X' | 'F' | 'G' | 'K[' agent ']') unary | primary
//   primary := 'true' | 'false' | 'turn=' agent | atom | '(' impl ')'

class FormulaParser {
 public:
  /// When `allow_new_atoms` is false, atoms must already be in `voc`.
  FormulaParser(Vocabulary& voc, bool allow_new_atoms, int line = 1, int column_offset = 0)
      : voc_(voc), allow_new_atoms_(allow_new_atoms), line_(line), column_offset_(column_offset) {}

  FormulaPtr parse(std::string_view text) {
    text_ = text;
    pos_ = 0;
    skip_ws();
    if (pos_ >= text_.size()) fail("empty formula");
    auto f = parse_implies();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError(msg, line_, column_offset_ + static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string_view peek_ident() {
    skip_ws();
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) return {};
    std::size_t end = pos_;
    while (end < text_.size() && ident_char(text_[end])) ++end;
    return text_.substr(pos_, end - pos_);
  }

  int agent_ref() {
    auto name = peek_ident();
    if (name.empty()) fail("expected agent name");
    auto id = voc_.find_agent(name);
    if (!id) fail("unknown agent '" + std::string(name) + "'");
    pos_ += name.size();
    return *id;
  }

  FormulaPtr parse_implies() {
    auto lhs = parse_or();
    if (accept("->")) return make_implies(lhs, parse_implies());
    return lhs;
  }

  FormulaPtr parse_or() {
    auto lhs = parse_and();
    while (accept("|")) lhs = make_or(lhs, parse_and());
    return lhs;
  }

  FormulaPtr parse_and() {
    auto lhs = parse_until();
    while (accept("&")) lhs = make_and(lhs, parse_until());
    return lhs;
  }

  FormulaPtr parse_until() {
    auto lhs = parse_unary();
    if (peek_ident() == "U") {
      pos_ += 1;
      return make_until(lhs, parse_until());
    }
    return lhs;
  }

  FormulaPtr parse_unary() {
    if (accept("!")) return make_not(parse_unary());
    auto id = peek_ident();
    if (id == "X") return pos_ += 1, make_next(parse_unary());
    if (id == "F") return pos_ += 1, make_finally(parse_unary());
    if (id == "G") return pos_ += 1, make_globally(parse_unary());
    if (id == "K") {
      pos_ += 1;
      if (!accept("[")) fail("expected '[' after K");
      int agent = agent_ref();
      if (!accept("]")) fail("expected ']'");
      return make_know(agent, parse_unary());
    }
    return parse_primary();
  }

  FormulaPtr parse_primary() {
    if (accept("(")) {
      auto f = parse_implies();
      if (!accept(")")) fail("expected ')'");
      return f;
    }
    auto id = peek_ident();
    if (id.empty()) {
      if (pos_ >= text_.size()) fail("unexpected end of formula");
      fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    }
    if (id == "U") fail("'U' needs a left operand");
    if (id == "true") return pos_ += id.size(), make_true();
    if (id == "false") return pos_ += id.size(), make_false();
    if (id == "turn" && pos_ + 4 < text_.size() && text_[pos_ + 4] == '=') {
      pos_ += 5;
      return make_turn(agent_ref());
    }
    std::string name(id);
    auto atom = voc_.find_atom(name);
    if (!atom) {
      if (!allow_new_atoms_) fail("undeclared atom '" + name + "'");
      atom = voc_.add_atom(name);
    }
    pos_ += id.size();
    return make_atom(*atom);
  }

  Vocabulary& voc_;
  bool allow_new_atoms_;
  int line_;
  int column_offset_;
  std::string_view text_;
  std::size_t pos_ = 0;
};

/// Parses `text`, interning unseen atoms into `voc`. Agents must be declared.
inline FormulaPtr parse_formula(std::string_view text, Vocabulary& voc) {
  return FormulaParser(voc, true).parse(text);
}

}  // namespace delgames

#endif
