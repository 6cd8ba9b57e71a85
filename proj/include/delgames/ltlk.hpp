#ifndef DELGAMES_LTLK_HPP
#define DELGAMES_LTLK_HPP

#include <functional>
#include <unordered_map>
#include <vector>

#include "delgames/arena.hpp"
#include "delgames/common.hpp"
#include "delgames/formula.hpp"
#include "delgames/kripke.hpp"

namespace delgames {

/// Which histories a knowledge operator ranges over.
enum class KScope { All, Init };

/// Views an arena's positions as the worlds of an epistemic model.
inline EpistemicModel arena_as_model(const GameArena& g) {
  EpistemicModel m;
  m.num_agents = g.num_agents;
  m.valuation = g.valuation;
  m.turn = g.turn;
  m.classes = g.classes;
  for (int v = 0; v < g.size(); ++v) m.trail.push_back({v});
  return m;
}

// ---------------------------------------------------------------------------
// Bounded three-valued semantics over a history prefix.

namespace detail {

class BoundedEvaluator {
 public:
  BoundedEvaluator(const GameArena& g, int horizon, KScope scope) : g_(g), horizon_(horizon), scope_(scope) {}

  Tri eval(const History& h, int i, const FormulaPtr& f) {
    switch (f->op) {
      case Op::True: return Tri::True;
      case Op::Atom: return tri(has_atom(g_.valuation[h[i]], f->index));
      case Op::Turn: return tri(g_.turn[h[i]] == f->index);
      case Op::Not: return tri_not(eval(h, i, f->lhs));
      case Op::Or: {
        Tri l = eval(h, i, f->lhs);
        if (l == Tri::True) return l;
        return tri_or(l, eval(h, i, f->rhs));
      }
      case Op::Next:
        if (i + 1 >= static_cast<int>(h.size())) return Tri::Unknown;
        return eval(h, i + 1, f->lhs);
      case Op::Until: {
        // U(j) = rhs(j) | (lhs(j) & U(j+1)), with U(end) unknown.
        Tri acc = Tri::Unknown;
        for (int j = static_cast<int>(h.size()) - 1; j >= i; --j)
          acc = tri_or(eval(h, j, f->rhs), tri_and(eval(h, j, f->lhs), acc));
        return acc;
      }
      case Op::Know: return know(h, i, f->index, f->lhs);
    }
    return Tri::Unknown;
  }

 private:
  Tri know(const History& h, int i, int agent, const FormulaPtr& body) {
    Tri result = Tri::True;
    const bool state = is_state_formula(body);
    History prefix;
    // Depth-first over histories h' with h'[k] ~agent h[k] for k <= i.
    std::function<bool(int)> related = [&](int k) -> bool {
      if (k > i) {
        Tri r = state ? eval(prefix, i, body) : over_continuations(prefix, i, body);
        result = tri_and(result, r);
        return result != Tri::False;
      }
      auto consider = [&](int v) -> bool {
        if (!g_.related(agent, v, h[k])) return true;
        prefix.push_back(v);
        bool go_on = related(k + 1);
        prefix.pop_back();
        return go_on;
      };
      if (k == 0) {
        if (scope_ == KScope::Init) {
          for (int v : g_.init)
            if (!consider(v)) return false;
        } else {
          for (int v = 0; v < g_.size(); ++v)
            if (!consider(v)) return false;
        }
        return true;
      }
      int last = prefix.back();
      std::vector<int> seen;
      for (int c = 0; c < g_.num_actions; ++c) {
        int t = g_.trans[last][c];
        if (t < 0 || std::find(seen.begin(), seen.end(), t) != seen.end()) continue;
        seen.push_back(t);
        if (!consider(t)) return false;
      }
      return true;
    };
    related(0);
    return result;
  }

  // Conjunction of `body` at index i over every extension of `prefix` up to
  // the horizon (or until a frontier / dead end).
  Tri over_continuations(History& prefix, int i, const FormulaPtr& body) {
    int last = prefix.back();
    auto succ = g_.is_frontier(last) ? std::vector<int>{} : g_.enabled(last);
    if (static_cast<int>(prefix.size()) >= horizon_ || succ.empty()) return eval(prefix, i, body);
    Tri acc = Tri::True;
    for (int c : succ) {
      prefix.push_back(g_.trans[last][c]);
      acc = tri_and(acc, over_continuations(prefix, i, body));
      prefix.pop_back();
      if (acc == Tri::False) break;
    }
    return acc;
  }

  const GameArena& g_;
  int horizon_;
  KScope scope_;
};

}  // namespace detail

/// Three-valued truth of `phi` at index `i` of a play known only through
/// `prefix`. Positions past the prefix are unknown; knowledge quantifies
/// over every same-length related history and, for temporal bodies, over all
/// their extensions up to `horizon` positions.
inline Tri eval_ltlk_bounded(const GameArena& g, const History& prefix, int i, const FormulaPtr& phi, int horizon,
                             KScope scope = KScope::All) {
  if (i < 0 || i >= static_cast<int>(prefix.size()) || static_cast<int>(prefix.size()) > horizon)
    throw PreconditionError("eval_ltlk_bounded needs i < |prefix| <= horizon");
  return detail::BoundedEvaluator(g, horizon, scope).eval(prefix, i, phi);
}

// ---------------------------------------------------------------------------
// Exact evaluation on lasso-shaped plays.

/// stem followed by loop repeated forever.
struct LassoPlay {
  History stem;
  History loop;

  int length() const { return static_cast<int>(stem.size() + loop.size()); }
  int at(int k) const { return k < static_cast<int>(stem.size()) ? stem[k] : loop[k - stem.size()]; }
};

/// Truth of `phi` at every index of a lasso word of `n` letters looping back
/// to `loop_start`. Maximal temporal-free subformulas are delegated to
/// `state(subformula, index)`.
inline std::vector<char> eval_lasso_word(const FormulaPtr& phi, int n, int loop_start,
                                         const std::function<bool(const FormulaPtr&, int)>& state) {
  std::vector<char> out(n);
  if (is_state_formula(phi)) {
    for (int k = 0; k < n; ++k) out[k] = state(phi, k);
    return out;
  }
  auto succ = [&](int k) { return k + 1 < n ? k + 1 : loop_start; };
  switch (phi->op) {
    case Op::Not: {
      out = eval_lasso_word(phi->lhs, n, loop_start, state);
      for (auto& b : out) b = !b;
      return out;
    }
    case Op::Or: {
      auto l = eval_lasso_word(phi->lhs, n, loop_start, state);
      auto r = eval_lasso_word(phi->rhs, n, loop_start, state);
      for (int k = 0; k < n; ++k) out[k] = l[k] || r[k];
      return out;
    }
    case Op::Next: {
      auto sub = eval_lasso_word(phi->lhs, n, loop_start, state);
      for (int k = 0; k < n; ++k) out[k] = sub[succ(k)];
      return out;
    }
    case Op::Until: {
      auto l = eval_lasso_word(phi->lhs, n, loop_start, state);
      auto r = eval_lasso_word(phi->rhs, n, loop_start, state);
      // Least fixpoint on the lasso graph.
      out = r;
      for (bool changed = true; changed;) {
        changed = false;
        for (int k = n - 1; k >= 0; --k)
          if (!out[k] && l[k] && out[succ(k)]) out[k] = changed = true;
      }
      return out;
    }
    default: break;
  }
  throw PreconditionError("temporal operator under a knowledge modality");
}

/// Exact truth of a no-X, no-temporal-under-K formula at the start of a
/// lasso; epistemic subformulas are evaluated on the arena's relations.
inline bool eval_ltlk_lasso(const GameArena& g, const LassoPlay& play, const FormulaPtr& phi) {
  if (classify(phi) > Fragment::NoNextNoKTemporal)
    throw PreconditionError("lasso evaluation needs a formula without X and without temporal operators under K");
  if (play.loop.empty()) throw PreconditionError("lasso loop is empty");
  auto model = arena_as_model(g);
  std::unordered_map<const Formula*, std::vector<char>> memo;
  auto state = [&](const FormulaPtr& f, int k) -> bool {
    auto it = memo.find(f.get());
    if (it == memo.end()) it = memo.emplace(f.get(), eval_el_all(model, f)).first;
    return it->second[play.at(k)];
  };
  return eval_lasso_word(phi, play.length(), static_cast<int>(play.stem.size()), state)[0];
}

}  // namespace delgames

#endif
