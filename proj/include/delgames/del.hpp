#ifndef DELGAMES_DEL_HPP
#define DELGAMES_DEL_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "delgames/common.hpp"
#include "delgames/formula.hpp"
#include "delgames/kripke.hpp"

namespace delgames {

/// Event model. Postconditions not listed in `post` leave the atom unchanged.
struct ActionModel {
  int num_agents = 0;
  std::vector<std::string> names;
  std::vector<FormulaPtr> pre;
  std::vector<std::map<int, FormulaPtr>> post;
  std::vector<int> turn_after;
  std::vector<std::vector<int>> classes;

  int size() const { return static_cast<int>(pre.size()); }
  bool related(int agent, int e, int f) const { return classes[agent][e] == classes[agent][f]; }
};

inline ActionModel make_action_model(int num_agents, std::vector<std::string> names, std::vector<FormulaPtr> pre,
                                     std::vector<std::map<int, FormulaPtr>> post, std::vector<int> turn_after,
                                     const std::vector<std::vector<std::pair<int, int>>>& pairs,
                                     bool* closure_added = nullptr) {
  const int n = static_cast<int>(pre.size());
  if (n == 0) throw InputError("an action model needs at least one event");
  if (static_cast<int>(post.size()) != n || static_cast<int>(turn_after.size()) != n ||
      static_cast<int>(names.size()) != n)
    throw InputError("event tables have inconsistent sizes");
  for (int e = 0; e < n; ++e) {
    if (classify(pre[e]) > Fragment::EL) throw InputError("precondition of '" + names[e] + "' is not epistemic");
    for (const auto& [atom, f] : post[e])
      if (classify(f) != Fragment::Prop)
        throw InputError("postcondition of '" + names[e] + "' is not propositional");
  }
  // Reuse the model builder for the partition.
  auto shape = make_model(num_agents, std::vector<AtomSet>(n, 0), std::vector<int>(n, 0), pairs, closure_added);
  ActionModel a;
  a.num_agents = num_agents;
  a.names = std::move(names);
  a.pre = std::move(pre);
  a.post = std::move(post);
  a.turn_after = std::move(turn_after);
  a.classes = std::move(shape.classes);
  return a;
}

/// Initial epistemic model, action model and initial worlds.
struct Presentation {
  Vocabulary vocab;
  EpistemicModel model;
  std::vector<std::string> world_names;
  ActionModel actions;
  std::vector<int> init;

  int num_agents() const { return vocab.num_agents(); }
};

// ---------------------------------------------------------------------------
// Update product.

inline bool executable(const EpistemicModel& m, int w, const ActionModel& a, int e) {
  return eval_el(m, w, a.pre.at(e));
}

/// Atoms true after `e` happens at `w`.
inline AtomSet post_val(const EpistemicModel& m, int w, const ActionModel& a, int e) {
  if (!executable(m, w, a, e)) throw PreconditionError("post_val on a non-executable event");
  AtomSet out = m.valuation[w];
  for (const auto& [atom, f] : a.post[e]) {
    AtomSet bit = AtomSet{1} << atom;
    out = eval_el(m, w, f) ? (out | bit) : (out & ~bit);
  }
  return out;
}

/// Product model. Worlds are ordered by (world, event); each world's trail
/// extends its parent's with the event.
inline EpistemicModel product(const EpistemicModel& m, const ActionModel& a) {
  std::vector<std::vector<char>> exec;
  std::vector<std::vector<std::pair<int, std::vector<char>>>> posts(a.size());
  for (int e = 0; e < a.size(); ++e) {
    exec.push_back(eval_el_all(m, a.pre[e]));
    for (const auto& [atom, f] : a.post[e]) posts[e].emplace_back(atom, eval_el_all(m, f));
  }
  EpistemicModel out;
  out.num_agents = m.num_agents;
  std::vector<std::pair<int, int>> pairs;
  for (int w = 0; w < m.size(); ++w)
    for (int e = 0; e < a.size(); ++e) {
      if (!exec[e][w]) continue;
      pairs.emplace_back(w, e);
      AtomSet val = m.valuation[w];
      for (const auto& [atom, truth] : posts[e]) {
        AtomSet bit = AtomSet{1} << atom;
        val = truth[w] ? (val | bit) : (val & ~bit);
      }
      out.valuation.push_back(val);
      out.turn.push_back(a.turn_after[e]);
      auto trail = m.trail[w];
      trail.push_back(e);
      out.trail.push_back(std::move(trail));
    }
  if (pairs.empty()) throw PreconditionError("no executable event");
  const int nw = static_cast<int>(pairs.size());
  for (int ag = 0; ag < m.num_agents; ++ag) {
    std::vector<int> labels(nw);
    for (int i = 0; i < nw; ++i)
      labels[i] = m.classes[ag][pairs[i].first] * a.size() + a.classes[ag][pairs[i].second];
    out.classes.push_back(normalize_labels(labels));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Action types.

struct ActionTypes {
  bool propositional = true;
  std::vector<bool> is_public;
  std::vector<bool> announcement;

  bool all_public() const { return std::all_of(is_public.begin(), is_public.end(), [](bool b) { return b; }); }
  bool all_announcements() const {
    return std::all_of(announcement.begin(), announcement.end(), [](bool b) { return b; });
  }
};

inline ActionTypes classify_actions(const ActionModel& a) {
  ActionTypes t;
  for (int e = 0; e < a.size(); ++e) {
    if (classify(a.pre[e]) != Fragment::Prop) t.propositional = false;
    for (const auto& [atom, f] : a.post[e])
      if (classify(f) != Fragment::Prop) t.propositional = false;
    bool pub = true;
    for (int ag = 0; ag < a.num_agents; ++ag)
      for (int f = 0; f < a.size(); ++f)
        if (f != e && a.related(ag, e, f)) pub = false;
    t.is_public.push_back(pub);
    bool trivial_post = std::all_of(a.post[e].begin(), a.post[e].end(), [&](const auto& kv) {
      return kv.second->op == Op::Atom && kv.second->index == kv.first;
    });
    t.announcement.push_back(pub && trivial_post);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Hypotheses.

struct HypothesisReport {
  bool pass = true;
  std::string detail;
  /// Depth up to which a history-quantified check was verified; -1 when the
  /// check is not depth-bounded.
  int verified_depth = -1;
  /// Counterexample histories as trails (root world, events...).
  std::vector<std::vector<int>> witness;
};

inline std::string format_trail(const Presentation& p, const std::vector<int>& trail) {
  std::string out = p.world_names.empty() ? "w" + std::to_string(trail.at(0)) : p.world_names.at(trail.at(0));
  if (trail.size() == 1) return out;
  out = "(" + out;
  for (std::size_t i = 1; i < trail.size(); ++i) out += "," + p.actions.names.at(trail[i]);
  return out + ")";
}

inline HypothesisReport check_h1(const EpistemicModel& m) {
  HypothesisReport r;
  for (int w = 1; w < m.size(); ++w)
    if (m.turn[w] != m.turn[0]) {
      r.pass = false;
      r.detail = "worlds disagree on the starting player";
      r.witness = {m.trail[0], m.trail[w]};
      return r;
    }
  return r;
}

inline HypothesisReport check_h2(const ActionModel& a) {
  HypothesisReport r;
  for (int ag = 0; ag < a.num_agents; ++ag)
    for (int e = 0; e < a.size(); ++e)
      for (int f = e + 1; f < a.size(); ++f)
        if (a.related(ag, e, f) && a.turn_after[e] != a.turn_after[f]) {
          r.pass = false;
          r.detail = "events " + a.names[e] + " and " + a.names[f] + " are indistinguishable but set different turns";
          r.witness = {{e}, {f}};
          return r;
        }
  return r;
}

/// Iterated products M, M(x)E, ... up to `depth` (fewer if the world count
/// would exceed `max_worlds`).
inline std::vector<EpistemicModel> product_levels(const EpistemicModel& m, const ActionModel& a, int depth,
                                                  int max_worlds = 200000) {
  std::vector<EpistemicModel> levels{m};
  for (int n = 1; n <= depth; ++n) {
    if (static_cast<long long>(levels.back().size()) * a.size() > max_worlds) break;
    levels.push_back(product(levels.back(), a));
  }
  return levels;
}

/// H3 (the owner of the turn knows the available actions) and the
/// nonblocking assumption, checked on every history up to `depth`.
inline HypothesisReport check_h3(const Presentation& p, int depth = 4) {
  HypothesisReport r;
  const auto& a = p.actions;
  auto levels = product_levels(p.model, a, depth);
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const auto& m = levels[n];
    std::vector<std::vector<char>> exec;
    for (int e = 0; e < a.size(); ++e) exec.push_back(eval_el_all(m, a.pre[e]));
    for (int x = 0; x < m.size(); ++x) {
      bool any = false;
      for (int e = 0; e < a.size(); ++e) any = any || exec[e][x];
      if (!any) {
        r.pass = false;
        r.detail = "no action available at " + format_trail(p, m.trail[x]);
        r.witness = {m.trail[x]};
        r.verified_depth = static_cast<int>(n) - 1;
        return r;
      }
      int owner = m.turn[x];
      for (int y = 0; y < m.size(); ++y) {
        if (y == x || !m.related(owner, x, y)) continue;
        for (int e = 0; e < a.size(); ++e)
          if (exec[e][x] != exec[e][y]) {
            r.pass = false;
            r.detail = "agent " + p.vocab.agents[owner] + " confuses " + format_trail(p, m.trail[x]) + " and " +
                       format_trail(p, m.trail[y]) + " but " + a.names[e] + " is available in only one";
            r.witness = {m.trail[x], m.trail[y]};
            r.verified_depth = static_cast<int>(n) - 1;
            return r;
          }
      }
    }
  }
  r.verified_depth = static_cast<int>(levels.size()) - 1;
  r.detail = "verified to depth " + std::to_string(r.verified_depth);
  return r;
}

/// Worlds some member of `team` cannot distinguish from `w_init`.
inline std::vector<int> subjective_init(const EpistemicModel& m, int w_init, const std::vector<int>& team) {
  std::vector<int> out;
  for (int w = 0; w < m.size(); ++w)
    for (int ag : team)
      if (m.related(ag, w, w_init)) {
        out.push_back(w);
        break;
      }
  if (std::find(out.begin(), out.end(), w_init) == out.end()) {
    out.push_back(w_init);
    std::sort(out.begin(), out.end());
  }
  return out;
}

/// Builds a presentation, rejecting models that violate H1 or H2.
inline Presentation make_presentation(Vocabulary vocab, EpistemicModel model, std::vector<std::string> world_names,
                                      ActionModel actions, std::vector<int> init) {
  if (init.empty()) throw PreconditionError("the initial world set is empty");
  for (int w : init)
    if (w < 0 || w >= model.size()) throw PreconditionError("initial world not in model");
  if (auto h1 = check_h1(model); !h1.pass) throw PreconditionError("H1 violated: " + h1.detail);
  if (auto h2 = check_h2(actions); !h2.pass) throw PreconditionError("H2 violated: " + h2.detail);
  std::sort(init.begin(), init.end());
  init.erase(std::unique(init.begin(), init.end()), init.end());
  return Presentation{std::move(vocab), std::move(model), std::move(world_names), std::move(actions),
                      std::move(init)};
}

}  // namespace delgames

#endif
