#ifndef DELGAMES_FOLD_HPP
#define DELGAMES_FOLD_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "delgames/arena.hpp"
#include "delgames/del.hpp"
#include "delgames/kripke.hpp"

namespace delgames {

/// Where a folded position comes from. For the propositional folding either
/// `world` (an initial-model world) or `event` + `valuation` + `turn` is set;
/// for the public quotient `representative` and `key` are set.
struct Provenance {
  int world = -1;
  int event = -1;
  AtomSet valuation = 0;
  int turn = -1;
  std::optional<PointedModel> representative;
  std::vector<int> representative_trail;
  CanonicalKey key;
};

struct FoldedArena {
  GameArena arena;
  std::vector<Provenance> provenance;
};

/// |M| + |E| * 2^m.
inline double propositional_bound(const Presentation& p) {
  return p.model.size() + p.actions.size() * std::pow(2.0, p.vocab.num_atoms());
}

/// m * (2^p + 1)^m where m counts worlds and p counts atoms plus one turn
/// atom per agent.
inline double quotient_bound(const Presentation& p) {
  const double m = p.model.size();
  const double atoms = p.vocab.num_atoms() + p.num_agents();
  return m * std::pow(std::pow(2.0, atoms) + 1.0, m);
}

namespace detail {

inline bool eval_prop(const FormulaPtr& f, AtomSet val, int turn) {
  switch (f->op) {
    case Op::True: return true;
    case Op::Atom: return has_atom(val, f->index);
    case Op::Turn: return turn == f->index;
    case Op::Not: return !eval_prop(f->lhs, val, turn);
    case Op::Or: return eval_prop(f->lhs, val, turn) || eval_prop(f->rhs, val, turn);
    default: break;
  }
  throw PreconditionError("formula is not propositional");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Propositional actions: the worlds of the initial model plus (event,
// valuation) pairs.

inline FoldedArena fold_propositional(const Presentation& p) {
  const auto& acts = p.actions;
  for (int e = 0; e < acts.size(); ++e) {
    bool prop = classify(acts.pre[e]) == Fragment::Prop;
    for (const auto& [atom, f] : acts.post[e]) prop = prop && classify(f) == Fragment::Prop;
    if (!prop) throw PreconditionError("event '" + acts.names[e] + "' is not propositional");
  }
  FoldedArena out;
  auto& g = out.arena;
  g.num_agents = p.num_agents();
  g.num_actions = acts.size();
  g.action_names = acts.names;
  const auto& m = p.model;
  for (int w = 0; w < m.size(); ++w) {
    g.add_position(m.turn[w], m.valuation[w], p.world_names.empty() ? "w" + std::to_string(w) : p.world_names[w]);
    Provenance prov;
    prov.world = w;
    prov.valuation = m.valuation[w];
    prov.turn = m.turn[w];
    out.provenance.push_back(std::move(prov));
  }
  std::map<std::pair<int, AtomSet>, int> pair_index;
  std::deque<int> queue;
  for (int w = 0; w < m.size(); ++w) queue.push_back(w);
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    AtomSet val = g.valuation[v];
    int turn = g.turn[v];
    for (int e = 0; e < acts.size(); ++e) {
      if (!detail::eval_prop(acts.pre[e], val, turn)) continue;
      AtomSet next = val;
      for (const auto& [atom, f] : acts.post[e]) {
        AtomSet bit = AtomSet{1} << atom;
        next = detail::eval_prop(f, val, turn) ? (next | bit) : (next & ~bit);
      }
      auto [it, fresh] = pair_index.try_emplace({e, next}, g.size());
      if (fresh) {
        g.add_position(acts.turn_after[e], next, acts.names[e] + ":" + p.vocab.format_atoms(next));
        Provenance prov;
        prov.event = e;
        prov.valuation = next;
        prov.turn = acts.turn_after[e];
        out.provenance.push_back(std::move(prov));
        queue.push_back(it->second);
      }
      g.trans[v][e] = it->second;
    }
  }
  // Initial worlds keep the model's relations; pair positions are related
  // exactly when their events are.
  g.classes.assign(g.num_agents, std::vector<int>(g.size()));
  for (int a = 0; a < g.num_agents; ++a) {
    for (int v = 0; v < g.size(); ++v) {
      const auto& prov = out.provenance[v];
      g.classes[a][v] = prov.world >= 0 ? m.classes[a][prov.world] : m.size() + acts.classes[a][prov.event];
    }
    g.classes[a] = normalize_labels(g.classes[a]);
  }
  g.init = p.init;
  return out;
}

// ---------------------------------------------------------------------------
// Public actions: quotient of the induced arena by pointed isomorphism of
// attached models.
//
// Non-initial positions are keyed by their attached pointed model and the
// event that produced them, so that no class is entered by two different
// events; initial positions of the presentation are kept apart from each other.

inline FoldedArena quotient_public(const Presentation& p) {
  auto types = classify_actions(p.actions);
  for (int e = 0; e < p.actions.size(); ++e)
    if (!types.is_public[e]) throw PreconditionError("event '" + p.actions.names[e] + "' is not public");

  LazyArena lazy(p);
  const double guard = [&] {
    const double m = p.model.size();
    return m + p.actions.size() * m * std::pow(std::pow(2.0, p.vocab.num_atoms()) + 1.0, m) + 1.0;
  }();

  auto key_of = [&](int node) {
    const auto& trail = lazy.trail(node);
    CanonicalKey key = canonical_form(lazy.attached(node));
    if (trail.size() == 1) {
      key.bytes += "#root";
      if (std::binary_search(p.init.begin(), p.init.end(), trail[0])) key.bytes += "#init" + std::to_string(trail[0]);
    } else {
      key.bytes += "#after" + std::to_string(trail.back());
    }
    return key;
  };

  std::unordered_map<CanonicalKey, int, CanonicalKeyHash> class_of_key;
  std::unordered_map<int, int> class_of_node;
  std::vector<int> reps;
  std::vector<CanonicalKey> keys;
  std::deque<int> queue;

  auto classify_node = [&](int node) {
    if (auto it = class_of_node.find(node); it != class_of_node.end()) return it->second;
    auto key = key_of(node);
    auto [it, fresh] = class_of_key.try_emplace(key, static_cast<int>(reps.size()));
    if (fresh) {
      if (reps.size() + 1 > guard) throw InternalInvariantError("public quotient exceeded its class bound");
      reps.push_back(node);
      keys.push_back(key);
      queue.push_back(node);
    }
    class_of_node[node] = it->second;
    return it->second;
  };

  auto related_nodes = [&](int node, int agent) {
    std::vector<int> out;
    const auto& att = lazy.attached(node);
    for (int v = 0; v < att.model.size(); ++v)
      if (att.model.related(agent, att.point, v)) out.push_back(*lazy.follow(att.model.trail[v]));
    return out;
  };

  for (int w = 0; w < p.model.size(); ++w) classify_node(lazy.root(w));
  while (!queue.empty()) {
    int node = queue.front();
    queue.pop_front();
    for (int e = 0; e < p.actions.size(); ++e)
      if (auto child = lazy.expand(node, e)) classify_node(*child);
    for (int a = 0; a < p.num_agents(); ++a)
      for (int other : related_nodes(node, a)) classify_node(other);
  }

  FoldedArena out;
  auto& g = out.arena;
  g.num_agents = p.num_agents();
  g.num_actions = p.actions.size();
  g.action_names = p.actions.names;
  for (std::size_t c = 0; c < reps.size(); ++c) {
    const auto& att = lazy.attached(reps[c]);
    g.add_position(att.model.turn[att.point], att.model.valuation[att.point],
                   "c" + std::to_string(c) + ":" + format_trail(p, lazy.trail(reps[c])));
    Provenance prov;
    prov.representative = att;
    prov.representative_trail = lazy.trail(reps[c]);
    prov.key = keys[c];
    prov.valuation = att.model.valuation[att.point];
    prov.turn = att.model.turn[att.point];
    out.provenance.push_back(std::move(prov));
  }
  for (std::size_t c = 0; c < reps.size(); ++c)
    for (int e = 0; e < p.actions.size(); ++e)
      if (auto child = lazy.expand(reps[c], e)) g.trans[c][e] = class_of_node.at(*child);
  for (int a = 0; a < g.num_agents; ++a) {
    DisjointSets sets(g.size());
    for (std::size_t c = 0; c < reps.size(); ++c)
      for (int other : related_nodes(reps[c], a)) sets.unite(static_cast<int>(c), class_of_node.at(other));
    std::vector<int> labels(g.size());
    for (int c = 0; c < g.size(); ++c) labels[c] = sets.find(c);
    g.classes.push_back(normalize_labels(labels));
  }
  for (int w : p.init) g.init.push_back(class_of_node.at(lazy.root(w)));
  std::sort(g.init.begin(), g.init.end());
  g.init.erase(std::unique(g.init.begin(), g.init.end()), g.init.end());
  return out;
}

// ---------------------------------------------------------------------------
// Equivalence of arenas: isomorphism of unfoldings up to a depth.

struct EquivalenceResult {
  bool equivalent = true;
  std::string reason;
  /// Distinguishing histories (in the first and second arena).
  std::optional<std::pair<History, History>> witness;
};

inline EquivalenceResult check_equivalence(const GameArena& g1, const GameArena& g2, int depth) {
  EquivalenceResult res;
  if (g1.num_actions != g2.num_actions || g1.num_agents != g2.num_agents) {
    res.equivalent = false;
    res.reason = "different action or agent sets";
    return res;
  }
  auto u1 = unfold(g1, depth);
  auto u2 = unfold(g2, depth);
  const auto& a1 = u1.arena;
  const auto& a2 = u2.arena;
  if (a1.init.size() != a2.init.size() || a1.size() != a2.size()) {
    res.equivalent = false;
    res.reason = "unfoldings have different sizes";
    if (!a1.init.empty() && !a2.init.empty())
      res.witness = {u1.histories[a1.init[0]], u2.histories[a2.init[0]]};
    return res;
  }
  // Actions are deterministic, so a root pairing forces the whole map.
  auto forced = [&](int r1, int r2, std::vector<std::pair<int, int>>& pairs) -> bool {
    std::vector<std::pair<int, int>> stack{{r1, r2}};
    while (!stack.empty()) {
      auto [x, y] = stack.back();
      stack.pop_back();
      pairs.emplace_back(x, y);
      if (a1.turn[x] != a2.turn[y] || a1.valuation[x] != a2.valuation[y] || a1.frontier[x] != a2.frontier[y]) {
        if (!res.witness) {
          res.witness = {u1.histories[x], u2.histories[y]};
          res.reason = "positions differ in turn, valuation or depth";
        }
        return false;
      }
      for (int c = 0; c < a1.num_actions; ++c) {
        int s1 = a1.trans[x][c], s2 = a2.trans[y][c];
        if ((s1 < 0) != (s2 < 0)) {
          if (!res.witness) {
            res.witness = {u1.histories[x], u2.histories[y]};
            res.reason = "action " + std::to_string(c) + " enabled in only one arena";
          }
          return false;
        }
        if (s1 >= 0) stack.emplace_back(s1, s2);
      }
    }
    return true;
  };
  const int k = static_cast<int>(a1.init.size());
  std::vector<std::vector<std::optional<std::vector<std::pair<int, int>>>>> compat(k, std::vector<std::optional<std::vector<std::pair<int, int>>>>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      std::vector<std::pair<int, int>> pairs;
      if (forced(a1.init[i], a2.init[j], pairs)) compat[i][j] = std::move(pairs);
    }
  // Backtrack over root bijections, keeping every agent's class labels in
  // bijective correspondence.
  std::vector<std::map<int, int>> fwd(g1.num_agents), bwd(g1.num_agents);
  std::vector<char> used(k, 0);
  std::function<bool(int)> assign = [&](int i) -> bool {
    if (i == k) return true;
    for (int j = 0; j < k; ++j) {
      if (used[j] || !compat[i][j]) continue;
      auto saved_f = fwd;
      auto saved_b = bwd;
      bool ok = true;
      for (auto [x, y] : *compat[i][j]) {
        for (int a = 0; a < a1.num_agents && ok; ++a) {
          int l1 = a1.classes[a][x], l2 = a2.classes[a][y];
          auto [f, ff] = fwd[a].try_emplace(l1, l2);
          auto [b, bf] = bwd[a].try_emplace(l2, l1);
          ok = f->second == l2 && b->second == l1;
          if (!ok && !res.witness) {
            res.witness = {u1.histories[x], u2.histories[y]};
            res.reason = "indistinguishability differs for agent " + std::to_string(a);
          }
        }
        if (!ok) break;
      }
      if (ok) {
        used[j] = 1;
        if (assign(i + 1)) return true;
        used[j] = 0;
      }
      fwd = std::move(saved_f);
      bwd = std::move(saved_b);
    }
    return false;
  };
  if (assign(0)) {
    res.witness.reset();
    res.reason.clear();
    return res;
  }
  res.equivalent = false;
  if (res.reason.empty()) res.reason = "no matching of initial positions";
  return res;
}

/// Compares the arena induced by `p` with `g`.
inline EquivalenceResult check_equivalence(const Presentation& p, const GameArena& g, int depth) {
  return check_equivalence(materialize(p, depth).arena, g, depth);
}

// ---------------------------------------------------------------------------
// Hierarchical information.

/// A total order of the existential agents along which both the model's and
/// the action model's relations grow, or nullopt.
inline std::optional<std::vector<int>> check_hierarchical(const Presentation& p) {
  auto included = [&](int a, int b) {
    for (int w = 0; w < p.model.size(); ++w)
      for (int v = 0; v < p.model.size(); ++v)
        if (p.model.related(a, w, v) && !p.model.related(b, w, v)) return false;
    for (int e = 0; e < p.actions.size(); ++e)
      for (int f = 0; f < p.actions.size(); ++f)
        if (p.actions.related(a, e, f) && !p.actions.related(b, e, f)) return false;
    return true;
  };
  auto order = p.vocab.team_members(Team::Exists);
  auto pair_counts = [&](int a) {
    std::size_t event_pairs = 0;
    for (int e = 0; e < p.actions.size(); ++e)
      for (int f = 0; f < p.actions.size(); ++f) event_pairs += p.actions.related(a, e, f);
    return std::pair{p.model.relation_pairs(a).size(), event_pairs};
  };
  // Inclusion implies both counts grow; equal counts plus inclusion mean equality.
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return pair_counts(a) < pair_counts(b); });
  for (std::size_t i = 0; i + 1 < order.size(); ++i)
    if (!included(order[i], order[i + 1])) return std::nullopt;
  return order;
}

}  // namespace delgames

#endif
