#ifndef DELGAMES_ARENA_HPP
#define DELGAMES_ARENA_HPP

#include <algorithm>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "delgames/common.hpp"
#include "delgames/del.hpp"
#include "delgames/kripke.hpp"

namespace delgames {

/// Turn-based game arena with imperfect information. trans[v][c] is the
/// successor of v under action c, or -1. Frontier positions (cut-off points
/// of a bounded construction) are the only ones allowed to have no action.
struct GameArena {
  int num_agents = 0;
  int num_actions = 0;
  std::vector<std::string> action_names;
  std::vector<int> init;
  std::vector<std::vector<int>> trans;
  std::vector<int> turn;
  std::vector<std::vector<int>> classes;
  std::vector<AtomSet> valuation;
  std::vector<char> frontier;
  std::vector<std::string> names;

  int size() const { return static_cast<int>(trans.size()); }
  int succ(int v, int c) const { return trans[v][c]; }
  bool related(int agent, int v, int w) const { return classes[agent][v] == classes[agent][w]; }
  bool is_frontier(int v) const { return !frontier.empty() && frontier[v]; }

  std::vector<int> enabled(int v) const {
    std::vector<int> out;
    for (int c = 0; c < num_actions; ++c)
      if (trans[v][c] >= 0) out.push_back(c);
    return out;
  }

  /// Appends a position and returns its index.
  int add_position(int turn_owner, AtomSet val, std::string name = {}) {
    trans.emplace_back(num_actions, -1);
    turn.push_back(turn_owner);
    valuation.push_back(val);
    frontier.push_back(0);
    names.push_back(std::move(name));
    return size() - 1;
  }
};

using History = std::vector<int>;

/// First violated well-formedness condition, if any.
inline std::optional<std::string> check_arena(const GameArena& g) {
  if (g.size() == 0) return "arena has no position";
  if (g.init.empty()) return "arena has no initial position";
  for (int v = 0; v < g.size(); ++v) {
    if (!g.is_frontier(v) && g.enabled(v).empty()) return "position " + std::to_string(v) + " has no action";
    for (int a = 0; a < g.num_agents; ++a)
      for (int w = 0; w < g.size(); ++w) {
        if (!g.related(a, v, w)) continue;
        if (g.turn[v] != g.turn[w]) return "related positions with different turn owners";
        if (g.turn[v] == a && !g.is_frontier(v) && !g.is_frontier(w) && g.enabled(v) != g.enabled(w))
          return "turn owner confuses positions with different available actions";
      }
  }
  return std::nullopt;
}

/// Synchronous perfect-recall lifting of an agent's relation.
inline bool lift_equiv(const GameArena& g, const History& h1, const History& h2, int agent) {
  if (h1.size() != h2.size()) return false;
  for (std::size_t i = 0; i < h1.size(); ++i)
    if (!g.related(agent, h1[i], h2[i])) return false;
  return true;
}

/// Checks that consecutive positions are linked by some action.
inline bool is_history(const GameArena& g, const History& h) {
  if (h.empty()) return false;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    bool linked = false;
    for (int c = 0; c < g.num_actions && !linked; ++c) linked = g.trans[h[i]][c] == h[i + 1];
    if (!linked) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Unfolding.

struct UnfoldedArena {
  GameArena arena;
  std::vector<History> histories;  // history of each position
};

/// Tree of histories rooted at the initial positions, with at most `depth`
/// moves. Relations are the perfect-recall lifting; the last level is the
/// frontier.
inline UnfoldedArena unfold(const GameArena& g, int depth) {
  UnfoldedArena out;
  auto& u = out.arena;
  u.num_agents = g.num_agents;
  u.num_actions = g.num_actions;
  u.action_names = g.action_names;
  u.classes.assign(g.num_agents, {});
  std::map<std::pair<int, std::vector<int>>, int> label_ids;  // (agent, class sequence) -> label
  auto add = [&](History h) {
    int last = h.back();
    int id = u.add_position(g.turn[last], g.valuation[last], g.names.empty() ? std::string{} : g.names[last]);
    for (int a = 0; a < g.num_agents; ++a) {
      std::vector<int> seq;
      for (int v : h) seq.push_back(g.classes[a][v]);
      auto [it, fresh] = label_ids.try_emplace({a, seq}, static_cast<int>(label_ids.size()));
      u.classes[a].push_back(it->second);
    }
    out.histories.push_back(std::move(h));
    return id;
  };
  std::vector<int> level;
  for (int v : g.init) {
    int id = add({v});
    u.init.push_back(id);
    level.push_back(id);
  }
  for (int d = 0; d < depth; ++d) {
    std::vector<int> next;
    for (int id : level) {
      int last = out.histories[id].back();
      if (g.is_frontier(last)) {
        u.frontier[id] = 1;
        continue;
      }
      for (int c = 0; c < g.num_actions; ++c) {
        int t = g.trans[last][c];
        if (t < 0) continue;
        History h = out.histories[id];
        h.push_back(t);
        int child = add(std::move(h));
        u.trans[id][c] = child;
        next.push_back(child);
      }
    }
    level = std::move(next);
  }
  for (int id : level) u.frontier[id] = 1;
  for (auto& cls : u.classes) cls = normalize_labels(cls);
  return out;
}

// ---------------------------------------------------------------------------
// Arena induced by a presentation.

struct MaterializedArena {
  GameArena arena;
  std::vector<std::vector<int>> trails;  // (root world, events...) of each position
};

/// Explicit prefix (up to `depth` moves) of the arena induced by `p`. It
/// contains every history rooted in the connected components of the initial
/// worlds, so knowledge can range over histories from non-initial worlds.
inline MaterializedArena materialize(const Presentation& p, int depth, int max_positions = 2000000) {
  std::vector<int> keep;
  for (int w : p.init) {
    auto comp = component_worlds(p.model, w);
    keep.insert(keep.end(), comp.begin(), comp.end());
  }
  auto base = restrict(p.model, keep);
  auto levels = product_levels(base, p.actions, depth, max_positions);
  if (static_cast<int>(levels.size()) <= depth)
    throw PreconditionError("arena prefix exceeds the position budget at depth " + std::to_string(levels.size()));
  MaterializedArena out;
  auto& g = out.arena;
  g.num_agents = p.num_agents();
  g.num_actions = p.actions.size();
  g.action_names = p.actions.names;
  g.classes.assign(g.num_agents, {});
  std::map<std::vector<int>, int> by_trail;
  int label_base = 0;
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const auto& m = levels[n];
    int top = 0;
    for (int x = 0; x < m.size(); ++x) {
      int id = g.add_position(m.turn[x], m.valuation[x], format_trail(p, m.trail[x]));
      g.frontier[id] = n + 1 == levels.size();
      for (int a = 0; a < g.num_agents; ++a) {
        g.classes[a].push_back(label_base + m.classes[a][x]);
        top = std::max(top, m.classes[a][x] + 1);
      }
      by_trail[m.trail[x]] = id;
      out.trails.push_back(m.trail[x]);
      if (n == 0 && std::binary_search(p.init.begin(), p.init.end(), m.trail[x][0])) g.init.push_back(id);
      if (n > 0) {
        auto parent = m.trail[x];
        int e = parent.back();
        parent.pop_back();
        g.trans[by_trail.at(parent)][e] = id;
      }
    }
    label_base += top;
  }
  for (auto& cls : g.classes) cls = normalize_labels(cls);
  return out;
}

/// Arena of histories over a presentation, expanded on demand. Each node keeps
/// its attached model: the connected component of the iterated product that
/// contains it. Expansion is serialized by an internal lock.
class LazyArena {
 public:
  explicit LazyArena(Presentation p) : p_(std::move(p)) {}

  const Presentation& presentation() const { return p_; }

  int root(int world) {
    std::lock_guard lock(mu_);
    std::vector<int> trail{world};
    if (auto it = index_.find(trail); it != index_.end()) return it->second;
    return insert(trail, connected_component(p_.model, world));
  }

  /// Successor of `node` under `event`, or nullopt when the precondition fails.
  std::optional<int> expand(int node, int event) {
    std::lock_guard lock(mu_);
    Node& n = nodes_.at(node);
    if (n.children[event] == kUnexpanded) {
      const auto& att = n.attached;
      if (!executable(att.model, att.point, p_.actions, event)) {
        n.children[event] = kAbsent;
      } else {
        if (!n.successor_model) n.successor_model = product(att.model, p_.actions);
        const auto& next = *n.successor_model;
        auto trail = att.model.trail[att.point];
        trail.push_back(event);
        int idx = 0;
        while (next.trail[idx] != trail) ++idx;
        int child = insert(trail, connected_component(next, idx));
        nodes_[node].children[event] = child;
      }
    }
    int c = nodes_[node].children[event];
    if (c == kAbsent) return std::nullopt;
    return c;
  }

  const PointedModel& attached(int node) const {
    std::lock_guard lock(mu_);
    return nodes_.at(node).attached;
  }
  const std::vector<int>& trail(int node) const {
    std::lock_guard lock(mu_);
    return nodes_.at(node).trail;
  }
  int depth(int node) const { return static_cast<int>(trail(node).size()) - 1; }
  int size() const {
    std::lock_guard lock(mu_);
    return static_cast<int>(nodes_.size());
  }

  /// Node for a trail (root world, events...), expanding along the way.
  std::optional<int> follow(const std::vector<int>& trail) {
    int node = root(trail.at(0));
    for (std::size_t i = 1; i < trail.size(); ++i) {
      auto next = expand(node, trail[i]);
      if (!next) return std::nullopt;
      node = *next;
    }
    return node;
  }

  MaterializedArena materialize(int depth) const { return delgames::materialize(p_, depth); }

 private:
  static constexpr int kUnexpanded = -2;
  static constexpr int kAbsent = -1;

  struct Node {
    std::vector<int> trail;
    PointedModel attached;
    std::vector<int> children;
    std::optional<EpistemicModel> successor_model;
  };

  int insert(const std::vector<int>& trail, PointedModel attached) {
    nodes_.push_back(Node{trail, std::move(attached), std::vector<int>(p_.actions.size(), kUnexpanded), {}});
    int id = static_cast<int>(nodes_.size()) - 1;
    index_[trail] = id;
    return id;
  }

  Presentation p_;
  mutable std::mutex mu_;
  std::deque<Node> nodes_;
  std::map<std::vector<int>, int> index_;
};

// ---------------------------------------------------------------------------
// Arena-level checks and transformations.

struct PublicWitness {
  int source1, action1, source2, action2, agent;
};

/// nullopt when the arena has only public actions: no agent relates the
/// targets of two transitions labelled by different actions.
inline std::optional<PublicWitness> arena_public_witness(const GameArena& g) {
  // For every (agent, class), the first action seen entering it.
  for (int a = 0; a < g.num_agents; ++a) {
    std::map<int, std::pair<int, int>> first_entry;  // class -> (source, action)
    for (int v = 0; v < g.size(); ++v)
      for (int c = 0; c < g.num_actions; ++c) {
        int t = g.trans[v][c];
        if (t < 0) continue;
        auto [it, fresh] = first_entry.try_emplace(g.classes[a][t], v, c);
        if (!fresh && it->second.second != c) return PublicWitness{it->second.first, it->second.second, v, c, a};
      }
  }
  return std::nullopt;
}

inline bool arena_public(const GameArena& g) { return !arena_public_witness(g).has_value(); }

/// Adds a fresh initial position with one fresh action to each old initial
/// position. The fresh position is owned by `fresh_owner`, observed as a
/// singleton by every agent, and has the empty valuation; formulas are
/// evaluated from index 1 on the result.
inline GameArena reduce_multi_init(const GameArena& g, int fresh_owner = 0) {
  GameArena out = g;
  const int k = static_cast<int>(g.init.size());
  out.num_actions = g.num_actions + k;
  for (int i = 0; i < k; ++i) out.action_names.push_back("init" + std::to_string(i));
  for (auto& row : out.trans) row.resize(out.num_actions, -1);
  int fresh = out.add_position(fresh_owner, 0, "init");
  for (int a = 0; a < out.num_agents; ++a) {
    int label = out.classes[a].empty() ? 0 : *std::max_element(out.classes[a].begin(), out.classes[a].end()) + 1;
    out.classes[a].push_back(label);
  }
  for (int i = 0; i < k; ++i) out.trans[fresh][g.num_actions + i] = g.init[i];
  out.init = {fresh};
  return out;
}

// ---------------------------------------------------------------------------
// DOT export.

inline void write_dot(std::ostream& os, const GameArena& g, const Vocabulary& voc) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '\n') {
        out += "\\n";
        continue;
      }
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  auto name = [&](int v) {
    return static_cast<int>(g.names.size()) > v && !g.names[v].empty() ? g.names[v] : "v" + std::to_string(v);
  };
  os << "digraph arena {\n  node [shape=circle];\n";
  for (int v = 0; v < g.size(); ++v) {
    bool initial = std::find(g.init.begin(), g.init.end(), v) != g.init.end();
    os << "  p" << v << " [label=" << quote(name(v) + "\n" + voc.format_atoms(g.valuation[v]) + "\nturn=" + voc.agents.at(g.turn[v]));
    if (initial) os << ", shape=doublecircle";
    os << "];\n";
  }
  for (int v = 0; v < g.size(); ++v)
    for (int c = 0; c < g.num_actions; ++c)
      if (int t = g.trans[v][c]; t >= 0) {
        std::string label = c < static_cast<int>(g.action_names.size()) ? g.action_names[c] : std::to_string(c);
        os << "  p" << v << " -> p" << t << " [label=" << quote(label) << "];\n";
      }
  for (int a = 0; a < g.num_agents; ++a)
    for (int v = 0; v < g.size(); ++v)
      for (int w = v + 1; w < g.size(); ++w)
        if (g.related(a, v, w))
          os << "  p" << v << " -> p" << w << " [style=dashed, dir=none, label=" << quote(voc.agents.at(a)) << "];\n";
  os << "}\n";
}

}  // namespace delgames

#endif
