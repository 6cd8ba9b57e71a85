#ifndef DELGAMES_SOLVE_HPP
#define DELGAMES_SOLVE_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "delgames/arena.hpp"
#include "delgames/common.hpp"
#include "delgames/del.hpp"
#include "delgames/fold.hpp"
#include "delgames/formula.hpp"
#include "delgames/kripke.hpp"
#include "delgames/ltlk.hpp"
#include "delgames/oracle.hpp"
#include "delgames/strategy.hpp"

namespace delgames {

// ---------------------------------------------------------------------------
// Epistemic reachability and safety on finite public arenas.

struct ReachSafeObjective {
  bool reach = true;  // F target, else G target
  FormulaPtr target;
};

/// Recognizes F φ and G φ with φ epistemic.
inline std::optional<ReachSafeObjective> match_reach_safe(const FormulaPtr& phi) {
  if (phi->op == Op::Until && phi->lhs->op == Op::True && classify(phi->rhs) <= Fragment::EL)
    return ReachSafeObjective{true, phi->rhs};
  if (phi->op == Op::Not && phi->lhs->op == Op::Until && phi->lhs->lhs->op == Op::True &&
      phi->lhs->rhs->op == Op::Not && classify(phi->lhs->rhs->lhs) <= Fragment::EL)
    return ReachSafeObjective{false, phi->lhs->rhs->lhs};
  return std::nullopt;
}

struct ReachSafeOptions {
  /// Allow several initial positions, reading them with perfect information.
  bool accept_perfect_info = false;
};

namespace detail {

inline SolveResult solve_reach_safe_goal(const GameArena& g, const std::vector<Team>& teams, bool reach,
                                         const std::vector<char>& goal, const std::vector<int>& init) {
  const int n = g.size();
  auto exists_turn = [&](int v) { return teams[g.turn[v]] == Team::Exists; };
  auto moves = [&](int v) { return g.is_frontier(v) ? std::vector<int>{} : g.enabled(v); };

  // Attractor of `target` for the team that owns `mine` positions.
  auto attractor = [&](std::vector<char> in, bool for_exists, std::map<int, int>& witness) {
    for (bool changed = true; changed;) {
      changed = false;
      for (int v = 0; v < n; ++v) {
        if (in[v]) continue;
        auto acts = moves(v);
        if (acts.empty()) continue;
        bool mine = exists_turn(v) == for_exists;
        bool enter = !mine;
        for (int c : acts) {
          bool hit = in[g.trans[v][c]];
          if (mine && hit) {
            witness[v] = c;
            enter = true;
            break;
          }
          if (!mine && !hit) enter = false;
        }
        if (enter) in[v] = changed = true;
      }
    }
    return in;
  };

  std::map<int, int> exists_moves, forall_moves;
  std::vector<char> win(n);
  if (reach) {
    win = attractor(goal, true, exists_moves);
    // Outside the attractor, the universal team can always stay outside.
    for (int v = 0; v < n; ++v)
      if (!win[v] && !exists_turn(v))
        for (int c : moves(v))
          if (!win[g.trans[v][c]]) {
            forall_moves[v] = c;
            break;
          }
  } else {
    std::vector<char> bad(n);
    for (int v = 0; v < n; ++v) bad[v] = !goal[v];
    auto lose = attractor(bad, false, forall_moves);
    for (int v = 0; v < n; ++v) win[v] = !lose[v];
    for (int v = 0; v < n; ++v)
      if (win[v] && exists_turn(v))
        for (int c : moves(v))
          if (win[g.trans[v][c]]) {
            exists_moves[v] = c;
            break;
          }
  }

  const bool all_win = std::all_of(init.begin(), init.end(), [&](int v) { return win[v]; });
  if (all_win) {
    StrategyTree s;
    s.positional = exists_moves;
    s.depth = n;
    // Lift to histories from the initial positions.
    std::function<void(History&)> lift = [&](History& h) {
      int v = h.back();
      if ((reach && goal[v]) || static_cast<int>(h.size()) > n) return;
      auto acts = moves(v);
      if (exists_turn(v)) {
        auto it = exists_moves.find(v);
        if (it == exists_moves.end()) return;
        s.set(g.turn[v], h, it->second);
        acts = {it->second};
      }
      for (int c : acts) {
        h.push_back(g.trans[v][c]);
        lift(h);
        h.pop_back();
      }
    };
    for (int v : init) {
      History h{v};
      lift(h);
    }
    return {Verdict::win(), std::move(s), std::nullopt};
  }

  Certificate cert;
  cert.counter_strategy = forall_moves;
  int start = *std::find_if(init.begin(), init.end(), [&](int v) { return !win[v]; });
  // Simulate the counter-strategy against the lowest existential choices.
  History path;
  std::map<int, int> seen;
  int v = start;
  while (!seen.count(v)) {
    seen[v] = static_cast<int>(path.size());
    path.push_back(v);
    auto acts = moves(v);
    if (acts.empty()) break;
    int c = acts.front();
    if (auto it = forall_moves.find(v); it != forall_moves.end()) c = it->second;
    v = g.trans[v][c];
  }
  LassoPlay play;
  if (seen.count(v) && !moves(path.back()).empty()) {
    int loop_at = seen[v];
    play.stem.assign(path.begin(), path.begin() + loop_at);
    play.loop.assign(path.begin() + loop_at, path.end());
  } else {
    play.stem.assign(path.begin(), path.end() - 1);
    play.loop = {path.back()};
  }
  cert.play = play;
  cert.description = "initial position " + (g.names.empty() ? std::to_string(start) : g.names[start]) +
                     (reach ? " is outside the reachability attractor" : " is in the adversary's attractor");
  if (auto it = forall_moves.find(start); it != forall_moves.end())
    cert.description += "; escaping action " + g.action_names[it->second];
  return {Verdict::lose(), std::nullopt, std::move(cert)};
}

inline void check_reach_safe_pre(const GameArena& g, const std::vector<int>& init, const ReachSafeOptions& opt) {
  if (auto w = arena_public_witness(g))
    throw PreconditionError("not a public-action arena: agent " + std::to_string(w->agent) +
                            " confuses the targets of actions " + g.action_names[w->action1] + " and " +
                            g.action_names[w->action2]);
  if (init.size() != 1 && !opt.accept_perfect_info)
    throw PreconditionError("several initial positions; pass the perfect-information flag to accept them");
}

}  // namespace detail

/// Attractor (F) or safety (G) solving; epistemic targets are evaluated on
/// the arena's own relations.
inline SolveResult solve_reach_safe(const GameArena& g, const std::vector<Team>& teams, const FormulaPtr& objective,
                                    const std::vector<int>& init, const ReachSafeOptions& opt = {}) {
  auto obj = match_reach_safe(objective);
  if (!obj) throw PreconditionError("objective must be F phi or G phi with phi epistemic");
  detail::check_reach_safe_pre(g, init, opt);
  auto goal = eval_el_all(arena_as_model(g), obj->target);
  return detail::solve_reach_safe_goal(g, teams, obj->reach, goal, init);
}

/// Same on a folded arena; targets are evaluated on each position's
/// representative attached model when one is recorded.
inline SolveResult solve_reach_safe(const FoldedArena& f, const std::vector<Team>& teams,
                                    const FormulaPtr& objective, const std::vector<int>& init,
                                    const ReachSafeOptions& opt = {}) {
  auto obj = match_reach_safe(objective);
  if (!obj) throw PreconditionError("objective must be F phi or G phi with phi epistemic");
  detail::check_reach_safe_pre(f.arena, init, opt);
  auto goal = eval_el_all(arena_as_model(f.arena), obj->target);
  for (int v = 0; v < f.arena.size(); ++v)
    if (const auto& rep = f.provenance.at(v).representative) goal[v] = eval_el(rep->model, rep->point, obj->target);
  return detail::solve_reach_safe_goal(f.arena, teams, obj->reach, goal, init);
}

// ---------------------------------------------------------------------------
// Public announcements.

inline bool is_announcement(const ActionModel& a, int e) { return classify_actions(a).announcement.at(e); }

/// Whether announcing `e` at `s` removes a world.
inline bool informative(const PointedModel& s, const ActionModel& a, int e) {
  if (!is_announcement(a, e)) throw PreconditionError("event '" + a.names.at(e) + "' is not an announcement");
  auto pre = eval_el_all(s.model, a.pre[e]);
  if (!pre[s.point]) throw PreconditionError("event '" + a.names[e] + "' is not executable here");
  return std::find(pre.begin(), pre.end(), 0) != pre.end();
}

namespace detail {

inline void check_announcement_game(const Presentation& p) {
  auto types = classify_actions(p.actions);
  for (int e = 0; e < p.actions.size(); ++e)
    if (!types.announcement[e]) throw PreconditionError("event '" + p.actions.names[e] + "' is not an announcement");
  if (p.init.size() != 1) throw PreconditionError("announcement games need a unique initial world");
}

inline int next_turn(int turn, int agents) { return (turn + 1) % agents; }

}  // namespace detail

struct AnnouncementOptions {
  /// Disable the early leaf after a full round of non-informative moves.
  bool strict = false;
};

/// Depth-first minmax over attached models for announcement games with
/// round-robin turns.
inline SolveResult solve_announcement(const Presentation& p, const FormulaPtr& phi,
                                      const AnnouncementOptions& opt = {}) {
  detail::check_announcement_game(p);
  if (classify(phi) > Fragment::NoNextNoKTemporal)
    throw PreconditionError("objective uses X or a temporal operator under K");
  const int agents = p.num_agents();
  const int max_depth = agents * p.model.size();
  LazyArena lazy(p);
  const int root = lazy.root(p.init[0]);

  std::map<std::pair<int, const Formula*>, bool> state_memo;
  auto state_value = [&](int node, const FormulaPtr& f) {
    auto key = std::pair{node, f.get()};
    if (auto it = state_memo.find(key); it != state_memo.end()) return it->second;
    const auto& s = lazy.attached(node);
    return state_memo[key] = eval_el(s.model, s.point, f);
  };
  auto leaf_value = [&](const std::vector<int>& path) {
    const int n = static_cast<int>(path.size());
    auto v = eval_lasso_word(phi, n, n - 1, [&](const FormulaPtr& f, int k) { return state_value(path[k], f); });
    return static_cast<bool>(v[0]);
  };

  using Choices = std::map<std::vector<int>, std::pair<int, int>>;  // trail -> (agent, event)
  std::vector<int> path{root};
  std::vector<int> losing;
  std::function<bool(int, int, Choices&)> search = [&](int depth, int silent, Choices& rec) -> bool {
    const int node = path.back();
    const auto& s = lazy.attached(node);
    const int owner = s.model.turn[s.point];
    std::vector<std::pair<int, int>> children;
    for (int e = 0; e < p.actions.size(); ++e)
      if (auto child = lazy.expand(node, e)) children.emplace_back(e, *child);
    const bool leaf = depth >= max_depth || (!opt.strict && silent >= agents) || children.empty();
    if (leaf) {
      bool v = leaf_value(path);
      if (!v) losing = path;
      return v;
    }
    for (auto [e, child] : children)
      if (p.actions.turn_after[e] != detail::next_turn(owner, agents))
        throw PreconditionError("turns are not round-robin: '" + p.actions.names[e] + "' after agent " +
                                p.vocab.agents[owner]);
    const bool exists = p.vocab.teams[owner] == Team::Exists;
    const int size = s.model.size();
    Choices local;
    std::vector<int> first_losing;
    for (auto [e, child] : children) {
      bool inf = lazy.attached(child).model.size() < size;
      path.push_back(child);
      Choices sub;
      bool v = search(depth + 1, inf ? 0 : silent + 1, sub);
      path.pop_back();
      if (exists && v) {
        rec.insert(sub.begin(), sub.end());
        rec[lazy.trail(node)] = {owner, e};
        return true;
      }
      if (!exists && !v) return false;
      if (!v && first_losing.empty()) first_losing = losing;
      local.insert(sub.begin(), sub.end());
    }
    if (exists) {
      losing = first_losing;
      return false;
    }
    rec.insert(local.begin(), local.end());
    return true;
  };

  Choices rec;
  if (search(0, 0, rec)) {
    StrategyTree st;
    st.depth = max_depth;
    for (const auto& [trail, choice] : rec) st.set(choice.first, trail, choice.second);
    return {Verdict::win(), std::move(st), std::nullopt};
  }
  Certificate cert;
  LassoPlay play;
  play.stem.assign(losing.begin(), losing.end() - 1);
  play.loop = {losing.back()};
  cert.play = play;
  cert.description = "losing branch " + format_trail(p, lazy.trail(losing.back())) + " repeated forever";
  return {Verdict::lose(), std::nullopt, std::move(cert)};
}

// ---------------------------------------------------------------------------
// Eager strategies.

namespace detail {

class Eagerizer {
 public:
  Eagerizer(const StrategyTree& sigma, const Presentation& p) : sigma_(sigma), p_(p), lazy_(p) {}

  int action(const std::vector<int>& h) {
    auto [base, k] = look_base(h);
    return sigma_move(target(base, k, owner(h)));
  }

  int owner(const std::vector<int>& trail) {
    const auto& s = lazy_.attached(node(trail));
    return s.model.turn[s.point];
  }
  bool exists(int agent) const { return p_.vocab.teams[agent] == Team::Exists; }
  int size(const std::vector<int>& trail) { return lazy_.attached(node(trail)).model.size(); }
  std::vector<int> executable_events(const std::vector<int>& trail) {
    std::vector<int> out;
    int n = node(trail);
    for (int e = 0; e < p_.actions.size(); ++e)
      if (lazy_.expand(n, e)) out.push_back(e);
    return out;
  }

 private:
  static int moves(const std::vector<int>& trail) { return static_cast<int>(trail.size()) - 1; }

  int node(const std::vector<int>& trail) {
    auto n = lazy_.follow(trail);
    if (!n) throw InternalInvariantError("history is not executable");
    return *n;
  }

  bool informative_at(const std::vector<int>& trail, int e) {
    auto next = trail;
    next.push_back(e);
    return size(next) < size(trail);
  }

  std::optional<int> lowest_silent(const std::vector<int>& trail) {
    for (int e : executable_events(trail))
      if (!informative_at(trail, e)) return e;
    return std::nullopt;
  }

  int sigma_move(const std::vector<int>& trail) {
    if (moves(trail) > sigma_.depth) throw PreconditionError("look-ahead needs a history beyond the strategy depth");
    auto e = sigma_.at(owner(trail), trail);
    if (!e) throw PreconditionError("strategy undefined at " + format_trail(p_, trail));
    return *e;
  }

  // Least extension of L inside its current state reaching a position of
  // `agent` where sigma announces informatively.
  std::optional<std::vector<int>> scan(std::vector<int> cur, int agent) {
    while (moves(cur) <= sigma_.depth) {
      int o = owner(cur);
      if (exists(o)) {
        auto e = sigma_.at(o, cur);
        if (!e) return std::nullopt;
        if (informative_at(cur, *e)) return o == agent ? std::optional{cur} : std::nullopt;
        cur.push_back(*e);
      } else {
        auto e = lowest_silent(cur);
        if (!e) return std::nullopt;
        cur.push_back(*e);
      }
    }
    return std::nullopt;
  }

  // L extended by k-1 silent moves following sigma (adversary: lowest silent).
  std::vector<int> extend(std::vector<int> cur, int k) {
    for (int i = 1; i < k; ++i) {
      int o = owner(cur);
      std::optional<int> e = exists(o) ? std::optional{sigma_move(cur)} : lowest_silent(cur);
      if (!e || informative_at(cur, *e)) throw InternalInvariantError("look-ahead left its state");
      cur.push_back(*e);
    }
    return cur;
  }

  std::vector<int> target(const std::vector<int>& base, int k, int agent) {
    if (exists(agent))
      if (auto found = scan(base, agent)) return *found;
    return extend(base, k);
  }

  // Look-ahead of every completed block of h, followed by the first position
  // of h's last block; and the length k of that block.
  std::pair<std::vector<int>, int> look_base(const std::vector<int>& h) {
    std::vector<int> L{h[0]};
    std::vector<int> prefix{h[0]};
    int k = 1;
    for (std::size_t i = 1; i < h.size(); ++i) {
      int e = h[i];
      bool inf = informative_at(prefix, e);
      if (inf) {
        L = target(L, k, owner(prefix));
        L.push_back(e);
        k = 1;
      } else {
        ++k;
      }
      prefix.push_back(e);
    }
    return {L, k};
  }

  const StrategyTree& sigma_;
  const Presentation& p_;
  LazyArena lazy_;
};

}  // namespace detail

/// Eager version of `sigma` on every history up to `depth` moves: each
/// existential agent plays what sigma plays at the look-ahead history.
inline StrategyTree eagerize(const StrategyTree& sigma, const Presentation& p, int depth) {
  detail::check_announcement_game(p);
  detail::Eagerizer eager(sigma, p);
  StrategyTree out;
  out.depth = depth;
  std::function<void(std::vector<int>&)> walk = [&](std::vector<int>& h) {
    if (static_cast<int>(h.size()) - 1 >= depth) return;
    int o = eager.owner(h);
    std::vector<int> acts;
    if (eager.exists(o)) {
      int a = eager.action(h);
      out.set(o, h, a);
      acts = {a};
    } else {
      acts = eager.executable_events(h);
    }
    for (int e : acts) {
      h.push_back(e);
      walk(h);
      h.pop_back();
    }
  };
  std::vector<int> h{p.init[0]};
  walk(h);
  return out;
}

/// Outcomes of an announcement-game strategy as trails of `depth` moves.
inline std::vector<std::vector<int>> strategy_outcomes(const StrategyTree& s, const Presentation& p, int depth) {
  LazyArena lazy(p);
  std::vector<std::vector<int>> out;
  std::function<void(std::vector<int>&, int)> walk = [&](std::vector<int>& h, int node) {
    if (static_cast<int>(h.size()) - 1 >= depth) {
      out.push_back(h);
      return;
    }
    const auto& st = lazy.attached(node);
    int o = st.model.turn[st.point];
    std::vector<int> acts;
    if (p.vocab.teams[o] == Team::Exists) {
      auto a = s.at(o, h);
      if (!a) throw PreconditionError("strategy undefined at " + format_trail(p, h));
      acts = {*a};
    } else {
      for (int e = 0; e < p.actions.size(); ++e) acts.push_back(e);
    }
    bool any = false;
    for (int e : acts)
      if (auto child = lazy.expand(node, e)) {
        any = true;
        h.push_back(e);
        walk(h, *child);
        h.pop_back();
      }
    if (!any) out.push_back(h);
  };
  std::vector<int> h{p.init.at(0)};
  walk(h, lazy.root(p.init[0]));
  return out;
}

}  // namespace delgames

#endif
