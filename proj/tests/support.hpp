#ifndef DELGAMES_TESTS_SUPPORT_HPP
#define DELGAMES_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "delgames.hpp"

namespace testing_support {

using namespace delgames;

inline int uniform(std::mt19937& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool coin(std::mt19937& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

inline FormulaPtr random_prop(std::mt19937& rng, int atoms, int depth) {
  if (depth == 0 || coin(rng, 0.35)) return coin(rng, 0.15) ? make_true() : make_atom(uniform(rng, 0, atoms - 1));
  switch (uniform(rng, 0, 2)) {
    case 0: return make_not(random_prop(rng, atoms, depth - 1));
    case 1: return make_or(random_prop(rng, atoms, depth - 1), random_prop(rng, atoms, depth - 1));
    default: return make_and(random_prop(rng, atoms, depth - 1), random_prop(rng, atoms, depth - 1));
  }
}

inline FormulaPtr random_el(std::mt19937& rng, int agents, int atoms, int depth) {
  if (depth == 0 || coin(rng, 0.3)) return coin(rng, 0.1) ? make_true() : make_atom(uniform(rng, 0, atoms - 1));
  switch (uniform(rng, 0, 3)) {
    case 0: return make_not(random_el(rng, agents, atoms, depth - 1));
    case 1: return make_or(random_el(rng, agents, atoms, depth - 1), random_el(rng, agents, atoms, depth - 1));
    case 2: return make_and(random_el(rng, agents, atoms, depth - 1), random_el(rng, agents, atoms, depth - 1));
    default: return make_know(uniform(rng, 0, agents - 1), random_el(rng, agents, atoms, depth - 1));
  }
}

/// Formula without X and without temporal operators under K, of at most
/// `max_size` nodes.
inline FormulaPtr random_fragment(std::mt19937& rng, int agents, int atoms, int max_size) {
  for (;;) {
    std::function<FormulaPtr(int)> gen = [&](int depth) -> FormulaPtr {
      if (depth == 0 || coin(rng, 0.25)) return random_el(rng, agents, atoms, 1);
      switch (uniform(rng, 0, 4)) {
        case 0: return make_finally(gen(depth - 1));
        case 1: return make_globally(gen(depth - 1));
        case 2: return make_until(gen(depth - 1), gen(depth - 1));
        case 3: return make_not(gen(depth - 1));
        default: return make_or(gen(depth - 1), gen(depth - 1));
      }
    };
    auto f = gen(3);
    if (size(f) <= max_size) return f;
  }
}

inline std::vector<int> random_partition(std::mt19937& rng, int n) {
  std::vector<int> labels(n);
  for (auto& l : labels) l = uniform(rng, 0, std::max(0, n - 1));
  return normalize_labels(labels);
}

enum class Kind { Propositional, Public, Announcement };

struct GenOptions {
  Kind kind = Kind::Propositional;
  int max_worlds = 3;
  int max_events = 3;
  int max_atoms = 2;
  int agents = 2;
  bool singleton_init = true;
};

/// Random presentation satisfying H1 and H2. For public and announcement
/// kinds, turns are round-robin and every event is owned by one agent whose
/// knowledge decides its precondition, so H3 holds and play never blocks.
inline Presentation random_presentation(std::mt19937& rng, const GenOptions& opt) {
  Presentation p;
  const char* names[] = {"a", "b", "c"};
  for (int i = 0; i < opt.agents; ++i) p.vocab.add_agent(names[i], i % 2 == 0 ? Team::Exists : Team::Forall);
  const int atoms = uniform(rng, 1, opt.max_atoms);
  for (int i = 0; i < atoms; ++i) p.vocab.add_atom(std::string(1, static_cast<char>('p' + i)));
  const int worlds = uniform(rng, 1, opt.max_worlds);
  const bool round_robin = opt.kind != Kind::Propositional;
  const int floor_events = round_robin ? opt.agents : 1;
  const int events = uniform(rng, floor_events, std::max(floor_events, opt.max_events));

  p.model.num_agents = opt.agents;
  for (int w = 0; w < worlds; ++w) {
    p.model.valuation.push_back(static_cast<AtomSet>(uniform(rng, 0, (1 << atoms) - 1)));
    p.model.turn.push_back(0);
    p.model.trail.push_back({w});
    p.world_names.push_back("w" + std::to_string(w));
  }
  for (int a = 0; a < opt.agents; ++a) p.model.classes.push_back(random_partition(rng, worlds));

  auto& act = p.actions;
  act.num_agents = opt.agents;
  for (int e = 0; e < events; ++e) {
    act.names.push_back("e" + std::to_string(e));
    std::map<int, FormulaPtr> post;
    FormulaPtr pre;
    if (round_robin) {
      int owner = e % opt.agents;
      act.turn_after.push_back((owner + 1) % opt.agents);
      pre = make_turn(owner);
      if (e >= opt.agents) pre = make_and(pre, make_know(owner, random_el(rng, opt.agents, atoms, 2)));
    } else {
      act.turn_after.push_back(0);
      pre = e == 0 ? make_true() : random_prop(rng, atoms, 2);
    }
    if (opt.kind != Kind::Announcement)
      for (int q = 0; q < atoms; ++q)
        if (coin(rng, 0.4)) post[q] = random_prop(rng, atoms, 1);
    act.pre.push_back(pre);
    act.post.push_back(post);
  }
  for (int a = 0; a < opt.agents; ++a) {
    if (round_robin) {
      std::vector<int> id(events);
      std::iota(id.begin(), id.end(), 0);
      act.classes.push_back(id);
    } else {
      act.classes.push_back(random_partition(rng, events));  // all turn_after agree, so H2 holds
    }
  }
  if (opt.singleton_init) {
    p.init = {uniform(rng, 0, worlds - 1)};
  } else {
    for (int w = 0; w < worlds; ++w)
      if (coin(rng)) p.init.push_back(w);
    if (p.init.empty()) p.init = {0};
  }
  return p;
}

// ---------------------------------------------------------------------------
// Running example: p true at w, false at v, neither agent knows; event e
// (pre p, sets p false) seen by a, confused by b with the trivial event f.

inline Presentation running_example() {
  Presentation p;
  p.vocab.add_agent("a", Team::Exists);
  p.vocab.add_agent("b", Team::Forall);
  p.vocab.add_atom("p");
  p.model = make_model(2, {1, 0}, {0, 0}, {{{0, 1}}, {{0, 1}}});
  p.world_names = {"w", "v"};
  p.actions = make_action_model(2, {"e", "f"}, {make_atom(0), make_true()}, {{{0, make_false()}}, {}}, {0, 0},
                                {{}, {{0, 1}}});
  p.init = {0};
  return p;
}

// ---------------------------------------------------------------------------
// Reference implementations used as oracles.

/// Truth of an epistemic formula at one world by direct recursion over the
/// relation pairs.
inline bool naive_el(const EpistemicModel& m, int w, const FormulaPtr& f) {
  switch (f->op) {
    case Op::True: return true;
    case Op::Atom: return has_atom(m.valuation[w], f->index);
    case Op::Turn: return m.turn[w] == f->index;
    case Op::Not: return !naive_el(m, w, f->lhs);
    case Op::Or: return naive_el(m, w, f->lhs) || naive_el(m, w, f->rhs);
    case Op::Know:
      for (auto [x, y] : m.relation_pairs(f->index))
        if (x == w && !naive_el(m, y, f->lhs)) return false;
      return true;
    default: throw std::logic_error("temporal operator");
  }
}

/// Pointed isomorphism by trying every permutation.
inline bool brute_isomorphic(const PointedModel& p1, const PointedModel& p2) {
  const auto& a = p1.model;
  const auto& b = p2.model;
  if (a.size() != b.size() || a.num_agents != b.num_agents) return false;
  std::vector<int> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    if (perm[p1.point] != p2.point) continue;
    bool ok = true;
    for (int w = 0; w < a.size() && ok; ++w)
      ok = a.valuation[w] == b.valuation[perm[w]] && a.turn[w] == b.turn[perm[w]];
    for (int ag = 0; ag < a.num_agents && ok; ++ag)
      for (int w = 0; w < a.size() && ok; ++w)
        for (int v = 0; v < a.size() && ok; ++v) ok = a.related(ag, w, v) == b.related(ag, perm[w], perm[v]);
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

/// Product computed world by world from the definition, as a map from
/// (world, event) to valuation and per-agent related pairs.
struct BruteProduct {
  std::map<std::pair<int, int>, AtomSet> valuation;
  std::set<std::tuple<int, std::pair<int, int>, std::pair<int, int>>> related;
};

inline BruteProduct brute_product(const EpistemicModel& m, const ActionModel& a) {
  BruteProduct out;
  for (int w = 0; w < m.size(); ++w)
    for (int e = 0; e < a.size(); ++e) {
      if (!naive_el(m, w, a.pre[e])) continue;
      AtomSet v = m.valuation[w];
      for (const auto& [q, f] : a.post[e]) v = naive_el(m, w, f) ? (v | (AtomSet{1} << q)) : (v & ~(AtomSet{1} << q));
      out.valuation[{w, e}] = v;
    }
  for (const auto& [x, vx] : out.valuation)
    for (const auto& [y, vy] : out.valuation)
      for (int ag = 0; ag < m.num_agents; ++ag)
        if (m.related(ag, x.first, y.first) && a.related(ag, x.second, y.second)) out.related.insert({ag, x, y});
  return out;
}

// ---------------------------------------------------------------------------
// Announcement-game strategies and the eager-strategy laws.

/// Deterministic pseudo-random strategy over trails: each history gets an
/// executable event picked by a hash of the history.
inline StrategyTree random_strategy(const Presentation& p, std::uint64_t seed, int depth) {
  auto lazy = std::make_shared<LazyArena>(p);
  const int events = p.actions.size();
  StrategyTree s;
  s.depth = depth;
  s.rule = [lazy, events, seed, depth](int, const std::vector<int>& h) -> std::optional<int> {
    if (static_cast<int>(h.size()) - 1 > depth) return std::nullopt;
    auto n = lazy->follow(h);
    if (!n) return std::nullopt;
    std::vector<int> ok;
    for (int e = 0; e < events; ++e)
      if (lazy->expand(*n, e)) ok.push_back(e);
    if (ok.empty()) return std::nullopt;
    std::uint64_t x = seed * 0x9e3779b97f4a7c15ULL + 1;
    for (int v : h) x = (x ^ static_cast<std::uint64_t>(v + 1)) * 1099511628211ULL;
    x ^= x >> 29;
    return ok[x % ok.size()];
  };
  return s;
}

/// Strategy that announces informatively whenever it can (lowest such
/// event), otherwise the lowest executable event.
inline StrategyTree greedy_strategy(const Presentation& p, int depth) {
  auto lazy = std::make_shared<LazyArena>(p);
  const int events = p.actions.size();
  StrategyTree s;
  s.depth = depth;
  s.rule = [lazy, events](int, const std::vector<int>& h) -> std::optional<int> {
    auto n = lazy->follow(h);
    if (!n) return std::nullopt;
    std::optional<int> silent;
    for (int e = 0; e < events; ++e)
      if (auto c = lazy->expand(*n, e)) {
        if (lazy->attached(*c).model.size() < lazy->attached(*n).model.size()) return e;
        if (!silent) silent = e;
      }
    return silent;
  };
  return s;
}

/// States (attached models with the turn ignored) along a trail.
inline std::vector<std::string> state_word(LazyArena& lazy, const std::vector<int>& trail) {
  std::vector<std::string> out;
  for (std::size_t k = 1; k <= trail.size(); ++k) {
    auto n = lazy.follow(std::vector<int>(trail.begin(), trail.begin() + static_cast<long>(k)));
    if (!n) throw std::logic_error("trail is not executable");
    out.push_back(canonical_form(lazy.attached(*n), true).bytes);
  }
  return out;
}

/// Why an outcome does not have the shape s1^k1 ... sn^kn s^w with
/// shrinking states and every completed run shorter than the number of
/// agents; nullopt when it does. With `existential_only`, only runs ended by
/// an existential agent's announcement are bounded, and by the number of
/// agents inclusive.
inline std::optional<std::string> eager_shape_violation(LazyArena& lazy, const std::vector<int>& trail,
                                                        bool existential_only = false) {
  const auto& p = lazy.presentation();
  const int agents = p.num_agents();
  auto word = state_word(lazy, trail);
  std::vector<int> sizes, owners;
  for (std::size_t k = 1; k <= trail.size(); ++k) {
    const auto& s = lazy.attached(*lazy.follow(std::vector<int>(trail.begin(), trail.begin() + static_cast<long>(k))));
    sizes.push_back(s.model.size());
    owners.push_back(s.model.turn[s.point]);
  }
  int run = 1;
  for (std::size_t k = 1; k < word.size(); ++k) {
    if (word[k] == word[k - 1]) {
      ++run;
      continue;
    }
    const bool by_exists = p.vocab.teams[owners[k - 1]] == Team::Exists;
    const bool too_long = existential_only ? by_exists && run > agents : run >= agents;
    if (too_long)
      return "a run of " + std::to_string(run) + " equal states ends at move " + std::to_string(k) + " by agent " +
             p.vocab.agents[owners[k - 1]];
    if (sizes[k] >= sizes[k - 1]) return "state size does not shrink at move " + std::to_string(k);
    run = 1;
  }
  return std::nullopt;
}

/// Whether some outcome in `pool` destutters to a word starting with the
/// destuttered word of `trail`.
inline bool has_stutter_related(LazyArena& lazy, const std::vector<int>& trail,
                                const std::vector<std::vector<int>>& pool) {
  auto target = destutter(state_word(lazy, trail));
  for (const auto& other : pool) {
    auto word = destutter(state_word(lazy, other));
    if (word.size() >= target.size() && std::equal(target.begin(), target.end(), word.begin())) return true;
  }
  return false;
}

}  // namespace testing_support

#endif
