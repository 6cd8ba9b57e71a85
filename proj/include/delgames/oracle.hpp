#ifndef DELGAMES_ORACLE_HPP
#define DELGAMES_ORACLE_HPP

#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "delgames/arena.hpp"
#include "delgames/common.hpp"
#include "delgames/ltlk.hpp"
#include "delgames/strategy.hpp"

namespace delgames {

struct OracleOptions {
  int horizon = 6;
  KScope k_scope = KScope::All;
  /// Strategies must agree on histories their agent cannot tell apart.
  bool uniform = true;
  /// Maximum number of search steps (and tree nodes).
  long long budget = 2000000;
};

/// Budget from DELGAMES_BUDGET, or `fallback`.
inline long long budget_from_env(long long fallback = 2000000) {
  if (const char* s = std::getenv("DELGAMES_BUDGET")) {
    char* end = nullptr;
    long long v = std::strtoll(s, &end, 10);
    if (end != s && v > 0) return v;
  }
  return fallback;
}

namespace detail {

struct BudgetExhausted {};

/// Exhaustive search for a team strategy over the outcome tree truncated at
/// `horizon` positions.
class OracleSearch {
 public:
  OracleSearch(const GameArena& g, const std::vector<Team>& teams, FormulaPtr phi, const OracleOptions& opt)
      : g_(g), teams_(teams), phi_(std::move(phi)), opt_(opt) {}

  SolveResult run(const std::vector<int>& init) {
    try {
      build(init);
      mode_ = Mode::Sure;
      if (solve_roots()) return win();
      mode_ = Mode::NotRefuted;
      assignment_.clear();
      trail_.clear();
      if (!solve_roots()) {
        SolveResult r{Verdict::lose(), std::nullopt, Certificate{}};
        r.certificate->description = "every strategy within the horizon has an outcome that falsifies the objective";
        return r;
      }
      return {Verdict::unknown(opt_.horizon), std::nullopt, std::nullopt};
    } catch (const BudgetExhausted&) {
      return {Verdict::unknown(opt_.horizon, true), std::nullopt, std::nullopt};
    }
  }

 private:
  enum class Mode { Sure, NotRefuted };

  struct Node {
    int parent = -1;
    int position = 0;
    int length = 1;
    std::vector<std::pair<int, int>> children;  // (action, node)
    int group = -1;
    int pre = 0, post = 0;
    std::optional<Tri> value;
  };

  void tick() {
    if (++steps_ > opt_.budget) throw BudgetExhausted{};
  }

  History history(int n) const {
    History h;
    for (; n >= 0; n = nodes_[n].parent) h.push_back(nodes_[n].position);
    return {h.rbegin(), h.rend()};
  }

  bool terminal(int n) const {
    const auto& node = nodes_[n];
    return node.length >= opt_.horizon || node.children.empty();
  }

  void build(const std::vector<int>& init) {
    std::map<std::pair<int, std::vector<int>>, int> group_ids;
    std::vector<int> stack;
    for (int v : init) {
      nodes_.push_back(Node{-1, v, 1, {}, -1, 0, 0, std::nullopt});
      roots_.push_back(static_cast<int>(nodes_.size()) - 1);
    }
    auto label_seq = [&](int n, int agent) {
      std::vector<int> seq;
      for (int k = n; k >= 0; k = nodes_[k].parent) seq.push_back(g_.classes[agent][nodes_[k].position]);
      return std::vector<int>(seq.rbegin(), seq.rend());
    };
    for (int r : roots_) stack.push_back(r);
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      tick();
      int v = nodes_[n].position;
      if (nodes_[n].length < opt_.horizon && !g_.is_frontier(v)) {
        for (int c : g_.enabled(v)) {
          nodes_.push_back(Node{n, g_.trans[v][c], nodes_[n].length + 1, {}, -1, 0, 0, std::nullopt});
          int child = static_cast<int>(nodes_.size()) - 1;
          nodes_[n].children.emplace_back(c, child);
          stack.push_back(child);
        }
      }
      int owner = g_.turn[v];
      if (teams_[owner] == Team::Exists && !nodes_[n].children.empty()) {
        auto key = opt_.uniform ? std::pair{owner, label_seq(n, owner)} : std::pair{-1, std::vector<int>{n}};
        auto [it, fresh] = group_ids.try_emplace(key, static_cast<int>(group_ids.size()));
        nodes_[n].group = it->second;
      }
    }
    // Pre/post order numbering to test whether a group stays inside a subtree.
    int counter = 0;
    std::vector<std::pair<int, bool>> walk;
    for (auto it = roots_.rbegin(); it != roots_.rend(); ++it) walk.emplace_back(*it, false);
    while (!walk.empty()) {
      auto [n, done] = walk.back();
      walk.pop_back();
      if (done) {
        nodes_[n].post = counter;
        continue;
      }
      nodes_[n].pre = counter++;
      walk.emplace_back(n, true);
      for (auto it = nodes_[n].children.rbegin(); it != nodes_[n].children.rend(); ++it)
        walk.emplace_back(it->second, false);
    }
    const std::size_t groups = group_ids.size();
    group_lo_.assign(groups, counter);
    group_hi_.assign(groups, -1);
    for (const auto& node : nodes_)
      if (node.group >= 0) {
        group_lo_[node.group] = std::min(group_lo_[node.group], node.pre);
        group_hi_[node.group] = std::max(group_hi_[node.group], node.pre);
      }
    // A subtree is closed when every group met inside it lies entirely inside.
    closed_.assign(nodes_.size(), 1);
    span_lo_.assign(nodes_.size(), 0);
    span_hi_.assign(nodes_.size(), 0);
    for (int n = static_cast<int>(nodes_.size()) - 1; n >= 0; --n) {
      auto& node = nodes_[n];
      bool ok = true;
      int lo = node.group >= 0 ? group_lo_[node.group] : node.pre;
      int hi = node.group >= 0 ? group_hi_[node.group] : node.pre;
      for (auto [c, child] : node.children) {
        ok = ok && closed_[child];
        lo = std::min(lo, span_lo_[child]);
        hi = std::max(hi, span_hi_[child]);
      }
      span_lo_[n] = lo;
      span_hi_[n] = hi;
      closed_[n] = ok && lo >= node.pre && hi < node.post;
    }
  }

  Tri value(int n) {
    auto& node = nodes_[n];
    if (!node.value) node.value = eval_ltlk_bounded(g_, history(n), 0, phi_, opt_.horizon, opt_.k_scope);
    return *node.value;
  }

  // Some(true/false) when node n is decided regardless of what follows.
  std::optional<bool> decided(int n) {
    Tri v = value(n);
    if (v == Tri::True) return true;
    if (v == Tri::False) return false;
    if (terminal(n)) return mode_ == Mode::NotRefuted;
    return std::nullopt;
  }

  bool solve_roots() {
    std::vector<int> pending(roots_.rbegin(), roots_.rend());
    return satisfy(pending);
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      assignment_.erase(trail_.back());
      trail_.pop_back();
    }
  }

  // Whether some extension of the current assignment satisfies every
  // pending node. Branches only at unassigned existential choices.
  bool satisfy(std::vector<int> pending) {
    while (!pending.empty()) {
      tick();
      int n = pending.back();
      pending.pop_back();
      if (auto d = decided(n)) {
        if (!*d) return false;
        continue;
      }
      if (closed_[n] && !pending.empty()) {
        // Independent of the rest: solve it alone and keep its assignments.
        if (!satisfy({n})) return false;
        continue;
      }
      const auto& node = nodes_[n];
      if (node.group < 0) {
        for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) pending.push_back(it->second);
        continue;
      }
      if (auto it = assignment_.find(node.group); it != assignment_.end()) {
        int chosen = -1;
        for (auto [c, child] : node.children)
          if (c == it->second) chosen = child;
        if (chosen < 0) return false;
        pending.push_back(chosen);
        continue;
      }
      for (auto [c, child] : node.children) {
        std::size_t mark = trail_.size();
        assignment_[node.group] = c;
        trail_.push_back(node.group);
        auto next = pending;
        next.push_back(child);
        if (satisfy(std::move(next))) return true;
        undo(mark);
      }
      return false;
    }
    return true;
  }

  SolveResult win() {
    StrategyTree s;
    s.depth = opt_.horizon - 1;
    std::vector<int> stack(roots_.begin(), roots_.end());
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      const auto& node = nodes_[n];
      if (decided(n).has_value()) continue;
      if (node.group < 0) {
        for (auto [c, child] : node.children) stack.push_back(child);
        continue;
      }
      auto it = assignment_.find(node.group);
      if (it == assignment_.end()) continue;
      s.set(g_.turn[node.position], history(n), it->second);
      for (auto [c, child] : node.children)
        if (c == it->second) stack.push_back(child);
    }
    return {Verdict::win(), std::move(s), std::nullopt};
  }

  const GameArena& g_;
  const std::vector<Team>& teams_;
  FormulaPtr phi_;
  OracleOptions opt_;
  Mode mode_ = Mode::Sure;
  long long steps_ = 0;
  std::vector<Node> nodes_;
  std::vector<int> roots_;
  std::vector<int> group_lo_, group_hi_;
  std::vector<int> span_lo_, span_hi_;
  std::vector<char> closed_;
  std::map<int, int> assignment_;
  std::vector<int> trail_;
};

}  // namespace detail

/// Bounded brute-force solver: searches team strategies (uniform unless
/// disabled) over histories of at most `horizon` positions. WIN when some
/// strategy makes the objective true on every outcome prefix, LOSE when every
/// strategy has an outcome that makes it false, UNKNOWN otherwise.
inline SolveResult oracle_solve(const GameArena& g, const std::vector<Team>& teams, const FormulaPtr& phi,
                                const std::vector<int>& init, const OracleOptions& opt = {}) {
  if (opt.horizon < 1) throw PreconditionError("horizon must be at least one position");
  if (static_cast<int>(teams.size()) != g.num_agents) throw PreconditionError("one team per agent is required");
  return detail::OracleSearch(g, teams, phi, opt).run(init);
}

}  // namespace delgames

#endif
