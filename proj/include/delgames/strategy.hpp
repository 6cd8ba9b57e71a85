#ifndef DELGAMES_STRATEGY_HPP
#define DELGAMES_STRATEGY_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "delgames/arena.hpp"
#include "delgames/ltlk.hpp"

namespace delgames {

/// Per-agent decisions over histories. For presentations a history is a
/// trail (initial world followed by events); for explicit arenas it is a
/// sequence of positions.
struct StrategyTree {
  std::map<int, std::map<std::vector<int>, int>> choices;
  /// Positional form, when the strategy came from a finite-arena fixpoint.
  std::optional<std::map<int, int>> positional;
  /// Length (in moves) up to which the tree is defined.
  int depth = 0;
  /// Consulted for histories missing from `choices`.
  std::function<std::optional<int>(int, const std::vector<int>&)> rule;

  std::optional<int> at(int agent, const std::vector<int>& history) const {
    if (auto a = choices.find(agent); a != choices.end())
      if (auto it = a->second.find(history); it != a->second.end()) return it->second;
    if (rule) return rule(agent, history);
    return std::nullopt;
  }
  void set(int agent, std::vector<int> history, int action) { choices[agent][std::move(history)] = action; }
  std::size_t decisions() const {
    std::size_t n = 0;
    for (const auto& [a, m] : choices) n += m.size();
    return n;
  }
};

struct Verdict {
  enum class Kind { Win, Lose, Unknown };
  Kind kind = Kind::Unknown;
  int horizon = 0;
  bool budget_exhausted = false;

  static Verdict win() { return {Kind::Win}; }
  static Verdict lose() { return {Kind::Lose}; }
  static Verdict unknown(int horizon, bool budget = false) { return {Kind::Unknown, horizon, budget}; }
  bool won() const { return kind == Kind::Win; }
  bool lost() const { return kind == Kind::Lose; }
  bool definite() const { return kind != Kind::Unknown; }
  friend bool operator==(const Verdict& a, const Verdict& b) { return a.kind == b.kind; }
};

inline std::string to_string(const Verdict& v) {
  switch (v.kind) {
    case Verdict::Kind::Win: return "WIN";
    case Verdict::Kind::Lose: return "LOSE";
    case Verdict::Kind::Unknown:
      return v.budget_exhausted ? "UNKNOWN(budget)" : "UNKNOWN(horizon=" + std::to_string(v.horizon) + ")";
  }
  return "?";
}

struct Certificate {
  std::string description;
  /// Positional counter-strategy of the universal team.
  std::optional<std::map<int, int>> counter_strategy;
  /// A losing play, as positions (or states) of the solved structure.
  std::optional<LassoPlay> play;
};

struct SolveResult {
  Verdict verdict;
  std::optional<StrategyTree> strategy;
  std::optional<Certificate> certificate;
};

// ---------------------------------------------------------------------------
// Stuttering.

/// Collapses maximal runs of equal elements.
template <typename T, typename Eq = std::equal_to<T>>
std::vector<T> destutter(const std::vector<T>& seq, Eq eq = {}) {
  std::vector<T> out;
  for (const auto& x : seq)
    if (out.empty() || !eq(out.back(), x)) out.push_back(x);
  return out;
}

/// Whether two lassos denote stuttering-equivalent infinite words, with
/// letters compared through `key`.
template <typename Key = std::identity>
bool stuttering_equivalent(const LassoPlay& p1, const LassoPlay& p2, Key key = {}) {
  using K = std::decay_t<decltype(key(0))>;
  auto letters = [&](const LassoPlay& p, int copies) {
    std::vector<K> out;
    for (int v : p.stem) out.push_back(key(v));
    for (int c = 0; c < copies; ++c)
      for (int v : p.loop) out.push_back(key(v));
    return out;
  };
  auto constant_loop = [&](const LassoPlay& p) {
    return std::all_of(p.loop.begin(), p.loop.end(), [&](int v) { return key(v) == key(p.loop[0]); });
  };
  bool c1 = constant_loop(p1), c2 = constant_loop(p2);
  if (c1 != c2) return false;
  if (c1) return destutter(letters(p1, 1)) == destutter(letters(p2, 1));
  // Destuttered, each word is ultimately periodic with preperiod at most
  // |stem| + |loop| and period at most |loop|; comparing past both
  // preperiods for a common multiple of the periods decides equality. Each
  // loop copy adds at least one letter, so `copies` is long enough.
  const int l1 = static_cast<int>(p1.loop.size()), l2 = static_cast<int>(p2.loop.size());
  const int span = static_cast<int>(p1.stem.size() + p2.stem.size()) + l1 + l2 + l1 * l2 + 2;
  const int copies = span + 2;
  auto d1 = destutter(letters(p1, copies));
  auto d2 = destutter(letters(p2, copies));
  d1.resize(span);
  d2.resize(span);
  return d1 == d2;
}

}  // namespace delgames

#endif
