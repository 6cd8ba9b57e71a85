#ifndef DELGAMES_KRIPKE_HPP
#define DELGAMES_KRIPKE_HPP

#include <algorithm>
#include <compare>
#include <cstring>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "delgames/common.hpp"
#include "delgames/formula.hpp"

namespace delgames {

/// Union-find over dense integer ids.
class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<int> parent_;
};

/// Renumbers labels by order of first occurrence, so equal partitions get
/// equal label vectors.
inline std::vector<int> normalize_labels(std::span<const int> labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

/// Finite Kripke structure whose per-agent relations are equivalences, stored
/// as class labels: w ~a v iff classes[a][w] == classes[a][v].
struct EpistemicModel {
  int num_agents = 0;
  std::vector<AtomSet> valuation;
  std::vector<int> turn;
  std::vector<std::vector<int>> classes;
  /// Ancestry of each world: the root world of the initial model followed by
  /// the events applied to it.
  std::vector<std::vector<int>> trail;

  int size() const { return static_cast<int>(valuation.size()); }
  bool related(int agent, int w, int v) const { return classes[agent][w] == classes[agent][v]; }

  std::vector<int> class_of(int agent, int w) const {
    std::vector<int> out;
    for (int v = 0; v < size(); ++v)
      if (related(agent, w, v)) out.push_back(v);
    return out;
  }

  /// Explicit pair list of an agent's relation (includes reflexive pairs).
  std::vector<std::pair<int, int>> relation_pairs(int agent) const {
    std::vector<std::pair<int, int>> out;
    for (int w = 0; w < size(); ++w)
      for (int v = 0; v < size(); ++v)
        if (related(agent, w, v)) out.emplace_back(w, v);
    return out;
  }

  friend bool operator==(const EpistemicModel&, const EpistemicModel&) = default;
};

struct PointedModel {
  EpistemicModel model;
  int point = 0;
  /// origin[i] is the index, in the model this was cut from, of world i.
  std::vector<int> origin;
};

/// Builds a model from relation pairs, closing them into equivalences.
/// `closure_added` is set when the closure had to add pairs that were not
/// listed (symmetric or reflexive pairs do not count).
inline EpistemicModel make_model(int num_agents, std::vector<AtomSet> valuation, std::vector<int> turn,
                                 const std::vector<std::vector<std::pair<int, int>>>& pairs,
                                 bool* closure_added = nullptr) {
  const int n = static_cast<int>(valuation.size());
  if (n == 0) throw InputError("an epistemic model needs at least one world");
  if (static_cast<int>(turn.size()) != n) throw InputError("turn must be defined at every world");
  EpistemicModel m;
  m.num_agents = num_agents;
  m.valuation = std::move(valuation);
  m.turn = std::move(turn);
  bool added = false;
  for (int a = 0; a < num_agents; ++a) {
    DisjointSets sets(n);
    std::vector<std::pair<int, int>> listed;
    if (a < static_cast<int>(pairs.size())) listed = pairs[a];
    for (auto [x, y] : listed) {
      if (x < 0 || y < 0 || x >= n || y >= n) throw InputError("relation pair refers to an unknown world");
      sets.unite(x, y);
    }
    std::vector<int> labels(n);
    for (int w = 0; w < n; ++w) labels[w] = sets.find(w);
    m.classes.push_back(normalize_labels(labels));
    // Transitive closure added a pair iff some class has more pairs than listed.
    std::vector<std::pair<int, int>> sym;
    for (auto [x, y] : listed)
      if (x != y) sym.emplace_back(std::min(x, y), std::max(x, y));
    std::sort(sym.begin(), sym.end());
    sym.erase(std::unique(sym.begin(), sym.end()), sym.end());
    std::map<int, long> class_sizes;
    for (int w = 0; w < n; ++w) ++class_sizes[m.classes[a][w]];
    long needed = 0;
    for (auto [c, k] : class_sizes) needed += k * (k - 1) / 2;
    if (needed != static_cast<long>(sym.size())) added = true;
  }
  for (int w = 0; w < n; ++w) m.trail.push_back({w});
  if (closure_added) *closure_added = added;
  return m;
}

// ---------------------------------------------------------------------------
// Epistemic logic evaluation.

/// Truth value of an EL formula at every world.
inline std::vector<char> eval_el_all(const EpistemicModel& m, const FormulaPtr& phi) {
  const int n = m.size();
  switch (phi->op) {
    case Op::True: return std::vector<char>(n, 1);
    case Op::Atom: {
      std::vector<char> out(n);
      for (int w = 0; w < n; ++w) out[w] = has_atom(m.valuation[w], phi->index);
      return out;
    }
    case Op::Turn: {
      std::vector<char> out(n);
      for (int w = 0; w < n; ++w) out[w] = m.turn[w] == phi->index;
      return out;
    }
    case Op::Not: {
      auto out = eval_el_all(m, phi->lhs);
      for (auto& b : out) b = !b;
      return out;
    }
    case Op::Or: {
      auto out = eval_el_all(m, phi->lhs);
      auto rhs = eval_el_all(m, phi->rhs);
      for (int w = 0; w < n; ++w) out[w] = out[w] || rhs[w];
      return out;
    }
    case Op::Know: {
      auto sub = eval_el_all(m, phi->lhs);
      const auto& cls = m.classes.at(phi->index);
      std::unordered_map<int, char> all_true;
      for (int w = 0; w < n; ++w) {
        auto [it, fresh] = all_true.try_emplace(cls[w], 1);
        it->second = it->second && sub[w];
      }
      std::vector<char> out(n);
      for (int w = 0; w < n; ++w) out[w] = all_true[cls[w]];
      return out;
    }
    case Op::Next:
    case Op::Until: break;
  }
  throw PreconditionError("temporal operator in an epistemic formula");
}

inline bool eval_el(const EpistemicModel& m, int world, const FormulaPtr& phi) {
  return eval_el_all(m, phi).at(world);
}

// ---------------------------------------------------------------------------
// Submodels.

/// Induced submodel on `keep` (sorted, deduplicated internally).
inline EpistemicModel restrict(const EpistemicModel& m, std::vector<int> keep) {
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.empty()) throw PreconditionError("restriction to an empty world set");
  EpistemicModel out;
  out.num_agents = m.num_agents;
  for (int w : keep) {
    if (w < 0 || w >= m.size()) throw PreconditionError("restriction to an unknown world");
    out.valuation.push_back(m.valuation[w]);
    out.turn.push_back(m.turn[w]);
    out.trail.push_back(m.trail[w]);
  }
  for (int a = 0; a < m.num_agents; ++a) {
    std::vector<int> labels;
    for (int w : keep) labels.push_back(m.classes[a][w]);
    out.classes.push_back(normalize_labels(labels));
  }
  return out;
}

/// Worlds reachable from `world` through the union of all relations, sorted.
inline std::vector<int> component_worlds(const EpistemicModel& m, int world) {
  std::vector<char> seen(m.size(), 0);
  std::vector<int> stack{world}, out;
  seen[world] = 1;
  while (!stack.empty()) {
    int w = stack.back();
    stack.pop_back();
    out.push_back(w);
    for (int a = 0; a < m.num_agents; ++a)
      for (int v = 0; v < m.size(); ++v)
        if (!seen[v] && m.related(a, w, v)) {
          seen[v] = 1;
          stack.push_back(v);
        }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline PointedModel connected_component(const EpistemicModel& m, int world) {
  if (world < 0 || world >= m.size()) throw PreconditionError("world not in model");
  auto keep = component_worlds(m, world);
  PointedModel pm{restrict(m, keep), 0, keep};
  pm.point = static_cast<int>(std::lower_bound(keep.begin(), keep.end(), world) - keep.begin());
  return pm;
}

// ---------------------------------------------------------------------------
// Pointed isomorphism and canonical forms.

struct CanonicalKey {
  std::string bytes;
  friend bool operator==(const CanonicalKey&, const CanonicalKey&) = default;
  friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
};

struct CanonicalKeyHash {
  std::size_t operator()(const CanonicalKey& k) const { return std::hash<std::string>{}(k.bytes); }
};

namespace detail {

inline std::vector<int> rank_signatures(const std::vector<std::vector<long long>>& sigs) {
  std::vector<std::vector<long long>> sorted = sigs;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> out(sigs.size());
  for (std::size_t i = 0; i < sigs.size(); ++i)
    out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), sigs[i]) - sorted.begin());
  return out;
}

inline int count_colors(const std::vector<int>& colors) {
  return colors.empty() ? 0 : *std::max_element(colors.begin(), colors.end()) + 1;
}

/// Iterated refinement: a world's new color is its old color followed by,
/// per agent, the sorted multiset of colors in its equivalence class. Colors
/// are ranks of signatures, so the result is invariant under renaming and
/// respects the input color order.
inline std::vector<int> refine(const EpistemicModel& m, std::vector<int> colors) {
  const int n = m.size();
  int count = count_colors(colors);
  while (true) {
    std::vector<std::vector<long long>> sigs(n);
    for (int w = 0; w < n; ++w) sigs[w].push_back(colors[w]);
    for (int a = 0; a < m.num_agents; ++a) {
      std::map<int, std::vector<long long>> per_class;
      for (int w = 0; w < n; ++w) per_class[m.classes[a][w]].push_back(colors[w]);
      for (auto& [c, v] : per_class) std::sort(v.begin(), v.end());
      for (int w = 0; w < n; ++w) {
        const auto& v = per_class[m.classes[a][w]];
        sigs[w].push_back(-1);
        sigs[w].insert(sigs[w].end(), v.begin(), v.end());
      }
    }
    colors = rank_signatures(sigs);
    int next = count_colors(colors);
    if (next == count) return colors;
    count = next;
  }
}

inline std::vector<int> initial_colors(const PointedModel& p, bool mask_turn) {
  const auto& m = p.model;
  std::vector<std::vector<long long>> sigs(m.size());
  for (int w = 0; w < m.size(); ++w)
    sigs[w] = {w == p.point ? 0 : 1, mask_turn ? 0 : m.turn[w], static_cast<long long>(m.valuation[w])};
  return rank_signatures(sigs);
}

inline std::string encode(const EpistemicModel& m, const std::vector<int>& order, bool mask_turn) {
  std::string out;
  auto put = [&out](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put(m.size(), 4);
  put(m.num_agents, 2);
  for (int w : order) {
    put(mask_turn ? 0 : static_cast<std::uint64_t>(m.turn[w]), 2);
    put(m.valuation[w], 8);
  }
  for (int a = 0; a < m.num_agents; ++a) {
    std::vector<int> labels;
    for (int w : order) labels.push_back(m.classes[a][w]);
    for (int l : normalize_labels(labels)) put(l, 4);
  }
  return out;
}

inline void canonical_search(const EpistemicModel& m, std::vector<int> colors, bool mask_turn,
                             std::optional<std::string>& best) {
  colors = refine(m, std::move(colors));
  const int n = m.size();
  if (count_colors(colors) == n) {
    std::vector<int> order(n);
    for (int w = 0; w < n; ++w) order[colors[w]] = w;
    auto code = encode(m, order, mask_turn);
    if (!best || code < *best) best = std::move(code);
    return;
  }
  // Branch on the first (lowest-colored) non-singleton cell.
  std::vector<int> cell_size(count_colors(colors), 0);
  for (int c : colors) ++cell_size[c];
  int target = 0;
  while (cell_size[target] < 2) ++target;
  for (int chosen = 0; chosen < n; ++chosen) {
    if (colors[chosen] != target) continue;
    std::vector<int> next(n);
    for (int w = 0; w < n; ++w) next[w] = 2 * colors[w] + (colors[w] == target && w != chosen ? 1 : 0);
    canonical_search(m, next, mask_turn, best);
  }
}

}  // namespace detail

/// Key equal for two pointed models iff they are pointed-isomorphic.
/// With `mask_turn`, turn owners are ignored.
inline CanonicalKey canonical_form(const PointedModel& p, bool mask_turn = false) {
  std::optional<std::string> best;
  detail::canonical_search(p.model, detail::initial_colors(p, mask_turn), mask_turn, best);
  return CanonicalKey{*best};
}

/// A bijection f with f(p1.point) == p2.point preserving valuations, turn and
/// every relation, or nullopt.
inline std::optional<std::vector<int>> pointed_isomorphic(const PointedModel& p1, const PointedModel& p2) {
  const auto& m1 = p1.model;
  const auto& m2 = p2.model;
  const int n = m1.size();
  if (n != m2.size() || m1.num_agents != m2.num_agents) return std::nullopt;
  auto c1 = detail::refine(m1, detail::initial_colors(p1, false));
  auto c2 = detail::refine(m2, detail::initial_colors(p2, false));
  {
    auto s1 = c1, s2 = c2;
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    if (s1 != s2) return std::nullopt;
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return c1[a] < c1[b]; });
  std::vector<int> f(n, -1);
  std::vector<char> used(n, 0);
  std::function<bool(int)> extend = [&](int i) -> bool {
    if (i == n) return true;
    int w = order[i];
    for (int v = 0; v < n; ++v) {
      if (used[v] || c2[v] != c1[w]) continue;
      if (m1.turn[w] != m2.turn[v] || m1.valuation[w] != m2.valuation[v]) continue;
      if ((w == p1.point) != (v == p2.point)) continue;
      bool ok = true;
      for (int j = 0; j < i && ok; ++j) {
        int u = order[j];
        for (int a = 0; a < m1.num_agents && ok; ++a)
          ok = m1.related(a, w, u) == m2.related(a, v, f[u]);
      }
      if (!ok) continue;
      f[w] = v;
      used[v] = 1;
      if (extend(i + 1)) return true;
      used[v] = 0;
      f[w] = -1;
    }
    return false;
  };
  if (!extend(0)) return std::nullopt;
  return f;
}

}  // namespace delgames

#endif
