// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "support.hpp"

using namespace delgames;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

template <typename F>
void criterion(int id, const char* name, F&& body) {
  auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  failures += !out.pass;
  std::printf("criterion %d: %s: %s (%s; %.2fs)\n", id, name, out.pass ? "PASS" : "FAIL", out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::vector<Presentation> instances(unsigned seed, Kind kind, int worlds, int events, int atoms, int count) {
  std::mt19937 rng(seed);
  std::vector<Presentation> out;
  for (int i = 0; i < count; ++i) {
    GenOptions opt;
    opt.kind = kind;
    opt.max_worlds = worlds;
    opt.max_events = events;
    opt.max_atoms = atoms;
    opt.singleton_init = i % 2 == 0;
    out.push_back(random_presentation(rng, opt));
  }
  return out;
}

int find_trail(const EpistemicModel& m, const std::vector<int>& trail) {
  for (int x = 0; x < m.size(); ++x)
    if (m.trail[x] == trail) return x;
  return -1;
}

}  // namespace

int main() {
  const auto prop = instances(1001, Kind::Propositional, 4, 4, 3, 100);
  const auto pub = instances(1002, Kind::Public, 3, 3, 2, 100);

  criterion(1, "running example product", [] {
    auto p = running_example();
    auto m = product(p.model, p.actions);
    int we = find_trail(m, {0, 0}), wf = find_trail(m, {0, 1}), vf = find_trail(m, {1, 1});
    bool ok = m.size() == 3 && we >= 0 && wf >= 0 && vf >= 0;
    ok = ok && m.valuation[we] == 0 && m.valuation[wf] == 1 && m.valuation[vf] == 0;
    ok = ok && !m.related(0, we, wf) && !m.related(0, we, vf) && m.related(0, wf, vf);
    ok = ok && m.related(1, we, wf) && m.related(1, we, vf) && m.related(1, wf, vf);
    ok = ok && eval_el(m, we, parse_formula("K[a] !p", p.vocab));
    ok = ok && eval_el(m, we, parse_formula("!K[b] !p & !K[b] p", p.vocab));
    return Outcome{ok, std::to_string(m.size()) + " worlds"};
  });

  std::vector<FoldedArena> prop_folds, quotients;
  criterion(2, "size bounds", [&] {
    int bad = 0, largest = 0;
    for (const auto& p : prop) {
      prop_folds.push_back(fold_propositional(p));
      bad += prop_folds.back().arena.size() > propositional_bound(p);
      largest = std::max(largest, prop_folds.back().arena.size());
    }
    for (const auto& p : pub) {
      quotients.push_back(quotient_public(p));
      bad += quotients.back().arena.size() > quotient_bound(p);
      largest = std::max(largest, quotients.back().arena.size());
    }
    return Outcome{bad == 0, std::to_string(bad) + " violations over 200 instances, largest arena " +
                                 std::to_string(largest)};
  });

  criterion(3, "equivalence with the unfolded game", [&] {
    int bad = 0;
    std::string first;
    auto check = [&](const Presentation& p, const FoldedArena& f, int depth) {
      auto r = check_equivalence(p, f.arena, depth);
      if (!r.equivalent && bad++ == 0) first = r.reason;
    };
    for (std::size_t i = 0; i < prop.size() && i < prop_folds.size(); ++i) check(prop[i], prop_folds[i], 4);
    for (std::size_t i = 0; i < pub.size() && i < quotients.size(); ++i) check(pub[i], quotients[i], 5);
    return Outcome{bad == 0 && prop_folds.size() == 100 && quotients.size() == 100,
                   std::to_string(bad) + " failures (propositional depth 4, public depth 5)" +
                       (first.empty() ? "" : "; first: " + first)};
  });

  criterion(4, "public quotients are public arenas", [&] {
    int bad = 0;
    for (const auto& q : quotients) bad += !arena_public(q.arena);
    return Outcome{bad == 0 && quotients.size() == 100, std::to_string(bad) + " failures"};
  });

  criterion(5, "announcement solver agrees with the oracle", [] {
    std::mt19937 rng(1005);
    int definite = 0, disagree = 0;
    std::string first;
    for (int i = 0; i < 30; ++i) {
      GenOptions opt;
      opt.kind = Kind::Announcement;
      auto p = random_presentation(rng, opt);
      auto phi = random_fragment(rng, 2, static_cast<int>(p.vocab.atoms.size()), 8);
      auto r = solve_announcement(p, phi);
      const int horizon = p.num_agents() * p.model.size() + p.num_agents();
      auto mat = materialize(p, horizon - 1);
      OracleOptions o;
      o.horizon = horizon;
      o.budget = budget_from_env(o.budget);
      auto orc = oracle_solve(mat.arena, p.vocab.teams, phi, mat.arena.init, o);
      if (!orc.verdict.definite()) continue;
      ++definite;
      if (!(orc.verdict == r.verdict) && disagree++ == 0)
        first = "game " + std::to_string(i) + ", " + to_string(phi, p.vocab);
    }
    return Outcome{disagree == 0, std::to_string(definite) + "/30 definite oracle verdicts, " +
                                      std::to_string(disagree) + " disagreements" +
                                      (first.empty() ? "" : "; first: " + first)};
  });

  criterion(6, "uniformity is immaterial on public games", [] {
    std::mt19937 rng(1006);
    int disagree = 0, definite = 0;
    for (int i = 0; i < 30; ++i) {
      GenOptions opt;
      opt.kind = Kind::Public;
      auto p = random_presentation(rng, opt);
      auto phi = random_fragment(rng, 2, static_cast<int>(p.vocab.atoms.size()), 8);
      auto mat = materialize(p, 4);
      OracleOptions o;
      o.horizon = 5;
      o.budget = budget_from_env(o.budget);
      auto on = oracle_solve(mat.arena, p.vocab.teams, phi, mat.arena.init, o);
      o.uniform = false;
      auto off = oracle_solve(mat.arena, p.vocab.teams, phi, mat.arena.init, o);
      definite += on.verdict.definite();
      disagree += !(on.verdict == off.verdict) || on.verdict.budget_exhausted || off.verdict.budget_exhausted;
    }
    return Outcome{disagree == 0,
                   std::to_string(disagree) + " disagreements, " + std::to_string(definite) + "/30 definite"};
  });

  criterion(7, "lasso evaluation is stutter invariant", [] {
    std::mt19937 rng(1007);
    int bad = 0;
    for (int i = 0; i < 200; ++i) {
      const int n = uniform(rng, 1, 5);
      GameArena g;
      g.num_agents = 2;
      g.num_actions = 1;
      g.action_names = {"go"};
      for (int v = 0; v < n; ++v) g.add_position(uniform(rng, 0, 1), static_cast<AtomSet>(uniform(rng, 0, 3)));
      for (int v = 0; v < n; ++v) g.trans[v][0] = v;
      for (int a = 0; a < 2; ++a) g.classes.push_back(random_partition(rng, n));
      g.init = {0};
      LassoPlay play;
      for (int k = uniform(rng, 0, 4); k > 0; --k) play.stem.push_back(uniform(rng, 0, n - 1));
      for (int k = uniform(rng, 1, 4); k > 0; --k) play.loop.push_back(uniform(rng, 0, n - 1));
      auto stretched = play;
      for (int k = uniform(rng, 1, 4); k > 0; --k) {
        auto& part = (stretched.stem.empty() || coin(rng)) ? stretched.loop : stretched.stem;
        int at = uniform(rng, 0, static_cast<int>(part.size()) - 1);
        part.insert(part.begin() + at, part[at]);
      }
      auto phi = random_fragment(rng, 2, 2, 8);
      bad += !stuttering_equivalent(play, stretched) ||
             eval_ltlk_lasso(g, play, phi) != eval_ltlk_lasso(g, stretched, phi);
    }
    return Outcome{bad == 0, std::to_string(bad) + " failures over 200 pairs"};
  });

  criterion(8, "eager strategy laws", [] {
    std::mt19937 rng(1008);
    int outcomes = 0, shape_bad = 0, by_exists = 0, related_bad = 0;
    std::string first;
    for (int i = 0; i < 30; ++i) {
      GenOptions opt;
      opt.kind = Kind::Announcement;
      opt.max_events = 4;
      auto p = random_presentation(rng, opt);
      auto sigma = random_strategy(p, static_cast<std::uint64_t>(i), 12);
      auto eager = eagerize(sigma, p, 6);
      LazyArena lazy(p);
      auto pool = strategy_outcomes(sigma, p, 12);
      for (const auto& out : strategy_outcomes(eager, p, 6)) {
        ++outcomes;
        if (auto bad = eager_shape_violation(lazy, out)) {
          if (shape_bad++ == 0) first = format_trail(p, out) + ": " + *bad;
          by_exists += eager_shape_violation(lazy, out, true).has_value();
        }
        related_bad += !has_stutter_related(lazy, out, pool);
      }
    }
    return Outcome{shape_bad == 0 && related_bad == 0,
                   std::to_string(outcomes) + " outcomes, " + std::to_string(shape_bad) + " with a run of at least " +
                       "|Ag| equal states or a non-shrinking step (" + std::to_string(by_exists) +
                       " of them ended by an existential agent), " + std::to_string(related_bad) +
                       " without a stuttering-related outcome of the original strategy" +
                       (first.empty() ? "" : "; first: " + first)};
  });

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
