// delgame: check, fold and solve games written in the .game format.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "delgames.hpp"

using namespace delgames;

namespace {

enum Exit { kWin = 0, kLose = 1, kUnknown = 2, kRefused = 3, kInputError = 4 };

struct Refusal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string team_name(Team t) { return t == Team::Exists ? "exists" : "forall"; }

std::vector<int> existential_agents(const Vocabulary& v) {
  std::vector<int> out;
  for (int a = 0; a < v.num_agents(); ++a)
    if (v.teams[a] == Team::Exists) out.push_back(a);
  return out;
}

// Presentation checked for the turn hypotheses, with the initial worlds the
// mode asks for.
Presentation prepare(const GameFile& g, InitMode mode) {
  const auto& p = g.presentation;
  auto init = p.init;
  if (mode == InitMode::Subjective) {
    std::vector<int> all;
    for (int w : p.init)
      for (int v : subjective_init(p.model, w, existential_agents(p.vocab))) all.push_back(v);
    init = all;
  }
  return make_presentation(p.vocab, p.model, p.world_names, p.actions, init);
}

int exit_for(const Verdict& v) { return v.won() ? kWin : v.lost() ? kLose : kUnknown; }

std::string position_name(const GameArena& g, int v) {
  return !g.names.empty() && !g.names[v].empty() ? g.names[v] : "q" + std::to_string(v);
}

// ---------------------------------------------------------------------------

int cmd_check(const GameFile& g, int depth) {
  const auto& p = g.presentation;
  const auto& voc = p.vocab;
  std::cout << "agents:";
  for (int a = 0; a < voc.num_agents(); ++a) std::cout << " " << voc.agents[a] << "(" << team_name(voc.teams[a]) << ")";
  std::cout << "\nworlds: " << p.model.size() << "\nevents: " << p.actions.size() << "\natoms: " << voc.atoms.size()
            << "\ninit:";
  for (int w : p.init) std::cout << " " << p.world_names[w];
  std::cout << "\n";
  for (const auto& w : g.warnings) std::cout << "warning: " << w << "\n";

  auto h1 = check_h1(p.model);
  auto h2 = check_h2(p.actions);
  std::cout << "H1: " << (h1.pass ? "pass" : "fail (" + h1.detail + ")") << "\n";
  std::cout << "H2: " << (h2.pass ? "pass" : "fail (" + h2.detail + ")") << "\n";
  if (h1.pass) {
    auto h3 = check_h3(p, depth);
    std::cout << "H3: " << (h3.pass ? "pass" : "fail") << " (" << h3.detail << ")\n";
  } else {
    std::cout << "H3: not checked\n";
  }

  auto types = classify_actions(p.actions);
  std::string not_prop, not_public, not_ann;
  for (int e = 0; e < p.actions.size(); ++e) {
    bool prop = classify(p.actions.pre[e]) == Fragment::Prop;
    for (const auto& [q, f] : p.actions.post[e]) prop = prop && classify(f) == Fragment::Prop;
    if (!prop && not_prop.empty()) not_prop = p.actions.names[e];
    if (!types.is_public[e] && not_public.empty()) not_public = p.actions.names[e];
    if (!types.announcement[e] && not_ann.empty()) not_ann = p.actions.names[e];
  }
  auto yes_no = [](const std::string& offender, const std::string& why) {
    return offender.empty() ? std::string("yes") : "no (event " + offender + " " + why + ")";
  };
  std::cout << "propositional: " << yes_no(not_prop, "has an epistemic precondition") << "\n";
  std::cout << "public: " << yes_no(not_public, "is confused with another event") << "\n";
  std::cout << "announcements: " << yes_no(not_ann, "is not a public announcement") << "\n";
  if (auto order = check_hierarchical(p)) {
    std::cout << "hierarchical: yes (";
    for (std::size_t i = 0; i < order->size(); ++i) std::cout << (i ? " <= " : "") << voc.agents[(*order)[i]];
    std::cout << ")\n";
  } else {
    std::cout << "hierarchical: no\n";
  }
  if (g.objective)
    std::cout << "objective: " << to_string(g.objective, voc) << " [" << to_string(classify(g.objective)) << "]\n";
  else
    std::cout << "objective: none\n";
  return 0;
}

int cmd_fold(const GameFile& g, const std::string& mode, const std::string& dot, const std::string& sidecar) {
  auto p = prepare(g, g.options.mode);
  FoldedArena f;
  long long bound = 0;
  if (mode == "prop") {
    f = fold_propositional(p);
    bound = propositional_bound(p);
  } else {
    f = quotient_public(p);
    bound = quotient_bound(p);
  }
  std::cout << "positions: " << f.arena.size() << " (bound " << bound << ")\n";
  if (!dot.empty()) {
    std::ofstream out(dot);
    if (!out) throw InputError("cannot write '" + dot + "'");
    write_dot(out, f.arena, p.vocab);
  }
  if (sidecar.empty()) {
    write_sidecar(std::cout, f, p.vocab);
  } else {
    std::ofstream out(sidecar);
    if (!out) throw InputError("cannot write '" + sidecar + "'");
    write_sidecar(out, f, p.vocab);
  }
  return 0;
}

struct SolveFlags {
  std::string engine = "oracle";
  std::optional<InitMode> mode;
  std::optional<int> horizon;
  bool strict_leaves = false;
  std::string k_scope = "all";
};

int solve_reach(const Presentation& p, const FormulaPtr& phi) {
  if (!match_reach_safe(phi)) throw Refusal("the reach engine needs an objective F phi or G phi with phi epistemic");
  auto types = classify_actions(p.actions);
  for (int e = 0; e < p.actions.size(); ++e)
    if (!types.is_public[e])
      throw Refusal("the reach engine needs a public-action game: event " + p.actions.names[e] +
                    " is confused with another event");
  auto q = quotient_public(p);
  const auto& g = q.arena;
  // Several initial positions are only read with perfect information when no
  // agent confuses any two of them.
  for (std::size_t i = 0; i < g.init.size(); ++i)
    for (std::size_t j = i + 1; j < g.init.size(); ++j)
      for (int a = 0; a < g.num_agents; ++a)
        if (g.related(a, g.init[i], g.init[j]))
          throw Refusal("the reach engine needs a single initial world, or initial worlds nobody confuses; agent " +
                        p.vocab.agents[a] + " confuses " + position_name(g, g.init[i]) + " and " +
                        position_name(g, g.init[j]) + " (try --engine oracle)");
  auto r = solve_reach_safe(q, p.vocab.teams, phi, g.init, ReachSafeOptions{true});
  // Report the positional strategy, one decision per position.
  if (r.strategy && r.strategy->positional) {
    StrategyTree shown;
    for (auto [v, c] : *r.strategy->positional) shown.set(g.turn[v], {v}, c);
    r.strategy = shown;
  }
  auto hist = [&](const std::vector<int>& h) {
    std::string s;
    for (std::size_t i = 0; i < h.size(); ++i) s += (i ? " " : "") + position_name(g, h[i]);
    return s;
  };
  write_report(std::cout, r, p.vocab, hist, [&](int c) { return g.action_names[c]; }, hist);
  return exit_for(r.verdict);
}

int solve_announce(const Presentation& p, const FormulaPtr& phi, bool strict) {
  auto types = classify_actions(p.actions);
  for (int e = 0; e < p.actions.size(); ++e)
    if (!types.announcement[e])
      throw Refusal("the announce engine needs public announcements only: event " + p.actions.names[e] +
                    " is not one");
  if (p.init.size() != 1) throw Refusal("the announce engine needs a unique initial world (try --engine oracle)");
  if (classify(phi) > Fragment::NoNextNoKTemporal)
    throw Refusal("the announce engine needs an objective without X and without temporal operators under K");
  AnnouncementOptions opt;
  opt.strict = strict;
  auto r = solve_announcement(p, phi, opt);
  // The losing branch is already spelled out in the description.
  if (r.certificate) r.certificate->play.reset();
  auto hist = [&](const std::vector<int>& h) { return format_trail(p, h); };
  write_report(std::cout, r, p.vocab, hist, [&](int e) { return p.actions.names[e]; }, hist);
  return exit_for(r.verdict);
}

int solve_oracle(const Presentation& p, const FormulaPtr& phi, int horizon, KScope scope) {
  if (horizon < 1) throw Refusal("the horizon must be at least 1");
  auto mat = materialize(p, horizon - 1);
  OracleOptions opt;
  opt.horizon = horizon;
  opt.k_scope = scope;
  opt.budget = budget_from_env(opt.budget);
  auto r = oracle_solve(mat.arena, p.vocab.teams, phi, mat.arena.init, opt);
  auto hist = [&](const std::vector<int>& h) { return format_trail(p, mat.trails.at(h.back())); };
  auto letters = [&](const std::vector<int>& h) {
    std::string s;
    for (std::size_t i = 0; i < h.size(); ++i) s += (i ? " " : "") + format_trail(p, mat.trails.at(h[i]));
    return s;
  };
  write_report(std::cout, r, p.vocab, hist, [&](int e) { return p.actions.names[e]; }, letters);
  return exit_for(r.verdict);
}

int cmd_solve(const GameFile& g, const SolveFlags& flags, int depth) {
  if (!g.objective) throw InputError("the game has no objective");
  auto p = prepare(g, flags.mode.value_or(g.options.mode));
  if (auto h3 = check_h3(p, depth); !h3.pass) std::cerr << "warning: H3 fails: " << h3.detail << "\n";
  if (flags.engine == "reach") return solve_reach(p, g.objective);
  if (flags.engine == "announce") return solve_announce(p, g.objective, flags.strict_leaves);
  return solve_oracle(p, g.objective, flags.horizon.value_or(g.options.horizon.value_or(6)),
                      flags.k_scope == "init" ? KScope::Init : KScope::All);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic epistemic logic games: check, fold and solve"};
  app.require_subcommand(1);

  std::string file;
  int depth = -1;
  auto* check = app.add_subcommand("check", "Report hypotheses and action types");
  check->add_option("file", file, "game file")->required();
  check->add_option("--depth", depth, "history depth for the availability check (default: file option or 3)");

  std::string fold_mode = "public", dot, sidecar;
  auto* fold = app.add_subcommand("fold", "Build a finite arena for the game");
  fold->add_option("file", file, "game file")->required();
  fold->add_option("--mode", fold_mode, "prop or public")->check(CLI::IsMember({"prop", "public"}));
  fold->add_option("--dot", dot, "write the arena in DOT format to this path");
  fold->add_option("--sidecar", sidecar, "write the arena description here instead of standard output");

  SolveFlags flags;
  std::string mode;
  int horizon = -1;
  unsigned seed = 0;
  auto* solve = app.add_subcommand("solve", "Decide whether the existential team wins");
  solve->add_option("file", file, "game file")->required();
  solve->add_option("--engine", flags.engine, "reach, announce or oracle")
      ->check(CLI::IsMember({"reach", "announce", "oracle"}));
  solve->add_option("--mode", mode, "objective or subjective initial worlds")
      ->check(CLI::IsMember({"objective", "subjective"}));
  solve->add_option("--horizon", horizon, "oracle horizon in positions (default: file option or 6)");
  solve->add_option("--depth", depth, "history depth for the availability check run before solving (default 3)");
  solve->add_flag("--strict-leaves", flags.strict_leaves, "announce engine: only stop at the depth bound");
  solve->add_option("--k-scope", flags.k_scope, "all or init")->check(CLI::IsMember({"all", "init"}));
  solve->add_option("--seed", seed, "seed for randomized runs (the engines are deterministic)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    auto game = load_game(file);
    if (*check) return cmd_check(game, depth >= 0 ? depth : game.options.depth.value_or(3));
    if (*fold) return cmd_fold(game, fold_mode, dot, sidecar);
    if (!mode.empty()) flags.mode = mode == "subjective" ? InitMode::Subjective : InitMode::Objective;
    if (horizon >= 0) flags.horizon = horizon;
    return cmd_solve(game, flags, depth >= 0 ? depth : game.options.depth.value_or(3));
  } catch (const InputError& e) {
    std::cerr << file << (e.line() > 0 ? ":" : ": ") << e.what() << "\n";
    return kInputError;
  } catch (const Refusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kRefused;
  } catch (const PreconditionError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kRefused;
  }
}
