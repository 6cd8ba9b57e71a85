#ifndef DELGAMES_GAME_FILE_HPP
#define DELGAMES_GAME_FILE_HPP

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "delgames/arena.hpp"
#include "delgames/common.hpp"
#include "delgames/del.hpp"
#include "delgames/fold.hpp"
#include "delgames/formula.hpp"
#include "delgames/kripke.hpp"
#include "delgames/strategy.hpp"

namespace delgames {

// Line-oriented game description:
//
//   agents
//     a exists
//     b forall
//   atoms p q
//   model
//     world w turn=a p
//     world v turn=a
//     rel b w v
//   actions
//     event e turn=b pre p
//     post e q !p
//     rel a e f
//   init w
//   objective F K[a] p
//   options mode=subjective horizon=6 depth=4
//
// `#` starts a comment. Names must be declared before they are used.

enum class InitMode { Objective, Subjective };

struct GameOptions {
  InitMode mode = InitMode::Objective;
  std::optional<int> horizon;
  std::optional<int> depth;
};

struct GameFile {
  Presentation presentation;
  FormulaPtr objective;
  GameOptions options;
  std::vector<std::string> warnings;
};

namespace detail {

struct Token {
  std::string text;
  int column = 0;
};

inline std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

class GameParser {
 public:
  GameFile parse(std::istream& in) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no_;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      line_ = raw;
      auto toks = tokenize(raw);
      if (!toks.empty()) statement(toks);
    }
    return finish();
  }

 private:
  enum class Section { None, Agents, Model, Actions };

  [[noreturn]] void fail(const std::string& msg, int column = 1) const { throw InputError(msg, line_no_, column); }

  void expect_args(const std::vector<Token>& t, std::size_t n, const std::string& usage) const {
    if (t.size() < n) fail("expected: " + usage, t.back().column + static_cast<int>(t.back().text.size()));
  }

  int agent(const Token& t) const {
    auto a = file_.presentation.vocab.find_agent(t.text);
    if (!a) fail("unknown agent '" + t.text + "'", t.column);
    return *a;
  }
  int atom(const Token& t) const {
    auto a = file_.presentation.vocab.find_atom(t.text);
    if (!a) fail("unknown atom '" + t.text + "'", t.column);
    return *a;
  }
  int world(const Token& t) const {
    auto it = worlds_.find(t.text);
    if (it == worlds_.end()) fail("unknown world '" + t.text + "'", t.column);
    return it->second;
  }
  int event(const Token& t) const {
    auto it = events_.find(t.text);
    if (it == events_.end()) fail("unknown event '" + t.text + "'", t.column);
    return it->second;
  }
  int turn_field(const Token& t) const {
    if (t.text.rfind("turn=", 0) != 0) fail("expected turn=<agent>", t.column);
    return agent(Token{t.text.substr(5), t.column + 5});
  }
  void fresh_name(const Token& t, const std::map<std::string, int>& names, const char* what) const {
    if (names.count(t.text)) fail(std::string("duplicate ") + what + " '" + t.text + "'", t.column);
  }

  // The rest of the line from token `t` on, parsed as a formula.
  FormulaPtr formula_from(const Token& t) {
    FormulaParser parser(file_.presentation.vocab, false, line_no_, t.column - 1);
    return parser.parse(std::string_view(line_).substr(t.column - 1));
  }

  int positive(const Token& t, const std::string& key) const {
    try {
      std::size_t used = 0;
      int v = std::stoi(t.text.substr(key.size() + 1), &used);
      if (used == t.text.size() - key.size() - 1 && v >= 0) return v;
    } catch (const std::exception&) {
    }
    fail("expected a natural number for " + key, t.column);
  }

  void statement(const std::vector<Token>& t) {
    const std::string& kw = t[0].text;
    if (t.size() == 1 && (kw == "agents" || kw == "model" || kw == "actions")) {
      section_ = kw == "agents" ? Section::Agents : kw == "model" ? Section::Model : Section::Actions;
      return;
    }
    auto& voc = file_.presentation.vocab;
    if (kw == "atoms") {
      for (std::size_t i = 1; i < t.size(); ++i) {
        if (voc.find_atom(t[i].text)) fail("duplicate atom '" + t[i].text + "'", t[i].column);
        voc.add_atom(t[i].text);
      }
      return;
    }
    if (kw == "init") {
      expect_args(t, 2, "init <world>...");
      for (std::size_t i = 1; i < t.size(); ++i) init_.push_back(world(t[i]));
      return;
    }
    if (kw == "objective") {
      expect_args(t, 2, "objective <formula>");
      file_.objective = formula_from(t[1]);
      return;
    }
    if (kw == "options") {
      for (std::size_t i = 1; i < t.size(); ++i) {
        const auto& s = t[i].text;
        if (s == "mode=objective") file_.options.mode = InitMode::Objective;
        else if (s == "mode=subjective") file_.options.mode = InitMode::Subjective;
        else if (s.rfind("horizon=", 0) == 0) file_.options.horizon = positive(t[i], "horizon");
        else if (s.rfind("depth=", 0) == 0) file_.options.depth = positive(t[i], "depth");
        else fail("unknown option '" + s + "'", t[i].column);
      }
      return;
    }
    switch (section_) {
      case Section::Agents: {
        if (t.size() != 2 || (t[1].text != "exists" && t[1].text != "forall"))
          fail("expected: <agent> exists|forall", t[0].column);
        if (voc.find_agent(kw)) fail("duplicate agent '" + kw + "'", t[0].column);
        voc.add_agent(kw, t[1].text == "exists" ? Team::Exists : Team::Forall);
        return;
      }
      case Section::Model:
        if (kw == "world") {
          expect_args(t, 3, "world <name> turn=<agent> [atoms]");
          fresh_name(t[1], worlds_, "world");
          worlds_[t[1].text] = static_cast<int>(world_names_.size());
          world_names_.push_back(t[1].text);
          world_turn_.push_back(turn_field(t[2]));
          AtomSet val = 0;
          for (std::size_t i = 3; i < t.size(); ++i) val = with_atom(val, atom(t[i]));
          world_val_.push_back(val);
          return;
        }
        if (kw == "rel") {
          if (t.size() != 4) fail("expected: rel <agent> <world> <world>", t[0].column);
          world_pairs_.resize(voc.num_agents());
          world_pairs_[agent(t[1])].emplace_back(world(t[2]), world(t[3]));
          return;
        }
        break;
      case Section::Actions:
        if (kw == "event") {
          expect_args(t, 5, "event <name> turn=<agent> pre <formula>");
          fresh_name(t[1], events_, "event");
          if (t[3].text != "pre") fail("expected 'pre'", t[3].column);
          events_[t[1].text] = static_cast<int>(event_names_.size());
          event_names_.push_back(t[1].text);
          turn_after_.push_back(turn_field(t[2]));
          auto pre = formula_from(t[4]);
          if (classify(pre) > Fragment::EL) fail("precondition must be an epistemic formula", t[4].column);
          pre_.push_back(pre);
          post_.emplace_back();
          return;
        }
        if (kw == "post") {
          expect_args(t, 4, "post <event> <atom> <formula>");
          int e = event(t[1]);
          int p = atom(t[2]);
          auto f = formula_from(t[3]);
          if (classify(f) != Fragment::Prop) fail("postcondition must be propositional", t[3].column);
          if (post_[e].count(p)) fail("duplicate postcondition for '" + t[2].text + "'", t[2].column);
          post_[e][p] = f;
          return;
        }
        if (kw == "rel") {
          if (t.size() != 4) fail("expected: rel <agent> <event> <event>", t[0].column);
          event_pairs_.resize(voc.num_agents());
          event_pairs_[agent(t[1])].emplace_back(event(t[2]), event(t[3]));
          return;
        }
        break;
      case Section::None: break;
    }
    fail("unexpected '" + kw + "'", t[0].column);
  }

  GameFile finish() {
    auto& voc = file_.presentation.vocab;
    line_no_ = 0;
    if (voc.num_agents() == 0) throw InputError("no agents declared");
    if (world_names_.empty()) throw InputError("no worlds declared");
    if (event_names_.empty()) throw InputError("no events declared");
    if (init_.empty()) throw InputError("no initial world declared");
    world_pairs_.resize(voc.num_agents());
    event_pairs_.resize(voc.num_agents());
    bool closed_m = false, closed_e = false;
    auto model = make_model(voc.num_agents(), world_val_, world_turn_, world_pairs_, &closed_m);
    auto actions = make_action_model(voc.num_agents(), event_names_, pre_, post_, turn_after_, event_pairs_, &closed_e);
    if (closed_m) file_.warnings.push_back("world relations were closed to equivalences");
    if (closed_e) file_.warnings.push_back("event relations were closed to equivalences");
    std::sort(init_.begin(), init_.end());
    init_.erase(std::unique(init_.begin(), init_.end()), init_.end());
    auto& p = file_.presentation;
    p.model = std::move(model);
    p.world_names = world_names_;
    p.actions = std::move(actions);
    p.init = init_;
    return std::move(file_);
  }

  GameFile file_;
  Section section_ = Section::None;
  int line_no_ = 0;
  std::string line_;
  std::map<std::string, int> worlds_, events_;
  std::vector<std::string> world_names_, event_names_;
  std::vector<int> world_turn_, turn_after_;
  std::vector<AtomSet> world_val_;
  std::vector<std::vector<std::pair<int, int>>> world_pairs_, event_pairs_;
  std::vector<FormulaPtr> pre_;
  std::vector<std::map<int, FormulaPtr>> post_;
  std::vector<int> init_;
};

}  // namespace detail

inline GameFile parse_game(std::istream& in) { return detail::GameParser().parse(in); }

inline GameFile parse_game(const std::string& text) {
  std::istringstream in(text);
  return parse_game(in);
}

inline GameFile load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return parse_game(in);
}

// ---------------------------------------------------------------------------
// Output.

/// Plain-text description of a folded arena, one construct per line.
inline void write_sidecar(std::ostream& os, const FoldedArena& f, const Vocabulary& voc) {
  const auto& g = f.arena;
  os << "positions " << g.size() << "\n";
  for (int v = 0; v < g.size(); ++v) {
    os << "position " << v << " turn=" << voc.agents.at(g.turn[v]) << " val=" << voc.format_atoms(g.valuation[v]);
    if (!g.names.empty() && !g.names[v].empty()) os << " name=" << g.names[v];
    os << "\n";
  }
  for (int v = 0; v < g.size(); ++v)
    for (int c = 0; c < g.num_actions; ++c)
      if (g.trans[v][c] >= 0) os << "move " << v << " " << g.action_names[c] << " " << g.trans[v][c] << "\n";
  for (int a = 0; a < g.num_agents; ++a)
    for (int v = 0; v < g.size(); ++v)
      for (int u = v + 1; u < g.size(); ++u)
        if (g.related(a, v, u)) os << "rel " << voc.agents[a] << " " << v << " " << u << "\n";
  os << "init";
  for (int v : g.init) os << " " << v;
  os << "\n";
}

using HistoryFormatter = std::function<std::string(const std::vector<int>&)>;
using ActionFormatter = std::function<std::string(int)>;

/// Verdict, strategy as an indented decision tree, certificate play.
inline void write_report(std::ostream& os, const SolveResult& r, const Vocabulary& voc, const HistoryFormatter& history,
                         const ActionFormatter& action, const HistoryFormatter& play_letters) {
  os << "verdict: " << to_string(r.verdict) << "\n";
  if (r.strategy) {
    os << "strategy:";
    if (r.strategy->decisions() == 0) os << " (no decision needed)";
    os << "\n";
    for (const auto& [agent, table] : r.strategy->choices) {
      os << "  agent " << voc.agents.at(agent) << ":\n";
      for (const auto& [h, act] : table)
        os << std::string(4 + 2 * (h.size() - 1), ' ') << history(h) << " -> " << action(act) << "\n";
    }
  }
  if (r.certificate) {
    const auto& c = *r.certificate;
    os << "certificate: " << c.description << "\n";
    if (c.counter_strategy && !c.counter_strategy->empty()) {
      os << "  counter-strategy:\n";
      for (const auto& [v, act] : *c.counter_strategy) os << "    " << history({v}) << " -> " << action(act) << "\n";
    }
    if (c.play) os << "  play: " << play_letters(c.play->stem) << " (" << play_letters(c.play->loop) << ")^w\n";
  }
}

}  // namespace delgames

#endif
