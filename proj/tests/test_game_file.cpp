#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace delgames;
using namespace testing_support;

namespace {

const char* kRunningExample = R"(# the running example
agents
  a exists
  b forall
atoms p
model
  world w turn=a p
  world v turn=a
  rel a w v
  rel b w v
actions
  event e turn=a pre p
  post e p false
  event f turn=a pre true
  rel b e f
init w
objective F K[a] !p
)";

int error_line(const std::string& text) {
  try {
    parse_game(text);
  } catch (const InputError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(GameFile, ParsesTheRunningExample) {
  auto g = parse_game(kRunningExample);
  const auto& p = g.presentation;
  auto ref = running_example();
  EXPECT_EQ(p.num_agents(), 2);
  EXPECT_EQ(p.vocab.teams, ref.vocab.teams);
  EXPECT_EQ(p.model.valuation, ref.model.valuation);
  EXPECT_EQ(p.model.classes, ref.model.classes);
  EXPECT_EQ(p.actions.classes, ref.actions.classes);
  EXPECT_EQ(p.actions.names, ref.actions.names);
  EXPECT_EQ(p.init, (std::vector<int>{0}));
  auto voc = p.vocab;
  EXPECT_EQ(to_string(g.objective, voc), to_string(parse_formula("F K[a] !p", voc), voc));
  EXPECT_EQ(g.options.mode, InitMode::Objective);
  EXPECT_TRUE(g.warnings.empty());
  // Same product as the hand-built presentation.
  auto m1 = product(p.model, p.actions);
  auto m2 = product(ref.model, ref.actions);
  EXPECT_EQ(canonical_form(PointedModel{m1, 0, {}}), canonical_form(PointedModel{m2, 0, {}}));
}

TEST(GameFile, Options) {
  std::string text = kRunningExample;
  text += "options mode=subjective horizon=7 depth=3\n";
  auto g = parse_game(text);
  EXPECT_EQ(g.options.mode, InitMode::Subjective);
  EXPECT_EQ(g.options.horizon, 7);
  EXPECT_EQ(g.options.depth, 3);
  EXPECT_EQ(error_line(std::string(kRunningExample) + "options horizon=x\n"), 18);
  EXPECT_EQ(error_line(std::string(kRunningExample) + "options speed=3\n"), 18);
}

TEST(GameFile, ClosureWarning) {
  std::string text = R"(agents
  a exists
atoms p
model
  world x turn=a
  world y turn=a
  world z turn=a p
  rel a x y
  rel a y z
actions
  event e turn=a pre true
init x
)";
  auto g = parse_game(text);
  ASSERT_EQ(g.warnings.size(), 1u);
  EXPECT_NE(g.warnings[0].find("closed"), std::string::npos);
  EXPECT_TRUE(g.presentation.model.related(0, 0, 2));
}

TEST(GameFile, ErrorsCarryPositions) {
  try {
    parse_game("agents\n  a exists\natoms p\nmodel\n  world w turn=c p\n");
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_EQ(e.line(), 5);
    EXPECT_EQ(e.column(), 16);
    EXPECT_NE(std::string(e.what()).find("unknown agent 'c'"), std::string::npos);
  }
  try {
    parse_game(std::string(kRunningExample) + "objective F (p &\n");
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_EQ(e.line(), 18);
    EXPECT_GT(e.column(), 11);
  }
  EXPECT_EQ(error_line("agents\n  a exists\n  a forall\n"), 3);
  EXPECT_EQ(error_line("agents\n  a maybe\n"), 2);
  EXPECT_EQ(error_line("world w turn=a\n"), 1);
  EXPECT_EQ(error_line("agents\n a exists\natoms p\nactions\n  event e turn=a pre F p\n"), 5);
  EXPECT_EQ(error_line("agents\n a exists\natoms p\nactions\n  event e turn=a pre p\n  post e p K[a] p\n"), 6);
  EXPECT_EQ(error_line("agents\n a exists\natoms p\nactions\n  event e turn=a pre p\n  post e q p\n"), 6);
}

TEST(GameFile, MissingParts) {
  EXPECT_THROW(parse_game(""), InputError);
  EXPECT_THROW(parse_game("# nothing here\n"), InputError);
  EXPECT_THROW(parse_game("agents\n a exists\natoms p\nmodel\n world w turn=a\nactions\n event e turn=a pre p\n"),
               InputError);
  EXPECT_THROW(load_game("/nonexistent/file.game"), InputError);
}

TEST(GameFile, HypothesesAreLeftToTheCaller) {
  // a confuses worlds with different turn owners; parsing accepts it, checking does not.
  auto g = parse_game(R"(agents
  a exists
  b forall
model
  world w turn=a
  world v turn=b
  rel a w v
actions
  event e turn=a pre true
init w
)");
  EXPECT_FALSE(check_h1(g.presentation.model).pass);
}

TEST(GameFile, Sidecar) {
  auto p = parse_game(kRunningExample).presentation;
  auto f = fold_propositional(p);
  std::ostringstream os;
  write_sidecar(os, f, p.vocab);
  auto text = os.str();
  EXPECT_EQ(text.rfind("positions 5\n", 0), 0u) << text;
  EXPECT_NE(text.find("position 0 turn=a val={p}"), std::string::npos) << text;
  EXPECT_NE(text.find("move 0 e "), std::string::npos);
  EXPECT_NE(text.find("rel b 0 1"), std::string::npos);
  EXPECT_NE(text.find("\ninit 0\n"), std::string::npos);
}

TEST(GameFile, Report) {
  SolveResult r{Verdict::win(), StrategyTree{}, std::nullopt};
  r.strategy->set(0, {0}, 1);
  r.strategy->set(0, {0, 1, 1}, 0);
  Vocabulary v;
  v.add_agent("a", Team::Exists);
  auto hist = [](const std::vector<int>& h) {
    std::string s;
    for (int x : h) s += std::to_string(x);
    return s;
  };
  auto act = [](int c) { return "c" + std::to_string(c); };
  std::ostringstream os;
  write_report(os, r, v, hist, act, hist);
  EXPECT_EQ(os.str(), "verdict: WIN\nstrategy:\n  agent a:\n    0 -> c1\n        011 -> c0\n");

  SolveResult l{Verdict::lose(), std::nullopt, Certificate{"no luck", std::map<int, int>{{2, 0}}, LassoPlay{{0}, {2}}}};
  std::ostringstream os2;
  write_report(os2, l, v, hist, act, hist);
  EXPECT_EQ(os2.str(), "verdict: LOSE\ncertificate: no luck\n  counter-strategy:\n    2 -> c0\n  play: 0 (2)^w\n");
}
