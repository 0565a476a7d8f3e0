// Acceptance run: one line per criterion, exit status counts unexpected failures.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "epmu/checker.hh"
#include "epmu/distinction.hh"
#include "epmu/error.hh"
#include "epmu/oracle.hh"
#include "epmu/translate.hh"
#include "support.hh"

using namespace epmu;
using namespace epmu::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  // Set when the failure is confined to a part listed as known.
  std::string failedPart;
};

struct Criterion {
  std::string id;
  double limitSeconds;
  std::function<Outcome(std::mt19937&)> run;
};

std::set<std::pair<StateId, StateId>> closedForm(const DistinctionSystem& d) {
  std::set<std::pair<StateId, StateId>> out;
  const std::size_t n = d.system->numStates();
  for (StateId i = 0; i < n; ++i)
    for (StateId j = 0; j < n; ++j)
      if (d.beliefs[i] == d.beliefs[j] && d.beliefs[i].test(d.toBase.map[j])) out.emplace(i, j);
  return out;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// --- 1 ----------------------------------------------------------------------
Outcome distinctionLaws(std::mt19937& rng) {
  int ok = 0, total = 0;
  for (int i = 0; i < 200; ++i) {
    SystemPtr m = randomSystem(rng, {5, 3, 2});
    for (auto& a : m->agents()) {
      ++total;
      auto d = distinction(m, a.name);
      ok += verifyInSplitting(d.toBase).ok() && isDistinguished(d.system, a.name).distinguished;
    }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " distinctions over 200 systems"};
}

// --- 2 ----------------------------------------------------------------------
Outcome coarserRefinement(std::mt19937& rng) {
  int used = 0, ok = 0, attempts = 0;
  while (used < 200 && attempts < 100000) {
    ++attempts;
    SystemPtr m = randomChainSystem(rng, 5, 3);
    if (!isDistinguished(m, "b").distinguished) continue;
    ++used;
    ok += isDistinguished(distinction(m, "a").system, "b").distinguished;
  }
  return {used == 200 && ok == used, std::to_string(ok) + "/" + std::to_string(used) + " b-distinguished samples (" +
                                         std::to_string(attempts) + " drawn)"};
}

// --- 3 ----------------------------------------------------------------------
Outcome gammaCrossCheck(std::mt19937& rng) {
  std::vector<SystemPtr> systems = {sys1(), sys1ab(), sys2(), sys3()};
  for (int i = 0; i < 100; ++i) systems.push_back(randomSystem(rng, {5, 3, 2}));
  int ok = 0, total = 0;
  for (auto& m : systems)
    for (auto& a : m->agents()) {
      ++total;
      bool runs = gammaByRuns(*m, a.name, beliefStateCount(*m, a.name)) == computeGamma(m, a.name).pairs();
      auto d = distinction(m, a.name);
      bool closed = computeGamma(d.system, a.name).pairs() == closedForm(d);
      ok += runs && closed;
    }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " (system, agent) pairs, 4 fixtures + 100 random"};
}

// --- 4 ----------------------------------------------------------------------
Outcome plainInvariance(std::mt19937& rng) {
  int ok = 0;
  for (int i = 0; i < 300; ++i) {
    SystemPtr m = randomSystem(rng, {4, 3, 2});
    FormulaPtr f = randomFormula(rng, {m->atoms(), {}, 8, true});
    const auto& agents = m->agents();
    const auto& c = agents[std::uniform_int_distribution<std::size_t>(0, agents.size() - 1)(rng)].name;
    ok += check(m, f).holds == check(distinction(m, c).system, f).holds;
  }
  return {ok == 300, std::to_string(ok) + "/300 plain formulas keep their verdict"};
}

// --- 5 ----------------------------------------------------------------------
bool nodeSetsAgree(const SystemPtr& m, const TreePrefix& t, const FormulaPtr& f) {
  Verdict v = check(m, f);
  TreeEvaluation e = evalTree(*m, t, f);
  for (std::size_t x = 0; x < t.size(); ++x) {
    if (t.node(x).depth > e.nodes.exactDepth) continue;
    StateId fine = liftRun(v.toInput, t.run(x)).back();
    if (v.satisfying.test(fine) != e.nodes.contains(x)) return false;
  }
  return true;
}

struct NaiveSearch {
  std::size_t searched = 0;
  std::size_t differing = 0;
  std::size_t pipelineMismatch = 0;
  std::string witness;
};

NaiveSearch searchNaiveGap(const SystemPtr& m, const std::vector<FormulaPtr>& pool) {
  NaiveSearch s;
  for (auto& f : pool) {
    ++s.searched;
    TreePrefix t(*m, modalDepth(f), kDefaultCap);
    bool tree = evalTree(*m, t, f).rootHolds;
    bool naive = evaluateUnrefined(m, f).test(m->initial());
    bool full = check(m, f).holds;
    if (full != tree) ++s.pipelineMismatch;
    if (naive != tree) {
      ++s.differing;
      if (s.witness.empty()) s.witness = toString(f);
    }
  }
  return s;
}

std::vector<FormulaPtr> knowledgePool(const std::vector<std::string>& atoms, std::size_t count, std::mt19937& rng) {
  return formulaPool(atoms, {"a"}, 3, count, rng);
}

Outcome diagramPositive(std::mt19937& rng, std::string& detail) {
  std::vector<FormulaPtr> pool = knowledgePool({"p0", "p1"}, 200, rng);
  int systems = 0, agree = 0, compared = 0, attempts = 0;
  while (systems < 50 && attempts < 100000) {
    ++attempts;
    SystemPtr m = randomSystem(rng, {4, 2, 1});
    if (m->atoms().size() != 2 || !isDistinguished(m, "a").distinguished) continue;
    ++systems;
    TreePrefix t(*m, 6, kDefaultCap);
    for (auto& f : pool) {
      ++compared;
      agree += nodeSetsAgree(m, t, f);
    }
  }
  detail = "positive " + std::to_string(agree) + "/" + std::to_string(compared) + " (" + std::to_string(systems) +
           " a-distinguished systems x " + std::to_string(pool.size()) + " formulas)";
  return {systems == 50 && pool.size() == 200 && agree == compared, ""};
}

Outcome diagram(std::mt19937& rng) {
  std::string pos;
  Outcome positive = diagramPositive(rng, pos);
  std::vector<FormulaPtr> pool = knowledgePool({"p"}, 2000, rng);
  NaiveSearch s = searchNaiveGap(sys2(), pool);
  bool negative = s.differing > 0 && s.pipelineMismatch == 0;
  std::string neg = "negative on the second fixture: " + std::to_string(s.differing) + " of " +
                    std::to_string(s.searched) + " formulas separate naive from tree semantics, pipeline mismatches " +
                    std::to_string(s.pipelineMismatch);
  Outcome out;
  out.pass = positive.pass && negative;
  out.detail = pos + "; " + neg;
  if (positive.pass && !negative && s.pipelineMismatch == 0) out.failedPart = "5-negative-SYS2";
  return out;
}

Outcome diagramSupplement(std::mt19937& rng) {
  std::vector<FormulaPtr> pool = knowledgePool({"q"}, 2000, rng);
  NaiveSearch s = searchNaiveGap(sys3(), pool);
  return {s.differing > 0 && s.pipelineMismatch == 0,
          "third fixture: " + std::to_string(s.differing) + " of " + std::to_string(s.searched) +
              " formulas separate naive from tree semantics, pipeline mismatches " +
              std::to_string(s.pipelineMismatch) + (s.witness.empty() ? "" : ", e.g. " + s.witness)};
}

// --- 6 ----------------------------------------------------------------------
Outcome unfolding(std::mt19937& rng) {
  int compared = 0, ok = 0, drawn = 0;
  while (compared < 100 && drawn < 100000) {
    ++drawn;
    SystemPtr m = randomSystem(rng, {3, 2, 1});
    FormulaPtr f = toPositiveForm(randomFormula(rng, {m->atoms(), {"a"}, 7, true}));
    std::size_t binders = 0;
    std::function<void(const FormulaPtr&)> count = [&](const FormulaPtr& g) {
      binders += g->isBinder();
      for (auto& c : g->children()) count(c);
    };
    count(f);
    if (binders != 1) continue;
    Verdict v = check(m, f);
    std::size_t k = v.stats.binders.empty() ? v.stats.finalStates : v.stats.binders[0].regionStates;
    FormulaPtr u = unfoldFixpoint(f, k);
    if (modalDepth(u) > 8) continue;
    ++compared;
    TreePrefix t(*m, modalDepth(u), kDefaultCap);
    ok += evalTree(*m, t, u).rootHolds == v.holds;
  }
  return {compared == 100 && ok == compared,
          std::to_string(ok) + "/" + std::to_string(compared) + " single-binder formulas (" + std::to_string(drawn) +
              " drawn)"};
}

// --- 7 ----------------------------------------------------------------------
Outcome gateGoldens(std::mt19937&) {
  auto system = [](std::vector<std::string> pa, std::vector<std::string> pb) {
    SystemSpec s;
    s.atoms = {"p", "q"};
    s.states = {{1, {"p"}, ""}, {2, {"p", "q"}, ""}, {3, {"q"}, ""}};
    s.transitions = {{1, 2}, {1, 3}, {2, 1}, {3, 3}};
    s.initial = 1;
    s.agents = {{"a", pa}, {"b", pb}};
    return build(s);
  };
  SystemPtr chain = system({"p"}, {"p", "q"});
  SystemPtr incomparable = system({"p"}, {"q"});
  struct Case {
    SystemPtr m;
    std::string formula;
    bool accept;
  };
  std::vector<Case> cases = {
      {incomparable, "K a . K b . nu X . (mu Y . p | EX Y) & AX X", true},
      {incomparable, "AX K a . EX K b . q", true},
      {chain, "mu Z1 . p | K a . EX Z1 & nu Z2 . q & Z1 & K a . EX Z2", true},
      {chain, "mu Z1 . p | K a . EX Z1 & nu Z2 . q & K b . EX Z2", true},
      {incomparable, "C{a,b} p", false},
      {incomparable, "nu Z . p & K a . Z & K b . Z", false},
  };
  int ok = 0;
  std::string bad;
  for (auto& c : cases) {
    FragmentReport r = analyzeFragment(*c.m, parseFormula(c.formula));
    bool right = r.accepted == c.accept && (c.accept || (r.agentA == "a" && r.agentB == "b"));
    ok += right;
    if (!right) bad += " [" + c.formula + "]";
  }
  return {ok == static_cast<int>(cases.size()),
          std::to_string(ok) + "/" + std::to_string(cases.size()) + " classifications" + bad};
}

// --- 8 ----------------------------------------------------------------------
std::vector<LabeledSystem> untilFamily() {
  using nlohmann::json;
  std::vector<LabeledSystem> out;
  auto emit = [&](json j) {
    SystemFile f = parseSystemFile(j.dump());
    out.push_back({f.system, *f.actions});
  };
  // Two states, both agents with two actions, one successor per tuple.
  const std::vector<std::vector<std::string>> second = {{}, {"p2"}, {"p1"}, {"p1", "p2"}};
  for (unsigned delta = 0; delta < 256; ++delta)
    for (auto& label : second)
      for (bool seesTarget : {false, true}) {
        json j;
        j["atoms"] = {"p1", "p2"};
        j["states"] = {{{"id", 1}, {"atoms", {"p1"}}}, {{"id", 2}, {"atoms", label}}};
        j["initial"] = 1;
        j["agents"]["a"]["obs"] = seesTarget ? json::array({"p2"}) : json::array();
        j["agents"]["b"]["obs"] = json::array();
        j["actions"]["alphabets"] = {{"a", {"x", "y"}}, {"b", {"u", "v"}}};
        json tr = json::array();
        int bit = 0;
        for (int q = 1; q <= 2; ++q)
          for (auto x : {"x", "y"})
            for (auto y : {"u", "v"}) tr.push_back(json::array({q, {{"a", x}, {"b", y}}, 1 + ((delta >> bit++) & 1)}));
        j["actions"]["transitions"] = tr;
        if ((delta & 0x0f) == 0) continue;  // second state unreachable
        emit(j);
      }
  // Three states where the agent cannot tell the first two apart.
  for (unsigned code = 0; code < 729; ++code)
    for (bool seesMarker : {false, true}) {
      json j;
      j["atoms"] = {"p1", "p2", "o"};
      j["states"] = {{{"id", 1}, {"atoms", {"p1"}}}, {{"id", 2}, {"atoms", {"p1", "o"}}}, {{"id", 3}, {"atoms", {"p2"}}}};
      j["initial"] = 1;
      j["agents"]["a"]["obs"] = seesMarker ? json::array({"o"}) : json::array();
      j["agents"]["b"]["obs"] = json::array();
      j["actions"]["alphabets"] = {{"a", {"x", "y"}}, {"b", {"u"}}};
      json tr = json::array();
      unsigned c = code;
      for (int q = 1; q <= 3; ++q)
        for (auto x : {"x", "y"}) {
          tr.push_back(json::array({q, {{"a", x}, {"b", "u"}}, 1 + c % 3}));
          c /= 3;
        }
      j["actions"]["transitions"] = tr;
      emit(j);
    }
  return out;
}

Outcome untilSuite(std::mt19937&) {
  auto family = untilFamily();
  int ok = 0, total = 0, wins = 0;
  for (auto& g : family)
    for (bool dual : {false, true}) {
      ++total;
      bool expected = reachabilityStrategyOracle(g, {"a", "p1", "p2", 0, dual});
      Instance inst = atlUntilInstance(g, "a", "p1", "p2", dual);
      CompiledSystem c = compileModal(inst.system);
      ok += check(c.system, inst.formula).holds == expected;
      wins += expected;
    }
  return {total >= 50 && ok == total, std::to_string(ok) + "/" + std::to_string(total) + " instances (" +
                                          std::to_string(family.size()) + " games, both polarities, " +
                                          std::to_string(wins) + " positive)"};
}

// --- 9 ----------------------------------------------------------------------
Outcome paritySuite(std::mt19937& rng) {
  int ok = 0, total = 0, wins = 0;
  for (int i = 0; i < 40; ++i) {
    SystemFile pg = randomGame(rng, {4, 2, true, 4});
    ParityGame game{{pg.system, *pg.actions}, *pg.priorities};
    for (std::size_t player : {0, 1}) {
      ++total;
      bool expected = parityOracle(game.game, game.priorities, player)[pg.system->initial()];
      Instance inst = parityEncoding(game, player);
      CompiledSystem c = compileModal(inst.system);
      ok += check(c.system, inst.formula).holds == expected;
      wins += expected;
    }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " (40 games, both players, " +
                           std::to_string(wins) + " wins)"};
}

// --- 10 ---------------------------------------------------------------------
Outcome blowUp(std::mt19937& rng) {
  FormulaPtr f = parseFormula("K a . EX K b . EX K a . p0");
  // Sizes never shrink along a chain.
  int monotone = 0, used = 0;
  SystemPtr witness;
  std::vector<std::size_t> witnessSizes;
  for (int i = 0; i < 200; ++i) {
    SystemPtr m = randomSystem(rng, {5, 2, 1});
    if (!m->atomIndex("p0")) continue;
    m = std::make_shared<MultiAgentSystem>(m->withAgents({{"a", {}}, {"b", {"p0"}}}));
    ++used;
    Verdict v = check(m, f);
    std::vector<std::size_t> sizes = {v.stats.inputStates};
    for (auto& r : v.stats.refinements) sizes.push_back(r.states);
    bool up = sizes.size() == 4;
    for (std::size_t k = 1; k < sizes.size(); ++k) up = up && sizes[k] >= sizes[k - 1];
    monotone += up;
    if (!witness && sizes.size() == 4 && sizes[3] > sizes[2] && sizes[2] > sizes[1] && sizes[1] > sizes[0]) {
      witness = m;
      witnessSizes = sizes;
    }
  }
  const std::string tally = std::to_string(monotone) + "/" + std::to_string(used) + " monotone chains";
  if (monotone != used || !witness) return {false, tally + ", strict witness " +
                                                      (witness ? "found" : "missing")};
  std::size_t top = witnessSizes.back();
  std::vector<std::string> messages;
  for (int rep = 0; rep < 2; ++rep) {
    try {
      CheckOptions opt;
      opt.cap = top - 1;
      check(witness, f, opt);
      messages.push_back("no exception");
    } catch (const CapacityExceeded& e) {
      messages.push_back(e.what());
    }
  }
  CheckOptions exact;
  exact.cap = top;
  bool fits = true;
  try {
    check(witness, f, exact);
  } catch (const CapacityExceeded&) {
    fits = false;
  }
  bool deterministic = messages[0] == messages[1] && messages[0] != "no exception";
  std::string chain;
  for (auto s : witnessSizes) chain += (chain.empty() ? "" : " -> ") + std::to_string(s);
  return {deterministic && fits, tally + "; witness sizes " + chain + "; cap " +
                                     std::to_string(top - 1) + " -> \"" + messages[0] + "\" twice; cap " +
                                     std::to_string(top) + (fits ? " passes" : " fails")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  unsigned seed = 1;
  std::vector<std::string> known;
  std::vector<std::string> only;
  app.add_option("--seed", seed, "Base seed for all randomized suites");
  app.add_option("--known-failure", known, "Failure part that is expected (e.g. 5-negative-SYS2)");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  std::vector<Criterion> criteria = {
      {"1", 10, distinctionLaws},  {"2", 30, coarserRefinement}, {"3", 30, gammaCrossCheck},
      {"4", 60, plainInvariance},  {"5", 120, diagram},          {"5-supplement", 120, diagramSupplement},
      {"6", 120, unfolding},       {"7", 1, gateGoldens},        {"8", 300, untilSuite},
      {"9", 60, paritySuite},      {"10", 60, blowUp},
  };

  std::cout << "seed " << seed << "\n";
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    std::mt19937 rng(seed * 1000003u + static_cast<unsigned>(i));
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(rng);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool inTime = secs < c.limitSeconds;
    bool pass = o.pass && inTime;
    bool isKnown = !pass && inTime && !o.failedPart.empty() &&
                   std::find(known.begin(), known.end(), o.failedPart) != known.end();
    std::string status = pass ? "PASS" : (isKnown ? "FAIL (known: " + o.failedPart + ")" : "FAIL");
    std::cout << "criterion " << c.id << ": " << status << "  " << o.detail << "  [" << fmt("%.2f", secs) << " s, limit "
              << fmt("%.0f", c.limitSeconds) << " s" << (inTime ? "" : ", too slow") << "]\n";
    if (!pass && !isKnown) ++unexpected;
  }
  std::cout << (unexpected ? "unexpected failures: " + std::to_string(unexpected) : std::string("no unexpected failures"))
            << "\n";
  return unexpected ? 1 : 0;
}
