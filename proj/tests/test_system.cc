#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "epmu/distinction.hh"
#include "epmu/error.hh"
#include "epmu/system.hh"
#include "support.hh"

using namespace epmu;
using namespace epmu::testing;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(EPMU_TEST_DATA) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> names(const MultiAgentSystem& m, const StateSet& s) {
  std::vector<std::string> out;
  forEach(s, [&](StateId q) { out.push_back(m.stateName(q)); });
  return out;
}

}  // namespace

TEST_SUITE("system") {
  TEST_CASE("fixture file parses") {
    SystemPtr m = parseSystem(slurp("sys1.mas"));
    CHECK(m->numStates() == 3);
    CHECK(m->stateName(m->initial()) == "1");
    CHECK(m->numTransitions() == 4);
    CHECK(sameSystem(*m, *sys1()));
    CHECK(validateSerial(*m).ok);
  }

  TEST_CASE("unreachable states are dropped with a warning") {
    std::vector<std::string> warnings;
    SystemPtr m = parseSystem(slurp("unreachable.mas"), &warnings);
    CHECK(m->numStates() == 1);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("9") != std::string::npos);
  }

  TEST_CASE("observing an undeclared atom is an error") {
    SystemSpec s;
    s.atoms = {"p"};
    s.states = {{1, {}, ""}};
    s.transitions = {{1, 1}};
    s.initial = 1;
    s.agents = {{"a", {"p1"}}};
    CHECK_THROWS_AS(buildSystem(s), UnknownAtom);
    CHECK_THROWS_AS(parseSystem("{\"states\": []}"), InvalidSystem);
    CHECK_THROWS_AS(parseSystem("not json"), InvalidSystem);
    CHECK_THROWS_AS(parseSystem(R"({"states":[{"id":1}],"initial":2})"), InvalidSystem);
  }

  TEST_CASE("deadlocks") {
    SystemPtr m = parseSystem(slurp("deadlock.mas"));
    auto v = validateSerial(*m);
    CHECK_FALSE(v.ok);
    REQUIRE(v.deadlocks.size() == 1);
    CHECK(m->stateName(v.deadlocks[0]) == "1");
    auto w = validateSerial(*m, true);
    CHECK(w.ok);
    CHECK(w.warnings.size() == 1);
  }

  TEST_CASE("write and parse round trip") {
    std::mt19937 rng(3);
    for (int i = 0; i < 50; ++i) {
      SystemPtr m = randomSystem(rng, {});
      SystemPtr back = parseSystem(writeSystemFile(*m));
      CHECK(sameSystem(*m, *back));
    }
    CHECK(toDot(*sys1()).find("digraph") == 0);
  }

  TEST_CASE("labeled transitions and priorities parse") {
    SystemFile g = parseSystemFile(slurp("game.mas"));
    REQUIRE(g.actions);
    CHECK(g.actions->alphabets.size() == 2);
    CHECK(g.actions->edges.size() == 8);
    CHECK(g.system->numTransitions() == 4);
    SystemFile pg = parseSystemFile(slurp("even.pg"));
    REQUIRE(pg.priorities);
    CHECK(*pg.priorities == std::vector<int>{1, 2});
    std::string again = writeSystemFile(*pg.system, &*pg.actions, &*pg.priorities);
    SystemFile back = parseSystemFile(again);
    CHECK(*back.priorities == *pg.priorities);
    CHECK(back.actions->edges.size() == pg.actions->edges.size());
  }

  TEST_CASE("in-splitting checks") {
    SystemPtr m = sys1();
    CHECK(verifyInSplitting(identitySplitting(m)).ok());
    // Collapse states 2 and 3, which carry different labels.
    InSplitting bad{m, m, {0, 1, 1}};
    auto v = verifyInSplitting(bad);
    CHECK_FALSE(v.ok());
    CHECK(v.violated != SplitCondition::None);

    InSplitting collapse{sys2(), sys2(), {0, 1, 2, 3, 3}};
    auto w = verifyInSplitting(collapse);
    CHECK_FALSE(w.ok());
  }

  TEST_CASE("composition and pullback") {
    SystemPtr m = sys1ab();
    auto id = identitySplitting(m);
    auto idid = composeInSplitting(id, id);
    CHECK(idid.map == id.map);
    auto da = distinction(m, "a");
    auto db = distinction(da.system, "b");
    auto both = composeInSplitting(da.toBase, db.toBase);
    CHECK(verifyInSplitting(both).ok());
    CHECK_THROWS_AS(composeInSplitting(identitySplitting(sys1()), distinction(sys2(), "a").toBase), SystemMismatch);

    StateSet s(m->numStates());
    s.set(1);
    CHECK(pullback(both, s) == pullback(db.toBase, pullback(da.toBase, s)));
    CHECK(pullback(id, s) == s);
    CHECK(pullback(both, StateSet(m->numStates())).none());

    auto d2 = distinction(sys2(), "a");
    StateSet four(5);
    four.set(3);
    CHECK(names(*d2.system, pullback(d2.toBase, four)) == std::vector<std::string>{"(4,{4})", "(4,{4,5})"});
  }

  TEST_CASE("bounded unfolding") {
    SystemPtr m = sys1();
    TreePrefix t0(*m, 0, kDefaultCap);
    CHECK(t0.size() == 1);
    CHECK(t0.node(0).state == m->initial());
    TreePrefix t2(*m, 2, kDefaultCap);
    CHECK(t2.size() == 5);

    SystemPtr s2 = sys2();
    TreePrefix u(*s2, 2, kDefaultCap);
    std::size_t via2 = 0, via3 = 0;
    for (std::size_t x = 0; x < u.size(); ++x) {
      auto run = u.run(x);
      if (run.size() != 3 || s2->stateName(run[2]) != "4") continue;
      if (s2->stateName(run[1]) == "2") via2 = x;
      else via3 = x;
    }
    REQUIRE(via2 != via3);
    CHECK_FALSE(u.indistinguishable(0, via2, via3));
    CHECK_THROWS_AS(TreePrefix(*s2, 12, 20), CapacityExceeded);
    CHECK_NOTHROW(TreePrefix(*s2, 12, 40));
  }

  TEST_CASE("lifting through an in-splitting is a bijection on prefixes") {
    std::mt19937 rng(5);
    for (int i = 0; i < 30; ++i) {
      SystemPtr m = randomSystem(rng, {4, 2, 1});
      auto d = distinction(m, "a");
      TreePrefix coarse(*m, 4, kDefaultCap);
      TreePrefix fine(*d.system, 4, kDefaultCap);
      CHECK(coarse.size() == fine.size());
      std::set<std::vector<StateId>> lifted;
      for (std::size_t x = 0; x < coarse.size(); ++x) {
        auto run = coarse.run(x);
        auto up = liftRun(d.toBase, run);
        REQUIRE(up.size() == run.size());
        for (std::size_t k = 0; k < run.size(); ++k) CHECK(d.toBase.map[up[k]] == run[k]);
        lifted.insert(up);
      }
      CHECK(lifted.size() == fine.size());
    }
  }
}
