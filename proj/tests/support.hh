#pragma once

#include <random>
#include <string>
#include <vector>

#include "epmu/formula.hh"
#include "epmu/system.hh"

namespace epmu::testing {

/// 1 -> 2, 1 -> 3, self-loops on 2 and 3; q only at 2; a observes p.
SystemPtr sys1();
/// sys1 with a second agent b observing {p, q}.
SystemPtr sys1ab();
/// 1 -> 2, 1 -> 3, 2 -> 4, 3 -> 4, 3 -> 5, self-loops on 4 and 5; p only at 2.
SystemPtr sys2();
/// 1 -> 2, 1 -> 3, 2 -> 4, 3 -> 3, 4 -> 4; q only at 4; a observes nothing.
SystemPtr sys3();

SystemPtr build(const SystemSpec& spec);

/// Atom names p0, p1, ...; agent names a, b, c.
std::string atomName(std::size_t i);
std::string agentName(std::size_t i);

struct RandomSystemShape {
  std::size_t maxStates = 5;
  std::size_t maxAtoms = 3;
  std::size_t maxAgents = 2;
  std::size_t minStates = 1;
};

/// Serial system; unreachable states are dropped, so fewer states may remain.
SystemPtr randomSystem(std::mt19937& rng, const RandomSystemShape& shape);

/// Random system with agents a, b where the observables of a are a subset of b's.
SystemPtr randomChainSystem(std::mt19937& rng, std::size_t maxStates, std::size_t maxAtoms);

struct RandomFormulaShape {
  std::vector<std::string> atoms;
  std::vector<std::string> agents;  // empty: plain formulas
  std::size_t size = 8;
  bool fixpoints = true;
  std::size_t maxModalDepth = 99;
};

/// Closed formula of at most `shape.size` operators, all binders positive.
FormulaPtr randomFormula(std::mt19937& rng, const RandomFormulaShape& shape);

/// All formulas over the given atoms and agents obtained by up to `steps`
/// rounds of applying unary and binary operators, without fixpoints.
std::vector<FormulaPtr> formulaPool(const std::vector<std::string>& atoms, const std::vector<std::string>& agents,
                                    std::size_t maxDepth, std::size_t count, std::mt19937& rng);

}  // namespace epmu::testing

#include "epmu/checker.hh"
#include "epmu/oracle.hh"

namespace epmu::testing {

struct TreeComparison {
  bool equal = true;
  std::size_t comparedNodes = 0;
  std::string detail;
};

/// Pulls the checker's state set back to the nodes of a depth-D prefix of
/// the input's unfolding and compares with the tree oracle wherever the
/// oracle is exact.
TreeComparison compareWithTree(const SystemPtr& m, const FormulaPtr& f, std::size_t depth);

}  // namespace epmu::testing

namespace epmu::testing {

struct RandomGameShape {
  std::size_t maxStates = 3;
  std::size_t maxActions = 2;
  /// Every state carries its own atom s<i> and both agents see all atoms.
  bool perfectInformation = false;
  /// Attach priorities 1..maxPriority.
  int maxPriority = 0;
};

/// Two agents a and b (p0 and p1 for perfect-information games); every
/// state has at least one enabled action tuple; all states reachable.
SystemFile randomGame(std::mt19937& rng, const RandomGameShape& shape);

LabeledSystem labeled(const SystemFile& f);

}  // namespace epmu::testing
