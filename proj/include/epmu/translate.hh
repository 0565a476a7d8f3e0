#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "epmu/formula.hh"
#include "epmu/system.hh"

namespace epmu {

/// Throws InvalidSystem unless every edge carries a full, in-range action tuple.
void validateLabeled(const LabeledSystem& g);

/// Plain system whose states are (state, last action tuple); the initial
/// state carries no tuple.
struct CompiledSystem {
  SystemPtr system;
  /// For each compiled state: base state and index into `tuples` (-1 initially).
  std::vector<std::pair<StateId, int>> origin;
  std::vector<std::vector<std::size_t>> tuples;
};

/// Actions become atoms `act:agent=action`; each agent additionally observes
/// its own action atoms. Throws InvalidSystem, CapacityExceeded.
CompiledSystem compileModal(const LabeledSystem& g, std::size_t cap = defaultCap());

/// System to check `formula` on: a labeled file is compiled when the formula
/// uses action modalities, otherwise the system is used as is.
SystemPtr checkTarget(const SystemFile& file, const FormulaPtr& formula, std::size_t cap = defaultCap());

struct Instance {
  LabeledSystem system;
  FormulaPtr formula;
};

/// Bookkeeping system with a "p2 already seen" bit and the fixpoint formula
/// for "agent can enforce p1 U p2" (or, with `dual`, "cannot avoid"). The
/// agent's action x is split into x_0 and x_1; the formula uses x_1.
Instance atlUntilInstance(const LabeledSystem& g, const std::string& agent, const std::string& p1,
                          const std::string& p2, bool dual = false);

/// Name of the atom marking states after a p2 state in atlUntilInstance.
std::string pastAtom(const MultiAgentSystem& m, const std::string& p2);

/// One-step coalition operators for a single agent. Throws
/// UnsupportedCoalition when the coalition is not a singleton.
FormulaPtr coalitionNext(const LabeledSystem& g, const std::set<std::string>& coalition, const FormulaPtr& f,
                         bool existential = true);

struct ParityGame {
  LabeledSystem game;  // players are the first two agents
  std::vector<int> priorities;
};

/// Adds atoms pr_k for each priority and returns the fixpoint formula that
/// holds when `player` (0 or 1) wins. Priorities must be >= 1.
Instance parityEncoding(const ParityGame& g, std::size_t player);

std::string priorityAtom(int k);

}  // namespace epmu
