#pragma once

// Brute-force reference semantics, written without the checker or the
// distinction code so the two can be compared.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "epmu/formula.hh"
#include "epmu/system.hh"

namespace epmu {

/// Nodes of a prefix. Membership is exact for nodes of depth <= exactDepth.
struct NodeSet {
  const TreePrefix* prefix = nullptr;
  std::vector<char> members;
  std::size_t exactDepth = 0;
  bool contains(std::size_t x) const { return members.at(x) != 0; }
};

struct TreeEvaluation {
  NodeSet nodes;
  bool rootHolds = false;
};

/// Tree semantics of a closed fixpoint-free formula over a prefix of the
/// unfolding of `m`. Throws DepthInsufficient when the formula's modal depth
/// exceeds the prefix depth.
TreeEvaluation evalTree(const MultiAgentSystem& m, const TreePrefix& t, const FormulaPtr& f);

/// (q, r) such that every run of length <= depth ending in q has an
/// equally observed run ending in r. Only states reached within the depth
/// have rows. Throws CapacityExceeded.
std::set<std::pair<StateId, StateId>> gammaByRuns(const MultiAgentSystem& m, const std::string& agent,
                                                  std::size_t depth, std::size_t cap = kDefaultCap);

/// Number of distinct (state, observation-class end set) pairs reachable;
/// enough depth for gammaByRuns to stabilize.
std::size_t beliefStateCount(const MultiAgentSystem& m, const std::string& agent, std::size_t cap = kDefaultCap);

struct StrategyQuery {
  std::string agent;
  std::string p1;
  std::string p2;
  /// Search horizon; 0 means the number of reachable knowledge sets.
  std::size_t horizon = 0;
  /// "cannot avoid p1 U p2" instead of "can enforce p1 U p2".
  bool dual = false;
};

/// Whether the agent has an observation-based strategy (it sees its
/// observable atoms and its own actions) forcing p1 U p2 on every run from
/// the initial state, searched over knowledge sets of (state, p2-seen) pairs.
/// Choosing an action that is disabled at a state wins there vacuously.
bool reachabilityStrategyOracle(const LabeledSystem& g, const StrategyQuery& q, std::size_t cap = kDefaultCap);

/// Winning region of the player `player` (index into the agents) in the
/// perfect-information turn-based reading of a two-agent game: the player
/// picks an action, then the opponent picks its action and the successor.
/// A stuck opponent loses; the player wins when the largest priority seen
/// infinitely often is even.
std::vector<bool> parityOracle(const LabeledSystem& g, const std::vector<int>& priorities, std::size_t player);

}  // namespace epmu
