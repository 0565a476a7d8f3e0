#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epmu/bits.hh"
#include "epmu/formula.hh"

namespace epmu {

inline constexpr std::size_t kDefaultCap = 1'000'000;

/// Cap from the EPMU_CAP environment variable, or kDefaultCap.
std::size_t defaultCap();

struct Agent {
  std::string name;
  AtomSet observable;  // indexed like MultiAgentSystem::atoms()
};

/// Finite Kripke structure with per-agent observable atoms. States are dense
/// ids 0..n-1; every state is reachable from the initial one. Immutable.
class MultiAgentSystem {
 public:
  MultiAgentSystem(std::vector<std::string> atoms, std::vector<Agent> agents, std::vector<AtomSet> labels,
                   std::vector<std::vector<StateId>> successors, StateId initial, std::vector<std::string> names);

  std::size_t numStates() const { return labels_.size(); }
  std::size_t numTransitions() const;
  StateId initial() const { return initial_; }
  const std::vector<StateId>& successors(StateId q) const { return succ_.at(q); }
  const AtomSet& label(StateId q) const { return labels_.at(q); }
  const std::string& stateName(StateId q) const { return names_.at(q); }

  const std::vector<std::string>& atoms() const { return atoms_; }
  std::optional<std::size_t> atomIndex(const std::string& p) const;
  /// States whose label contains `p`. Throws UnknownAtom.
  StateSet statesWith(const std::string& p) const;

  const std::vector<Agent>& agents() const { return agents_; }
  std::optional<std::size_t> agentIndex(const std::string& a) const;
  /// Throws UnknownAgent.
  const Agent& agent(const std::string& a) const;
  AtomSet observation(StateId q, const Agent& a) const { return labels_.at(q) & a.observable; }
  ObservabilityMap observability() const;

  std::vector<std::string> labelNames(StateId q) const;
  std::vector<StateId> deadlocks() const;

  /// Same structure with a different agent roster (atoms must exist).
  MultiAgentSystem withAgents(const std::vector<std::pair<std::string, std::vector<std::string>>>& agents) const;

 private:
  std::vector<std::string> atoms_;
  std::vector<Agent> agents_;
  std::vector<AtomSet> labels_;
  std::vector<std::vector<StateId>> succ_;
  StateId initial_;
  std::vector<std::string> names_;
};

using SystemPtr = std::shared_ptr<const MultiAgentSystem>;

/// Plain-data description using external state ids, as found in files.
struct SystemSpec {
  struct State {
    long id = 0;
    std::vector<std::string> atoms;
    std::string name;
  };
  std::vector<std::string> atoms;
  std::vector<State> states;
  long initial = 0;
  std::vector<std::pair<long, long>> transitions;
  std::vector<std::pair<std::string, std::vector<std::string>>> agents;
};

struct BuiltSystem {
  SystemPtr system;
  /// External id of each dense state.
  std::vector<long> externalIds;
  std::vector<std::string> warnings;
};

/// Validates and restricts to the reachable part (dropping the rest with a
/// warning). Throws InvalidSystem / UnknownAtom.
BuiltSystem buildSystem(const SystemSpec& spec);

// ---------------------------------------------------------------------------
// Files

struct LabeledEdge {
  StateId from = 0;
  std::vector<std::size_t> actions;  // per agent, index into that agent's alphabet
  StateId to = 0;
};

struct ActionLabels {
  std::vector<std::vector<std::string>> alphabets;  // per agent, same order as agents()
  std::vector<LabeledEdge> edges;
};

/// A system whose transitions carry one action per agent.
struct LabeledSystem {
  SystemPtr system;
  ActionLabels actions;
};

struct SystemFile {
  SystemPtr system;
  std::vector<long> externalIds;
  std::optional<ActionLabels> actions;
  std::optional<std::vector<int>> priorities;
  std::vector<std::string> warnings;
};

SystemFile parseSystemFile(const std::string& text);
SystemPtr parseSystem(const std::string& text, std::vector<std::string>* warnings = nullptr);
std::string writeSystemFile(const MultiAgentSystem& m, const ActionLabels* actions = nullptr,
                            const std::vector<int>* priorities = nullptr);
std::string toDot(const MultiAgentSystem& m);

struct SerialVerdict {
  bool ok = true;
  std::vector<StateId> deadlocks;
  std::vector<std::string> warnings;
};

SerialVerdict validateSerial(const MultiAgentSystem& m, bool allowDeadlock = false);

// ---------------------------------------------------------------------------
// In-splittings

/// A state map from a finer system onto a coarser one.
struct InSplitting {
  SystemPtr fine;
  SystemPtr coarse;
  std::vector<StateId> map;
};

InSplitting identitySplitting(const SystemPtr& m);

enum class SplitCondition { None, Shape, Surjective, Transitions, Labels, OutDegree, Initial };

struct SplitVerdict {
  SplitCondition violated = SplitCondition::None;
  std::string message;
  bool ok() const { return violated == SplitCondition::None; }
};

SplitVerdict verifyInSplitting(const InSplitting& s);

bool sameSystem(const MultiAgentSystem& a, const MultiAgentSystem& b);

/// Maps inner.fine onto outer.coarse. Throws SystemMismatch.
InSplitting composeInSplitting(const InSplitting& outer, const InSplitting& inner);

/// Preimage of a set of coarse states.
StateSet pullback(const InSplitting& s, const StateSet& coarse);

/// Run of the coarse system lifted to the unique matching run of the fine one.
std::vector<StateId> liftRun(const InSplitting& s, const std::vector<StateId>& coarseRun);

// ---------------------------------------------------------------------------
// Depth-bounded unfolding

/// All runs from the initial state of length <= depth, in breadth-first order
/// (children of a node are contiguous and follow the successor order).
class TreePrefix {
 public:
  struct Node {
    StateId state = 0;
    int parent = -1;
    std::size_t depth = 0;
    std::size_t firstChild = 0;
    std::size_t numChildren = 0;
  };

  TreePrefix(const MultiAgentSystem& m, std::size_t depth, std::size_t cap);

  std::size_t depth() const { return depth_; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t x) const { return nodes_.at(x); }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t numAgents() const { return signatures_.size(); }

  /// Id of the agent's observation sequence along the run; equal ids on two
  /// nodes mean same depth and identical observations.
  int signature(std::size_t agent, std::size_t x) const { return signatures_.at(agent).at(x); }
  bool indistinguishable(std::size_t agent, std::size_t x, std::size_t y) const {
    return signature(agent, x) == signature(agent, y);
  }
  std::vector<StateId> run(std::size_t x) const;
  std::vector<AtomSet> observations(std::size_t agent, std::size_t x) const;

 private:
  const MultiAgentSystem* system_;
  std::size_t depth_;
  std::vector<Node> nodes_;
  std::vector<std::vector<int>> signatures_;
};

TreePrefix boundedUnfold(const MultiAgentSystem& m, std::size_t depth, std::size_t cap = kDefaultCap);

}  // namespace epmu
