#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "epmu/bits.hh"
#include "epmu/system.hh"

namespace epmu {

/// The reachable knowledge subset construction of a system for one agent.
/// State i of `system` is the pair (base state `toBase.map[i]`, `beliefs[i]`).
struct DistinctionSystem {
  std::string agent;
  SystemPtr system;
  InSplitting toBase;
  std::vector<StateSet> beliefs;  // over the base system's states
};

/// Builds the a-distinction of `m` by breadth-first search from
/// (q0, {q0}). Throws CapacityExceeded when the state count passes `cap`.
DistinctionSystem distinction(const SystemPtr& m, const std::string& agent, std::size_t cap = defaultCap());

/// Knowledge-transfer relation of one agent: (q, r) is in it when every run
/// ending in q has an observationally equal run ending in r.
class GammaRelation {
 public:
  GammaRelation(std::string agent, std::size_t numStates);

  const std::string& agent() const { return agent_; }
  std::size_t numStates() const { return rows_.size(); }
  bool contains(StateId q, StateId r) const { return rows_.at(q).test(r); }
  void add(StateId q, StateId r);
  /// {r : (q, r) in the relation}
  const StateSet& row(StateId q) const { return rows_.at(q); }
  /// {q : (q, r) in the relation}
  const StateSet& column(StateId r) const { return cols_.at(r); }
  std::set<std::pair<StateId, StateId>> pairs() const;

  bool operator==(const GammaRelation& o) const { return rows_ == o.rows_; }

 private:
  std::string agent_;
  std::vector<StateSet> rows_;
  std::vector<StateSet> cols_;
};

/// Row q is the intersection of the belief sets S over all reachable (q, S).
GammaRelation computeGamma(const SystemPtr& m, const std::string& agent, std::size_t cap = defaultCap());

/// Gamma of a distinction system read off its belief sets:
/// ((s,S), (r,R)) is related iff R == S and r is in S.
GammaRelation distinctionGamma(const DistinctionSystem& d);

struct DistinguishedVerdict {
  bool distinguished = true;
  std::string violated;  // "reflexivity", "symmetry", "transitivity" or "congruence"
  std::vector<StateId> witness;
};

DistinguishedVerdict isDistinguished(const MultiAgentSystem& m, const GammaRelation& gamma);
DistinguishedVerdict isDistinguished(const SystemPtr& m, const std::string& agent, std::size_t cap = defaultCap());

struct Refinement {
  SystemPtr system;
  InSplitting toBase;
  /// One step per applied agent; steps[i] maps onto the system of steps[i-1].
  std::vector<InSplitting> steps;
  std::vector<std::string> order;
};

/// Applies distinctions in decreasing order of observable atoms, so the
/// result is distinguished for every agent given. Throws NonChainAgents.
Refinement refineForAgents(const SystemPtr& m, const std::set<std::string>& agents, std::size_t cap = defaultCap());

/// {q : every s with (s, q) related lies in S}
StateSet knowOp(const GammaRelation& gamma, const StateSet& s);
/// {q : some s in S has (s, q) related}
StateSet possOp(const GammaRelation& gamma, const StateSet& s);

}  // namespace epmu
