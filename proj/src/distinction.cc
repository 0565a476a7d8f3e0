#include "epmu/distinction.hh"

#include <algorithm>
#include <deque>
#include <functional>
#include <unordered_map>

#include "epmu/error.hh"

namespace epmu {

namespace {

struct BeliefKey {
  StateId state;
  StateSet belief;
  bool operator==(const BeliefKey&) const = default;
};

struct BeliefKeyHash {
  std::size_t operator()(const BeliefKey& k) const {
    std::size_t h = std::hash<StateSet>{}(k.belief);
    return h ^ (static_cast<std::size_t>(k.state) * 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};

std::string beliefName(const MultiAgentSystem& base, StateId s, const StateSet& belief) {
  std::string out = "(" + base.stateName(s) + ",{";
  bool first = true;
  forEach(belief, [&](StateId q) {
    if (!first) out += ",";
    out += base.stateName(q);
    first = false;
  });
  return out + "})";
}

}  // namespace

DistinctionSystem distinction(const SystemPtr& m, const std::string& agentName, std::size_t cap) {
  const MultiAgentSystem& base = *m;
  const Agent& agent = base.agent(agentName);
  const std::size_t n = base.numStates();
  std::vector<AtomSet> obs(n);
  for (StateId q = 0; q < n; ++q) obs[q] = base.observation(q, agent);

  std::unordered_map<BeliefKey, StateId, BeliefKeyHash> index;
  std::vector<BeliefKey> states;
  std::vector<std::vector<StateId>> succ;
  auto intern = [&](StateId s, StateSet belief) {
    BeliefKey key{s, std::move(belief)};
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    if (states.size() >= cap) throw CapacityExceeded("distinction for agent " + agentName, cap);
    auto id = static_cast<StateId>(states.size());
    index.emplace(key, id);
    states.push_back(std::move(key));
    succ.emplace_back();
    return id;
  };

  StateSet init(n);
  init.set(base.initial());
  intern(base.initial(), init);
  for (std::size_t i = 0; i < states.size(); ++i) {
    StateSet post(n);
    forEach(states[i].belief, [&](StateId s) {
      for (auto r : base.successors(s)) post.set(r);
    });
    std::vector<StateId> out;
    for (auto r : base.successors(states[i].state)) {
      StateSet next(n);
      forEach(post, [&](StateId r2) {
        if (obs[r2] == obs[r]) next.set(r2);
      });
      out.push_back(intern(r, std::move(next)));
    }
    succ[i] = std::move(out);
  }

  std::vector<AtomSet> labels;
  std::vector<std::string> names;
  DistinctionSystem d;
  d.agent = agentName;
  d.toBase.map.reserve(states.size());
  for (auto& k : states) {
    labels.push_back(base.label(k.state));
    names.push_back(beliefName(base, k.state, k.belief));
    d.toBase.map.push_back(k.state);
    d.beliefs.push_back(k.belief);
  }
  d.system = std::make_shared<const MultiAgentSystem>(base.atoms(), base.agents(), std::move(labels), std::move(succ),
                                                      0, std::move(names));
  d.toBase.fine = d.system;
  d.toBase.coarse = m;
  return d;
}

GammaRelation::GammaRelation(std::string agent, std::size_t numStates)
    : agent_(std::move(agent)), rows_(numStates, StateSet(numStates)), cols_(numStates, StateSet(numStates)) {}

void GammaRelation::add(StateId q, StateId r) {
  rows_.at(q).set(r);
  cols_.at(r).set(q);
}

std::set<std::pair<StateId, StateId>> GammaRelation::pairs() const {
  std::set<std::pair<StateId, StateId>> out;
  for (StateId q = 0; q < rows_.size(); ++q) forEach(rows_[q], [&](StateId r) { out.emplace(q, r); });
  return out;
}

GammaRelation computeGamma(const SystemPtr& m, const std::string& agent, std::size_t cap) {
  DistinctionSystem d = distinction(m, agent, cap);
  const std::size_t n = m->numStates();
  std::vector<StateSet> rows(n, fullSet(n));
  for (std::size_t i = 0; i < d.beliefs.size(); ++i) rows[d.toBase.map[i]] &= d.beliefs[i];
  GammaRelation g(agent, n);
  for (StateId q = 0; q < n; ++q) forEach(rows[q], [&](StateId r) { g.add(q, r); });
  return g;
}

GammaRelation distinctionGamma(const DistinctionSystem& d) {
  const std::size_t n = d.system->numStates();
  GammaRelation g(d.agent, n);
  // Group the distinction's states by belief set.
  std::unordered_map<StateSet, std::vector<StateId>> byBelief;
  for (StateId i = 0; i < n; ++i) byBelief[d.beliefs[i]].push_back(i);
  for (StateId i = 0; i < n; ++i)
    for (StateId j : byBelief[d.beliefs[i]])
      if (d.beliefs[i].test(d.toBase.map[j])) g.add(i, j);
  return g;
}

DistinguishedVerdict isDistinguished(const MultiAgentSystem& m, const GammaRelation& g) {
  const auto n = static_cast<StateId>(m.numStates());
  for (StateId q = 0; q < n; ++q)
    if (!g.contains(q, q)) return {false, "reflexivity", {q}};
  for (StateId q = 0; q < n; ++q)
    for (StateId r : members(g.row(q)))
      if (!g.contains(r, q)) return {false, "symmetry", {q, r}};
  for (StateId q = 0; q < n; ++q)
    for (StateId r : members(g.row(q))) {
      if (!g.row(r).is_subset_of(g.row(q))) {
        StateSet missing = g.row(r) - g.row(q);
        return {false, "transitivity", {q, r, static_cast<StateId>(missing.find_first())}};
      }
    }
  const Agent& a = m.agent(g.agent());
  for (StateId q = 0; q < n; ++q)
    for (StateId r : members(g.row(q)))
      for (StateId q2 : m.successors(q))
        for (StateId r2 : m.successors(r))
          if (m.observation(q2, a) == m.observation(r2, a) && !g.contains(q2, r2))
            return {false, "congruence", {q, r, q2, r2}};
  return {};
}

DistinguishedVerdict isDistinguished(const SystemPtr& m, const std::string& agent, std::size_t cap) {
  return isDistinguished(*m, computeGamma(m, agent, cap));
}

Refinement refineForAgents(const SystemPtr& m, const std::set<std::string>& agents, std::size_t cap) {
  std::vector<const Agent*> roster;
  for (auto& a : agents) roster.push_back(&m->agent(a));
  for (std::size_t i = 0; i < roster.size(); ++i)
    for (std::size_t j = i + 1; j < roster.size(); ++j) {
      const auto& pa = roster[i]->observable;
      const auto& pb = roster[j]->observable;
      if (!pa.is_subset_of(pb) && !pb.is_subset_of(pa)) throw NonChainAgents(roster[i]->name, roster[j]->name);
    }
  // Largest observation set first; names break ties.
  std::stable_sort(roster.begin(), roster.end(), [](const Agent* x, const Agent* y) {
    return x->observable.count() > y->observable.count();
  });

  Refinement out;
  out.system = m;
  out.toBase = identitySplitting(m);
  for (const Agent* a : roster) {
    DistinctionSystem d = distinction(out.system, a->name, cap);
    out.toBase = composeInSplitting(out.toBase, d.toBase);
    out.steps.push_back(d.toBase);
    out.order.push_back(a->name);
    out.system = d.system;
  }
  return out;
}

StateSet knowOp(const GammaRelation& g, const StateSet& s) {
  StateSet out(g.numStates());
  for (StateId q = 0; q < g.numStates(); ++q) out[q] = g.column(q).is_subset_of(s);
  return out;
}

StateSet possOp(const GammaRelation& g, const StateSet& s) {
  StateSet out(g.numStates());
  for (StateId q = 0; q < g.numStates(); ++q) out[q] = g.column(q).intersects(s);
  return out;
}

}  // namespace epmu
