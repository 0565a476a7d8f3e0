#include "epmu/translate.hh"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>

#include "epmu/error.hh"

namespace epmu {

void validateLabeled(const LabeledSystem& g) {
  const auto& m = *g.system;
  if (g.actions.alphabets.size() != m.agents().size())
    throw InvalidSystem("action alphabets must be given for every agent");
  for (std::size_t i = 0; i < m.agents().size(); ++i) {
    const auto& alpha = g.actions.alphabets[i];
    std::set<std::string> uniq(alpha.begin(), alpha.end());
    if (uniq.size() != alpha.size()) throw InvalidSystem("duplicate action for agent " + m.agents()[i].name);
  }
  for (const auto& e : g.actions.edges) {
    if (e.from >= m.numStates() || e.to >= m.numStates()) throw InvalidSystem("labeled transition out of range");
    if (e.actions.size() != m.agents().size()) throw InvalidSystem("labeled transition without a full action tuple");
    for (std::size_t i = 0; i < e.actions.size(); ++i)
      if (e.actions[i] >= g.actions.alphabets[i].size()) throw InvalidSystem("undeclared action on a transition");
    const auto& succ = m.successors(e.from);
    if (!std::binary_search(succ.begin(), succ.end(), e.to))
      throw InvalidSystem("labeled transition missing from the transition relation");
  }
}

CompiledSystem compileModal(const LabeledSystem& g, std::size_t cap) {
  validateLabeled(g);
  const auto& m = *g.system;
  const auto& agents = m.agents();

  std::vector<std::string> atoms = m.atoms();
  std::vector<std::vector<std::size_t>> actAtom(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i)
    for (const auto& x : g.actions.alphabets[i]) {
      std::string p = actionAtom(agents[i].name, x);
      if (std::find(atoms.begin(), atoms.end(), p) != atoms.end())
        throw InvalidSystem("atom " + p + " clashes with an action atom");
      actAtom[i].push_back(atoms.size());
      atoms.push_back(p);
    }
  const std::size_t width = atoms.size();

  CompiledSystem out;
  std::map<std::vector<std::size_t>, int> tupleIds;
  std::map<std::pair<StateId, int>, StateId> index;
  std::vector<std::vector<StateId>> succ;
  std::deque<StateId> todo;
  auto intern = [&](StateId q, int t) {
    auto [it, fresh] = index.emplace(std::make_pair(q, t), static_cast<StateId>(out.origin.size()));
    if (fresh) {
      if (out.origin.size() >= cap) throw CapacityExceeded("compiled system", cap);
      out.origin.emplace_back(q, t);
      succ.emplace_back();
      todo.push_back(it->second);
    }
    return it->second;
  };
  std::vector<std::vector<const LabeledEdge*>> edgesFrom(m.numStates());
  for (const auto& e : g.actions.edges) edgesFrom[e.from].push_back(&e);

  intern(m.initial(), -1);
  while (!todo.empty()) {
    StateId s = todo.front();
    todo.pop_front();
    StateId q = out.origin[s].first;
    std::vector<StateId> next;
    for (const LabeledEdge* e : edgesFrom[q]) {
      auto [it, fresh] = tupleIds.emplace(e->actions, static_cast<int>(out.tuples.size()));
      if (fresh) out.tuples.push_back(e->actions);
      next.push_back(intern(e->to, it->second));
    }
    succ[s] = std::move(next);
  }

  std::vector<AtomSet> labels;
  std::vector<std::string> names;
  for (auto [q, t] : out.origin) {
    AtomSet l = m.label(q);
    l.resize(width);
    std::string name = "(" + m.stateName(q) + ",";
    if (t < 0) {
      name += "-";
    } else {
      const auto& tuple = out.tuples[static_cast<std::size_t>(t)];
      for (std::size_t i = 0; i < tuple.size(); ++i) {
        l.set(actAtom[i][tuple[i]]);
        name += (i ? "," : "") + agents[i].name + "=" + g.actions.alphabets[i][tuple[i]];
      }
    }
    labels.push_back(std::move(l));
    names.push_back(name + ")");
  }
  std::vector<Agent> roster;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    Agent a{agents[i].name, agents[i].observable};
    a.observable.resize(width);
    for (auto idx : actAtom[i]) a.observable.set(idx);
    roster.push_back(std::move(a));
  }
  out.system = std::make_shared<const MultiAgentSystem>(std::move(atoms), std::move(roster), std::move(labels),
                                                        std::move(succ), 0, std::move(names));
  return out;
}

std::string pastAtom(const MultiAgentSystem& m, const std::string& p2) {
  std::string name = "past_" + p2;
  while (m.atomIndex(name)) name += "_";
  return name;
}

namespace {

/// All action tuples of the agents other than `skip`, as (agent, action) lists.
std::vector<ActionTuple> otherTuples(const LabeledSystem& g, std::size_t skip) {
  std::vector<ActionTuple> out{{}};
  const auto& agents = g.system->agents();
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (i == skip) continue;
    std::vector<ActionTuple> next;
    for (const auto& t : out)
      for (const auto& x : g.actions.alphabets[i]) {
        ActionTuple u = t;
        u.push_back({agents[i].name, x});
        next.push_back(std::move(u));
      }
    out = std::move(next);
  }
  return out;
}

ActionTuple withChoice(const LabeledSystem& g, std::size_t agent, const std::string& action, const ActionTuple& rest) {
  // Keep the tuple in agent order.
  ActionTuple out;
  const auto& agents = g.system->agents();
  std::size_t j = 0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (i == agent) out.push_back({agents[i].name, action});
    else if (j < rest.size() && rest[j].agent == agents[i].name) out.push_back(rest[j++]);
  }
  return out;
}

/// Either ⋁_x K_a ⋀_y [x,y] f or ⋀_x P_a ⋁_y <x,y> f, with `rename` mapping
/// the agent's action names to those used in the modalities.
FormulaPtr strategyStep(const LabeledSystem& g, std::size_t agent, bool existential,
                        const std::function<std::string(const std::string&)>& rename,
                        const std::function<FormulaPtr(FormulaPtr)>& wrap, const FormulaPtr& f) {
  const std::string& name = g.system->agents()[agent].name;
  auto others = otherTuples(g, agent);
  std::vector<FormulaPtr> outer;
  for (const auto& x : g.actions.alphabets[agent]) {
    std::vector<FormulaPtr> inner;
    for (const auto& y : others) {
      ActionTuple t = withChoice(g, agent, rename(x), y);
      inner.push_back(existential ? box(t, f) : diamond(t, f));
    }
    FormulaPtr body = wrap(existential ? conjAll(inner) : disjAll(inner));
    outer.push_back(existential ? know(name, body) : poss(name, body));
  }
  return existential ? disjAll(outer) : conjAll(outer);
}

}  // namespace

Instance atlUntilInstance(const LabeledSystem& g, const std::string& agent, const std::string& p1,
                          const std::string& p2, bool dual) {
  validateLabeled(g);
  const auto& m = *g.system;
  auto ai = m.agentIndex(agent);
  if (!ai) throw UnknownAgent(agent);
  if (!m.atomIndex(p1)) throw UnknownAtom(p1);
  auto p2i = m.atomIndex(p2);
  if (!p2i) throw UnknownAtom(p2);
  const std::string past = pastAtom(m, p2);

  // States (q, bit) get id 2q + bit.
  const std::size_t n = m.numStates();
  std::vector<std::string> atoms = m.atoms();
  atoms.push_back(past);
  const std::size_t pastIdx = atoms.size() - 1;
  std::vector<AtomSet> labels;
  std::vector<std::string> names;
  for (StateId q = 0; q < n; ++q)
    for (int bit = 0; bit < 2; ++bit) {
      AtomSet l = m.label(q);
      l.resize(atoms.size());
      if (bit) l.set(pastIdx);
      labels.push_back(std::move(l));
      names.push_back("(" + m.stateName(q) + "," + std::to_string(bit) + ")");
    }
  std::vector<Agent> roster;
  for (const auto& a : m.agents()) {
    Agent b{a.name, a.observable};
    b.observable.resize(atoms.size());
    roster.push_back(std::move(b));
  }

  ActionLabels acts;
  acts.alphabets = g.actions.alphabets;
  auto& own = acts.alphabets[*ai];
  own.clear();
  for (const auto& x : g.actions.alphabets[*ai]) {
    own.push_back(x + "_0");
    own.push_back(x + "_1");
  }
  std::vector<std::vector<StateId>> succ(2 * n);
  auto add = [&](StateId from, const std::vector<std::size_t>& tuple, int bit, StateId to) {
    LabeledEdge e{from, tuple, to};
    e.actions[*ai] = 2 * tuple[*ai] + static_cast<std::size_t>(bit);
    acts.edges.push_back(std::move(e));
    succ[from].push_back(to);
  };
  for (const auto& e : g.actions.edges) {
    StateId q0 = 2 * e.from, q1 = 2 * e.from + 1;
    StateId r0 = 2 * e.to, r1 = 2 * e.to + 1;
    add(q0, e.actions, 0, r0);
    add(q1, e.actions, 0, r1);
    add(q1, e.actions, 1, r1);
    add(q0, e.actions, 1, m.label(e.from).test(*p2i) ? r1 : r0);
  }
  Instance out;
  out.system.system = std::make_shared<const MultiAgentSystem>(std::move(atoms), std::move(roster), std::move(labels),
                                                               std::move(succ), 2 * m.initial(), std::move(names));
  out.system.actions = std::move(acts);

  FormulaPtr z = var("Z");
  auto goal = [&](FormulaPtr step) { return disj(atom(p2), disj(atom(past), conj(atom(p1), step))); };
  auto rename = [](const std::string& x) { return x + "_1"; };
  // The modalities refer to the original alphabet shape, so build them on
  // the input game and rename the agent's actions.
  out.formula = mu("Z", strategyStep(g, *ai, !dual, rename, goal, z));
  return out;
}

FormulaPtr coalitionNext(const LabeledSystem& g, const std::set<std::string>& coalition, const FormulaPtr& f,
                         bool existential) {
  if (coalition.size() != 1) throw UnsupportedCoalition("coalition operators are supported for single agents only");
  auto ai = g.system->agentIndex(*coalition.begin());
  if (!ai) throw UnknownAgent(*coalition.begin());
  validateLabeled(g);
  return strategyStep(
      g, *ai, existential, [](const std::string& x) { return x; }, [](FormulaPtr b) { return b; }, f);
}

SystemPtr checkTarget(const SystemFile& file, const FormulaPtr& formula, std::size_t cap) {
  // Unlabeled systems may already be compiled and carry the action atoms.
  if (!hasActionModalities(formula) || !file.actions) return file.system;
  return compileModal({file.system, *file.actions}, cap).system;
}

std::string priorityAtom(int k) { return "pr_" + std::to_string(k); }

Instance parityEncoding(const ParityGame& pg, std::size_t player) {
  const LabeledSystem& g = pg.game;
  validateLabeled(g);
  const auto& m = *g.system;
  if (m.agents().size() < 2) throw InvalidSystem("a parity game needs two agents");
  if (player > 1) throw InvalidSystem("player must be 0 or 1");
  if (pg.priorities.size() != m.numStates()) throw InvalidSystem("priority missing for some state");
  int top = 0;
  for (int p : pg.priorities) {
    if (p < 1) throw InvalidSystem("priorities must be at least 1");
    top = std::max(top, p);
  }
  if (top % 2) ++top;

  std::vector<std::string> atoms = m.atoms();
  const std::size_t base = atoms.size();
  for (int k = 1; k <= top; ++k) {
    if (m.atomIndex(priorityAtom(k))) throw InvalidSystem("atom " + priorityAtom(k) + " is reserved");
    atoms.push_back(priorityAtom(k));
  }
  std::vector<AtomSet> labels;
  std::vector<std::vector<StateId>> succ;
  std::vector<std::string> names;
  for (StateId q = 0; q < m.numStates(); ++q) {
    AtomSet l = m.label(q);
    l.resize(atoms.size());
    l.set(base + static_cast<std::size_t>(pg.priorities[q] - 1));
    labels.push_back(std::move(l));
    succ.push_back(m.successors(q));
    names.push_back(m.stateName(q));
  }
  std::vector<Agent> roster;
  for (const auto& a : m.agents()) {
    Agent b{a.name, a.observable};
    b.observable.resize(atoms.size());
    roster.push_back(std::move(b));
  }
  Instance out;
  out.system.system = std::make_shared<const MultiAgentSystem>(std::move(atoms), std::move(roster), std::move(labels),
                                                               std::move(succ), m.initial(), std::move(names));
  out.system.actions = g.actions;

  auto zname = [](int k) { return "Z" + std::to_string(k); };
  const std::string& name = m.agents()[player].name;
  std::size_t opp = 1 - player;
  std::vector<FormulaPtr> outer;
  for (const auto& x : g.actions.alphabets[player]) {
    std::vector<FormulaPtr> byPriority;
    for (int k = 1; k <= top; ++k) {
      std::vector<FormulaPtr> moves;
      for (const auto& y : g.actions.alphabets[opp]) {
        ActionTuple t(2);
        t[player] = {name, x};
        t[opp] = {m.agents()[opp].name, y};
        moves.push_back(box(t, var(zname(k))));
      }
      byPriority.push_back(conj(atom(priorityAtom(k)), conjAll(moves)));
    }
    outer.push_back(know(name, disjAll(byPriority)));
  }
  FormulaPtr f = disjAll(outer);
  for (int k = 1; k <= top; ++k) f = (k % 2 == 0) ? nu(zname(k), f) : mu(zname(k), f);
  out.formula = f;
  return out;
}

}  // namespace epmu
