#include "epmu/system.hh"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "epmu/error.hh"

namespace epmu {

using json = nlohmann::ordered_json;

std::size_t defaultCap() {
  if (const char* env = std::getenv("EPMU_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultCap;
}

MultiAgentSystem::MultiAgentSystem(std::vector<std::string> atoms, std::vector<Agent> agents,
                                   std::vector<AtomSet> labels, std::vector<std::vector<StateId>> successors,
                                   StateId initial, std::vector<std::string> names)
    : atoms_(std::move(atoms)),
      agents_(std::move(agents)),
      labels_(std::move(labels)),
      succ_(std::move(successors)),
      initial_(initial),
      names_(std::move(names)) {
  const std::size_t n = labels_.size();
  if (n == 0) throw InvalidSystem("system has no states");
  if (succ_.size() != n || names_.size() != n) throw InvalidSystem("inconsistent state tables");
  if (initial_ >= n) throw InvalidSystem("initial state out of range");
  for (auto& l : labels_)
    if (l.size() != atoms_.size()) throw InvalidSystem("label width differs from atom count");
  for (auto& a : agents_)
    if (a.observable.size() != atoms_.size()) throw InvalidSystem("observable set width differs from atom count");
  for (auto& s : succ_) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (auto r : s)
      if (r >= n) throw InvalidSystem("transition target out of range");
  }
}

std::size_t MultiAgentSystem::numTransitions() const {
  std::size_t t = 0;
  for (auto& s : succ_) t += s.size();
  return t;
}

std::optional<std::size_t> MultiAgentSystem::atomIndex(const std::string& p) const {
  auto it = std::find(atoms_.begin(), atoms_.end(), p);
  if (it == atoms_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - atoms_.begin());
}

StateSet MultiAgentSystem::statesWith(const std::string& p) const {
  auto idx = atomIndex(p);
  if (!idx) throw UnknownAtom(p);
  StateSet s(numStates());
  for (StateId q = 0; q < numStates(); ++q) s[q] = labels_[q][*idx];
  return s;
}

std::optional<std::size_t> MultiAgentSystem::agentIndex(const std::string& a) const {
  for (std::size_t i = 0; i < agents_.size(); ++i)
    if (agents_[i].name == a) return i;
  return std::nullopt;
}

const Agent& MultiAgentSystem::agent(const std::string& a) const {
  auto idx = agentIndex(a);
  if (!idx) throw UnknownAgent(a);
  return agents_[*idx];
}

ObservabilityMap MultiAgentSystem::observability() const {
  ObservabilityMap out;
  for (auto& a : agents_) {
    auto& obs = out[a.name];
    forEach(a.observable, [&](StateId i) { obs.insert(atoms_[i]); });
  }
  return out;
}

std::vector<std::string> MultiAgentSystem::labelNames(StateId q) const {
  std::vector<std::string> out;
  forEach(labels_.at(q), [&](StateId i) { out.push_back(atoms_[i]); });
  return out;
}

std::vector<StateId> MultiAgentSystem::deadlocks() const {
  std::vector<StateId> out;
  for (StateId q = 0; q < numStates(); ++q)
    if (succ_[q].empty()) out.push_back(q);
  return out;
}

MultiAgentSystem MultiAgentSystem::withAgents(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& agents) const {
  std::vector<Agent> roster;
  for (auto& [name, obs] : agents) {
    Agent a{name, AtomSet(atoms_.size())};
    for (auto& p : obs) {
      auto idx = atomIndex(p);
      if (!idx) throw UnknownAtom(p);
      a.observable.set(*idx);
    }
    roster.push_back(std::move(a));
  }
  return MultiAgentSystem(atoms_, std::move(roster), labels_, succ_, initial_, names_);
}

// ---------------------------------------------------------------------------

BuiltSystem buildSystem(const SystemSpec& spec) {
  BuiltSystem out;
  std::map<std::string, std::size_t> atomIdx;
  for (auto& p : spec.atoms) {
    if (!atomIdx.emplace(p, atomIdx.size()).second) throw InvalidSystem("duplicate atom " + p);
  }
  auto atomBits = [&](const std::vector<std::string>& names) {
    AtomSet s(spec.atoms.size());
    for (auto& p : names) {
      auto it = atomIdx.find(p);
      if (it == atomIdx.end()) throw UnknownAtom(p);
      s.set(it->second);
    }
    return s;
  };

  std::map<long, std::size_t> byId;
  for (std::size_t i = 0; i < spec.states.size(); ++i) {
    if (!byId.emplace(spec.states[i].id, i).second)
      throw InvalidSystem("duplicate state id " + std::to_string(spec.states[i].id));
  }
  auto lookup = [&](long id, const char* what) {
    auto it = byId.find(id);
    if (it == byId.end()) throw InvalidSystem(std::string(what) + " references unknown state " + std::to_string(id));
    return it->second;
  };
  if (spec.states.empty()) throw InvalidSystem("system has no states");
  std::size_t init = lookup(spec.initial, "initial");

  std::vector<std::vector<std::size_t>> succ(spec.states.size());
  for (auto& [from, to] : spec.transitions) succ[lookup(from, "transition")].push_back(lookup(to, "transition"));

  std::vector<char> seen(spec.states.size(), 0);
  std::deque<std::size_t> queue{init};
  seen[init] = 1;
  while (!queue.empty()) {
    auto q = queue.front();
    queue.pop_front();
    for (auto r : succ[q])
      if (!seen[r]) {
        seen[r] = 1;
        queue.push_back(r);
      }
  }

  std::vector<long> dropped;
  std::vector<std::size_t> dense(spec.states.size(), 0);
  StateId next = 0;
  for (std::size_t i = 0; i < spec.states.size(); ++i) {
    if (seen[i]) {
      dense[i] = next++;
      out.externalIds.push_back(spec.states[i].id);
    } else {
      dropped.push_back(spec.states[i].id);
    }
  }
  for (long id : dropped) out.warnings.push_back("state " + std::to_string(id) + " is unreachable and was dropped");

  std::vector<AtomSet> labels;
  std::vector<std::vector<StateId>> dsucc;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < spec.states.size(); ++i) {
    if (!seen[i]) continue;
    auto& st = spec.states[i];
    labels.push_back(atomBits(st.atoms));
    names.push_back(st.name.empty() ? std::to_string(st.id) : st.name);
    std::vector<StateId> s;
    for (auto r : succ[i]) s.push_back(static_cast<StateId>(dense[r]));
    dsucc.push_back(std::move(s));
  }
  std::vector<Agent> agents;
  std::set<std::string> agentNames;
  for (auto& [name, obs] : spec.agents) {
    if (!agentNames.insert(name).second) throw InvalidSystem("duplicate agent " + name);
    agents.push_back({name, atomBits(obs)});
  }
  out.system = std::make_shared<const MultiAgentSystem>(spec.atoms, std::move(agents), std::move(labels),
                                                        std::move(dsucc), static_cast<StateId>(dense[init]),
                                                        std::move(names));
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

long stateRef(const json& j, const char* what) {
  if (!j.is_number_integer()) throw InvalidSystem(std::string(what) + ": state ids must be integers");
  return j.get<long>();
}

std::vector<std::string> stringList(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidSystem(std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (auto& x : j) {
    if (!x.is_string()) throw InvalidSystem(std::string(what) + " must be an array of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

}  // namespace

SystemFile parseSystemFile(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidSystem(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidSystem("system file must be a JSON object");
  if (!doc.contains("states")) throw InvalidSystem("missing \"states\"");
  if (!doc.contains("initial")) throw InvalidSystem("missing \"initial\" state");

  SystemSpec spec;
  if (doc.contains("atoms")) spec.atoms = stringList(doc["atoms"], "\"atoms\"");
  std::map<long, int> priorityById;
  bool anyPriority = false;
  for (auto& st : doc["states"]) {
    if (!st.is_object() || !st.contains("id")) throw InvalidSystem("every state needs an \"id\"");
    SystemSpec::State s;
    s.id = stateRef(st["id"], "state");
    if (st.contains("atoms")) s.atoms = stringList(st["atoms"], "state atoms");
    if (st.contains("name")) s.name = st["name"].get<std::string>();
    if (st.contains("priority")) {
      if (!st["priority"].is_number_integer()) throw InvalidSystem("priority must be an integer");
      priorityById[s.id] = st["priority"].get<int>();
      anyPriority = true;
    }
    spec.states.push_back(std::move(s));
  }
  spec.initial = stateRef(doc["initial"], "initial");
  if (doc.contains("transitions")) {
    for (auto& t : doc["transitions"]) {
      if (!t.is_array() || t.size() != 2) throw InvalidSystem("transitions must be [from, to] pairs");
      spec.transitions.emplace_back(stateRef(t[0], "transition"), stateRef(t[1], "transition"));
    }
  }
  if (doc.contains("agents")) {
    if (!doc["agents"].is_object()) throw InvalidSystem("\"agents\" must be an object");
    for (auto& [name, a] : doc["agents"].items()) {
      std::vector<std::string> obs;
      if (a.contains("obs")) obs = stringList(a["obs"], "agent obs");
      spec.agents.emplace_back(name, std::move(obs));
    }
  }

  // Labeled transitions: [[from, {"agent": "action", ...}, to], ...].
  struct RawEdge {
    long from;
    std::vector<std::size_t> actions;
    long to;
  };
  std::optional<std::vector<std::vector<std::string>>> alphabets;
  std::vector<RawEdge> rawEdges;
  if (doc.contains("actions")) {
    const json& acts = doc["actions"];
    if (!acts.is_object()) throw InvalidSystem("\"actions\" must be an object");
    alphabets.emplace();
    for (auto& [name, obs] : spec.agents) {
      (void)obs;
      if (!acts.contains("alphabets") || !acts["alphabets"].contains(name))
        throw InvalidSystem("missing action alphabet for agent " + name);
      alphabets->push_back(stringList(acts["alphabets"][name], "alphabet"));
    }
    if (acts.contains("alphabets")) {
      for (auto& [name, _] : acts["alphabets"].items()) {
        bool known = std::any_of(spec.agents.begin(), spec.agents.end(), [&](auto& a) { return a.first == name; });
        if (!known) throw UnknownAgent(name);
      }
    }
    std::set<std::pair<long, long>> derived;
    if (acts.contains("transitions")) {
      for (auto& t : acts["transitions"]) {
        if (!t.is_array() || t.size() != 3 || !t[1].is_object())
          throw InvalidSystem("labeled transitions must be [from, {agent: action}, to]");
        RawEdge e{stateRef(t[0], "transition"), {}, stateRef(t[2], "transition")};
        if (t[1].size() != spec.agents.size()) throw InvalidSystem("labeled transition lacks a full action tuple");
        for (std::size_t i = 0; i < spec.agents.size(); ++i) {
          const auto& name = spec.agents[i].first;
          if (!t[1].contains(name)) throw InvalidSystem("labeled transition lacks an action for agent " + name);
          std::string act = t[1][name].get<std::string>();
          auto& alpha = (*alphabets)[i];
          auto it = std::find(alpha.begin(), alpha.end(), act);
          if (it == alpha.end()) throw InvalidSystem("undeclared action " + act + " for agent " + name);
          e.actions.push_back(static_cast<std::size_t>(it - alpha.begin()));
        }
        derived.emplace(e.from, e.to);
        rawEdges.push_back(std::move(e));
      }
    }
    if (doc.contains("transitions")) {
      std::set<std::pair<long, long>> plain(spec.transitions.begin(), spec.transitions.end());
      if (plain != derived) throw InvalidSystem("\"transitions\" disagree with the labeled transitions");
    } else {
      spec.transitions.assign(derived.begin(), derived.end());
    }
  }

  BuiltSystem built = buildSystem(spec);
  SystemFile out;
  out.system = built.system;
  out.externalIds = built.externalIds;
  out.warnings = built.warnings;
  std::map<long, StateId> dense;
  for (std::size_t i = 0; i < built.externalIds.size(); ++i) dense[built.externalIds[i]] = static_cast<StateId>(i);
  if (alphabets) {
    ActionLabels labels;
    labels.alphabets = *alphabets;
    for (auto& e : rawEdges) {
      auto f = dense.find(e.from);
      if (f == dense.end()) continue;  // unreachable source
      labels.edges.push_back({f->second, e.actions, dense.at(e.to)});
    }
    out.actions = std::move(labels);
  }
  if (anyPriority) {
    std::vector<int> prio;
    for (long id : built.externalIds) {
      auto it = priorityById.find(id);
      if (it == priorityById.end()) throw InvalidSystem("state " + std::to_string(id) + " has no priority");
      prio.push_back(it->second);
    }
    out.priorities = std::move(prio);
  }
  return out;
}

SystemPtr parseSystem(const std::string& text, std::vector<std::string>* warnings) {
  SystemFile f = parseSystemFile(text);
  if (warnings) *warnings = f.warnings;
  return f.system;
}

std::string writeSystemFile(const MultiAgentSystem& m, const ActionLabels* actions,
                            const std::vector<int>* priorities) {
  json doc;
  doc["atoms"] = m.atoms();
  json states = json::array();
  for (StateId q = 0; q < m.numStates(); ++q) {
    json s;
    s["id"] = q + 1;
    s["atoms"] = m.labelNames(q);
    s["name"] = m.stateName(q);
    if (priorities) s["priority"] = priorities->at(q);
    states.push_back(std::move(s));
  }
  doc["states"] = std::move(states);
  doc["initial"] = m.initial() + 1;
  json trans = json::array();
  for (StateId q = 0; q < m.numStates(); ++q)
    for (auto r : m.successors(q)) trans.push_back({q + 1, r + 1});
  doc["transitions"] = std::move(trans);
  json agents = json::object();
  for (auto& a : m.agents()) {
    std::vector<std::string> obs;
    forEach(a.observable, [&](StateId i) { obs.push_back(m.atoms()[i]); });
    agents[a.name] = json{{"obs", obs}};
  }
  doc["agents"] = std::move(agents);
  if (actions) {
    json alpha = json::object();
    for (std::size_t i = 0; i < m.agents().size(); ++i) alpha[m.agents()[i].name] = actions->alphabets.at(i);
    json edges = json::array();
    for (auto& e : actions->edges) {
      json tuple = json::object();
      for (std::size_t i = 0; i < m.agents().size(); ++i)
        tuple[m.agents()[i].name] = actions->alphabets[i].at(e.actions.at(i));
      edges.push_back({e.from + 1, tuple, e.to + 1});
    }
    doc["actions"] = json{{"alphabets", alpha}, {"transitions", edges}};
  }
  return doc.dump(2) + "\n";
}

std::string toDot(const MultiAgentSystem& m) {
  auto escape = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out;
  };
  std::ostringstream os;
  os << "digraph system {\n";
  os << "  init [shape=point];\n";
  for (StateId q = 0; q < m.numStates(); ++q) {
    std::string atoms;
    for (auto& p : m.labelNames(q)) atoms += (atoms.empty() ? "" : ",") + p;
    os << "  s" << q << " [label=\"" << escape(m.stateName(q)) << " | " << escape(atoms) << "\"];\n";
  }
  os << "  init -> s" << m.initial() << ";\n";
  for (StateId q = 0; q < m.numStates(); ++q)
    for (auto r : m.successors(q)) os << "  s" << q << " -> s" << r << ";\n";
  os << "}\n";
  return os.str();
}

SerialVerdict validateSerial(const MultiAgentSystem& m, bool allowDeadlock) {
  SerialVerdict v;
  v.deadlocks = m.deadlocks();
  if (v.deadlocks.empty()) return v;
  std::string list;
  for (auto q : v.deadlocks) list += (list.empty() ? "" : ", ") + m.stateName(q);
  if (allowDeadlock) {
    v.warnings.push_back("deadlocked states (" + list + ") accepted; AX holds vacuously there");
  } else {
    v.ok = false;
  }
  return v;
}

// ---------------------------------------------------------------------------
// In-splittings

InSplitting identitySplitting(const SystemPtr& m) {
  InSplitting s{m, m, std::vector<StateId>(m->numStates())};
  for (StateId q = 0; q < m->numStates(); ++q) s.map[q] = q;
  return s;
}

SplitVerdict verifyInSplitting(const InSplitting& s) {
  const auto& fine = *s.fine;
  const auto& coarse = *s.coarse;
  auto name1 = [&](StateId q) { return fine.stateName(q); };
  auto name2 = [&](StateId q) { return coarse.stateName(q); };
  if (s.map.size() != fine.numStates()) return {SplitCondition::Shape, "map size differs from the fine state count"};
  if (fine.atoms() != coarse.atoms()) return {SplitCondition::Shape, "systems use different atoms"};
  for (StateId q = 0; q < fine.numStates(); ++q)
    if (s.map[q] >= coarse.numStates()) return {SplitCondition::Shape, "state " + name1(q) + " maps out of range"};

  StateSet image(coarse.numStates());
  for (auto c : s.map) image.set(c);
  if (!image.all()) {
    StateId miss = static_cast<StateId>((~image).find_first());
    return {SplitCondition::Surjective, "coarse state " + name2(miss) + " has no preimage"};
  }
  std::set<std::pair<StateId, StateId>> covered;
  for (StateId q = 0; q < fine.numStates(); ++q) {
    for (auto r : fine.successors(q)) {
      auto cq = s.map[q], cr = s.map[r];
      const auto& cs = coarse.successors(cq);
      if (!std::binary_search(cs.begin(), cs.end(), cr))
        return {SplitCondition::Transitions, "transition " + name1(q) + "->" + name1(r) + " has no image"};
      covered.emplace(cq, cr);
    }
  }
  for (StateId q = 0; q < coarse.numStates(); ++q)
    for (auto r : coarse.successors(q))
      if (!covered.count({q, r}))
        return {SplitCondition::Transitions, "coarse transition " + name2(q) + "->" + name2(r) + " has no preimage"};
  for (StateId q = 0; q < fine.numStates(); ++q)
    if (fine.label(q) != coarse.label(s.map[q]))
      return {SplitCondition::Labels, "state " + name1(q) + " and its image " + name2(s.map[q]) + " differ in labels"};
  for (StateId q = 0; q < fine.numStates(); ++q)
    if (fine.successors(q).size() != coarse.successors(s.map[q]).size())
      return {SplitCondition::OutDegree,
              "state " + name1(q) + " and its image " + name2(s.map[q]) + " differ in out-degree"};
  if (s.map[fine.initial()] != coarse.initial())
    return {SplitCondition::Initial, "initial state " + name1(fine.initial()) + " maps to a non-initial state"};
  return {};
}

bool sameSystem(const MultiAgentSystem& a, const MultiAgentSystem& b) {
  if (&a == &b) return true;
  if (a.numStates() != b.numStates() || a.initial() != b.initial() || a.atoms() != b.atoms()) return false;
  for (StateId q = 0; q < a.numStates(); ++q)
    if (a.label(q) != b.label(q) || a.successors(q) != b.successors(q)) return false;
  return true;
}

InSplitting composeInSplitting(const InSplitting& outer, const InSplitting& inner) {
  if (!sameSystem(*inner.coarse, *outer.fine))
    throw SystemMismatch("cannot compose: inner target differs from outer source");
  InSplitting s{inner.fine, outer.coarse, std::vector<StateId>(inner.map.size())};
  for (std::size_t q = 0; q < inner.map.size(); ++q) s.map[q] = outer.map.at(inner.map[q]);
  return s;
}

StateSet pullback(const InSplitting& s, const StateSet& coarse) {
  StateSet fine(s.map.size());
  for (std::size_t q = 0; q < s.map.size(); ++q) fine[q] = coarse.test(s.map[q]);
  return fine;
}

std::vector<StateId> liftRun(const InSplitting& s, const std::vector<StateId>& coarseRun) {
  std::vector<StateId> out;
  if (coarseRun.empty()) return out;
  if (coarseRun.front() != s.coarse->initial()) throw SystemMismatch("run does not start in the initial state");
  StateId cur = s.fine->initial();
  out.push_back(cur);
  for (std::size_t i = 1; i < coarseRun.size(); ++i) {
    bool found = false;
    for (auto r : s.fine->successors(cur)) {
      if (s.map[r] == coarseRun[i]) {
        cur = r;
        found = true;
        break;
      }
    }
    if (!found) throw SystemMismatch("run cannot be lifted through the in-splitting");
    out.push_back(cur);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tree prefix

TreePrefix::TreePrefix(const MultiAgentSystem& m, std::size_t depth, std::size_t cap)
    : system_(&m), depth_(depth), signatures_(m.agents().size()) {
  nodes_.push_back({m.initial(), -1, 0, 0, 0});
  std::vector<std::map<std::pair<int, AtomSet>, int>> intern(m.agents().size());
  auto sig = [&](std::size_t a, int parentSig, StateId q) {
    auto key = std::make_pair(parentSig, m.observation(q, m.agents()[a]));
    auto [it, fresh] = intern[a].emplace(key, static_cast<int>(intern[a].size()));
    (void)fresh;
    return it->second;
  };
  for (std::size_t a = 0; a < signatures_.size(); ++a) signatures_[a].push_back(sig(a, -1, m.initial()));
  for (std::size_t x = 0; x < nodes_.size(); ++x) {
    if (nodes_[x].depth == depth_) continue;
    nodes_[x].firstChild = nodes_.size();
    for (auto r : m.successors(nodes_[x].state)) {
      if (nodes_.size() >= cap) throw CapacityExceeded("tree prefix", cap);
      nodes_.push_back({r, static_cast<int>(x), nodes_[x].depth + 1, 0, 0});
      for (std::size_t a = 0; a < signatures_.size(); ++a) signatures_[a].push_back(sig(a, signatures_[a][x], r));
    }
    nodes_[x].numChildren = nodes_.size() - nodes_[x].firstChild;
  }
}

std::vector<StateId> TreePrefix::run(std::size_t x) const {
  std::vector<StateId> out;
  for (int y = static_cast<int>(x); y >= 0; y = nodes_[static_cast<std::size_t>(y)].parent)
    out.push_back(nodes_[static_cast<std::size_t>(y)].state);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<AtomSet> TreePrefix::observations(std::size_t agent, std::size_t x) const {
  std::vector<AtomSet> out;
  for (auto q : run(x)) out.push_back(system_->observation(q, system_->agents().at(agent)));
  return out;
}

TreePrefix boundedUnfold(const MultiAgentSystem& m, std::size_t depth, std::size_t cap) {
  return TreePrefix(m, depth, cap);
}

}  // namespace epmu
