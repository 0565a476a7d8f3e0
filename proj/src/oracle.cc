#include "epmu/oracle.hh"

#include <algorithm>
#include <deque>
#include <functional>

#include "epmu/error.hh"

namespace epmu {

// ---------------------------------------------------------------------------
// Tree semantics on a prefix

namespace {

class TreeEval {
 public:
  TreeEval(const MultiAgentSystem& m, const TreePrefix& t) : m_(m), t_(t) {}

  const std::vector<char>& eval(const FormulaPtr& f) {
    auto it = memo_.find(f.get());
    if (it != memo_.end()) return it->second;
    std::vector<char> out = compute(f);
    return memo_.emplace(f.get(), std::move(out)).first->second;
  }

 private:
  std::vector<char> compute(const FormulaPtr& f) {
    const std::size_t n = t_.size();
    std::vector<char> out(n, 0);
    switch (f->op()) {
      case Op::True:
        std::fill(out.begin(), out.end(), 1);
        break;
      case Op::False:
        break;
      case Op::Atom:
      case Op::NegAtom: {
        auto idx = m_.atomIndex(f->name());
        if (!idx) throw UnknownAtom(f->name());
        for (std::size_t x = 0; x < n; ++x) {
          bool has = m_.label(t_.node(x).state).test(*idx);
          out[x] = f->op() == Op::Atom ? has : !has;
        }
        break;
      }
      case Op::Not: {
        const auto& a = eval(f->child());
        for (std::size_t x = 0; x < n; ++x) out[x] = !a[x];
        break;
      }
      case Op::And:
      case Op::Or: {
        const auto a = eval(f->child(0));
        const auto& b = eval(f->child(1));
        for (std::size_t x = 0; x < n; ++x) out[x] = f->op() == Op::And ? (a[x] && b[x]) : (a[x] || b[x]);
        break;
      }
      case Op::AX:
      case Op::EX: {
        const auto& a = eval(f->child());
        bool all = f->op() == Op::AX;
        for (std::size_t x = 0; x < n; ++x) {
          const auto& nd = t_.node(x);
          bool v = all;
          for (std::size_t c = nd.firstChild; c < nd.firstChild + nd.numChildren; ++c) {
            if (all && !a[c]) v = false;
            if (!all && a[c]) v = true;
          }
          out[x] = v;
        }
        break;
      }
      case Op::Know:
      case Op::Poss: {
        auto ag = m_.agentIndex(f->name());
        if (!ag) throw UnknownAgent(f->name());
        const auto& a = eval(f->child());
        // Per indistinguishability class: does every (some) member satisfy?
        std::map<int, bool> cls;
        bool know = f->op() == Op::Know;
        for (std::size_t x = 0; x < n; ++x) {
          int s = t_.signature(*ag, x);
          auto [it, fresh] = cls.emplace(s, know);
          if (know) it->second = it->second && a[x];
          else it->second = it->second || a[x];
        }
        for (std::size_t x = 0; x < n; ++x) out[x] = cls.at(t_.signature(*ag, x));
        break;
      }
      default:
        throw Error("the tree oracle only handles fixpoint-free formulas without action modalities");
    }
    return out;
  }

  const MultiAgentSystem& m_;
  const TreePrefix& t_;
  std::map<const Formula*, std::vector<char>> memo_;
};

}  // namespace

TreeEvaluation evalTree(const MultiAgentSystem& m, const TreePrefix& t, const FormulaPtr& f) {
  FormulaPtr g = hasActionModalities(f) ? eliminateActionModalities(f) : f;
  if (!isFixpointFree(g)) throw Error("the tree oracle only handles fixpoint-free formulas");
  std::size_t md = modalDepth(g);
  if (md > t.depth()) throw DepthInsufficient(md, t.depth());
  TreeEval ev(m, t);
  TreeEvaluation out;
  out.nodes.prefix = &t;
  out.nodes.members = ev.eval(g);
  out.nodes.exactDepth = t.depth() - md;
  out.rootHolds = out.nodes.members.at(0) != 0;
  return out;
}

// ---------------------------------------------------------------------------
// Knowledge relation from runs

namespace {

using Class = std::set<StateId>;

std::vector<std::string> observationKeys(const MultiAgentSystem& m, const std::string& agent) {
  auto ag = m.agentIndex(agent);
  if (!ag) throw UnknownAgent(agent);
  const auto& obs = m.agents()[*ag].observable;
  std::vector<std::string> keys(m.numStates());
  for (StateId q = 0; q < m.numStates(); ++q)
    for (std::size_t i = 0; i < m.atoms().size(); ++i) keys[q] += (obs.test(i) && m.label(q).test(i)) ? '1' : '0';
  return keys;
}

std::set<Class> stepClasses(const MultiAgentSystem& m, const std::vector<std::string>& keys, const Class& c) {
  std::map<std::string, Class> byObs;
  for (StateId q : c)
    for (StateId r : m.successors(q)) byObs[keys[r]].insert(r);
  std::set<Class> out;
  for (auto& [k, cls] : byObs) out.insert(cls);
  return out;
}

}  // namespace

std::set<std::pair<StateId, StateId>> gammaByRuns(const MultiAgentSystem& m, const std::string& agent,
                                                  std::size_t depth, std::size_t cap) {
  auto keys = observationKeys(m, agent);
  // Runs of one length fall into observation classes; only each class's set
  // of end states matters for what follows, so equal sets are merged.
  std::set<Class> level{{m.initial()}};
  std::map<StateId, Class> rows;
  for (std::size_t d = 0;; ++d) {
    for (auto& c : level)
      for (StateId q : c) {
        auto it = rows.find(q);
        if (it == rows.end()) {
          rows.emplace(q, c);
        } else {
          Class keep;
          std::set_intersection(it->second.begin(), it->second.end(), c.begin(), c.end(),
                                std::inserter(keep, keep.end()));
          it->second = std::move(keep);
        }
      }
    if (d == depth) break;
    std::set<Class> next;
    for (auto& c : level) {
      auto more = stepClasses(m, keys, c);
      next.insert(more.begin(), more.end());
    }
    if (next.size() > cap) throw CapacityExceeded("run classes for agent " + agent, cap);
    level = std::move(next);
  }
  std::set<std::pair<StateId, StateId>> out;
  for (auto& [q, row] : rows)
    for (StateId r : row) out.emplace(q, r);
  return out;
}

std::size_t beliefStateCount(const MultiAgentSystem& m, const std::string& agent, std::size_t cap) {
  auto keys = observationKeys(m, agent);
  std::set<Class> seen{{m.initial()}};
  std::deque<Class> todo{{m.initial()}};
  std::size_t count = 0;
  while (!todo.empty()) {
    Class c = todo.front();
    todo.pop_front();
    count += c.size();
    if (count > cap) throw CapacityExceeded("belief states for agent " + agent, cap);
    for (auto& d : stepClasses(m, keys, c))
      if (seen.insert(d).second) todo.push_back(d);
  }
  return count;
}

// ---------------------------------------------------------------------------
// Until objectives under imperfect information

namespace {

struct Entry {
  StateId state;
  bool seen;  // p2 held at some earlier position
  auto operator<=>(const Entry&) const = default;
};
using Knowledge = std::set<Entry>;

class UntilGame {
 public:
  UntilGame(const LabeledSystem& g, const StrategyQuery& q, std::size_t cap) : g_(g), q_(q), cap_(cap) {
    const auto& m = *g.system;
    auto ag = m.agentIndex(q.agent);
    if (!ag) throw UnknownAgent(q.agent);
    agent_ = *ag;
    auto p1 = m.atomIndex(q.p1);
    auto p2 = m.atomIndex(q.p2);
    if (!p1) throw UnknownAtom(q.p1);
    if (!p2) throw UnknownAtom(q.p2);
    p1_ = *p1;
    p2_ = *p2;
    keys_ = observationKeys(m, q.agent);
    numActions_ = g.actions.alphabets.at(agent_).size();
  }

  bool done(const Entry& e) const { return e.seen || g_.system->label(e.state).test(p2_); }
  bool p1(const Entry& e) const { return g_.system->label(e.state).test(p1_); }

  /// Successors of one entry under the agent's action, grouped by what the
  /// agent observes next.
  void successors(const Entry& e, std::size_t action, std::map<std::string, Knowledge>& groups) const {
    bool seen = done(e);
    for (const auto& edge : g_.actions.edges)
      if (edge.from == e.state && edge.actions.at(agent_) == action) groups[keys_[edge.to]].insert({edge.to, seen});
  }

  std::map<std::string, Knowledge> step(const Knowledge& k, std::size_t action) const {
    std::map<std::string, Knowledge> groups;
    for (const auto& e : k) successors(e, action, groups);
    return groups;
  }

  std::size_t reachableKnowledge() const {
    Knowledge init{{g_.system->initial(), false}};
    std::set<Knowledge> seen{init};
    std::deque<Knowledge> todo{init};
    while (!todo.empty()) {
      Knowledge k = todo.front();
      todo.pop_front();
      for (std::size_t a = 0; a < numActions_; ++a)
        for (auto& [obs, next] : step(k, a))
          if (seen.insert(next).second) {
            if (seen.size() > cap_) throw CapacityExceeded("knowledge sets", cap_);
            todo.push_back(next);
          }
    }
    return seen.size();
  }

  bool enforce(const Knowledge& k, std::size_t h) {
    if (std::all_of(k.begin(), k.end(), [&](const Entry& e) { return done(e); })) return true;
    if (h == 0) return false;
    auto key = std::make_pair(k, h);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool win = false;
    for (std::size_t a = 0; a < numActions_ && !win; ++a) {
      bool ok = std::all_of(k.begin(), k.end(), [&](const Entry& e) { return done(e) || p1(e); });
      if (!ok) continue;
      for (auto& [obs, next] : step(k, a))
        if (!enforce(next, h - 1)) {
          ok = false;
          break;
        }
      win = ok;
    }
    memo_[key] = win;
    return win;
  }

  bool cannotAvoid(const Knowledge& k, std::size_t h) {
    if (std::any_of(k.begin(), k.end(), [&](const Entry& e) { return done(e); })) return true;
    if (h == 0) return false;
    auto key = std::make_pair(k, h);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool all = true;
    for (std::size_t a = 0; a < numActions_ && all; ++a) {
      auto groups = step(k, a);
      bool some = false;
      for (const auto& e : k) {
        if (!p1(e)) continue;
        std::map<std::string, Knowledge> mine;
        successors(e, a, mine);
        for (auto& [obs, ignored] : mine)
          if (cannotAvoid(groups.at(obs), h - 1)) {
            some = true;
            break;
          }
        if (some) break;
      }
      all = some;
    }
    memo_[key] = all;
    return all;
  }

 private:
  const LabeledSystem& g_;
  const StrategyQuery& q_;
  std::size_t cap_;
  std::size_t agent_ = 0;
  std::size_t p1_ = 0, p2_ = 0;
  std::size_t numActions_ = 0;
  std::vector<std::string> keys_;
  std::map<std::pair<Knowledge, std::size_t>, bool> memo_;
};

}  // namespace

bool reachabilityStrategyOracle(const LabeledSystem& g, const StrategyQuery& q, std::size_t cap) {
  UntilGame game(g, q, cap);
  std::size_t h = q.horizon ? q.horizon : game.reachableKnowledge() + 1;
  Knowledge init{{g.system->initial(), false}};
  return q.dual ? game.cannotAvoid(init, h) : game.enforce(init, h);
}

// ---------------------------------------------------------------------------
// Parity games

namespace {

struct Arena {
  std::vector<int> owner;  // 0 moves for the even player
  std::vector<int> priority;
  std::vector<std::vector<int>> succ;
  std::vector<std::vector<int>> pred;
};

using VSet = std::set<int>;

VSet attractor(const Arena& a, const VSet& domain, const VSet& target, int player) {
  VSet attr = target;
  std::deque<int> todo(target.begin(), target.end());
  std::map<int, int> remaining;
  for (int v : domain) {
    int c = 0;
    for (int w : a.succ[v]) c += domain.count(w) ? 1 : 0;
    remaining[v] = c;
  }
  while (!todo.empty()) {
    int w = todo.front();
    todo.pop_front();
    for (int v : a.pred[w]) {
      if (!domain.count(v) || attr.count(v)) continue;
      if (a.owner[v] == player || --remaining[v] == 0) {
        attr.insert(v);
        todo.push_back(v);
      }
    }
  }
  return attr;
}

VSet minus(const VSet& a, const VSet& b) {
  VSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

// Returns the winning regions of the even and the odd player.
std::pair<VSet, VSet> zielonka(const Arena& a, const VSet& v) {
  if (v.empty()) return {};
  int d = -1;
  for (int x : v) d = std::max(d, a.priority[x]);
  int p = d % 2;
  VSet top;
  for (int x : v)
    if (a.priority[x] == d) top.insert(x);
  VSet attr = attractor(a, v, top, p);
  auto [w0, w1] = zielonka(a, minus(v, attr));
  VSet& opp = p == 0 ? w1 : w0;
  if (opp.empty()) {
    if (p == 0) return {v, {}};
    return {{}, v};
  }
  VSet back = attractor(a, v, opp, 1 - p);
  auto [u0, u1] = zielonka(a, minus(v, back));
  if (p == 0) {
    u1.insert(back.begin(), back.end());
    return {u0, u1};
  }
  u0.insert(back.begin(), back.end());
  return {u0, u1};
}

}  // namespace

std::vector<bool> parityOracle(const LabeledSystem& g, const std::vector<int>& priorities, std::size_t player) {
  const auto& m = *g.system;
  if (m.agents().size() < 2) throw InvalidSystem("a parity game needs two agents");
  if (player > 1) throw InvalidSystem("player must be 0 or 1");
  if (priorities.size() != m.numStates()) throw InvalidSystem("priority missing for some state");
  const std::size_t n = m.numStates();
  const std::size_t acts = g.actions.alphabets.at(player).size();
  // Vertices: states, then (state, action) pairs, then two sinks.
  Arena a;
  auto pair = [&](std::size_t q, std::size_t x) { return static_cast<int>(n + q * acts + x); };
  const int total = static_cast<int>(n + n * acts + 2);
  const int evenSink = total - 2, oddSink = total - 1;
  a.owner.assign(total, 1);
  a.priority.assign(total, 0);
  a.succ.assign(total, {});
  for (std::size_t q = 0; q < n; ++q) {
    a.owner[q] = 0;
    a.priority[q] = priorities[q];
    for (std::size_t x = 0; x < acts; ++x) a.succ[q].push_back(pair(q, x));
  }
  for (const auto& e : g.actions.edges) a.succ[pair(e.from, e.actions.at(player))].push_back(static_cast<int>(e.to));
  a.priority[evenSink] = 2;
  a.priority[oddSink] = 1;
  a.succ[evenSink] = {evenSink};
  a.succ[oddSink] = {oddSink};
  for (int v = 0; v < evenSink; ++v)
    if (a.succ[v].empty()) a.succ[v].push_back(a.owner[v] == 0 ? oddSink : evenSink);
  a.pred.assign(total, {});
  for (int v = 0; v < total; ++v)
    for (int w : a.succ[v]) a.pred[w].push_back(v);
  VSet all;
  for (int v = 0; v < total; ++v) all.insert(v);
  auto [w0, w1] = zielonka(a, all);
  std::vector<bool> out(n);
  for (std::size_t q = 0; q < n; ++q) out[q] = w0.count(static_cast<int>(q)) > 0;
  return out;
}

}  // namespace epmu
