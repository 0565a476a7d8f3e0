#include "support.hh"

#include <set>

#include <json.hpp>

namespace epmu::testing {

SystemPtr build(const SystemSpec& spec) { return buildSystem(spec).system; }

namespace {

SystemSpec::State st(long id, std::vector<std::string> atoms = {}) { return {id, std::move(atoms), ""}; }

}  // namespace

SystemPtr sys1() {
  SystemSpec s;
  s.atoms = {"p", "q"};
  s.states = {st(1), st(2, {"q"}), st(3)};
  s.initial = 1;
  s.transitions = {{1, 2}, {1, 3}, {2, 2}, {3, 3}};
  s.agents = {{"a", {"p"}}};
  return build(s);
}

SystemPtr sys1ab() {
  SystemSpec s;
  s.atoms = {"p", "q"};
  s.states = {st(1), st(2, {"q"}), st(3)};
  s.initial = 1;
  s.transitions = {{1, 2}, {1, 3}, {2, 2}, {3, 3}};
  s.agents = {{"a", {"p"}}, {"b", {"p", "q"}}};
  return build(s);
}

SystemPtr sys2() {
  SystemSpec s;
  s.atoms = {"p"};
  s.states = {st(1), st(2, {"p"}), st(3), st(4), st(5)};
  s.initial = 1;
  s.transitions = {{1, 2}, {1, 3}, {2, 4}, {3, 4}, {3, 5}, {4, 4}, {5, 5}};
  s.agents = {{"a", {"p"}}};
  return build(s);
}

SystemPtr sys3() {
  SystemSpec s;
  s.atoms = {"q"};
  s.states = {st(1), st(2), st(3), st(4, {"q"})};
  s.initial = 1;
  s.transitions = {{1, 2}, {1, 3}, {2, 4}, {3, 3}, {4, 4}};
  s.agents = {{"a", {}}};
  return build(s);
}

std::string atomName(std::size_t i) { return "p" + std::to_string(i); }
std::string agentName(std::size_t i) { return std::string(1, static_cast<char>('a' + i)); }

namespace {

std::size_t pick(std::mt19937& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool coin(std::mt19937& rng) { return pick(rng, 0, 1) == 1; }

SystemSpec randomShape(std::mt19937& rng, std::size_t maxStates, std::size_t maxAtoms, std::size_t minStates) {
  SystemSpec s;
  std::size_t n = pick(rng, minStates, maxStates);
  std::size_t k = pick(rng, 1, maxAtoms);
  for (std::size_t i = 0; i < k; ++i) s.atoms.push_back(atomName(i));
  for (std::size_t q = 1; q <= n; ++q) {
    SystemSpec::State state{static_cast<long>(q), {}, ""};
    for (auto& p : s.atoms)
      if (coin(rng)) state.atoms.push_back(p);
    s.states.push_back(state);
    std::set<long> succ;
    std::size_t out = pick(rng, 1, std::min<std::size_t>(n, 3));
    while (succ.size() < out) succ.insert(static_cast<long>(pick(rng, 1, n)));
    for (long r : succ) s.transitions.emplace_back(static_cast<long>(q), r);
  }
  s.initial = 1;
  return s;
}

}  // namespace

SystemPtr randomSystem(std::mt19937& rng, const RandomSystemShape& shape) {
  SystemSpec s = randomShape(rng, shape.maxStates, shape.maxAtoms, shape.minStates);
  std::size_t agents = pick(rng, 1, shape.maxAgents);
  for (std::size_t i = 0; i < agents; ++i) {
    std::vector<std::string> obs;
    for (auto& p : s.atoms)
      if (coin(rng)) obs.push_back(p);
    s.agents.emplace_back(agentName(i), obs);
  }
  return build(s);
}

SystemPtr randomChainSystem(std::mt19937& rng, std::size_t maxStates, std::size_t maxAtoms) {
  SystemSpec s = randomShape(rng, maxStates, maxAtoms, 1);
  std::vector<std::string> big, small;
  for (auto& p : s.atoms)
    if (coin(rng)) {
      big.push_back(p);
      if (coin(rng)) small.push_back(p);
    }
  s.agents = {{"a", small}, {"b", big}};
  return build(s);
}

namespace {

struct FormulaGen {
  std::mt19937& rng;
  const RandomFormulaShape& shape;
  int fresh = 0;

  FormulaPtr leaf(const std::vector<std::string>& bound) {
    std::size_t choice = pick(rng, 0, bound.empty() ? 5 : 8);
    if (choice >= 6) return var(bound[pick(rng, 0, bound.size() - 1)]);
    if (choice == 0) return top();
    if (choice == 1) return bottom();
    const auto& p = shape.atoms[pick(rng, 0, shape.atoms.size() - 1)];
    return choice % 2 ? negAtom(p) : atom(p);
  }

  FormulaPtr gen(std::size_t budget, std::vector<std::string> bound, std::size_t modal) {
    if (budget <= 1) return leaf(bound);
    std::vector<int> kinds = {0, 1};  // binary
    if (modal > 0) kinds.insert(kinds.end(), {2, 3});
    if (!shape.agents.empty()) kinds.insert(kinds.end(), {4, 5});
    if (shape.fixpoints) kinds.insert(kinds.end(), {6, 7});
    int kind = kinds[pick(rng, 0, kinds.size() - 1)];
    switch (kind) {
      case 0:
      case 1: {
        std::size_t left = pick(rng, 1, budget - 1);
        std::size_t right = budget - left;
        if (right == 0) right = 1;
        auto l = gen(left, bound, modal);
        auto r = gen(right, bound, modal);
        return kind == 0 ? conj(l, r) : disj(l, r);
      }
      case 2:
        return ax(gen(budget - 1, bound, modal - 1));
      case 3:
        return ex(gen(budget - 1, bound, modal - 1));
      case 4:
      case 5: {
        const auto& a = shape.agents[pick(rng, 0, shape.agents.size() - 1)];
        auto body = gen(budget - 1, bound, modal);
        return kind == 4 ? know(a, body) : poss(a, body);
      }
      default: {
        std::string z = "Z" + std::to_string(fresh++);
        bound.push_back(z);
        auto body = gen(budget - 1, bound, modal);
        return kind == 6 ? mu(z, body) : nu(z, body);
      }
    }
  }
};

}  // namespace

FormulaPtr randomFormula(std::mt19937& rng, const RandomFormulaShape& shape) {
  FormulaGen g{rng, shape};
  return g.gen(pick(rng, 1, shape.size), {}, shape.maxModalDepth);
}

std::vector<FormulaPtr> formulaPool(const std::vector<std::string>& atoms, const std::vector<std::string>& agents,
                                    std::size_t maxDepth, std::size_t count, std::mt19937& rng) {
  RandomFormulaShape shape{atoms, agents, 9, false, maxDepth};
  std::set<std::string> seen;
  std::vector<FormulaPtr> out;
  std::size_t attempts = 0;
  while (out.size() < count && attempts < count * 200) {
    ++attempts;
    FormulaPtr f = randomFormula(rng, shape);
    if (agentsOf(f).empty()) continue;
    if (seen.insert(toString(f)).second) out.push_back(f);
  }
  return out;
}

}  // namespace epmu::testing

namespace epmu::testing {

TreeComparison compareWithTree(const SystemPtr& m, const FormulaPtr& f, std::size_t depth) {
  TreeComparison out;
  Verdict v = check(m, f);
  TreePrefix t(*m, depth, kDefaultCap);
  TreeEvaluation e = evalTree(*m, t, f);
  for (std::size_t x = 0; x < t.size(); ++x) {
    if (t.node(x).depth > e.nodes.exactDepth) continue;
    ++out.comparedNodes;
    StateId fine = liftRun(v.toInput, t.run(x)).back();
    bool mine = v.satisfying.test(fine);
    if (mine != e.nodes.contains(x)) {
      out.equal = false;
      std::string run;
      for (auto q : t.run(x)) run += (run.empty() ? "" : ".") + m->stateName(q);
      out.detail = "node " + run + ": checker " + (mine ? "true" : "false") + ", tree " +
                   (e.nodes.contains(x) ? "true" : "false");
      return out;
    }
  }
  return out;
}

}  // namespace epmu::testing


namespace epmu::testing {

SystemFile randomGame(std::mt19937& rng, const RandomGameShape& shape) {
  using nlohmann::json;
  for (;;) {
    std::size_t n = pick(rng, 1, shape.maxStates);
    std::vector<std::string> agents = shape.perfectInformation ? std::vector<std::string>{"p0", "p1"}
                                                               : std::vector<std::string>{"a", "b"};
    json j;
    std::vector<std::string> atoms;
    if (shape.perfectInformation)
      for (std::size_t q = 1; q <= n; ++q) atoms.push_back("s" + std::to_string(q));
    else
      atoms = {"p0", "p1"};
    j["atoms"] = atoms;
    for (std::size_t q = 1; q <= n; ++q) {
      json st = {{"id", q}};
      std::vector<std::string> here;
      if (shape.perfectInformation) here.push_back("s" + std::to_string(q));
      else
        for (auto& p : atoms)
          if (coin(rng)) here.push_back(p);
      st["atoms"] = here;
      if (shape.maxPriority > 0) st["priority"] = pick(rng, 1, static_cast<std::size_t>(shape.maxPriority));
      j["states"].push_back(st);
    }
    j["initial"] = 1;
    std::vector<std::vector<std::string>> alpha(2);
    for (std::size_t i = 0; i < 2; ++i) {
      std::size_t k = pick(rng, 1, shape.maxActions);
      for (std::size_t x = 0; x < k; ++x) alpha[i].push_back(std::string(1, static_cast<char>((i ? 'x' : 'm') + x)));
      std::vector<std::string> obs;
      for (auto& p : atoms)
        if (shape.perfectInformation || coin(rng)) obs.push_back(p);
      j["agents"][agents[i]]["obs"] = obs;
      j["actions"]["alphabets"][agents[i]] = alpha[i];
    }
    j["actions"]["transitions"] = json::array();
    std::set<std::size_t> reached{1};
    std::vector<std::size_t> todo{1};
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> succ(n + 1);
    for (std::size_t q = 1; q <= n; ++q) {
      bool any = false;
      for (std::size_t x = 0; x < alpha[0].size(); ++x)
        for (std::size_t y = 0; y < alpha[1].size(); ++y) {
          bool last = !any && x + 1 == alpha[0].size() && y + 1 == alpha[1].size();
          if (!last && pick(rng, 0, 3) == 0) continue;
          any = true;
          std::size_t targets = pick(rng, 1, 4) == 4 ? 2 : 1;
          std::set<std::size_t> to;
          while (to.size() < std::min(targets, n)) to.insert(pick(rng, 1, n));
          for (auto r : to) {
            j["actions"]["transitions"].push_back(
                json::array({q, {{agents[0], alpha[0][x]}, {agents[1], alpha[1][y]}}, r}));
            succ[q].emplace_back(x, r);
          }
        }
    }
    while (!todo.empty()) {
      std::size_t q = todo.back();
      todo.pop_back();
      for (auto [x, r] : succ[q])
        if (reached.insert(r).second) todo.push_back(r);
    }
    if (reached.size() != n) continue;
    return parseSystemFile(j.dump());
  }
}

LabeledSystem labeled(const SystemFile& f) { return {f.system, *f.actions}; }

}  // namespace epmu::testing
