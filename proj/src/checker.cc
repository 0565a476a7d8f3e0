#include "epmu/checker.hh"

#include <algorithm>
#include <chrono>
#include <optional>

namespace epmu {

RefinementChain::RefinementChain(SystemPtr base)
    : base_(base), current_(base), composite_(identitySplitting(base)) {}

void RefinementChain::extend(const InSplitting& step) {
  if (step.coarse.get() != current_.get() && !sameSystem(*step.coarse, *current_))
    throw SystemMismatch("refinement step does not start at the current system");
  InSplitting c{step.fine, base_, std::vector<StateId>(step.map.size())};
  for (std::size_t q = 0; q < step.map.size(); ++q) c.map[q] = composite_.map.at(step.map[q]);
  composite_ = std::move(c);
  steps_.push_back(step);
  current_ = step.fine;
}

StateSet RefinementChain::transport(const StateSet& s, std::size_t fromLevel) const {
  StateSet out = s;
  for (std::size_t i = fromLevel; i < steps_.size(); ++i) out = pullback(steps_[i], out);
  return out;
}

StateSet exOp(const MultiAgentSystem& m, const StateSet& s) {
  StateSet out(m.numStates());
  for (StateId q = 0; q < m.numStates(); ++q)
    for (auto r : m.successors(q))
      if (s.test(r)) {
        out.set(q);
        break;
      }
  return out;
}

StateSet axOp(const MultiAgentSystem& m, const StateSet& s) {
  StateSet out(m.numStates());
  for (StateId q = 0; q < m.numStates(); ++q)
    out[q] = std::all_of(m.successors(q).begin(), m.successors(q).end(), [&](StateId r) { return s.test(r); });
  return out;
}

StateSet kleene(const std::function<StateSet(const StateSet&)>& op, bool greatest, std::size_t n,
                std::size_t* iterations) {
  StateSet cur = greatest ? fullSet(n) : StateSet(n);
  std::size_t k = 0;
  while (true) {
    StateSet next = op(cur);
    ++k;
    if (next == cur) break;
    bool chain = greatest ? next.is_subset_of(cur) : cur.is_subset_of(next);
    if (!chain) throw MonotonicityViolated("fixpoint iterates do not form a chain");
    if (k > n + 1) throw MonotonicityViolated("fixpoint iteration exceeded the state count");
    cur = std::move(next);
  }
  if (iterations) *iterations = k;
  return cur;
}

namespace {

class Evaluator {
 public:
  Evaluator(const SynTree& tree, SystemPtr m, const CheckOptions& opt, CheckStats& stats)
      : tree_(tree), chain_(std::move(m)), opt_(opt), stats_(stats) {}

  RefinementChain& chain() { return chain_; }

  StateSet evalClosed(int x) {
    const SynNode& n = tree_.node(x);
    const MultiAgentSystem& cur = *chain_.current();
    switch (n.op) {
      case Op::True:
        return fullSet(cur.numStates());
      case Op::False:
        return StateSet(cur.numStates());
      case Op::Atom:
        return cur.statesWith(n.form->name());
      case Op::NegAtom:
        return ~cur.statesWith(n.form->name());
      case Op::AX:
      case Op::EX: {
        StateSet s = evalClosed(n.children[0]);
        const MultiAgentSystem& now = *chain_.current();
        return n.op == Op::AX ? axOp(now, s) : exOp(now, s);
      }
      case Op::Know:
      case Op::Poss: {
        StateSet s = evalClosed(n.children[0]);
        std::size_t lvl = chain_.level();
        DistinctionSystem d = distinction(chain_.current(), n.form->name(), opt_.cap);
        note(n.form->name(), d.system->numStates());
        chain_.extend(d.toBase);
        s = chain_.transport(s, lvl);
        GammaRelation g = distinctionGamma(d);
        return n.op == Op::Know ? knowOp(g, s) : possOp(g, s);
      }
      case Op::And:
      case Op::Or: {
        int first = n.children[0], second = n.children[1];
        if (opt_.rightToLeft) std::swap(first, second);
        StateSet a = evalClosed(first);
        std::size_t lvl = chain_.level();
        StateSet b = evalClosed(second);
        a = chain_.transport(a, lvl);
        return n.op == Op::And ? (a & b) : (a | b);
      }
      case Op::Mu:
      case Op::Nu:
        return evalFixpointRegion(x);
      default:
        throw std::logic_error("unexpected operator in closed evaluation: " + toString(n.form));
    }
  }

 private:
  void note(const std::string& agent, std::size_t states) {
    stats_.refinements.push_back({agent, states});
    if (opt_.trace) opt_.trace("refine for " + agent + ": " + std::to_string(states) + " states");
  }

  StateSet evalFixpointRegion(int x) {
    const SynNode& n = tree_.node(x);
    int body = n.children[0];
    if (tree_.node(body).closed) return evalClosed(body);

    // Closed parts of the region first, threading the chain.
    std::vector<int> front = tree_.nearestClosed(x);
    if (opt_.rightToLeft) std::reverse(front.begin(), front.end());
    std::vector<std::pair<std::size_t, StateSet>> vals;
    for (int c : front) {
      StateSet s = evalClosed(c);
      vals.emplace_back(chain_.level(), std::move(s));
    }

    const auto& agents = tree_.node(body).agncl;
    Refinement r = refineForAgents(chain_.current(), agents, opt_.cap);
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
      note(r.order[i], r.steps[i].fine->numStates());
      chain_.extend(r.steps[i]);
    }
    const MultiAgentSystem& region = *chain_.current();

    frontier_.clear();
    for (std::size_t i = 0; i < front.size(); ++i) frontier_[front[i]] = chain_.transport(vals[i].second, vals[i].first);

    gammas_.clear();
    for (auto& a : agents) {
      if (opt_.trace) opt_.trace("knowledge relation for " + a + " on " + std::to_string(region.numStates()) + " states");
      gammas_.emplace(a, computeGamma(chain_.current(), a, opt_.cap));
    }
    region_ = chain_.current().get();
    regionRoot_ = x;
    Environment env;
    return evalRegion(x, env);
  }

  StateSet evalRegion(int x, Environment& env) {
    const SynNode& n = tree_.node(x);
    const MultiAgentSystem& m = *region_;
    if (n.closed && x != regionRoot_) return frontier_.at(x);
    switch (n.op) {
      case Op::Var:
        return env.at(n.form->name());
      case Op::And:
      case Op::Or: {
        StateSet a = evalRegion(n.children[0], env);
        StateSet b = evalRegion(n.children[1], env);
        return n.op == Op::And ? (a & b) : (a | b);
      }
      case Op::AX:
        return axOp(m, evalRegion(n.children[0], env));
      case Op::EX:
        return exOp(m, evalRegion(n.children[0], env));
      case Op::Know:
        return knowOp(gammas_.at(n.form->name()), evalRegion(n.children[0], env));
      case Op::Poss:
        return possOp(gammas_.at(n.form->name()), evalRegion(n.children[0], env));
      case Op::Mu:
      case Op::Nu: {
        const std::string& z = n.form->name();
        auto saved = env.find(z) != env.end() ? std::optional<StateSet>(env.at(z)) : std::nullopt;
        std::size_t iters = 0;
        StateSet out = kleene(
            [&](const StateSet& s) {
              env[z] = s;
              return evalRegion(n.children[0], env);
            },
            n.op == Op::Nu, m.numStates(), &iters);
        if (saved) env[z] = *saved; else env.erase(z);
        record(x, iters, m.numStates());
        return out;
      }
      default:
        throw std::logic_error("unexpected operator in region evaluation: " + toString(n.form));
    }
  }

  void record(int x, std::size_t iters, std::size_t states) {
    auto it = binderIndex_.find(x);
    if (it == binderIndex_.end()) {
      const SynNode& n = tree_.node(x);
      it = binderIndex_.emplace(x, stats_.binders.size()).first;
      stats_.binders.push_back({n.form->name(), n.op == Op::Mu ? "mu" : "nu", states, 0, 0, 0});
    }
    BinderStat& b = stats_.binders[it->second];
    b.regionStates = states;
    b.activations++;
    b.totalIterations += iters;
    b.maxIterations = std::max(b.maxIterations, iters);
    if (opt_.trace)
      opt_.trace((b.binder + " " + b.variable) + " stable after " + std::to_string(iters) + " iterations");
  }

  const SynTree& tree_;
  RefinementChain chain_;
  const CheckOptions& opt_;
  CheckStats& stats_;
  const MultiAgentSystem* region_ = nullptr;
  int regionRoot_ = -1;
  std::map<int, StateSet> frontier_;
  std::map<std::string, GammaRelation> gammas_;
  std::map<int, std::size_t> binderIndex_;
};

FormulaPtr prepare(const MultiAgentSystem& m, const FormulaPtr& f) {
  FormulaPtr g = hasActionModalities(f) ? eliminateActionModalities(f) : f;
  auto fv = freeVariables(g);
  if (!fv.empty()) throw FreeVariable(*fv.begin());
  for (auto& p : atomsOf(g))
    if (!m.atomIndex(p)) throw UnknownAtom(p);
  for (auto& a : agentsOf(g)) m.agent(a);
  return toPositiveForm(g);
}

}  // namespace

FragmentReport analyzeFragment(const MultiAgentSystem& m, const FormulaPtr& f) {
  return checkNonMixing(SynTree(prepare(m, f)), m.observability());
}

Verdict check(const SystemPtr& m, const FormulaPtr& f, const CheckOptions& options) {
  auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  v.positive = prepare(*m, f);
  SynTree tree(v.positive);
  v.fragment = checkNonMixing(tree, m->observability());
  if (!v.fragment.accepted) throw FragmentRejected(v.fragment);

  v.stats.inputStates = m->numStates();
  Evaluator ev(tree, m, options, v.stats);
  v.satisfying = ev.evalClosed(tree.root());
  v.finalSystem = ev.chain().current();
  v.toInput = ev.chain().composite();
  v.holds = v.satisfying.test(v.finalSystem->initial());
  v.stats.finalStates = v.finalSystem->numStates();
  v.stats.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return v;
}

namespace {

StateSet naive(const MultiAgentSystem& m, const FormulaPtr& f, Environment& env,
               std::map<std::string, GammaRelation>& gammas) {
  const std::size_t n = m.numStates();
  switch (f->op()) {
    case Op::True:
      return fullSet(n);
    case Op::False:
      return StateSet(n);
    case Op::Atom:
      return m.statesWith(f->name());
    case Op::NegAtom:
      return ~m.statesWith(f->name());
    case Op::Var:
      return env.at(f->name());
    case Op::And:
      return naive(m, f->child(0), env, gammas) & naive(m, f->child(1), env, gammas);
    case Op::Or:
      return naive(m, f->child(0), env, gammas) | naive(m, f->child(1), env, gammas);
    case Op::AX:
      return axOp(m, naive(m, f->child(0), env, gammas));
    case Op::EX:
      return exOp(m, naive(m, f->child(0), env, gammas));
    case Op::Know:
      return knowOp(gammas.at(f->name()), naive(m, f->child(0), env, gammas));
    case Op::Poss:
      return possOp(gammas.at(f->name()), naive(m, f->child(0), env, gammas));
    case Op::Mu:
    case Op::Nu:
      return kleene(
          [&](const StateSet& s) {
            env[f->name()] = s;
            return naive(m, f->child(0), env, gammas);
          },
          f->op() == Op::Nu, n);
    default:
      throw std::logic_error("unexpected operator: " + toString(f));
  }
}

}  // namespace

StateSet evaluateUnrefined(const SystemPtr& m, const FormulaPtr& f, std::size_t cap) {
  FormulaPtr p = prepare(*m, f);
  std::map<std::string, GammaRelation> gammas;
  for (auto& a : agentsOf(p)) gammas.emplace(a, computeGamma(m, a, cap));
  Environment env;
  return naive(*m, p, env, gammas);
}

}  // namespace epmu
