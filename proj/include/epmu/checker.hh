#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "epmu/bits.hh"
#include "epmu/distinction.hh"
#include "epmu/error.hh"
#include "epmu/formula.hh"
#include "epmu/system.hh"

namespace epmu {

class FragmentRejected : public Error {
 public:
  explicit FragmentRejected(FragmentReport r)
      : Error("formula mixes agents " + r.agentA + " and " + r.agentB + " with incomparable observations at " +
              r.nodeFormula),
        report_(std::move(r)) {}
  const FragmentReport& report() const { return report_; }

 private:
  FragmentReport report_;
};

/// A fixpoint iteration that stopped growing (or shrinking) monotonically.
/// Always an implementation bug.
class MonotonicityViolated : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Linear sequence of in-splittings starting at the input system. Sets are
/// tagged with the level they were computed at and pulled forward on demand.
class RefinementChain {
 public:
  explicit RefinementChain(SystemPtr base);

  const SystemPtr& base() const { return base_; }
  const SystemPtr& current() const { return current_; }
  std::size_t level() const { return steps_.size(); }
  const std::vector<InSplitting>& steps() const { return steps_; }
  const InSplitting& composite() const { return composite_; }

  /// `step.coarse` must be the current system. Throws SystemMismatch.
  void extend(const InSplitting& step);
  /// Pulls a set over the system at `fromLevel` back to the current system.
  StateSet transport(const StateSet& s, std::size_t fromLevel) const;

 private:
  SystemPtr base_;
  SystemPtr current_;
  std::vector<InSplitting> steps_;
  InSplitting composite_;
};

using Environment = std::map<std::string, StateSet>;

StateSet exOp(const MultiAgentSystem& m, const StateSet& s);
StateSet axOp(const MultiAgentSystem& m, const StateSet& s);

/// Least (greatest = false) or greatest fixpoint of `op` over n states by
/// iteration from the empty (full) set. Throws MonotonicityViolated when the
/// iterates stop forming a chain or the iteration count passes n + 1.
StateSet kleene(const std::function<StateSet(const StateSet&)>& op, bool greatest, std::size_t n,
                std::size_t* iterations = nullptr);

struct RefinementStat {
  std::string agent;
  std::size_t states = 0;
};

struct BinderStat {
  std::string variable;
  std::string binder;  // "mu" or "nu"
  std::size_t regionStates = 0;
  std::size_t activations = 0;
  std::size_t totalIterations = 0;
  std::size_t maxIterations = 0;
};

struct CheckStats {
  std::size_t inputStates = 0;
  std::vector<RefinementStat> refinements;
  std::vector<BinderStat> binders;
  std::size_t finalStates = 0;
  double wallSeconds = 0;
};

struct CheckOptions {
  std::size_t cap = defaultCap();
  /// Evaluate siblings right to left; the verdict must not depend on it.
  bool rightToLeft = false;
  std::function<void(const std::string&)> trace;
};

struct Verdict {
  bool holds = false;
  FragmentReport fragment;
  CheckStats stats;
  FormulaPtr positive;
  /// Finest system of the chain and its map onto the input.
  SystemPtr finalSystem;
  InSplitting toInput;
  /// States of finalSystem satisfying the formula.
  StateSet satisfying;
};

/// Input checks and the fragment gate, without evaluating anything.
FragmentReport analyzeFragment(const MultiAgentSystem& m, const FormulaPtr& f);

/// Decides whether the unfolding of `m` satisfies the closed formula `f`.
/// Action modalities are compiled away first. Throws FragmentRejected,
/// FreeVariable, NonMonotoneVariable, UnknownAgent, UnknownAtom,
/// CapacityExceeded.
Verdict check(const SystemPtr& m, const FormulaPtr& f, const CheckOptions& options = {});

/// State-based semantics directly on `m`, with knowledge taken from the
/// relation of `m` itself and no refinement. Only sound on systems that are
/// distinguished for every agent in `f`; kept for comparison.
StateSet evaluateUnrefined(const SystemPtr& m, const FormulaPtr& f, std::size_t cap = defaultCap());

}  // namespace epmu
