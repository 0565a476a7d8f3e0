#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace epmu {

enum class Op {
  True,
  False,
  Atom,
  NegAtom,
  Var,
  Not,  // only before normalization
  And,
  Or,
  AX,
  EX,
  Know,
  Poss,
  Mu,
  Nu,
  Diamond,
  Box,
};

/// One `agent=action` component of an action modality.
struct ActionChoice {
  std::string agent;
  std::string action;
  bool operator==(const ActionChoice&) const = default;
  auto operator<=>(const ActionChoice&) const = default;
};
using ActionTuple = std::vector<ActionChoice>;

struct SourcePos {
  int line = 0;
  int column = 0;
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable formula node. `name` holds the atom, variable or agent name
/// depending on `op`; `actions` is used by Diamond/Box only.
class Formula {
 public:
  Formula(Op op, std::string name, ActionTuple actions, std::vector<FormulaPtr> children, SourcePos pos = {})
      : op_(op), name_(std::move(name)), actions_(std::move(actions)), children_(std::move(children)), pos_(pos) {}

  Op op() const { return op_; }
  const std::string& name() const { return name_; }
  const ActionTuple& actions() const { return actions_; }
  const std::vector<FormulaPtr>& children() const { return children_; }
  const FormulaPtr& child(std::size_t i = 0) const { return children_.at(i); }
  SourcePos pos() const { return pos_; }

  bool isBinder() const { return op_ == Op::Mu || op_ == Op::Nu; }
  bool isEpistemic() const { return op_ == Op::Know || op_ == Op::Poss; }
  bool isLiteral() const {
    return op_ == Op::True || op_ == Op::False || op_ == Op::Atom || op_ == Op::NegAtom;
  }

 private:
  Op op_;
  std::string name_;
  ActionTuple actions_;
  std::vector<FormulaPtr> children_;
  SourcePos pos_;
};

// Constructors.
FormulaPtr top();
FormulaPtr bottom();
FormulaPtr atom(std::string p);
FormulaPtr negAtom(std::string p);
FormulaPtr var(std::string z);
FormulaPtr neg(FormulaPtr f);
FormulaPtr conj(FormulaPtr l, FormulaPtr r);
FormulaPtr disj(FormulaPtr l, FormulaPtr r);
/// Right-nested conjunction; the empty conjunction is `true`.
FormulaPtr conjAll(const std::vector<FormulaPtr>& fs);
/// Right-nested disjunction; the empty disjunction is `false`.
FormulaPtr disjAll(const std::vector<FormulaPtr>& fs);
FormulaPtr ax(FormulaPtr f);
FormulaPtr ex(FormulaPtr f);
FormulaPtr know(std::string agent, FormulaPtr f);
FormulaPtr poss(std::string agent, FormulaPtr f);
FormulaPtr mu(std::string z, FormulaPtr body);
FormulaPtr nu(std::string z, FormulaPtr body);
FormulaPtr diamond(ActionTuple actions, FormulaPtr f);
FormulaPtr box(ActionTuple actions, FormulaPtr f);
FormulaPtr withChildren(const Formula& f, std::vector<FormulaPtr> children);

struct ParseOptions {
  /// When set, agent names outside the roster are rejected.
  std::optional<std::set<std::string>> agents;
};

/// Parses the concrete syntax. `E{..}`, `C{..}` and `->` are expanded here.
FormulaPtr parseFormula(const std::string& text, const ParseOptions& options = {});

/// Prints in the concrete syntax; `parseFormula(toString(f))` rebuilds `f`.
std::string toString(const FormulaPtr& f);

bool equal(const FormulaPtr& a, const FormulaPtr& b);

std::set<std::string> freeVariables(const FormulaPtr& f);
bool isClosed(const FormulaPtr& f);
std::set<std::string> agentsOf(const FormulaPtr& f);
std::set<std::string> atomsOf(const FormulaPtr& f);
std::size_t size(const FormulaPtr& f);
/// Nesting depth of AX/EX/<..>/[..]; epistemic operators do not count.
std::size_t modalDepth(const FormulaPtr& f);
bool isFixpointFree(const FormulaPtr& f);
bool hasActionModalities(const FormulaPtr& f);

/// Negation normal form: negation only on atoms, dual operators pushed
/// inward, vacuous binders dropped and bound variables renamed apart.
/// Throws NonMonotoneVariable for negative occurrences of a bound variable.
FormulaPtr toPositiveForm(const FormulaPtr& f);

/// Positive form of the negation of `f`.
FormulaPtr dual(const FormulaPtr& f);

/// Capture-free only when `f` has no binder for `z` below it.
FormulaPtr substitute(const FormulaPtr& f, const std::string& z, const FormulaPtr& by);

/// Kleene approximation: every binder is replaced by max(k, 1) applications
/// of its body to `false` (mu) or `true` (nu), innermost binders first.
/// Expects a closed formula in positive form.
FormulaPtr unfoldFixpoint(const FormulaPtr& f, std::size_t k);

/// Name of the atom that marks "agent chose action" in compiled systems.
std::string actionAtom(const std::string& agent, const std::string& action);

/// Rewrites <t>f as EX(act-atoms & f) and [t]f as AX(~act-atoms | f).
FormulaPtr eliminateActionModalities(const FormulaPtr& f);

// ---------------------------------------------------------------------------
// Syntactic tree with closedness and agent annotations.

struct SynNode {
  Op op = Op::True;
  /// The extra child every variable node carries.
  bool topMarker = false;
  FormulaPtr form;
  int parent = -1;
  std::vector<int> children;
  bool closed = true;
  /// Agents whose K/P occurs below this node along a path of non-closed nodes.
  std::set<std::string> agncl;
  /// Closed node whose parent is not closed (a nearest closed successor).
  bool frontier = false;
  std::size_t depth = 0;
};

class SynTree {
 public:
  explicit SynTree(const FormulaPtr& positive);

  const SynNode& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  const std::vector<SynNode>& nodes() const { return nodes_; }
  int root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }

  /// Closed descendants of `i` with no closed node strictly between, in
  /// left-to-right order. Variable markers are skipped.
  std::vector<int> nearestClosed(int i) const;

 private:
  int build(const FormulaPtr& f, int parent, std::size_t depth);
  std::vector<SynNode> nodes_;
};

/// agent -> observable atoms.
using ObservabilityMap = std::map<std::string, std::set<std::string>>;

struct FragmentReport {
  bool accepted = true;
  int node = -1;
  std::string nodeFormula;
  std::string agentA;
  std::string agentB;
};

/// Accepts iff at every node the observation sets of the agents in agncl
/// form a chain under inclusion. Throws UnknownAgent.
FragmentReport checkNonMixing(const SynTree& tree, const ObservabilityMap& obs);

}  // namespace epmu
