#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "epmu/checker.hh"
#include "epmu/distinction.hh"
#include "epmu/error.hh"
#include "epmu/oracle.hh"
#include "epmu/translate.hh"

namespace py = pybind11;
using namespace epmu;

namespace {

std::size_t capOr(std::optional<std::size_t> cap) { return cap ? *cap : defaultCap(); }

py::dict fragmentDict(const FragmentReport& r) {
  py::dict d;
  d["accepted"] = r.accepted;
  if (!r.accepted) {
    d["subformula"] = r.nodeFormula;
    d["agents"] = py::make_tuple(r.agentA, r.agentB);
  }
  return d;
}

py::dict checkText(const std::string& system, const std::string& formula, std::optional<std::size_t> cap) {
  CheckOptions opt;
  opt.cap = capOr(cap);
  FormulaPtr f = parseFormula(formula);
  Verdict v = check(checkTarget(parseSystemFile(system), f, opt.cap), f, opt);
  py::list refinements;
  for (auto& r : v.stats.refinements) refinements.append(py::make_tuple(r.agent, r.states));
  py::list binders;
  for (auto& b : v.stats.binders) {
    py::dict d;
    d["variable"] = b.variable;
    d["binder"] = b.binder;
    d["region_states"] = b.regionStates;
    d["max_iterations"] = b.maxIterations;
    binders.append(d);
  }
  py::dict d;
  d["holds"] = v.holds;
  d["input_states"] = v.stats.inputStates;
  d["refinements"] = refinements;
  d["binders"] = binders;
  d["final_states"] = v.stats.finalStates;
  return d;
}

py::dict distinctionText(const std::string& system, const std::string& agent, std::optional<std::size_t> cap) {
  SystemPtr m = parseSystem(system);
  DistinctionSystem d = distinction(m, agent, capOr(cap));
  py::list states;
  for (StateId q = 0; q < d.system->numStates(); ++q) {
    py::list belief;
    forEach(d.beliefs[q], [&](StateId r) { belief.append(m->stateName(r)); });
    states.append(py::make_tuple(d.system->stateName(q), m->stateName(d.toBase.map[q]), belief));
  }
  py::dict out;
  out["count"] = d.system->numStates();
  out["initial"] = d.system->stateName(d.system->initial());
  out["states"] = states;
  return out;
}

bool oracleText(const std::string& system, const std::string& formula, std::size_t depth,
                std::optional<std::size_t> cap) {
  SystemPtr m = parseSystem(system);
  TreePrefix t(*m, depth, capOr(cap));
  return evalTree(*m, t, parseFormula(formula)).rootHolds;
}

py::dict instanceDict(const Instance& inst, std::optional<std::size_t> cap) {
  CompiledSystem c = compileModal(inst.system, capOr(cap));
  py::dict d;
  d["instance"] = writeSystemFile(*inst.system.system, &inst.system.actions);
  d["compiled"] = writeSystemFile(*c.system);
  d["formula"] = toString(inst.formula);
  return d;
}

LabeledSystem labeledFrom(const SystemFile& f) {
  if (!f.actions) throw InvalidSystem("system has no action labels");
  return {f.system, *f.actions};
}

}  // namespace

PYBIND11_MODULE(_epmu, mod) {
  mod.doc() = "Epistemic mu-calculus model checking over system unfoldings";

  auto base = py::register_exception<Error>(mod, "Error");
  py::register_exception<SyntaxError>(mod, "FormulaSyntaxError", base.ptr());
  py::register_exception<InvalidSystem>(mod, "InvalidSystem", base.ptr());
  py::register_exception<CapacityExceeded>(mod, "CapacityExceeded", base.ptr());
  py::register_exception<FragmentRejected>(mod, "FragmentRejected", base.ptr());

  mod.def("normalize", [](const std::string& f) { return toString(parseFormula(f)); }, py::arg("formula"),
          "Parse a formula and print it back in canonical form.");
  mod.def("positive_form", [](const std::string& f) { return toString(toPositiveForm(parseFormula(f))); },
          py::arg("formula"));
  mod.def("check", &checkText, py::arg("system"), py::arg("formula"), py::arg("cap") = py::none(),
          "Decide a closed formula on the unfolding of a system given as file text.");
  mod.def(
      "analyze",
      [](const std::string& system, const std::string& formula) {
        FormulaPtr f = parseFormula(formula);
        return fragmentDict(analyzeFragment(*checkTarget(parseSystemFile(system), f), f));
      },
      py::arg("system"), py::arg("formula"));
  mod.def("distinction", &distinctionText, py::arg("system"), py::arg("agent"), py::arg("cap") = py::none());
  mod.def("oracle", &oracleText, py::arg("system"), py::arg("formula"), py::arg("depth"), py::arg("cap") = py::none(),
          "Tree semantics of a fixpoint-free formula at the root of a depth-bounded unfolding.");
  mod.def(
      "translate_atl_until",
      [](const std::string& system, const std::string& agent, const std::string& p1, const std::string& p2, bool dual,
         std::optional<std::size_t> cap) {
        return instanceDict(atlUntilInstance(labeledFrom(parseSystemFile(system)), agent, p1, p2, dual), cap);
      },
      py::arg("system"), py::arg("agent"), py::arg("p1"), py::arg("p2"), py::arg("dual") = false,
      py::arg("cap") = py::none());
  mod.def(
      "translate_parity",
      [](const std::string& game, std::size_t player, std::optional<std::size_t> cap) {
        SystemFile f = parseSystemFile(game);
        if (!f.priorities) throw InvalidSystem("game has no priorities");
        return instanceDict(parityEncoding({labeledFrom(f), *f.priorities}, player), cap);
      },
      py::arg("game"), py::arg("player"), py::arg("cap") = py::none());
}
