#include "epmu/cli.hh"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "epmu/distinction.hh"
#include "epmu/oracle.hh"
#include "epmu/translate.hh"

namespace epmu {

using json = nlohmann::ordered_json;

std::string sha256Hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

// ---------------------------------------------------------------------------
// Report

std::string reportToJson(const Report& r) {
  json j;
  j["command"] = r.command;
  j["inputs"] = json::array();
  for (auto& d : r.inputs) j["inputs"].push_back({{"role", d.role}, {"source", d.source}, {"sha256", d.sha256}});
  if (r.fragment) {
    const auto& f = *r.fragment;
    json fj = {{"accepted", f.accepted}};
    if (!f.accepted) {
      fj["node"] = f.node;
      fj["subformula"] = f.nodeFormula;
      fj["agents"] = {f.agentA, f.agentB};
    }
    j["fragment"] = fj;
  } else {
    j["fragment"] = nullptr;
  }
  j["verdict"] = r.verdict;
  if (r.statistics) {
    const auto& s = *r.statistics;
    json sj;
    sj["input_states"] = s.inputStates;
    sj["refinements"] = json::array();
    for (auto& x : s.refinements) sj["refinements"].push_back({{"agent", x.agent}, {"states", x.states}});
    sj["binders"] = json::array();
    for (auto& b : s.binders)
      sj["binders"].push_back({{"variable", b.variable},
                               {"binder", b.binder},
                               {"region_states", b.regionStates},
                               {"activations", b.activations},
                               {"total_iterations", b.totalIterations},
                               {"max_iterations", b.maxIterations}});
    sj["final_states"] = s.finalStates;
    sj["wall_seconds"] = s.wallSeconds;
    j["statistics"] = sj;
  } else {
    j["statistics"] = nullptr;
  }
  j["warnings"] = r.warnings;
  j["error"] = r.error;
  return j.dump(2) + "\n";
}

Report reportFromJson(const std::string& text) {
  Report r;
  try {
    json j = json::parse(text);
    r.command = j.at("command").get<std::vector<std::string>>();
    for (auto& d : j.at("inputs")) r.inputs.push_back({d.at("role"), d.at("source"), d.at("sha256")});
    if (!j.at("fragment").is_null()) {
      const auto& fj = j["fragment"];
      FragmentReport f;
      f.accepted = fj.at("accepted");
      if (!f.accepted) {
        f.node = fj.at("node");
        f.nodeFormula = fj.at("subformula");
        f.agentA = fj.at("agents").at(0);
        f.agentB = fj.at("agents").at(1);
      }
      r.fragment = f;
    }
    r.verdict = j.at("verdict");
    if (!j.at("statistics").is_null()) {
      const auto& sj = j["statistics"];
      CheckStats s;
      s.inputStates = sj.at("input_states");
      for (auto& x : sj.at("refinements")) s.refinements.push_back({x.at("agent"), x.at("states")});
      for (auto& b : sj.at("binders"))
        s.binders.push_back({b.at("variable"), b.at("binder"), b.at("region_states"), b.at("activations"),
                             b.at("total_iterations"), b.at("max_iterations")});
      s.finalStates = sj.at("final_states");
      s.wallSeconds = sj.at("wall_seconds");
      r.statistics = s;
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    r.error = j.at("error");
  } catch (const json::exception& e) {
    throw InvalidSystem(std::string("malformed report: ") + e.what());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

class InputError : public Error {
 public:
  using Error::Error;
};

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

struct Painter {
  bool on;
  std::string operator()(const std::string& s, const char* code) const {
    return on ? std::string("\x1b[") + code + "m" + s + "\x1b[0m" : s;
  }
};

struct Loaded {
  SystemFile file;
  std::string bytes;
};

Loaded loadSystem(const std::string& path, bool allowDeadlock, std::vector<std::string>& warnings) {
  Loaded l;
  l.bytes = readFile(path);
  l.file = parseSystemFile(l.bytes);
  for (auto& w : l.file.warnings) warnings.push_back(w);
  SerialVerdict v = validateSerial(*l.file.system, allowDeadlock);
  if (!v.ok) {
    std::string names;
    for (auto q : v.deadlocks) names += (names.empty() ? "" : ", ") + l.file.system->stateName(q);
    throw InvalidSystem("deadlocked states: " + names + " (use --allow-deadlock)");
  }
  for (auto& w : v.warnings) warnings.push_back(w);
  return l;
}

struct FormulaInput {
  std::string text;
  std::string inlineText;
  std::string file;

  std::string source() const { return file.empty() ? "inline" : file; }
  std::string load() {
    if (!inlineText.empty() && !file.empty()) throw InputError("give either --formula or --formula-file");
    if (inlineText.empty() && file.empty()) throw InputError("a formula is required (--formula or --formula-file)");
    text = file.empty() ? inlineText : readFile(file);
    return text;
  }
};

void printStats(std::ostream& out, const CheckStats& s) {
  out << "input states: " << s.inputStates << "\n";
  for (auto& r : s.refinements) out << "refined for " << r.agent << ": " << r.states << " states\n";
  for (auto& b : s.binders)
    out << b.binder << " " << b.variable << ": region " << b.regionStates << " states, " << b.activations
        << " activations, at most " << b.maxIterations << " iterations\n";
  out << "final states: " << s.finalStates << "\n";
}

void writeReport(const std::string& path, const Report& r) {
  if (!path.empty()) writeFile(path, reportToJson(r));
}

std::string rejection(const FragmentReport& f) {
  return "agents " + f.agentA + " and " + f.agentB + " have incomparable observations at " + f.nodeFormula;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliEnvironment& env) {
  Painter paint{env.color};
  CLI::App app{"Model checker for the epistemic mu-calculus under synchronous perfect recall", "epmu"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::string systemPath, reportPath, agent, emitDot, p1, p2, outDir = ".", gamePath;
  FormulaInput formula;
  std::size_t cap = 0, depth = 0, player = 0;
  bool trace = false, allowDeadlock = false, jsonOut = false, dual = false;

  auto addCap = [&](CLI::App* s) {
    s->add_option("--cap", cap, "State cap for constructed systems (default: EPMU_CAP or 1000000)");
  };

  auto* checkCmd = app.add_subcommand("check", "Decide whether a system satisfies a closed formula");
  checkCmd->add_option("--system", systemPath, "System file (.mas)")->required();
  checkCmd->add_option("--formula", formula.inlineText, "Formula text");
  checkCmd->add_option("--formula-file", formula.file, "File containing the formula");
  checkCmd->add_option("--report", reportPath, "Write a JSON report here");
  addCap(checkCmd);
  checkCmd->add_flag("--trace", trace, "Print refinement and iteration progress to stderr");
  checkCmd->add_flag("--allow-deadlock", allowDeadlock, "Accept states without successors (AX holds there)");
  checkCmd->add_flag("--json", jsonOut, "Print the report to stdout");

  auto* analyze = app.add_subcommand("analyze", "Run the fragment gate only");
  analyze->add_option("--system", systemPath, "System file (.mas)")->required();
  analyze->add_option("--formula", formula.inlineText, "Formula text");
  analyze->add_option("--formula-file", formula.file, "File containing the formula");
  analyze->add_option("--report", reportPath, "Write a JSON report here");
  analyze->add_flag("--allow-deadlock", allowDeadlock, "Accept states without successors");
  analyze->add_flag("--json", jsonOut, "Print the report to stdout");

  auto* distinguish = app.add_subcommand("distinguish", "Build the belief-state refinement for one agent");
  distinguish->add_option("--system", systemPath, "System file (.mas)")->required();
  distinguish->add_option("--agent", agent, "Agent name")->required();
  distinguish->add_option("--emit-dot", emitDot, "Write the refined system as DOT");
  addCap(distinguish);
  distinguish->add_flag("--allow-deadlock", allowDeadlock, "Accept states without successors");
  distinguish->add_flag("--json", jsonOut, "JSON output");

  auto* oracle = app.add_subcommand("oracle", "Evaluate a fixpoint-free formula on a bounded unfolding");
  oracle->add_option("--system", systemPath, "System file (.mas)")->required();
  oracle->add_option("--formula", formula.inlineText, "Formula text");
  oracle->add_option("--formula-file", formula.file, "File containing the formula");
  oracle->add_option("--depth", depth, "Depth of the unfolding prefix")->required();
  addCap(oracle);
  oracle->add_flag("--allow-deadlock", allowDeadlock, "Accept states without successors");
  oracle->add_flag("--json", jsonOut, "JSON output");

  auto* translate = app.add_subcommand("translate", "Emit checker instances for game questions");
  translate->require_subcommand(1);
  auto* until = translate->add_subcommand("atl-until", "Can (or, with --dual, cannot avoid) agent force p1 U p2");
  until->add_option("--system", systemPath, "Labeled system file")->required();
  until->add_option("--agent", agent, "Agent")->required();
  until->add_option("--p1", p1, "Atom that must hold until p2")->required();
  until->add_option("--p2", p2, "Target atom")->required();
  until->add_flag("--dual", dual, "Emit the dual instance");
  until->add_option("--out", outDir, "Output directory");
  addCap(until);
  auto* parity = translate->add_subcommand("parity", "Parity game winning condition for one player");
  parity->add_option("--game", gamePath, "Game file (.pg)")->required();
  parity->add_option("--player", player, "0 or 1")->required()->check(CLI::Range(0, 1));
  parity->add_option("--out", outDir, "Output directory");
  addCap(parity);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    bool help = e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success);
    app.exit(e, out, err);
    return help ? 0 : 3;
  }
  if (cap == 0) cap = defaultCap();

  Report report;
  report.command = args;
  std::vector<std::string> warnings;
  auto flushWarnings = [&] {
    for (auto& w : warnings) err << paint("warning: ", "33") << w << "\n";
    report.warnings = warnings;
  };

  try {
    if (checkCmd->parsed()) {
      Loaded sys = loadSystem(systemPath, allowDeadlock, warnings);
      report.inputs.push_back({"system", systemPath, sha256Hex(sys.bytes)});
      std::string text = formula.load();
      report.inputs.push_back({"formula", formula.source(), sha256Hex(text)});
      FormulaPtr f = parseFormula(text);
      SystemPtr target = checkTarget(sys.file, f, cap);
      if (target != sys.file.system)
        warnings.push_back("checking the action-compiled system (" + std::to_string(target->numStates()) + " states)");
      flushWarnings();
      CheckOptions opt;
      opt.cap = cap;
      if (trace) opt.trace = [&](const std::string& s) { err << "trace: " << s << "\n"; };
      try {
        Verdict v = check(target, f, opt);
        report.fragment = v.fragment;
        report.statistics = v.stats;
        report.verdict = v.holds ? "holds" : "fails";
        if (jsonOut) {
          out << reportToJson(report);
        } else {
          out << (v.holds ? paint("holds", "32") : paint("does not hold", "31")) << "\n";
          printStats(out, v.stats);
        }
        writeReport(reportPath, report);
        return v.holds ? 0 : 1;
      } catch (const FragmentRejected& e) {
        report.fragment = e.report();
        report.verdict = "rejected";
        if (jsonOut) out << reportToJson(report);
        else out << paint("rejected", "33") << ": " << rejection(e.report()) << "\n";
        writeReport(reportPath, report);
        return 2;
      }
    }

    if (analyze->parsed()) {
      Loaded sys = loadSystem(systemPath, allowDeadlock, warnings);
      report.inputs.push_back({"system", systemPath, sha256Hex(sys.bytes)});
      std::string text = formula.load();
      report.inputs.push_back({"formula", formula.source(), sha256Hex(text)});
      FormulaPtr formulaTree = parseFormula(text);
      SystemPtr target = checkTarget(sys.file, formulaTree);
      flushWarnings();
      FragmentReport f = analyzeFragment(*target, formulaTree);
      report.fragment = f;
      report.verdict = f.accepted ? "accept" : "reject";
      if (jsonOut) out << reportToJson(report);
      else if (f.accepted) out << paint("accept", "32") << "\n";
      else out << paint("reject", "33") << ": " << rejection(f) << "\n";
      writeReport(reportPath, report);
      return f.accepted ? 0 : 2;
    }

    if (distinguish->parsed()) {
      Loaded sys = loadSystem(systemPath, allowDeadlock, warnings);
      flushWarnings();
      DistinctionSystem d = distinction(sys.file.system, agent, cap);
      const auto& m = *d.system;
      if (!emitDot.empty()) writeFile(emitDot, toDot(m));
      if (jsonOut) {
        json j;
        j["agent"] = agent;
        j["count"] = m.numStates();
        j["initial"] = m.stateName(m.initial());
        j["states"] = json::array();
        for (StateId q = 0; q < m.numStates(); ++q) {
          std::vector<std::string> belief;
          forEach(d.beliefs[q], [&](StateId r) { belief.push_back(sys.file.system->stateName(r)); });
          j["states"].push_back(
              {{"name", m.stateName(q)}, {"base", sys.file.system->stateName(d.toBase.map[q])}, {"belief", belief}});
        }
        out << j.dump(2) << "\n";
      } else {
        out << "states: " << m.numStates() << "\n";
        for (StateId q = 0; q < m.numStates(); ++q)
          out << m.stateName(q) << " -> " << sys.file.system->stateName(d.toBase.map[q]) << "\n";
      }
      return 0;
    }

    if (oracle->parsed()) {
      Loaded sys = loadSystem(systemPath, allowDeadlock, warnings);
      std::string text = formula.load();
      flushWarnings();
      const auto& m = *sys.file.system;
      TreePrefix t(m, depth, cap);
      TreeEvaluation e = evalTree(m, t, parseFormula(text));
      if (jsonOut) {
        json j = {{"holds", e.rootHolds}, {"depth", depth}, {"exact_depth", e.nodes.exactDepth}, {"nodes", t.size()}};
        out << j.dump(2) << "\n";
      } else {
        out << (e.rootHolds ? "true" : "false") << "\n";
      }
      return e.rootHolds ? 0 : 1;
    }

    if (until->parsed() || parity->parsed()) {
      Instance inst;
      if (until->parsed()) {
        Loaded sys = loadSystem(systemPath, false, warnings);
        if (!sys.file.actions) throw InvalidSystem(systemPath + " has no action labels");
        inst = atlUntilInstance({sys.file.system, *sys.file.actions}, agent, p1, p2, dual);
      } else {
        Loaded g = loadSystem(gamePath, false, warnings);
        if (!g.file.actions) throw InvalidSystem(gamePath + " has no action labels");
        if (!g.file.priorities) throw InvalidSystem(gamePath + " has no priorities");
        inst = parityEncoding({{g.file.system, *g.file.actions}, *g.file.priorities}, player);
      }
      flushWarnings();
      CompiledSystem c = compileModal(inst.system, cap);
      std::filesystem::path dir(outDir);
      std::filesystem::create_directories(dir);
      writeFile(dir / "instance.mas", writeSystemFile(*inst.system.system, &inst.system.actions));
      writeFile(dir / "compiled.mas", writeSystemFile(*c.system));
      writeFile(dir / "formula.mu", toString(inst.formula) + "\n");
      out << "wrote " << (dir / "instance.mas").string() << " (" << inst.system.system->numStates() << " states)\n";
      out << "wrote " << (dir / "compiled.mas").string() << " (" << c.system->numStates() << " states)\n";
      out << "wrote " << (dir / "formula.mu").string() << "\n";
      return 0;
    }
  } catch (const Error& e) {
    err << paint("error: ", "31") << e.what() << "\n";
    if (checkCmd->parsed() || analyze->parsed()) {
      report.verdict = "error";
      report.error = e.what();
      try {
        writeReport(reportPath, report);
      } catch (const Error&) {
      }
    }
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    err << paint("error: ", "31") << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << paint("internal error: ", "31") << e.what() << "\n";
    return 4;
  }
  return 3;
}

}  // namespace epmu
