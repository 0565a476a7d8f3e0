#include "epmu/formula.hh"

#include <algorithm>
#include <cctype>
#include <functional>
#include <unordered_map>

#include "epmu/error.hh"

namespace epmu {

namespace {

FormulaPtr make(Op op, std::string name = {}, std::vector<FormulaPtr> children = {}, ActionTuple actions = {},
                SourcePos pos = {}) {
  return std::make_shared<const Formula>(op, std::move(name), std::move(actions), std::move(children), pos);
}

}  // namespace

FormulaPtr top() { return make(Op::True); }
FormulaPtr bottom() { return make(Op::False); }
FormulaPtr atom(std::string p) { return make(Op::Atom, std::move(p)); }
FormulaPtr negAtom(std::string p) { return make(Op::NegAtom, std::move(p)); }
FormulaPtr var(std::string z) { return make(Op::Var, std::move(z)); }
FormulaPtr neg(FormulaPtr f) { return make(Op::Not, {}, {std::move(f)}); }
FormulaPtr conj(FormulaPtr l, FormulaPtr r) { return make(Op::And, {}, {std::move(l), std::move(r)}); }
FormulaPtr disj(FormulaPtr l, FormulaPtr r) { return make(Op::Or, {}, {std::move(l), std::move(r)}); }
FormulaPtr ax(FormulaPtr f) { return make(Op::AX, {}, {std::move(f)}); }
FormulaPtr ex(FormulaPtr f) { return make(Op::EX, {}, {std::move(f)}); }
FormulaPtr know(std::string agent, FormulaPtr f) { return make(Op::Know, std::move(agent), {std::move(f)}); }
FormulaPtr poss(std::string agent, FormulaPtr f) { return make(Op::Poss, std::move(agent), {std::move(f)}); }
FormulaPtr mu(std::string z, FormulaPtr body) { return make(Op::Mu, std::move(z), {std::move(body)}); }
FormulaPtr nu(std::string z, FormulaPtr body) { return make(Op::Nu, std::move(z), {std::move(body)}); }
FormulaPtr diamond(ActionTuple actions, FormulaPtr f) {
  return make(Op::Diamond, {}, {std::move(f)}, std::move(actions));
}
FormulaPtr box(ActionTuple actions, FormulaPtr f) { return make(Op::Box, {}, {std::move(f)}, std::move(actions)); }

FormulaPtr withChildren(const Formula& f, std::vector<FormulaPtr> children) {
  return make(f.op(), f.name(), std::move(children), f.actions(), f.pos());
}

FormulaPtr conjAll(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return top();
  FormulaPtr acc = fs.back();
  for (auto it = fs.rbegin() + 1; it != fs.rend(); ++it) acc = conj(*it, acc);
  return acc;
}

FormulaPtr disjAll(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return bottom();
  FormulaPtr acc = fs.back();
  for (auto it = fs.rbegin() + 1; it != fs.rend(); ++it) acc = disj(*it, acc);
  return acc;
}

// ---------------------------------------------------------------------------
// Lexer and parser

namespace {

enum class Tok {
  End,
  Ident,   // [a-z][A-Za-z0-9_]*
  VarName, // [A-Z][A-Za-z0-9]*
  True,
  False,
  AX,
  EX,
  K,
  P,
  E,
  C,
  Mu,
  Nu,
  Not,
  And,
  Or,
  Implies,
  Dot,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Less,
  Greater,
  LBracket,
  RBracket,
  Equals,
};

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    SourcePos pos{line, col};
    if (std::isalpha(c)) {
      std::size_t j = i;
      bool lower = std::islower(c);
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || (lower && s[j] == '_'))) ++j;
      std::string word = s.substr(i, j - i);
      Tok kind = lower ? Tok::Ident : Tok::VarName;
      static const std::unordered_map<std::string, Tok> keywords = {
          {"true", Tok::True}, {"false", Tok::False}, {"AX", Tok::AX}, {"EX", Tok::EX}, {"K", Tok::K},
          {"P", Tok::P},       {"E", Tok::E},         {"C", Tok::C},   {"mu", Tok::Mu}, {"nu", Tok::Nu},
      };
      if (auto it = keywords.find(word); it != keywords.end()) kind = it->second;
      out.push_back({kind, word, pos});
      advance(j - i);
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      out.push_back({Tok::Implies, "->", pos});
      advance(2);
      continue;
    }
    Tok kind;
    switch (c) {
      case '~': kind = Tok::Not; break;
      case '&': kind = Tok::And; break;
      case '|': kind = Tok::Or; break;
      case '.': kind = Tok::Dot; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case '{': kind = Tok::LBrace; break;
      case '}': kind = Tok::RBrace; break;
      case ',': kind = Tok::Comma; break;
      case '<': kind = Tok::Less; break;
      case '>': kind = Tok::Greater; break;
      case '[': kind = Tok::LBracket; break;
      case ']': kind = Tok::RBracket; break;
      case '=': kind = Tok::Equals; break;
      default:
        throw SyntaxError(std::string("unexpected character '") + static_cast<char>(c) + "'", line, col);
    }
    out.push_back({kind, std::string(1, static_cast<char>(c)), pos});
    advance(1);
  }
  // End-of-input errors are reported at the last real token.
  SourcePos endPos = out.empty() ? SourcePos{line, col} : out.back().pos;
  out.push_back({Tok::End, "", endPos});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const ParseOptions& opts) : toks_(std::move(toks)), opts_(opts) {}

  FormulaPtr parseAll() {
    FormulaPtr f = expr();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string msg = what;
    if (t.kind == Tok::End) {
      msg = "unexpected end of input";
      if (pos_ > 0) msg += " after '" + toks_[pos_ - 1].text + "'";
    }
    throw SyntaxError(msg, t.pos.line, t.pos.column);
  }
  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    return next();
  }

  std::string agentName() {
    const Token& t = expect(Tok::Ident, "agent name");
    if (opts_.agents && !opts_.agents->count(t.text)) throw UnknownAgent(t.text);
    return t.text;
  }

  std::vector<std::string> agentList() {
    expect(Tok::LBrace, "'{'");
    std::vector<std::string> out{agentName()};
    while (accept(Tok::Comma)) out.push_back(agentName());
    expect(Tok::RBrace, "'}'");
    return out;
  }

  ActionTuple actionTuple(Tok close, const char* closeText) {
    ActionTuple t;
    do {
      std::string agent = agentName();
      expect(Tok::Equals, "'='");
      std::string action = expect(Tok::Ident, "action name").text;
      t.push_back({std::move(agent), std::move(action)});
    } while (accept(Tok::Comma));
    expect(close, closeText);
    return t;
  }

  FormulaPtr expr() {
    FormulaPtr lhs = disjunction();
    if (peek().kind == Tok::Implies) {
      SourcePos p = next().pos;
      FormulaPtr rhs = expr();
      FormulaPtr notLhs = lhs->op() == Op::Atom ? make(Op::NegAtom, lhs->name(), {}, {}, p)
                                                : make(Op::Not, {}, {lhs}, {}, p);
      return make(Op::Or, {}, {notLhs, rhs}, {}, p);
    }
    return lhs;
  }

  FormulaPtr disjunction() {
    FormulaPtr lhs = conjunction();
    while (peek().kind == Tok::Or) {
      SourcePos p = next().pos;
      lhs = make(Op::Or, {}, {lhs, conjunction()}, {}, p);
    }
    return lhs;
  }

  FormulaPtr conjunction() {
    FormulaPtr lhs = unary();
    while (peek().kind == Tok::And) {
      SourcePos p = next().pos;
      lhs = make(Op::And, {}, {lhs, unary()}, {}, p);
    }
    return lhs;
  }

  FormulaPtr unary() {
    const Token& t = peek();
    SourcePos p = t.pos;
    switch (t.kind) {
      case Tok::Not: {
        next();
        FormulaPtr f = unary();
        if (f->op() == Op::Atom) return make(Op::NegAtom, f->name(), {}, {}, p);
        return make(Op::Not, {}, {f}, {}, p);
      }
      case Tok::AX: next(); return make(Op::AX, {}, {unary()}, {}, p);
      case Tok::EX: next(); return make(Op::EX, {}, {unary()}, {}, p);
      case Tok::K:
      case Tok::P: {
        Op op = t.kind == Tok::K ? Op::Know : Op::Poss;
        next();
        std::string a = agentName();
        expect(Tok::Dot, "'.'");
        return make(op, a, {unary()}, {}, p);
      }
      case Tok::E: {
        next();
        auto agents = agentList();
        FormulaPtr body = unary();
        std::vector<FormulaPtr> parts;
        for (auto& a : agents) parts.push_back(make(Op::Know, a, {body}, {}, p));
        return conjAll(parts);
      }
      case Tok::C: {
        next();
        auto agents = agentList();
        FormulaPtr body = unary();
        // The fixpoint variable must not capture anything free in the operand.
        auto used = freeVariables(body);
        std::string z = "Ck";
        for (int n = 1; used.count(z); ++n) z = "Ck" + std::to_string(n);
        std::vector<FormulaPtr> ks;
        for (auto& a : agents) ks.push_back(make(Op::Know, a, {make(Op::Var, z, {}, {}, p)}, {}, p));
        return make(Op::Nu, z, {make(Op::And, {}, {body, conjAll(ks)}, {}, p)}, {}, p);
      }
      case Tok::Less: {
        next();
        ActionTuple acts = actionTuple(Tok::Greater, "'>'");
        return make(Op::Diamond, {}, {unary()}, std::move(acts), p);
      }
      case Tok::LBracket: {
        next();
        ActionTuple acts = actionTuple(Tok::RBracket, "']'");
        return make(Op::Box, {}, {unary()}, std::move(acts), p);
      }
      default: return primary();
    }
  }

  FormulaPtr primary() {
    const Token& t = peek();
    SourcePos p = t.pos;
    switch (t.kind) {
      case Tok::True: next(); return make(Op::True, {}, {}, {}, p);
      case Tok::False: next(); return make(Op::False, {}, {}, {}, p);
      case Tok::Ident: next(); return make(Op::Atom, t.text, {}, {}, p);
      case Tok::VarName: next(); return make(Op::Var, t.text, {}, {}, p);
      case Tok::LParen: {
        next();
        FormulaPtr f = expr();
        expect(Tok::RParen, "')'");
        return f;
      }
      case Tok::Mu:
      case Tok::Nu: {
        Op op = t.kind == Tok::Mu ? Op::Mu : Op::Nu;
        next();
        std::string z = expect(Tok::VarName, "fixpoint variable").text;
        expect(Tok::Dot, "'.'");
        return make(op, z, {expr()}, {}, p);
      }
      default: fail("expected a formula");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const ParseOptions& opts_;
};

}  // namespace

FormulaPtr parseFormula(const std::string& text, const ParseOptions& options) {
  Parser parser(lex(text), options);
  return parser.parseAll();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(const Formula& f) {
  switch (f.op()) {
    case Op::Mu:
    case Op::Nu: return 0;
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Not:
    case Op::AX:
    case Op::EX:
    case Op::Know:
    case Op::Poss:
    case Op::Diamond:
    case Op::Box: return 3;
    default: return 4;
  }
}

std::string tupleText(const ActionTuple& t) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ",";
    s += t[i].agent + "=" + t[i].action;
  }
  return s;
}

void print(const FormulaPtr& f, std::string& out);

void printAt(const FormulaPtr& f, int minPrec, std::string& out) {
  if (precedence(*f) < minPrec) {
    out += "(";
    print(f, out);
    out += ")";
  } else {
    print(f, out);
  }
}

void print(const FormulaPtr& f, std::string& out) {
  switch (f->op()) {
    case Op::True: out += "true"; break;
    case Op::False: out += "false"; break;
    case Op::Atom: out += f->name(); break;
    case Op::NegAtom: out += "~" + f->name(); break;
    case Op::Var: out += f->name(); break;
    case Op::Not: out += "~"; printAt(f->child(), 3, out); break;
    case Op::And:
    case Op::Or: {
      int p = precedence(*f);
      printAt(f->child(0), p, out);
      out += f->op() == Op::And ? " & " : " | ";
      printAt(f->child(1), p + 1, out);
      break;
    }
    case Op::AX: out += "AX "; printAt(f->child(), 3, out); break;
    case Op::EX: out += "EX "; printAt(f->child(), 3, out); break;
    case Op::Know: out += "K " + f->name() + " . "; printAt(f->child(), 3, out); break;
    case Op::Poss: out += "P " + f->name() + " . "; printAt(f->child(), 3, out); break;
    case Op::Diamond: out += "<" + tupleText(f->actions()) + "> "; printAt(f->child(), 3, out); break;
    case Op::Box: out += "[" + tupleText(f->actions()) + "] "; printAt(f->child(), 3, out); break;
    case Op::Mu:
    case Op::Nu:
      out += (f->op() == Op::Mu ? "mu " : "nu ") + f->name() + " . ";
      print(f->child(), out);
      break;
  }
}

}  // namespace

std::string toString(const FormulaPtr& f) {
  std::string out;
  print(f, out);
  return out;
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (a->op() != b->op() || a->name() != b->name() || a->actions() != b->actions() ||
      a->children().size() != b->children().size())
    return false;
  for (std::size_t i = 0; i < a->children().size(); ++i)
    if (!equal(a->child(i), b->child(i))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Queries

namespace {

void collectFree(const FormulaPtr& f, std::set<std::string>& bound, std::set<std::string>& out) {
  if (f->op() == Op::Var) {
    if (!bound.count(f->name())) out.insert(f->name());
    return;
  }
  bool added = false;
  if (f->isBinder()) added = bound.insert(f->name()).second;
  for (auto& c : f->children()) collectFree(c, bound, out);
  if (added) bound.erase(f->name());
}

template <typename F>
void visit(const FormulaPtr& f, F&& fn) {
  fn(*f);
  for (auto& c : f->children()) visit(c, fn);
}

}  // namespace

std::set<std::string> freeVariables(const FormulaPtr& f) {
  std::set<std::string> bound, out;
  collectFree(f, bound, out);
  return out;
}

bool isClosed(const FormulaPtr& f) { return freeVariables(f).empty(); }

std::set<std::string> agentsOf(const FormulaPtr& f) {
  std::set<std::string> out;
  visit(f, [&](const Formula& g) {
    if (g.isEpistemic()) out.insert(g.name());
    for (auto& a : g.actions()) out.insert(a.agent);
  });
  return out;
}

std::set<std::string> atomsOf(const FormulaPtr& f) {
  std::set<std::string> out;
  visit(f, [&](const Formula& g) {
    if (g.op() == Op::Atom || g.op() == Op::NegAtom) out.insert(g.name());
  });
  return out;
}

std::size_t size(const FormulaPtr& f) {
  std::size_t n = 0;
  visit(f, [&](const Formula&) { ++n; });
  return n;
}

std::size_t modalDepth(const FormulaPtr& f) {
  // Memoized: unfolded formulas share subterms heavily.
  std::unordered_map<const Formula*, std::size_t> memo;
  std::function<std::size_t(const FormulaPtr&)> go = [&](const FormulaPtr& g) -> std::size_t {
    if (auto it = memo.find(g.get()); it != memo.end()) return it->second;
    std::size_t d = 0;
    for (auto& c : g->children()) d = std::max(d, go(c));
    if (g->op() == Op::AX || g->op() == Op::EX || g->op() == Op::Diamond || g->op() == Op::Box) ++d;
    memo.emplace(g.get(), d);
    return d;
  };
  return go(f);
}

bool isFixpointFree(const FormulaPtr& f) {
  bool free = true;
  visit(f, [&](const Formula& g) { free = free && !g.isBinder() && g.op() != Op::Var; });
  return free;
}

bool hasActionModalities(const FormulaPtr& f) {
  bool found = false;
  visit(f, [&](const Formula& g) { found = found || g.op() == Op::Diamond || g.op() == Op::Box; });
  return found;
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

// Pushes negations down. `flipped` holds the bound variables whose
// occurrences carry an extra negation from a dualized binder.
FormulaPtr pushNegations(const FormulaPtr& f, bool negated, std::map<std::string, bool>& flipped) {
  auto rec = [&](const FormulaPtr& g, bool n) { return pushNegations(g, n, flipped); };
  switch (f->op()) {
    case Op::True: return negated ? bottom() : top();
    case Op::False: return negated ? top() : bottom();
    case Op::Atom: return negated ? negAtom(f->name()) : atom(f->name());
    case Op::NegAtom: return negated ? atom(f->name()) : negAtom(f->name());
    case Op::Var: {
      auto it = flipped.find(f->name());
      bool effective = negated != (it != flipped.end() && it->second);
      if (effective) throw NonMonotoneVariable(f->name());
      return var(f->name());
    }
    case Op::Not: return rec(f->child(), !negated);
    case Op::And:
    case Op::Or: {
      Op op = (f->op() == Op::And) != negated ? Op::And : Op::Or;
      return make(op, {}, {rec(f->child(0), negated), rec(f->child(1), negated)});
    }
    case Op::AX: return negated ? ex(rec(f->child(), true)) : ax(rec(f->child(), false));
    case Op::EX: return negated ? ax(rec(f->child(), true)) : ex(rec(f->child(), false));
    case Op::Know: return negated ? poss(f->name(), rec(f->child(), true)) : know(f->name(), rec(f->child(), false));
    case Op::Poss: return negated ? know(f->name(), rec(f->child(), true)) : poss(f->name(), rec(f->child(), false));
    case Op::Diamond:
      return negated ? box(f->actions(), rec(f->child(), true)) : diamond(f->actions(), rec(f->child(), false));
    case Op::Box:
      return negated ? diamond(f->actions(), rec(f->child(), true)) : box(f->actions(), rec(f->child(), false));
    case Op::Mu:
    case Op::Nu: {
      Op op = (f->op() == Op::Mu) != negated ? Op::Mu : Op::Nu;
      auto saved = flipped.find(f->name()) != flipped.end() ? std::optional<bool>(flipped[f->name()]) : std::nullopt;
      flipped[f->name()] = negated;
      FormulaPtr body = rec(f->child(), negated);
      if (saved) {
        flipped[f->name()] = *saved;
      } else {
        flipped.erase(f->name());
      }
      return make(op, f->name(), {body});
    }
  }
  return f;
}

struct Renamer {
  std::set<std::string> used;

  std::string fresh(const std::string& base) {
    if (used.insert(base).second) return base;
    for (int n = 1;; ++n) {
      std::string cand = base + std::to_string(n);
      if (used.insert(cand).second) return cand;
    }
  }

  FormulaPtr run(const FormulaPtr& f, std::map<std::string, std::string>& scope) {
    switch (f->op()) {
      case Op::Var: {
        auto it = scope.find(f->name());
        return it == scope.end() ? f : var(it->second);
      }
      case Op::Mu:
      case Op::Nu: {
        if (!freeVariables(f->child()).count(f->name())) return run(f->child(), scope);
        std::string name = fresh(f->name());
        auto saved = scope.count(f->name()) ? std::optional<std::string>(scope[f->name()]) : std::nullopt;
        scope[f->name()] = name;
        FormulaPtr body = run(f->child(), scope);
        if (saved) {
          scope[f->name()] = *saved;
        } else {
          scope.erase(f->name());
        }
        return make(f->op(), name, {body});
      }
      default: {
        if (f->children().empty()) return f;
        std::vector<FormulaPtr> cs;
        for (auto& c : f->children()) cs.push_back(run(c, scope));
        return withChildren(*f, std::move(cs));
      }
    }
  }
};

}  // namespace

FormulaPtr toPositiveForm(const FormulaPtr& f) {
  std::map<std::string, bool> flipped;
  FormulaPtr nnf = pushNegations(f, false, flipped);
  Renamer r;
  r.used = freeVariables(nnf);
  std::map<std::string, std::string> scope;
  return r.run(nnf, scope);
}

FormulaPtr dual(const FormulaPtr& f) { return toPositiveForm(neg(f)); }

FormulaPtr substitute(const FormulaPtr& f, const std::string& z, const FormulaPtr& by) {
  if (f->op() == Op::Var) return f->name() == z ? by : f;
  if (f->isBinder() && f->name() == z) return f;
  if (f->children().empty()) return f;
  std::vector<FormulaPtr> cs;
  bool changed = false;
  for (auto& c : f->children()) {
    cs.push_back(substitute(c, z, by));
    changed = changed || cs.back() != c;
  }
  return changed ? withChildren(*f, std::move(cs)) : f;
}

FormulaPtr unfoldFixpoint(const FormulaPtr& f, std::size_t k) {
  if (f->children().empty()) return f;
  std::vector<FormulaPtr> cs;
  for (auto& c : f->children()) cs.push_back(unfoldFixpoint(c, k));
  if (!f->isBinder()) return withChildren(*f, std::move(cs));
  const FormulaPtr& body = cs.front();
  FormulaPtr approx = f->op() == Op::Mu ? bottom() : top();
  for (std::size_t i = 0; i < std::max<std::size_t>(k, 1); ++i) approx = substitute(body, f->name(), approx);
  return approx;
}

std::string actionAtom(const std::string& agent, const std::string& action) {
  return "act:" + agent + "=" + action;
}

FormulaPtr eliminateActionModalities(const FormulaPtr& f) {
  if (f->children().empty()) return f;
  std::vector<FormulaPtr> cs;
  for (auto& c : f->children()) cs.push_back(eliminateActionModalities(c));
  if (f->op() == Op::Diamond) {
    std::vector<FormulaPtr> parts;
    for (auto& a : f->actions()) parts.push_back(atom(actionAtom(a.agent, a.action)));
    parts.push_back(cs.front());
    return ex(conjAll(parts));
  }
  if (f->op() == Op::Box) {
    std::vector<FormulaPtr> parts;
    for (auto& a : f->actions()) parts.push_back(negAtom(actionAtom(a.agent, a.action)));
    parts.push_back(cs.front());
    return ax(disjAll(parts));
  }
  return withChildren(*f, std::move(cs));
}

// ---------------------------------------------------------------------------
// Syntactic tree

SynTree::SynTree(const FormulaPtr& positive) { build(positive, -1, 0); }

int SynTree::build(const FormulaPtr& f, int parent, std::size_t depth) {
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  {
    SynNode& n = nodes_.back();
    n.op = f->op();
    n.form = f;
    n.parent = parent;
    n.depth = depth;
  }
  std::vector<int> kids;
  if (f->op() == Op::Var) {
    int t = static_cast<int>(nodes_.size());
    SynNode marker;
    marker.op = Op::True;
    marker.topMarker = true;
    marker.form = top();
    marker.parent = id;
    marker.depth = depth + 1;
    nodes_.push_back(std::move(marker));
    kids.push_back(t);
  } else {
    for (auto& c : f->children()) kids.push_back(build(c, id, depth + 1));
  }
  SynNode& n = nodes_[static_cast<std::size_t>(id)];
  n.children = kids;
  n.closed = isClosed(f);
  if (!n.closed) {
    if (f->isEpistemic()) n.agncl.insert(f->name());
    for (int k : kids) {
      const SynNode& c = nodes_[static_cast<std::size_t>(k)];
      n.agncl.insert(c.agncl.begin(), c.agncl.end());
    }
  }
  for (int k : kids) nodes_[static_cast<std::size_t>(k)].frontier = nodes_[static_cast<std::size_t>(k)].closed && !n.closed;
  return id;
}

std::vector<int> SynTree::nearestClosed(int i) const {
  std::vector<int> out;
  std::function<void(int)> go = [&](int x) {
    for (int c : node(x).children) {
      const SynNode& n = node(c);
      if (n.topMarker) continue;
      if (n.closed) {
        out.push_back(c);
      } else {
        go(c);
      }
    }
  };
  go(i);
  return out;
}

FragmentReport checkNonMixing(const SynTree& tree, const ObservabilityMap& obs) {
  for (auto& n : tree.nodes()) {
    if (n.form->isEpistemic() && !obs.count(n.form->name())) throw UnknownAgent(n.form->name());
  }
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const SynNode& n = tree.node(static_cast<int>(i));
    for (auto a = n.agncl.begin(); a != n.agncl.end(); ++a) {
      for (auto b = std::next(a); b != n.agncl.end(); ++b) {
        const auto& pa = obs.at(*a);
        const auto& pb = obs.at(*b);
        bool comparable = std::includes(pa.begin(), pa.end(), pb.begin(), pb.end()) ||
                          std::includes(pb.begin(), pb.end(), pa.begin(), pa.end());
        if (!comparable) return {false, static_cast<int>(i), toString(n.form), *a, *b};
      }
    }
  }
  return {};
}

}  // namespace epmu
