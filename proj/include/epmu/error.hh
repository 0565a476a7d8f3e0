#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epmu {

/// Base class of all errors raised by the library. Input and capacity
/// errors derive from it; internal invariant failures use std::logic_error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::string what, int line, int column)
      : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class NonMonotoneVariable : public Error {
 public:
  explicit NonMonotoneVariable(std::string var)
      : Error("variable " + var + " occurs negatively under its binder"), var_(std::move(var)) {}
  const std::string& variable() const { return var_; }

 private:
  std::string var_;
};

class FreeVariable : public Error {
 public:
  explicit FreeVariable(std::string var) : Error("formula is not closed: free variable " + var), var_(std::move(var)) {}
  const std::string& variable() const { return var_; }

 private:
  std::string var_;
};

class UnknownAgent : public Error {
 public:
  explicit UnknownAgent(std::string agent) : Error("unknown agent " + agent), agent_(std::move(agent)) {}
  const std::string& agent() const { return agent_; }

 private:
  std::string agent_;
};

class UnknownAtom : public Error {
 public:
  explicit UnknownAtom(std::string atom) : Error("unknown atom " + atom), atom_(std::move(atom)) {}
  const std::string& atom() const { return atom_; }

 private:
  std::string atom_;
};

/// Malformed or inconsistent system description.
class InvalidSystem : public Error {
 public:
  using Error::Error;
};

class CapacityExceeded : public Error {
 public:
  CapacityExceeded(std::string what, std::size_t cap)
      : Error(what + " exceeds the state cap of " + std::to_string(cap)), cap_(cap) {}
  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
};

class NonChainAgents : public Error {
 public:
  NonChainAgents(std::string a, std::string b)
      : Error("agents " + a + " and " + b + " have incomparable observable atoms"),
        first_(std::move(a)),
        second_(std::move(b)) {}
  const std::string& first() const { return first_; }
  const std::string& second() const { return second_; }

 private:
  std::string first_;
  std::string second_;
};

class SystemMismatch : public Error {
 public:
  using Error::Error;
};

class DepthInsufficient : public Error {
 public:
  DepthInsufficient(std::size_t needed, std::size_t available)
      : Error("formula needs modal depth " + std::to_string(needed) + " but the prefix has depth " +
              std::to_string(available)) {}
};

class UnsupportedCoalition : public Error {
 public:
  using Error::Error;
};

}  // namespace epmu
