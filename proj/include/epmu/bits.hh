#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace epmu {

using StateId = std::uint32_t;

/// Subsets of a finite universe (states of one system, or its atoms).
using Bits = boost::dynamic_bitset<std::uint64_t>;
using StateSet = Bits;
using AtomSet = Bits;

inline Bits fullSet(std::size_t n) {
  Bits b(n);
  b.set();
  return b;
}

inline std::vector<StateId> members(const Bits& b) {
  std::vector<StateId> out;
  out.reserve(b.count());
  for (auto i = b.find_first(); i != Bits::npos; i = b.find_next(i)) out.push_back(static_cast<StateId>(i));
  return out;
}

inline Bits fromMembers(std::size_t n, const std::vector<StateId>& xs) {
  Bits b(n);
  for (auto x : xs) b.set(x);
  return b;
}

template <typename F>
void forEach(const Bits& b, F&& f) {
  for (auto i = b.find_first(); i != Bits::npos; i = b.find_next(i)) f(static_cast<StateId>(i));
}

}  // namespace epmu
