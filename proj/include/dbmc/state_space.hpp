#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "dbmc/error.hpp"

namespace dbmc {

// A state assigns one symbol from {0, ..., q-1} to each unit.
using State = std::vector<std::uint8_t>;
using StateIndex = std::uint64_t;

// Finite space {0, ..., q-1}^n with a fixed lexicographic enumeration:
// the leftmost coordinate is the most significant digit, so
// index(x) = sum_i x[i] * q^(n-1-i).
class StateSpace {
 public:
  StateSpace(int units, int alphabet) : units_(units), alphabet_(alphabet) {
    if (units < 1) throw dimension_error("state space needs at least one unit");
    if (alphabet < 2) throw domain_error("alphabet size must be at least 2");
    size_ = 1;
    for (int i = 0; i < units; ++i) {
      if (size_ > kMaxStates / static_cast<StateIndex>(alphabet))
        throw size_error("state space exceeds enumeration limit");
      size_ *= static_cast<StateIndex>(alphabet);
    }
  }

  int units() const { return units_; }
  int alphabet() const { return alphabet_; }
  StateIndex size() const { return size_; }

  bool operator==(const StateSpace& o) const {
    return units_ == o.units_ && alphabet_ == o.alphabet_;
  }
  bool operator!=(const StateSpace& o) const { return !(*this == o); }

  StateIndex encode(const State& x) const {
    if (static_cast<int>(x.size()) != units_)
      throw dimension_error("state length does not match unit count");
    StateIndex idx = 0;
    for (int i = 0; i < units_; ++i) {
      if (x[i] >= alphabet_) throw domain_error("symbol outside alphabet");
      idx = idx * static_cast<StateIndex>(alphabet_) + x[i];
    }
    return idx;
  }

  State decode(StateIndex idx) const {
    if (idx >= size_) throw domain_error("state index out of range");
    State x(units_);
    for (int i = units_ - 1; i >= 0; --i) {
      x[i] = static_cast<std::uint8_t>(idx % alphabet_);
      idx /= alphabet_;
    }
    return x;
  }

  // Advances x to the next state in enumeration order; returns false after the last one.
  bool next(State& x) const {
    for (int i = units_ - 1; i >= 0; --i) {
      if (x[i] + 1 < alphabet_) {
        ++x[i];
        std::fill(x.begin() + i + 1, x.end(), 0);
        return true;
      }
    }
    return false;
  }

 private:
  static constexpr StateIndex kMaxStates = StateIndex{1} << 26;
  int units_;
  int alphabet_;
  StateIndex size_;
};

// Hamming distance between two states of equal length.
inline int hamming_distance(const State& a, const State& b) {
  if (a.size() != b.size()) throw dimension_error("states differ in length");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
  return d;
}

inline bool hamming_adjacent(const State& a, const State& b) {
  return hamming_distance(a, b) == 1;
}

// Coordinate where two adjacent states differ; -1 if they are not adjacent.
inline int adjacent_direction(const State& a, const State& b) {
  if (a.size() != b.size()) throw dimension_error("states differ in length");
  int dir = -1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) {
      if (dir >= 0) return -1;
      dir = static_cast<int>(i);
    }
  }
  return dir;
}

// Returns x with coordinate i set to symbol b.
inline State flip(const State& x, int i, int b) {
  if (i < 0 || i >= static_cast<int>(x.size()))
    throw dimension_error("flip coordinate out of range");
  if (b < 0 || b > 255) throw domain_error("flip symbol outside alphabet");
  State y = x;
  y[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(b);
  return y;
}

// Binary convenience: inverts coordinate i.
inline State flip(const State& x, int i) {
  if (i < 0 || i >= static_cast<int>(x.size()))
    throw dimension_error("flip coordinate out of range");
  return flip(x, i, x[static_cast<std::size_t>(i)] ? 0 : 1);
}

// Ordered set of states, kept sorted by enumeration index.
class SupportSet {
 public:
  explicit SupportSet(StateSpace space) : space_(space) {}
  SupportSet(StateSpace space, std::vector<StateIndex> members)
      : space_(space), members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    for (StateIndex m : members_)
      if (m >= space_.size()) throw domain_error("support member out of range");
  }

  const StateSpace& space() const { return space_; }
  const std::vector<StateIndex>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

  bool contains(StateIndex idx) const {
    return std::binary_search(members_.begin(), members_.end(), idx);
  }

  void insert(StateIndex idx) {
    if (idx >= space_.size()) throw domain_error("support member out of range");
    auto it = std::lower_bound(members_.begin(), members_.end(), idx);
    if (it == members_.end() || *it != idx) members_.insert(it, idx);
  }

  bool is_full() const { return members_.size() == space_.size(); }

  bool operator==(const SupportSet& o) const {
    return space_ == o.space_ && members_ == o.members_;
  }

 private:
  StateSpace space_;
  std::vector<StateIndex> members_;
};

}  // namespace dbmc
