#pragma once

#include <chrono>
#include <vector>

#include "evolvegen/netlist/aig.hpp"
#include "evolvegen/sat/solver.hpp"

namespace evolvegen::checker::detail {

using netlist::AigCircuit;
using netlist::AigLit;
using sat::Lit;

// Lazy Tseitin encoding of one copy of the combinational logic. Leaves are
// bound with set_input/set_latch before the first lit() call that reaches them.
class FrameEncoder {
 public:
  FrameEncoder(const AigCircuit& aig, sat::Solver& solver, Lit true_lit)
      : aig_(aig), s_(solver), true_(true_lit), map_(aig.max_var() + 1, kUnset) {
    map_[0] = (~true_lit).x;
  }

  void set_input(std::uint32_t i, Lit l) { map_[1 + i] = l.x; }
  void set_latch(std::uint32_t i, Lit l) { map_[1 + aig_.num_inputs + i] = l.x; }

  Lit lit(AigLit a) {
    const std::uint32_t v = netlist::aig_var(a);
    if (map_[v] == kUnset) encode(v);
    Lit l{map_[v]};
    return netlist::aig_sign(a) ? ~l : l;
  }

  // Disjunction of the bad literals (false when there are none).
  Lit bad_any() {
    if (aig_.bad.empty()) return ~true_;
    if (aig_.bad.size() == 1) return lit(aig_.bad[0]);
    Lit b = s_.new_lit();
    std::vector<Lit> big{~b};
    for (AigLit x : aig_.bad) {
      Lit l = lit(x);
      big.push_back(l);
      s_.add_clause({b, ~l});
    }
    s_.add_clause(big);
    return b;
  }

 private:
  static constexpr std::uint32_t kUnset = 0xFFFFFFFFu;

  void encode(std::uint32_t root) {
    std::vector<std::uint32_t> stack{root};
    while (!stack.empty()) {
      std::uint32_t v = stack.back();
      if (map_[v] != kUnset) {
        stack.pop_back();
        continue;
      }
      if (!aig_.is_and_var(v)) {
        // Unbound leaf: a free variable.
        map_[v] = s_.new_lit().x;
        stack.pop_back();
        continue;
      }
      const auto& g = aig_.and_of_var(v);
      std::uint32_t v0 = netlist::aig_var(g.rhs0), v1 = netlist::aig_var(g.rhs1);
      if (map_[v0] == kUnset) {
        stack.push_back(v0);
        continue;
      }
      if (map_[v1] == kUnset) {
        stack.push_back(v1);
        continue;
      }
      stack.pop_back();
      Lit a = lit(g.rhs0), b = lit(g.rhs1);
      Lit y = s_.new_lit();
      s_.add_clause({~y, a});
      s_.add_clause({~y, b});
      s_.add_clause({y, ~a, ~b});
      map_[v] = y.x;
    }
  }

  const AigCircuit& aig_;
  sat::Solver& s_;
  Lit true_;
  std::vector<std::uint32_t> map_;
};

inline Lit make_true(sat::Solver& s) {
  Lit t = s.new_lit();
  s.add_clause({t});
  return t;
}

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace evolvegen::checker::detail
