#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace evolvegen::netlist {

// AIGER literal: 2*var + negation bit. 0 = false, 1 = true.
using AigLit = std::uint32_t;

inline constexpr AigLit kAigFalse = 0;
inline constexpr AigLit kAigTrue = 1;

inline constexpr AigLit aig_not(AigLit l) { return l ^ 1u; }
inline constexpr std::uint32_t aig_var(AigLit l) { return l >> 1; }
inline constexpr bool aig_sign(AigLit l) { return (l & 1u) != 0; }
inline constexpr AigLit aig_make(std::uint32_t var, bool negated = false) {
  return var * 2 + (negated ? 1u : 0u);
}

enum class LatchInit : std::uint8_t { kZero, kOne, kUndefined };

struct AigLatch {
  AigLit next = kAigFalse;
  LatchInit init = LatchInit::kZero;
  bool operator==(const AigLatch&) const = default;
};

struct AigAnd {
  AigLit lhs = 0;   // always even
  AigLit rhs0 = 0;  // rhs0 >= rhs1, both < lhs
  AigLit rhs1 = 0;
  bool operator==(const AigAnd&) const = default;
};

// Sequential and-inverter graph in AIGER variable order: inputs occupy
// variables 1..I, latches I+1..I+L, and gates I+L+1..M in topological order.
struct AigCircuit {
  std::uint32_t num_inputs = 0;
  std::vector<AigLatch> latches;
  std::vector<AigAnd> and_gates;
  std::vector<AigLit> outputs;
  std::vector<AigLit> bad;
  std::vector<std::string> input_names;  // empty or one per input
  std::vector<std::string> latch_names;  // empty or one per latch

  std::uint32_t num_latches() const { return static_cast<std::uint32_t>(latches.size()); }
  std::uint32_t num_ands() const { return static_cast<std::uint32_t>(and_gates.size()); }
  std::uint32_t max_var() const { return num_inputs + num_latches() + num_ands(); }
  AigLit input_lit(std::uint32_t i) const { return aig_make(1 + i); }
  AigLit latch_lit(std::uint32_t i) const { return aig_make(1 + num_inputs + i); }
  bool is_input_var(std::uint32_t v) const { return v >= 1 && v <= num_inputs; }
  bool is_latch_var(std::uint32_t v) const { return v > num_inputs && v <= num_inputs + num_latches(); }
  bool is_and_var(std::uint32_t v) const { return v > num_inputs + num_latches() && v <= max_var(); }
  const AigAnd& and_of_var(std::uint32_t v) const {
    return and_gates[v - num_inputs - num_latches() - 1];
  }
  // QR denominator: AND gate count + latch count.
  std::uint64_t size() const { return static_cast<std::uint64_t>(num_ands()) + num_latches(); }

  bool operator==(const AigCircuit&) const = default;
};

// Throws std::invalid_argument describing the first broken invariant.
void check_well_formed(const AigCircuit& aig);

// Combinational AIG with structural hashing and constant folding. Leaves
// (inputs) may be created at any time; variable 0 is constant false.
class AigManager {
 public:
  AigManager();

  AigLit new_input();
  AigLit make_and(AigLit a, AigLit b);
  AigLit make_or(AigLit a, AigLit b) { return aig_not(make_and(aig_not(a), aig_not(b))); }
  AigLit make_xor(AigLit a, AigLit b);
  AigLit make_xnor(AigLit a, AigLit b) { return aig_not(make_xor(a, b)); }
  AigLit make_mux(AigLit sel, AigLit then_lit, AigLit else_lit);
  AigLit make_and_all(std::span<const AigLit> lits);
  AigLit make_or_all(std::span<const AigLit> lits);

  std::uint32_t num_vars() const { return static_cast<std::uint32_t>(fanin0_.size()); }
  bool is_input(std::uint32_t var) const { return var != 0 && is_leaf_[var]; }
  bool is_and(std::uint32_t var) const { return var != 0 && !is_leaf_[var]; }
  AigLit fanin0(std::uint32_t var) const { return fanin0_[var]; }
  AigLit fanin1(std::uint32_t var) const { return fanin1_[var]; }
  std::uint64_t and_count() const { return and_count_; }

 private:
  std::vector<AigLit> fanin0_;
  std::vector<AigLit> fanin1_;
  std::vector<bool> is_leaf_;
  std::unordered_map<std::uint64_t, std::uint32_t> strash_;
  std::uint64_t and_count_ = 0;
};

// Describes a sequential circuit built inside an AigManager; exported into
// canonical AigCircuit numbering, keeping only logic in the cone of
// influence of latches, outputs and bad properties.
struct SequentialSpec {
  std::vector<AigLit> inputs;   // manager leaves
  std::vector<AigLit> latches;  // manager leaves
  std::vector<AigLit> latch_next;
  std::vector<LatchInit> latch_init;
  std::vector<AigLit> outputs;
  std::vector<AigLit> bad;
  std::vector<std::string> input_names;
  std::vector<std::string> latch_names;
};

AigCircuit export_circuit(const AigManager& mgr, const SequentialSpec& spec);

// Bit-parallel (64 patterns) combinational evaluation. Returns one word per
// variable; input/latch words are taken from the arguments.
std::vector<std::uint64_t> evaluate_words(const AigCircuit& aig,
                                          std::span<const std::uint64_t> inputs,
                                          std::span<const std::uint64_t> latches);

inline std::uint64_t lit_word(std::span<const std::uint64_t> values, AigLit l) {
  std::uint64_t v = values[aig_var(l)];
  return aig_sign(l) ? ~v : v;
}

// Initial latch words; undefined inits take the supplied default.
std::vector<std::uint64_t> initial_latch_words(const AigCircuit& aig, std::uint64_t undefined_value = 0);

// Next-state latch words for the given evaluation.
std::vector<std::uint64_t> next_latch_words(const AigCircuit& aig, std::span<const std::uint64_t> values);

}  // namespace evolvegen::netlist
