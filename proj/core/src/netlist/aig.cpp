#include "evolvegen/netlist/aig.hpp"

#include <algorithm>
#include <stdexcept>

namespace evolvegen::netlist {

void check_well_formed(const AigCircuit& aig) {
  const std::uint32_t max_lit = 2 * aig.max_var() + 1;
  auto check_lit = [&](AigLit l, const char* what) {
    if (l > max_lit) throw std::invalid_argument(std::string(what) + " literal out of range");
  };
  for (const AigLatch& l : aig.latches) check_lit(l.next, "latch next");
  for (AigLit l : aig.outputs) check_lit(l, "output");
  for (AigLit l : aig.bad) check_lit(l, "bad");
  std::uint32_t expected = 2 * (aig.num_inputs + aig.num_latches() + 1);
  for (const AigAnd& g : aig.and_gates) {
    if (g.lhs != expected) throw std::invalid_argument("and gates out of canonical order");
    if (g.rhs0 >= g.lhs || g.rhs1 >= g.lhs) throw std::invalid_argument("and gate not topological");
    if (g.rhs0 < g.rhs1) throw std::invalid_argument("and gate operands not ordered");
    expected += 2;
  }
  if (!aig.input_names.empty() && aig.input_names.size() != aig.num_inputs) {
    throw std::invalid_argument("input name count mismatch");
  }
  if (!aig.latch_names.empty() && aig.latch_names.size() != aig.num_latches()) {
    throw std::invalid_argument("latch name count mismatch");
  }
}

AigManager::AigManager() {
  fanin0_.push_back(0);
  fanin1_.push_back(0);
  is_leaf_.push_back(true);
}

AigLit AigManager::new_input() {
  auto var = static_cast<std::uint32_t>(fanin0_.size());
  fanin0_.push_back(0);
  fanin1_.push_back(0);
  is_leaf_.push_back(true);
  return aig_make(var);
}

AigLit AigManager::make_and(AigLit a, AigLit b) {
  if (a == kAigFalse || b == kAigFalse) return kAigFalse;
  if (a == kAigTrue) return b;
  if (b == kAigTrue) return a;
  if (a == b) return a;
  if (a == aig_not(b)) return kAigFalse;
  if (a < b) std::swap(a, b);
  std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
  auto it = strash_.find(key);
  if (it != strash_.end()) return aig_make(it->second);
  auto var = static_cast<std::uint32_t>(fanin0_.size());
  fanin0_.push_back(a);
  fanin1_.push_back(b);
  is_leaf_.push_back(false);
  strash_.emplace(key, var);
  ++and_count_;
  return aig_make(var);
}

AigLit AigManager::make_xor(AigLit a, AigLit b) {
  if (a == kAigFalse) return b;
  if (b == kAigFalse) return a;
  if (a == kAigTrue) return aig_not(b);
  if (b == kAigTrue) return aig_not(a);
  if (a == b) return kAigFalse;
  if (a == aig_not(b)) return kAigTrue;
  AigLit p = make_and(a, aig_not(b));
  AigLit q = make_and(aig_not(a), b);
  return make_or(p, q);
}

AigLit AigManager::make_mux(AigLit sel, AigLit then_lit, AigLit else_lit) {
  if (sel == kAigTrue) return then_lit;
  if (sel == kAigFalse) return else_lit;
  if (then_lit == else_lit) return then_lit;
  if (then_lit == aig_not(else_lit)) return make_xnor(sel, then_lit);
  return make_or(make_and(sel, then_lit), make_and(aig_not(sel), else_lit));
}

AigLit AigManager::make_and_all(std::span<const AigLit> lits) {
  AigLit acc = kAigTrue;
  for (AigLit l : lits) acc = make_and(acc, l);
  return acc;
}

AigLit AigManager::make_or_all(std::span<const AigLit> lits) {
  AigLit acc = kAigFalse;
  for (AigLit l : lits) acc = make_or(acc, l);
  return acc;
}

AigCircuit export_circuit(const AigManager& mgr, const SequentialSpec& spec) {
  AigCircuit out;
  out.num_inputs = static_cast<std::uint32_t>(spec.inputs.size());
  out.input_names = spec.input_names;
  out.latch_names = spec.latch_names;

  std::vector<std::uint32_t> remap(mgr.num_vars(), 0xFFFFFFFFu);
  remap[0] = 0;
  std::uint32_t next_var = 1;
  for (AigLit l : spec.inputs) remap[aig_var(l)] = next_var++;
  for (AigLit l : spec.latches) remap[aig_var(l)] = next_var++;

  // Mark the cone of influence.
  std::vector<bool> needed(mgr.num_vars(), false);
  std::vector<std::uint32_t> stack;
  auto push = [&](AigLit l) {
    std::uint32_t v = aig_var(l);
    if (!needed[v]) {
      needed[v] = true;
      stack.push_back(v);
    }
  };
  for (AigLit l : spec.latch_next) push(l);
  for (AigLit l : spec.outputs) push(l);
  for (AigLit l : spec.bad) push(l);
  while (!stack.empty()) {
    std::uint32_t v = stack.back();
    stack.pop_back();
    if (mgr.is_and(v)) {
      push(mgr.fanin0(v));
      push(mgr.fanin1(v));
    }
  }

  auto map_lit = [&](AigLit l) -> AigLit {
    std::uint32_t v = remap[aig_var(l)];
    if (v == 0xFFFFFFFFu) throw std::logic_error("export_circuit: dangling leaf in cone");
    return aig_make(v, aig_sign(l));
  };

  // Manager variables are created in topological order.
  for (std::uint32_t v = 1; v < mgr.num_vars(); ++v) {
    if (!mgr.is_and(v) || !needed[v]) continue;
    AigLit a = map_lit(mgr.fanin0(v));
    AigLit b = map_lit(mgr.fanin1(v));
    if (a < b) std::swap(a, b);
    remap[v] = next_var;
    out.and_gates.push_back({aig_make(next_var), a, b});
    ++next_var;
  }
  out.latches.resize(spec.latches.size());
  for (std::size_t i = 0; i < spec.latches.size(); ++i) {
    out.latches[i].next = map_lit(spec.latch_next[i]);
    out.latches[i].init = spec.latch_init[i];
  }
  for (AigLit l : spec.outputs) out.outputs.push_back(map_lit(l));
  for (AigLit l : spec.bad) out.bad.push_back(map_lit(l));
  return out;
}

std::vector<std::uint64_t> evaluate_words(const AigCircuit& aig,
                                          std::span<const std::uint64_t> inputs,
                                          std::span<const std::uint64_t> latches) {
  std::vector<std::uint64_t> values(aig.max_var() + 1, 0);
  for (std::uint32_t i = 0; i < aig.num_inputs; ++i) values[1 + i] = inputs[i];
  for (std::uint32_t i = 0; i < aig.num_latches(); ++i) values[1 + aig.num_inputs + i] = latches[i];
  for (const AigAnd& g : aig.and_gates) {
    values[aig_var(g.lhs)] = lit_word(values, g.rhs0) & lit_word(values, g.rhs1);
  }
  return values;
}

std::vector<std::uint64_t> initial_latch_words(const AigCircuit& aig, std::uint64_t undefined_value) {
  std::vector<std::uint64_t> out(aig.num_latches(), 0);
  for (std::size_t i = 0; i < aig.latches.size(); ++i) {
    switch (aig.latches[i].init) {
      case LatchInit::kZero: out[i] = 0; break;
      case LatchInit::kOne: out[i] = ~std::uint64_t{0}; break;
      case LatchInit::kUndefined: out[i] = undefined_value; break;
    }
  }
  return out;
}

std::vector<std::uint64_t> next_latch_words(const AigCircuit& aig, std::span<const std::uint64_t> values) {
  std::vector<std::uint64_t> out(aig.num_latches(), 0);
  for (std::size_t i = 0; i < aig.latches.size(); ++i) out[i] = lit_word(values, aig.latches[i].next);
  return out;
}

}  // namespace evolvegen::netlist
