#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "evolvegen/common/rng.hpp"
#include "evolvegen/netlist/aig.hpp"

namespace evolvegen::testing {

// Random well-formed sequential AIG in canonical numbering.
inline netlist::AigCircuit random_aig(Rng& rng, std::uint32_t max_inputs, std::uint32_t max_latches,
                                      std::uint32_t max_ands, bool with_names = false) {
  using namespace netlist;
  AigCircuit c;
  c.num_inputs = static_cast<std::uint32_t>(rng.uniform_int(0, max_inputs));
  const auto nl = static_cast<std::uint32_t>(rng.uniform_int(0, max_latches));
  const auto na = static_cast<std::uint32_t>(rng.uniform_int(0, max_ands));
  auto any_lit = [&](std::uint32_t below_var) -> AigLit {
    auto v = static_cast<std::uint32_t>(rng.uniform_int(0, below_var - 1));
    return aig_make(v, rng.bernoulli(0.5));
  };
  const std::uint32_t first_and = 1 + c.num_inputs + nl;
  for (std::uint32_t i = 0; i < na; ++i) {
    std::uint32_t v = first_and + i;
    AigLit a = any_lit(v), b = any_lit(v);
    if (a < b) std::swap(a, b);
    c.and_gates.push_back({aig_make(v), a, b});
  }
  const std::uint32_t top = first_and + na;
  c.latches.resize(nl);
  for (auto& l : c.latches) {
    l.next = any_lit(top);
    double r = rng.uniform_real();
    l.init = r < 0.7 ? LatchInit::kZero : (r < 0.9 ? LatchInit::kOne : LatchInit::kUndefined);
  }
  auto no = rng.uniform_int(0, 3);
  for (int i = 0; i < no; ++i) c.outputs.push_back(any_lit(top));
  auto nb = rng.uniform_int(0, 2);
  for (int i = 0; i < nb; ++i) c.bad.push_back(any_lit(top));
  if (with_names) {
    for (std::uint32_t i = 0; i < c.num_inputs; ++i) c.input_names.push_back("x" + std::to_string(i));
    for (std::uint32_t i = 0; i < nl; ++i) c.latch_names.push_back("s" + std::to_string(i));
  }
  return c;
}

// Explicit-state breadth-first reachability of any bad literal, enumerating all input
// valuations. Returns the shortest depth at which bad holds (0 = in an
// initial state), or nothing when unreachable. Undefined inits range over
// both values.
inline std::optional<unsigned> explicit_bad_depth(const netlist::AigCircuit& c) {
  using namespace netlist;
  const std::uint32_t nl = c.num_latches();
  const std::uint32_t ni = c.num_inputs;
  std::vector<std::uint32_t> frontier;
  std::unordered_map<std::uint32_t, unsigned> seen;
  std::uint32_t base = 0, free_mask = 0;
  for (std::uint32_t i = 0; i < nl; ++i) {
    if (c.latches[i].init == LatchInit::kOne) base |= 1u << i;
    if (c.latches[i].init == LatchInit::kUndefined) free_mask |= 1u << i;
  }
  for (std::uint32_t sub = free_mask;; sub = (sub - 1) & free_mask) {
    std::uint32_t s = base | sub;
    if (seen.emplace(s, 0).second) frontier.push_back(s);
    if (sub == 0) break;
  }
  const std::uint64_t num_in = std::uint64_t{1} << ni;
  for (unsigned depth = 0; !frontier.empty(); ++depth) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t s : frontier) {
      std::vector<std::uint64_t> latches(nl);
      for (std::uint32_t i = 0; i < nl; ++i) latches[i] = (s >> i) & 1 ? ~0ull : 0;
      for (std::uint64_t base_in = 0; base_in < num_in; base_in += 64) {
        std::vector<std::uint64_t> inputs(ni, 0);
        const std::uint64_t count = std::min<std::uint64_t>(64, num_in - base_in);
        for (std::uint64_t p = 0; p < count; ++p) {
          for (std::uint32_t i = 0; i < ni; ++i) {
            if (((base_in + p) >> i) & 1) inputs[i] |= 1ull << p;
          }
        }
        auto v = evaluate_words(c, inputs, latches);
        const std::uint64_t live = count == 64 ? ~0ull : (1ull << count) - 1;
        for (AigLit b : c.bad) {
          if (lit_word(v, b) & live) return depth;
        }
        auto nxt = next_latch_words(c, v);
        for (std::uint64_t p = 0; p < count; ++p) {
          std::uint32_t t = 0;
          for (std::uint32_t i = 0; i < nl; ++i) t |= static_cast<std::uint32_t>((nxt[i] >> p) & 1) << i;
          if (seen.emplace(t, depth + 1).second) next.push_back(t);
        }
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

}  // namespace evolvegen::testing
