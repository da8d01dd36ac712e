#include "evolvegen/netlist/static_features.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace evolvegen::netlist {

std::array<double, StaticFeatures::kCount> StaticFeatures::to_array() const {
  return {pi_count,  latch_count, and_count,       mux_count,       xor_count,        adder_chain_count,
          depth_max, depth_avg,   flop_fanout_min, flop_fanout_max, flop_fanout_mean, flop_fanout_std};
}

const std::array<std::string_view, StaticFeatures::kCount>& StaticFeatures::names() {
  static const std::array<std::string_view, kCount> kNames = {
      "pi_count",  "latch_count", "and_count",       "mux_count",       "xor_count",        "adder_chain_count",
      "depth_max", "depth_avg",   "flop_fanout_min", "flop_fanout_max", "flop_fanout_mean", "flop_fanout_std"};
  return kNames;
}

namespace {

enum class Cone : std::uint8_t { kNone, kMux, kXor };

struct Matcher {
  const AigCircuit& aig;

  // Returns the two AND operands of n = AND(~x, ~y) when both are negated
  // AND gates.
  std::optional<std::pair<const AigAnd*, const AigAnd*>> or_of_ands(std::uint32_t var) const {
    if (!aig.is_and_var(var)) return std::nullopt;
    const AigAnd& g = aig.and_of_var(var);
    if (!aig_sign(g.rhs0) || !aig_sign(g.rhs1)) return std::nullopt;
    std::uint32_t x = aig_var(g.rhs0), y = aig_var(g.rhs1);
    if (!aig.is_and_var(x) || !aig.is_and_var(y)) return std::nullopt;
    return std::make_pair(&aig.and_of_var(x), &aig.and_of_var(y));
  }

  Cone classify(std::uint32_t var) const {
    auto pair = or_of_ands(var);
    if (!pair) return Cone::kNone;
    const AigLit xs[2] = {pair->first->rhs0, pair->first->rhs1};
    const AigLit ys[2] = {pair->second->rhs0, pair->second->rhs1};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        if (xs[i] != aig_not(ys[j])) continue;
        if (xs[1 - i] == aig_not(ys[1 - j])) return Cone::kXor;
        return Cone::kMux;
      }
    }
    return Cone::kNone;
  }

  // Variables feeding an XOR cone (sorted pair).
  std::pair<std::uint32_t, std::uint32_t> xor_inputs(std::uint32_t var) const {
    auto pair = or_of_ands(var);
    std::uint32_t a = aig_var(pair->first->rhs0), b = aig_var(pair->first->rhs1);
    return {std::min(a, b), std::max(a, b)};
  }
};

}  // namespace

StaticFeatures static_features(const AigCircuit& aig) {
  StaticFeatures f;
  f.pi_count = aig.num_inputs;
  f.latch_count = aig.num_latches();
  f.and_count = aig.num_ands();

  Matcher m{aig};
  const std::uint32_t first_and = aig.num_inputs + aig.num_latches() + 1;
  std::vector<Cone> cone(aig.max_var() + 1, Cone::kNone);
  for (std::uint32_t v = first_and; v <= aig.max_var(); ++v) {
    cone[v] = m.classify(v);
    if (cone[v] == Cone::kXor) f.xor_count += 1;
    if (cone[v] == Cone::kMux) f.mux_count += 1;
  }

  // Full-adder carries: carry_in[v] = carry-in variable, or 0 if v is not a carry.
  std::vector<std::uint32_t> carry_in(aig.max_var() + 1, 0);
  std::vector<bool> is_carry(aig.max_var() + 1, false);
  for (std::uint32_t v = first_and; v <= aig.max_var(); ++v) {
    if (cone[v] != Cone::kNone) continue;
    auto pair = m.or_of_ands(v);
    if (!pair) continue;
    const AigAnd* cand[2] = {pair->first, pair->second};
    for (int k = 0; k < 2 && !is_carry[v]; ++k) {
      const AigAnd* ab = cand[k];
      const AigAnd* tc = cand[1 - k];
      std::pair<std::uint32_t, std::uint32_t> ab_vars{std::min(aig_var(ab->rhs0), aig_var(ab->rhs1)),
                                                      std::max(aig_var(ab->rhs0), aig_var(ab->rhs1))};
      const AigLit ops[2] = {tc->rhs0, tc->rhs1};
      for (int t = 0; t < 2; ++t) {
        std::uint32_t tv = aig_var(ops[t]);
        if (tv >= cone.size() || cone[tv] != Cone::kXor) continue;
        if (m.xor_inputs(tv) != ab_vars) continue;
        is_carry[v] = true;
        carry_in[v] = aig_var(ops[1 - t]);
        break;
      }
    }
  }
  for (std::uint32_t v = first_and; v <= aig.max_var(); ++v) {
    if (is_carry[v] && !is_carry[carry_in[v]]) f.adder_chain_count += 1;
  }

  std::vector<std::uint32_t> level(aig.max_var() + 1, 0);
  double level_sum = 0;
  for (const AigAnd& g : aig.and_gates) {
    std::uint32_t l = 1 + std::max(level[aig_var(g.rhs0)], level[aig_var(g.rhs1)]);
    level[aig_var(g.lhs)] = l;
    level_sum += l;
    f.depth_max = std::max<double>(f.depth_max, l);
  }
  if (!aig.and_gates.empty()) f.depth_avg = level_sum / static_cast<double>(aig.num_ands());

  if (aig.num_latches() > 0) {
    std::vector<double> fanout(aig.num_latches(), 0);
    const std::uint32_t first_latch = aig.num_inputs + 1;
    for (const AigAnd& g : aig.and_gates) {
      std::uint32_t a = aig_var(g.rhs0), b = aig_var(g.rhs1);
      if (aig.is_latch_var(a)) fanout[a - first_latch] += 1;
      if (b != a && aig.is_latch_var(b)) fanout[b - first_latch] += 1;
    }
    f.flop_fanout_min = *std::min_element(fanout.begin(), fanout.end());
    f.flop_fanout_max = *std::max_element(fanout.begin(), fanout.end());
    double sum = 0;
    for (double x : fanout) sum += x;
    f.flop_fanout_mean = sum / static_cast<double>(fanout.size());
    double var = 0;
    for (double x : fanout) var += (x - f.flop_fanout_mean) * (x - f.flop_fanout_mean);
    f.flop_fanout_std = std::sqrt(var / static_cast<double>(fanout.size()));
  }
  return f;
}

}  // namespace evolvegen::netlist
