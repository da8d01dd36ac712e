#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "evolvegen/netlist/aig.hpp"

namespace evolvegen::netlist {

struct StaticFeatures {
  double pi_count = 0;
  double latch_count = 0;
  double and_count = 0;
  double mux_count = 0;
  double xor_count = 0;
  double adder_chain_count = 0;
  double depth_max = 0;
  double depth_avg = 0;
  double flop_fanout_min = 0;
  double flop_fanout_max = 0;
  double flop_fanout_mean = 0;
  double flop_fanout_std = 0;

  static constexpr std::size_t kCount = 12;
  std::array<double, kCount> to_array() const;
  static const std::array<std::string_view, kCount>& names();
};

// Local structural matchers on two-level AND cones. A node n = AND(~x, ~y)
// with x = AND(p, q), y = AND(r, t) is
//   XOR  when both operand pairs are complementary ((a&~b)|(~a&b)),
//   MUX  when exactly one operand is complementary ((s&a)|(~s&b)).
// A full-adder carry is n = AND(~x, ~y) with x = AND(a, b) and
// y = AND(t, c) where t is an XOR cone over a and b; its carry-in is c.
// Chains are maximal runs linked through carry-in; adder_chain_count counts
// them.
StaticFeatures static_features(const AigCircuit& aig);

}  // namespace evolvegen::netlist
